#include "amalgam/boolean_core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amalgam {

namespace {

void require(bool cond, const std::string& what)
{
    if (!cond)
        throw std::invalid_argument(what);
}

} // namespace

std::string lineage_suffix(int index)
{
    require(index >= 0, "lineage suffix index must be non-negative");
    std::string s;
    int n = index;
    for (;;) {
        s.insert(s.begin(), static_cast<char>('a' + n % 26));
        n = n / 26 - 1;
        if (n < 0)
            break;
    }
    return s;
}

AmbientAlgebra::AmbientAlgebra(std::vector<std::string> labels)
    : atoms(std::move(labels))
{
    std::sort(atoms.begin(), atoms.end());
    require(std::adjacent_find(atoms.begin(), atoms.end()) == atoms.end(),
            "duplicate atom label in ambient algebra");
}

AmbientAlgebra AmbientAlgebra::of_size(int n)
{
    require(n >= 1, "ambient algebra needs at least one atom");
    std::vector<std::string> labels;
    labels.reserve(n);
    for (int i = 0; i < n; ++i)
        labels.push_back(std::to_string(i));
    return AmbientAlgebra(std::move(labels));
}

int AmbientAlgebra::index_of(const std::string& label) const
{
    auto it = std::lower_bound(atoms.begin(), atoms.end(), label);
    if (it == atoms.end() || *it != label)
        return -1;
    return static_cast<int>(it - atoms.begin());
}

std::string block_to_string(const AmbientAlgebra& ambient, const Block& b)
{
    std::ostringstream os;
    os << "{";
    for (size_t i = 0; i < b.size(); ++i)
        os << (i ? "," : "") << ambient.atoms.at(b[i]);
    os << "}";
    return os.str();
}

bool blocks_disjoint(const Block& a, const Block& b)
{
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j])
            return false;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return true;
}

Block block_union(const Block& a, const Block& b)
{
    Block out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out));
    return out;
}

bool block_subset(const Block& a, const Block& b)
{
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Block block_intersection(const Block& a, const Block& b)
{
    Block out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
}

Subalgebra::Subalgebra(AmbientAlgebra amb, std::vector<Block> bs)
    : ambient(std::move(amb)), blocks(std::move(bs))
{
    std::vector<int> seen(ambient.size(), 0);
    for (auto& b : blocks) {
        std::sort(b.begin(), b.end());
        require(!b.empty(), "empty block in subalgebra");
        for (int a : b) {
            require(a >= 0 && a < ambient.size(),
                    "block atom out of range");
            require(!seen[a], "overlapping blocks in subalgebra");
            seen[a] = 1;
        }
    }
    require(std::all_of(seen.begin(), seen.end(), [](int v) { return v; }),
            "subalgebra blocks do not cover the ambient atoms");
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& a, const Block& b) { return a[0] < b[0]; });
}

Subalgebra Subalgebra::trivial(const AmbientAlgebra& amb)
{
    Block all(amb.size());
    std::iota(all.begin(), all.end(), 0);
    return Subalgebra(amb, {all});
}

Subalgebra Subalgebra::discrete(const AmbientAlgebra& amb)
{
    std::vector<Block> bs;
    for (int i = 0; i < amb.size(); ++i)
        bs.push_back({i});
    return Subalgebra(amb, std::move(bs));
}

int Subalgebra::block_of(int atom) const
{
    for (size_t i = 0; i < blocks.size(); ++i)
        if (std::binary_search(blocks[i].begin(), blocks[i].end(), atom))
            return static_cast<int>(i);
    throw std::invalid_argument("atom not covered by subalgebra");
}

int Subalgebra::find_block(const Block& b) const
{
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i] == b)
            return static_cast<int>(i);
    return -1;
}

Subalgebra join_subalgebras(const Subalgebra& a, const Subalgebra& b)
{
    require(a.ambient == b.ambient,
            "join of subalgebras over different ambients");
    std::vector<Block> out;
    for (const auto& x : a.blocks)
        for (const auto& y : b.blocks) {
            Block cell = block_intersection(x, y);
            if (!cell.empty())
                out.push_back(std::move(cell));
        }
    return Subalgebra(a.ambient, std::move(out));
}

bool refines(const Subalgebra& fine, const Subalgebra& coarse)
{
    if (!(fine.ambient == coarse.ambient))
        return false;
    for (const auto& b : fine.blocks) {
        int host = coarse.block_of(b[0]);
        if (!block_subset(b, coarse.blocks[host]))
            return false;
    }
    return true;
}

PartialIso::PartialIso(Subalgebra dom, Subalgebra ran, std::vector<int> m)
    : domain(std::move(dom)), range(std::move(ran)), map(std::move(m))
{
    require(domain.ambient == range.ambient,
            "partial iso domain and range over different ambients");
    require(domain.block_count() == range.block_count(),
            "partial iso between subalgebras of different atom counts");
    require(static_cast<int>(map.size()) == domain.block_count(),
            "partial iso map has wrong length");
    std::vector<int> seen(map.size(), 0);
    for (int v : map) {
        require(v >= 0 && v < range.block_count(),
                "partial iso map value out of range");
        require(!seen[v], "partial iso map is not a bijection");
        seen[v] = 1;
    }
}

PartialIso PartialIso::identity(const Subalgebra& s)
{
    std::vector<int> m(s.block_count());
    std::iota(m.begin(), m.end(), 0);
    return PartialIso(s, s, std::move(m));
}

Block PartialIso::image_of(const Block& b) const
{
    Block out;
    for (const auto& db : domain.blocks) {
        if (!blocks_disjoint(db, b))
            require(block_subset(db, b),
                    "image of a set that is not a union of domain atoms");
    }
    for (size_t i = 0; i < domain.blocks.size(); ++i)
        if (block_subset(domain.blocks[i], b))
            out = block_union(out, range.blocks[map[i]]);
    return out;
}

Block PartialIso::preimage_of(const Block& b) const
{
    return inverse().image_of(b);
}

PartialIso PartialIso::inverse() const
{
    std::vector<int> inv(map.size());
    for (size_t i = 0; i < map.size(); ++i)
        inv[map[i]] = static_cast<int>(i);
    return PartialIso(range, domain, std::move(inv));
}

PartialIsoSystem::PartialIsoSystem(AmbientAlgebra amb,
                                   std::vector<PartialIso> is)
    : ambient(std::move(amb)), isos(std::move(is))
{
    for (const auto& p : isos)
        require(p.domain.ambient == ambient,
                "system iso over a different ambient algebra");
}

AlgebraEmbedding::AlgebraEmbedding(AmbientAlgebra src, AmbientAlgebra tgt,
                                   std::vector<Block> img)
    : source(std::move(src)), target(std::move(tgt)), image(std::move(img))
{
    require(static_cast<int>(image.size()) == source.size(),
            "embedding image indexed by source atoms");
    std::vector<int> seen(target.size(), 0);
    for (auto& b : image) {
        std::sort(b.begin(), b.end());
        require(!b.empty(), "embedding sends an atom to zero");
        for (int a : b) {
            require(a >= 0 && a < target.size(),
                    "embedding image atom out of range");
            require(!seen[a], "embedding images overlap");
            seen[a] = 1;
        }
    }
    require(std::all_of(seen.begin(), seen.end(), [](int v) { return v; }),
            "embedding is not unital (images do not cover the target)");
}

Block AlgebraEmbedding::apply(const Block& source_block) const
{
    Block out;
    for (int a : source_block)
        out = block_union(out, image.at(a));
    return out;
}

bool is_system_embedding(const PartialIsoSystem& s, const PartialIsoSystem& t,
                         const AlgebraEmbedding& f, std::string* why)
{
    auto fail = [&](const std::string& msg) {
        if (why)
            *why = msg;
        return false;
    };
    if (!(f.source == s.ambient) || !(f.target == t.ambient))
        return fail("embedding endpoints do not match the systems");
    if (s.arity() != t.arity())
        return fail("systems have different arities");
    for (int i = 0; i < s.arity(); ++i) {
        const PartialIso& psi = s.isos[i];
        const PartialIso& phi = t.isos[i];
        for (int b = 0; b < psi.domain.block_count(); ++b) {
            Block img = f.apply(psi.domain.blocks[b]);
            // f(dom atom) must be a union of target domain atoms ...
            Block covered;
            for (const auto& db : phi.domain.blocks)
                if (block_subset(db, img))
                    covered = block_union(covered, db);
            if (covered != img)
                return fail("image of a domain atom of iso " +
                            std::to_string(i) +
                            " is not a union of target domain atoms");
            // ... and the maps must commute on it.
            Block lhs = f.apply(psi.range.blocks[psi.map[b]]);
            Block rhs = phi.image_of(img);
            if (lhs != rhs)
                return fail("embedding does not commute with iso " +
                            std::to_string(i));
        }
        for (int b = 0; b < psi.range.block_count(); ++b) {
            Block img = f.apply(psi.range.blocks[b]);
            Block covered;
            for (const auto& rb : phi.range.blocks)
                if (block_subset(rb, img))
                    covered = block_union(covered, rb);
            if (covered != img)
                return fail("image of a range atom of iso " +
                            std::to_string(i) +
                            " is not a union of target range atoms");
        }
    }
    return true;
}

std::optional<SystemEmbedding> embed_system(const PartialIsoSystem& s,
                                            const PartialIsoSystem& t)
{
    int ns = s.ambient.size();
    int nt = t.ambient.size();
    if (ns > nt)
        return std::nullopt;
    // Enumerate surjections g : atoms(T) -> atoms(S) in lexicographic
    // order; candidate embedding sends atom a to g^{-1}(a).
    std::vector<int> g(nt, 0);
    for (;;) {
        std::vector<int> hit(ns, 0);
        for (int v : g)
            hit[v] = 1;
        bool onto = std::all_of(hit.begin(), hit.end(),
                                [](int v) { return v; });
        if (onto) {
            std::vector<Block> img(ns);
            for (int a = 0; a < nt; ++a)
                img[g[a]].push_back(a);
            AlgebraEmbedding f(s.ambient, t.ambient, std::move(img));
            if (is_system_embedding(s, t, f))
                return SystemEmbedding{std::move(f)};
        }
        int pos = nt - 1;
        while (pos >= 0 && g[pos] == ns - 1)
            g[pos--] = 0;
        if (pos < 0)
            return std::nullopt;
        ++g[pos];
    }
}

AlgebraEmbedding compose_embeddings(const AlgebraEmbedding& f,
                                    const AlgebraEmbedding& g)
{
    require(f.target == g.source, "embedding composition mismatch");
    std::vector<Block> img;
    img.reserve(f.image.size());
    for (const auto& b : f.image)
        img.push_back(g.apply(b));
    return AlgebraEmbedding(f.source, g.target, std::move(img));
}

AlgebraEmbedding AmbientRefinement::as_embedding() const
{
    return AlgebraEmbedding(before, after, children);
}

AmbientRefinement split_atoms(const AmbientAlgebra& amb,
                              const std::vector<int>& parts)
{
    require(static_cast<int>(parts.size()) == amb.size(),
            "split counts indexed by ambient atoms");
    std::vector<std::string> labels;
    for (int i = 0; i < amb.size(); ++i) {
        require(parts[i] >= 1, "atom split into fewer than one part");
        if (parts[i] == 1) {
            labels.push_back(amb.atoms[i]);
        } else {
            for (int j = 0; j < parts[i]; ++j)
                labels.push_back(amb.atoms[i] + "." + lineage_suffix(j));
        }
    }
    AmbientRefinement r;
    r.before = amb;
    r.after = AmbientAlgebra(labels);
    r.children.resize(amb.size());
    for (int i = 0; i < amb.size(); ++i) {
        if (parts[i] == 1) {
            r.children[i] = {r.after.index_of(amb.atoms[i])};
        } else {
            for (int j = 0; j < parts[i]; ++j) {
                int idx = r.after.index_of(amb.atoms[i] + "." +
                                           lineage_suffix(j));
                r.children[i].push_back(idx);
            }
            std::sort(r.children[i].begin(), r.children[i].end());
        }
    }
    return r;
}

AmbientRefinement split_atom(const AmbientAlgebra& amb, int atom, int parts)
{
    require(atom >= 0 && atom < amb.size(), "split_atom index out of range");
    std::vector<int> p(amb.size(), 1);
    p[atom] = parts;
    return split_atoms(amb, p);
}

Block lift_block(const AmbientRefinement& r, const Block& b)
{
    Block out;
    for (int a : b)
        out = block_union(out, r.children.at(a));
    return out;
}

Subalgebra lift_subalgebra(const AmbientRefinement& r, const Subalgebra& s)
{
    require(s.ambient == r.before, "lift of subalgebra over wrong ambient");
    std::vector<Block> bs;
    bs.reserve(s.blocks.size());
    for (const auto& b : s.blocks)
        bs.push_back(lift_block(r, b));
    return Subalgebra(r.after, std::move(bs));
}

PartialIso lift_iso(const AmbientRefinement& r, const PartialIso& p)
{
    Subalgebra dom = lift_subalgebra(r, p.domain);
    Subalgebra ran = lift_subalgebra(r, p.range);
    // Block order can change under lifting; rebuild the map by value.
    std::vector<int> m(dom.block_count(), -1);
    for (int i = 0; i < p.domain.block_count(); ++i) {
        int di = dom.find_block(lift_block(r, p.domain.blocks[i]));
        int ri = ran.find_block(lift_block(r, p.range.blocks[p.map[i]]));
        require(di >= 0 && ri >= 0, "lifted block not found");
        m[di] = ri;
    }
    return PartialIso(std::move(dom), std::move(ran), std::move(m));
}

PartialIsoSystem lift_system(const AmbientRefinement& r,
                             const PartialIsoSystem& s)
{
    std::vector<PartialIso> isos;
    isos.reserve(s.isos.size());
    for (const auto& p : s.isos)
        isos.push_back(lift_iso(r, p));
    return PartialIsoSystem(r.after, std::move(isos));
}

std::string canonical_system_key(const PartialIsoSystem& s)
{
    int n = s.ambient.size();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::string best;
    do {
        std::ostringstream os;
        os << n << ";";
        for (const auto& p : s.isos) {
            auto emit = [&](const Subalgebra& sub) {
                std::vector<Block> bs;
                for (const auto& b : sub.blocks) {
                    Block nb;
                    for (int a : b)
                        nb.push_back(perm[a]);
                    std::sort(nb.begin(), nb.end());
                    bs.push_back(std::move(nb));
                }
                std::sort(bs.begin(), bs.end());
                os << "[";
                for (const auto& b : bs) {
                    for (int a : b)
                        os << a << ",";
                    os << "|";
                }
                os << "]";
                return bs;
            };
            auto dbs = emit(p.domain);
            auto rbs = emit(p.range);
            // Map written as pairs of repositioned block indices.
            std::vector<std::pair<int, int>> pairs;
            for (int i = 0; i < p.domain.block_count(); ++i) {
                Block db;
                for (int a : p.domain.blocks[i])
                    db.push_back(perm[a]);
                std::sort(db.begin(), db.end());
                Block rb;
                for (int a : p.range.blocks[p.map[i]])
                    rb.push_back(perm[a]);
                std::sort(rb.begin(), rb.end());
                int di = static_cast<int>(
                    std::lower_bound(dbs.begin(), dbs.end(), db) - dbs.begin());
                int ri = static_cast<int>(
                    std::lower_bound(rbs.begin(), rbs.end(), rb) - rbs.begin());
                pairs.emplace_back(di, ri);
            }
            std::sort(pairs.begin(), pairs.end());
            os << "(";
            for (auto [a, b] : pairs)
                os << a << ">" << b << ",";
            os << ")";
        }
        std::string key = os.str();
        if (best.empty() || key < best)
            best = key;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace amalgam
