#include "amalgam/checkers.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "amalgam/boolean_core.hpp"
#include "amalgam/chains.hpp"

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

Morphism compose_morphisms(const Morphism& f, const Morphism& g)
{
    Morphism out(f.size());
    for (size_t u = 0; u < f.size(); ++u) {
        std::set<int> img;
        for (int v : f[u])
            img.insert(g[static_cast<size_t>(v)].begin(),
                       g[static_cast<size_t>(v)].end());
        out[u].assign(img.begin(), img.end());
    }
    return out;
}

bool ClassDriver::embeds(const std::string& s, const std::string& t) const
{
    return !enumerate_embeddings(s, t).empty();
}

bool ClassDriver::valid_embedding(const std::string& s, const std::string& t,
                                  const Morphism& f) const
{
    for (const Morphism& g : enumerate_embeddings(s, t))
        if (g == f) return true;
    return false;
}

std::optional<std::string> ClassDriver::joint_embed(const std::string&,
                                                    const std::string&) const
{
    return std::nullopt;
}

std::optional<ClassDriver::JointWitness> ClassDriver::joint_embed_with_legs(
    const std::string&, const std::string&) const
{
    return std::nullopt;
}

std::optional<Morphism> ClassDriver::find_embedding(const std::string& s,
                                                    const std::string& t) const
{
    std::vector<Morphism> all = enumerate_embeddings(s, t);
    if (all.empty()) return std::nullopt;
    return all.front();
}

std::optional<Morphism> ClassDriver::find_embedding_over(
    const std::string& base, const Morphism& left, const std::string& s,
    const Morphism& right, const std::string& t) const
{
    for (const Morphism& e : enumerate_embeddings(s, t))
        if (compose_morphisms(left, e) == right) return e;
    return std::nullopt;
}

std::optional<ClassDriver::SpanAmalgam> ClassDriver::amalgamate(
    const std::string&, const Morphism&, const std::string&, const Morphism&,
    const std::string&) const
{
    return std::nullopt;
}

std::vector<std::string> ClassDriver::extension_candidates(
    const std::string&) const
{
    return {};
}

bool ClassDriver::cofinal_member(const std::string&) const
{
    throw std::invalid_argument("driver lacks a cofinal subclass oracle");
}

// ===================================================================
// Point-based drivers: a structure is a k x k relation matrix of chars;
// a system adds n partial injections preserving the relation both ways.
// Encoding: "k|rel|map1|map2|..." with each map one char per point ('.'
// for undefined, '0'+i for the image).
// ===================================================================

namespace {

struct PointSystem {
    int k = 0;
    std::string rel;                    // k*k chars, row major
    std::vector<std::vector<int>> maps; // image per point, -1 if undefined
};

std::string encode_point(const PointSystem& s)
{
    std::string out = std::to_string(s.k) + "|" + s.rel;
    for (const auto& m : s.maps) {
        out += "|";
        for (int v : m) out += v < 0 ? '.' : static_cast<char>('0' + v);
    }
    return out;
}

PointSystem decode_point(const std::string& enc)
{
    PointSystem s;
    std::stringstream ss(enc);
    std::string field;
    std::getline(ss, field, '|');
    s.k = std::stoi(field);
    std::getline(ss, s.rel, '|');
    while (std::getline(ss, field, '|')) {
        std::vector<int> m;
        for (char c : field) m.push_back(c == '.' ? -1 : c - '0');
        s.maps.push_back(std::move(m));
    }
    return s;
}

char rel_at(const PointSystem& s, int a, int b)
{
    return s.rel[static_cast<size_t>(a * s.k + b)];
}

// Every map must be a partial injection preserving the relation exactly.
bool point_maps_valid(const PointSystem& s)
{
    for (const auto& m : s.maps) {
        std::set<int> ran;
        for (int a = 0; a < s.k; ++a) {
            int ma = m[static_cast<size_t>(a)];
            if (ma < 0) continue;
            if (ma >= s.k || !ran.insert(ma).second) return false;
        }
        for (int a = 0; a < s.k; ++a)
            for (int b = 0; b < s.k; ++b) {
                int ma = m[static_cast<size_t>(a)];
                int mb = m[static_cast<size_t>(b)];
                if (ma < 0 || mb < 0) continue;
                if (rel_at(s, a, b) != rel_at(s, ma, mb)) return false;
            }
    }
    return true;
}

PointSystem relabel_point(const PointSystem& s, const std::vector<int>& p)
{
    PointSystem out;
    out.k = s.k;
    out.rel.assign(static_cast<size_t>(s.k * s.k), '?');
    for (int a = 0; a < s.k; ++a)
        for (int b = 0; b < s.k; ++b)
            out.rel[static_cast<size_t>(p[static_cast<size_t>(a)] * s.k +
                                        p[static_cast<size_t>(b)])] =
                rel_at(s, a, b);
    for (const auto& m : s.maps) {
        std::vector<int> nm(static_cast<size_t>(s.k), -1);
        for (int a = 0; a < s.k; ++a)
            if (m[static_cast<size_t>(a)] >= 0)
                nm[static_cast<size_t>(p[static_cast<size_t>(a)])] =
                    p[static_cast<size_t>(m[static_cast<size_t>(a)])];
        out.maps.push_back(std::move(nm));
    }
    return out;
}

std::string canonical_point(const PointSystem& s)
{
    std::vector<int> p(static_cast<size_t>(s.k));
    std::iota(p.begin(), p.end(), 0);
    std::string best;
    do {
        std::string enc = encode_point(relabel_point(s, p));
        if (best.empty() || enc < best) best = enc;
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

// All partial injections of [k] preserving the relation, by backtracking.
void enumerate_point_maps(const PointSystem& shape, int a, std::vector<int>& m,
                          std::vector<bool>& used,
                          std::vector<std::vector<int>>& out)
{
    if (a == shape.k) {
        out.push_back(m);
        return;
    }
    m[static_cast<size_t>(a)] = -1;
    enumerate_point_maps(shape, a + 1, m, used, out);
    for (int v = 0; v < shape.k; ++v) {
        if (used[static_cast<size_t>(v)]) continue;
        bool ok = true;
        for (int b = 0; b < a && ok; ++b) {
            int mb = m[static_cast<size_t>(b)];
            if (mb < 0) continue;
            ok = rel_at(shape, a, b) == rel_at(shape, v, mb) &&
                 rel_at(shape, b, a) == rel_at(shape, mb, v);
        }
        if (!ok) continue;
        m[static_cast<size_t>(a)] = v;
        used[static_cast<size_t>(v)] = true;
        enumerate_point_maps(shape, a + 1, m, used, out);
        used[static_cast<size_t>(v)] = false;
        m[static_cast<size_t>(a)] = -1;
    }
}

class PointDriver : public ClassDriver {
public:
    std::vector<std::string> enumerate_systems(int n, int bound) const override
    {
        std::set<std::string> canon;
        for (int k = 1; k <= bound; ++k) {
            for (const std::string& rel : enumerate_rels(k)) {
                PointSystem shape{k, rel, {}};
                std::vector<std::vector<int>> maps;
                std::vector<int> m(static_cast<size_t>(k), -1);
                std::vector<bool> used(static_cast<size_t>(k), false);
                enumerate_point_maps(shape, 0, m, used, maps);
                std::vector<size_t> pick(static_cast<size_t>(n), 0);
                while (true) {
                    PointSystem sys = shape;
                    for (size_t i = 0; i < pick.size(); ++i)
                        sys.maps.push_back(maps[pick[i]]);
                    canon.insert(canonical_point(sys));
                    size_t j = 0;
                    while (j < pick.size() && ++pick[j] == maps.size())
                        pick[j++] = 0;
                    if (j == pick.size()) break;
                }
            }
        }
        return {canon.begin(), canon.end()};
    }

    int system_size(const std::string& sys) const override
    {
        return std::stoi(sys.substr(0, sys.find('|')));
    }

    int system_arity(const std::string& sys) const override
    {
        return static_cast<int>(std::count(sys.begin(), sys.end(), '|')) - 1;
    }

    std::vector<Morphism> enumerate_embeddings(
        const std::string& se, const std::string& te) const override
    {
        PointSystem s = decode_point(se), t = decode_point(te);
        std::vector<Morphism> out;
        std::vector<int> f(static_cast<size_t>(s.k), -1);
        std::vector<bool> used(static_cast<size_t>(t.k), false);
        embed_search(s, t, 0, f, used, out);
        return out;
    }

    bool valid_embedding(const std::string& se, const std::string& te,
                         const Morphism& f) const override
    {
        PointSystem s = decode_point(se), t = decode_point(te);
        if (static_cast<int>(f.size()) != s.k) return false;
        std::vector<int> img(static_cast<size_t>(s.k));
        std::set<int> seen;
        for (int a = 0; a < s.k; ++a) {
            if (f[static_cast<size_t>(a)].size() != 1) return false;
            int v = f[static_cast<size_t>(a)].front();
            if (v < 0 || v >= t.k || !seen.insert(v).second) return false;
            img[static_cast<size_t>(a)] = v;
        }
        for (int a = 0; a < s.k; ++a)
            for (int b = 0; b < s.k; ++b)
                if (rel_at(s, a, b) != rel_at(t, img[static_cast<size_t>(a)],
                                              img[static_cast<size_t>(b)]))
                    return false;
        for (size_t i = 0; i < s.maps.size(); ++i)
            for (int x = 0; x < s.k; ++x) {
                int sx = s.maps[i][static_cast<size_t>(x)];
                if (sx < 0) continue;
                if (t.maps[i][static_cast<size_t>(
                        img[static_cast<size_t>(x)])] !=
                    img[static_cast<size_t>(sx)])
                    return false;
            }
        return true;
    }

    std::optional<std::string> joint_embed(const std::string& se,
                                           const std::string& te) const override
    {
        PointSystem s = decode_point(se), t = decode_point(te);
        require(s.maps.size() == t.maps.size(),
                "joint embedding needs equal arity");
        for (const PointSystem& u : joint_candidates(s, t)) {
            if (!point_maps_valid(u)) continue;
            std::string enc = encode_point(u);
            if (embeds(se, enc) && embeds(te, enc)) return enc;
        }
        return std::nullopt;
    }

    std::optional<JointWitness> joint_embed_with_legs(
        const std::string& se, const std::string& te) const override
    {
        PointSystem s = decode_point(se), t = decode_point(te);
        require(s.maps.size() == t.maps.size(),
                "joint embedding needs equal arity");
        for (const PointSystem& u : joint_candidates(s, t)) {
            if (!point_maps_valid(u)) continue;
            JointWitness w;
            w.system = encode_point(u);
            for (int x = 0; x < s.k; ++x) w.left.push_back({x});
            for (int y = 0; y < t.k; ++y) w.right.push_back({s.k + y});
            if (valid_embedding(se, w.system, w.left) &&
                valid_embedding(te, w.system, w.right))
                return w;
        }
        return std::nullopt;
    }

    std::optional<SpanAmalgam> amalgamate(const std::string& base,
                                          const Morphism& f1,
                                          const std::string& t1e,
                                          const Morphism& f2,
                                          const std::string& t2e) const override
    {
        PointSystem a = decode_point(base);
        PointSystem t1 = decode_point(t1e), t2 = decode_point(t2e);
        // Glue t2's copy of the base onto t1's.
        std::vector<int> glue(static_cast<size_t>(t2.k), -1);
        int next = t1.k;
        for (int x = 0; x < a.k; ++x)
            glue[static_cast<size_t>(f2[static_cast<size_t>(x)].front())] =
                f1[static_cast<size_t>(x)].front();
        for (int y = 0; y < t2.k; ++y)
            if (glue[static_cast<size_t>(y)] < 0)
                glue[static_cast<size_t>(y)] = next++;

        PointSystem u;
        u.k = next;
        u.rel.assign(static_cast<size_t>(next * next), '?');
        for (int x = 0; x < t1.k; ++x)
            for (int y = 0; y < t1.k; ++y)
                u.rel[static_cast<size_t>(x * u.k + y)] = rel_at(t1, x, y);
        for (int x = 0; x < t2.k; ++x)
            for (int y = 0; y < t2.k; ++y) {
                int gx = glue[static_cast<size_t>(x)];
                int gy = glue[static_cast<size_t>(y)];
                char& cell = u.rel[static_cast<size_t>(gx * u.k + gy)];
                if (cell != '?' && cell != rel_at(t2, x, y))
                    return std::nullopt; // restrictions disagree
                cell = rel_at(t2, x, y);
            }
        if (!fill_cross(u, t1.k)) return std::nullopt;

        // Union of the maps; overlaps must agree.
        for (size_t i = 0; i < t1.maps.size(); ++i) {
            std::vector<int> m(static_cast<size_t>(u.k), -1);
            for (int x = 0; x < t1.k; ++x)
                m[static_cast<size_t>(x)] = t1.maps[i][static_cast<size_t>(x)];
            for (int y = 0; y < t2.k; ++y) {
                int img = t2.maps[i][static_cast<size_t>(y)];
                int gy = glue[static_cast<size_t>(y)];
                int gi = img < 0 ? -1 : glue[static_cast<size_t>(img)];
                if (gi < 0) continue;
                if (m[static_cast<size_t>(gy)] >= 0 &&
                    m[static_cast<size_t>(gy)] != gi)
                    return std::nullopt;
                m[static_cast<size_t>(gy)] = gi;
            }
            u.maps.push_back(std::move(m));
        }
        if (!point_maps_valid(u)) return std::nullopt;

        SpanAmalgam out;
        out.system = encode_point(u);
        out.left.resize(static_cast<size_t>(t1.k));
        for (int x = 0; x < t1.k; ++x) out.left[static_cast<size_t>(x)] = {x};
        out.right.resize(static_cast<size_t>(t2.k));
        for (int y = 0; y < t2.k; ++y)
            out.right[static_cast<size_t>(y)] = {glue[static_cast<size_t>(y)]};
        return out;
    }

protected:
    // All labeled relation matrices of size k admitted by the class.
    virtual std::vector<std::string> enumerate_rels(int k) const = 0;
    // Disjoint-union candidates for the joint embedding (t offset by s.k).
    virtual std::vector<PointSystem> joint_candidates(
        const PointSystem& s, const PointSystem& t) const = 0;
    // Fill the '?' cross cells of a glued union (first t1k units from the
    // left side); false when the class admits no completion.
    virtual bool fill_cross(PointSystem& u, int t1k) const = 0;

    static PointSystem disjoint_union(const PointSystem& s,
                                      const PointSystem& t, char cross)
    {
        PointSystem u;
        u.k = s.k + t.k;
        u.rel.assign(static_cast<size_t>(u.k * u.k), cross);
        for (int a = 0; a < s.k; ++a)
            for (int b = 0; b < s.k; ++b)
                u.rel[static_cast<size_t>(a * u.k + b)] = rel_at(s, a, b);
        for (int a = 0; a < t.k; ++a)
            for (int b = 0; b < t.k; ++b)
                u.rel[static_cast<size_t>((s.k + a) * u.k + (s.k + b))] =
                    rel_at(t, a, b);
        for (size_t i = 0; i < s.maps.size(); ++i) {
            std::vector<int> m(static_cast<size_t>(u.k), -1);
            for (int x = 0; x < s.k; ++x)
                m[static_cast<size_t>(x)] = s.maps[i][static_cast<size_t>(x)];
            for (int y = 0; y < t.k; ++y) {
                int img = t.maps[i][static_cast<size_t>(y)];
                m[static_cast<size_t>(s.k + y)] = img < 0 ? -1 : s.k + img;
            }
            u.maps.push_back(std::move(m));
        }
        return u;
    }

private:
    void embed_search(const PointSystem& s, const PointSystem& t, int a,
                      std::vector<int>& f, std::vector<bool>& used,
                      std::vector<Morphism>& out) const
    {
        if (a == s.k) {
            for (size_t i = 0; i < s.maps.size(); ++i)
                for (int x = 0; x < s.k; ++x) {
                    int sx = s.maps[i][static_cast<size_t>(x)];
                    if (sx < 0) continue;
                    int tx = t.maps[i][static_cast<size_t>(
                        f[static_cast<size_t>(x)])];
                    if (tx != f[static_cast<size_t>(sx)]) return;
                }
            Morphism m(f.size());
            for (size_t x = 0; x < f.size(); ++x) m[x] = {f[x]};
            out.push_back(std::move(m));
            return;
        }
        for (int v = 0; v < t.k; ++v) {
            if (used[static_cast<size_t>(v)]) continue;
            bool ok = true;
            for (int b = 0; b < a && ok; ++b)
                ok = rel_at(s, a, b) ==
                         rel_at(t, v, f[static_cast<size_t>(b)]) &&
                     rel_at(s, b, a) ==
                         rel_at(t, f[static_cast<size_t>(b)], v);
            if (!ok) continue;
            f[static_cast<size_t>(a)] = v;
            used[static_cast<size_t>(v)] = true;
            embed_search(s, t, a + 1, f, used, out);
            used[static_cast<size_t>(v)] = false;
            f[static_cast<size_t>(a)] = -1;
        }
    }
};

// ---- equivalence relations with at most two classes ------------------

class Equiv2Driver : public PointDriver {
public:
    std::string name() const override { return "equiv2"; }
    bool jep_failure_bound_independent() const override { return true; }
    int enumeration_cap() const override { return 4; }

protected:
    std::vector<std::string> enumerate_rels(int k) const override
    {
        // Class assignment vectors over {0,1}; rel is the same-class bit.
        std::vector<std::string> out;
        for (int bits = 0; bits < (1 << k); ++bits) {
            std::string rel(static_cast<size_t>(k * k), '0');
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b)
                    if (((bits >> a) & 1) == ((bits >> b) & 1))
                        rel[static_cast<size_t>(a * k + b)] = '1';
            out.push_back(std::move(rel));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::vector<PointSystem> joint_candidates(
        const PointSystem& s, const PointSystem& t) const override
    {
        // Merge t's classes onto s's in every way keeping <= 2 classes.
        std::vector<PointSystem> out;
        PointSystem base = disjoint_union(s, t, '0');
        for (int merge = 0; merge < 4; ++merge) {
            // merge bit j: t-class j joins s-class (merge >> j) & 1.
            PointSystem u = base;
            std::vector<int> klass(static_cast<size_t>(u.k));
            for (int a = 0; a < s.k; ++a)
                klass[static_cast<size_t>(a)] = class_of(s, a);
            for (int b = 0; b < t.k; ++b)
                klass[static_cast<size_t>(s.k + b)] =
                    (merge >> class_of(t, b)) & 1;
            for (int a = 0; a < u.k; ++a)
                for (int b = 0; b < u.k; ++b)
                    u.rel[static_cast<size_t>(a * u.k + b)] =
                        klass[static_cast<size_t>(a)] ==
                                klass[static_cast<size_t>(b)]
                            ? '1'
                            : '0';
            out.push_back(std::move(u));
        }
        return out;
    }

    bool fill_cross(PointSystem& u, int) const override
    {
        // Transitive closure of the known same-class cells (union-find),
        // then check the class count stays within two.
        std::vector<int> root(static_cast<size_t>(u.k));
        std::iota(root.begin(), root.end(), 0);
        auto find = [&](int x) {
            while (root[static_cast<size_t>(x)] != x)
                x = root[static_cast<size_t>(x)];
            return x;
        };
        for (int a = 0; a < u.k; ++a)
            for (int b = 0; b < u.k; ++b)
                if (u.rel[static_cast<size_t>(a * u.k + b)] == '1')
                    root[static_cast<size_t>(find(a))] = find(b);
        std::set<int> classes;
        for (int a = 0; a < u.k; ++a) classes.insert(find(a));
        if (classes.size() > 2) return false;
        for (int a = 0; a < u.k; ++a)
            for (int b = 0; b < u.k; ++b) {
                char want = find(a) == find(b) ? '1' : '0';
                char& cell = u.rel[static_cast<size_t>(a * u.k + b)];
                if (cell != '?' && cell != want) return false;
                cell = want;
            }
        return true;
    }

private:
    static int class_of(const PointSystem& s, int a)
    {
        // Class 0 is the class of the least member.
        return rel_at(s, 0, a) == '1' ? 0 : 1;
    }
};

// ---- finite linear orders ---------------------------------------------

class LinearOrderDriver : public PointDriver {
public:
    std::string name() const override { return "linear-orders"; }

protected:
    std::vector<std::string> enumerate_rels(int k) const override
    {
        std::string rel(static_cast<size_t>(k * k), '=');
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                if (a != b)
                    rel[static_cast<size_t>(a * k + b)] = a < b ? '<' : '>';
        return {rel};
    }

    std::vector<PointSystem> joint_candidates(
        const PointSystem& s, const PointSystem& t) const override
    {
        // Concatenation: everything in s below everything in t.
        PointSystem u = disjoint_union(s, t, '?');
        for (int a = 0; a < s.k; ++a)
            for (int b = 0; b < t.k; ++b) {
                u.rel[static_cast<size_t>(a * u.k + (s.k + b))] = '<';
                u.rel[static_cast<size_t>((s.k + b) * u.k + a)] = '>';
            }
        return {u};
    }

    bool fill_cross(PointSystem& u, int t1k) const override
    {
        // Linear completion: order units by (number of known '<'
        // predecessors, side, index), rewrite the matrix, and confirm it
        // refines every decided cell.
        std::vector<std::tuple<int, int, int>> key;
        for (int a = 0; a < u.k; ++a) {
            int below = 0;
            for (int b = 0; b < u.k; ++b)
                if (u.rel[static_cast<size_t>(b * u.k + a)] == '<') ++below;
            key.emplace_back(below, a < t1k ? 0 : 1, a);
        }
        std::vector<int> order(static_cast<size_t>(u.k));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return key[static_cast<size_t>(a)] < key[static_cast<size_t>(b)];
        });
        std::vector<int> rank(static_cast<size_t>(u.k));
        for (int i = 0; i < u.k; ++i)
            rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
        for (int a = 0; a < u.k; ++a)
            for (int b = 0; b < u.k; ++b) {
                char want = a == b ? '='
                            : rank[static_cast<size_t>(a)] <
                                      rank[static_cast<size_t>(b)]
                                ? '<'
                                : '>';
                char& cell = u.rel[static_cast<size_t>(a * u.k + b)];
                if (cell != '?' && cell != want) return false;
                cell = want;
            }
        return true;
    }
};

// ---- graphs and {1,2}-metric spaces -------------------------------------
// A {1,2}-valued metric is exactly a graph (distance 1 = edge): every such
// symmetric matrix satisfies the triangle inequality.  The metric driver
// additionally knows the cofinal subclass of full-automorphism systems.

class GraphDriver : public PointDriver {
public:
    std::string name() const override { return "graphs"; }
    int enumeration_cap() const override { return 4; }

protected:
    std::vector<std::string> enumerate_rels(int k) const override
    {
        int edges = k * (k - 1) / 2;
        std::vector<std::string> out;
        for (int bits = 0; bits < (1 << edges); ++bits) {
            std::string rel(static_cast<size_t>(k * k), '0');
            int e = 0;
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b, ++e)
                    if ((bits >> e) & 1) {
                        rel[static_cast<size_t>(a * k + b)] = '1';
                        rel[static_cast<size_t>(b * k + a)] = '1';
                    }
            out.push_back(std::move(rel));
        }
        return out;
    }

    std::vector<PointSystem> joint_candidates(
        const PointSystem& s, const PointSystem& t) const override
    {
        return {disjoint_union(s, t, '0')};
    }

    bool fill_cross(PointSystem& u, int) const override
    {
        for (char& c : u.rel)
            if (c == '?') c = '0';
        return true;
    }
};

class MetricDriver : public GraphDriver {
public:
    std::string name() const override { return "metric-12"; }
    bool has_cofinal_oracle() const override { return true; }
    bool cofinal_member(const std::string& sys) const override
    {
        PointSystem s = decode_point(sys);
        for (const auto& m : s.maps)
            for (int v : m)
                if (v < 0) return false;
        return true;
    }
};

// ===================================================================
// Boolean driver: systems are PartialIsoSystems.  Encoding:
// "B<k>|iso|iso|..." with iso = "dom;ran;map", blocks as "0.2,1", the map
// a comma list of range block indices.
// ===================================================================

std::string encode_blocks(const std::vector<Block>& blocks)
{
    std::string out;
    for (size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += ",";
        for (size_t j = 0; j < blocks[i].size(); ++j) {
            if (j) out += ".";
            out += std::to_string(blocks[i][j]);
        }
    }
    return out;
}

std::vector<Block> decode_blocks(const std::string& enc)
{
    std::vector<Block> out;
    std::stringstream ss(enc);
    std::string blk;
    while (std::getline(ss, blk, ',')) {
        Block b;
        std::stringstream bs(blk);
        std::string atom;
        while (std::getline(bs, atom, '.')) b.push_back(std::stoi(atom));
        out.push_back(std::move(b));
    }
    return out;
}

std::string encode_boolean(const PartialIsoSystem& s)
{
    std::string out = "B" + std::to_string(s.ambient.size());
    for (const PartialIso& p : s.isos) {
        out += "|" + encode_blocks(p.domain.blocks) + ";" +
               encode_blocks(p.range.blocks) + ";";
        for (size_t i = 0; i < p.map.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(p.map[i]);
        }
    }
    return out;
}

PartialIsoSystem decode_boolean(const std::string& enc)
{
    std::stringstream ss(enc);
    std::string field;
    std::getline(ss, field, '|');
    AmbientAlgebra amb = AmbientAlgebra::of_size(std::stoi(field.substr(1)));
    std::vector<PartialIso> isos;
    while (std::getline(ss, field, '|')) {
        size_t c1 = field.find(';');
        size_t c2 = field.find(';', c1 + 1);
        Subalgebra dom(amb, decode_blocks(field.substr(0, c1)));
        Subalgebra ran(amb, decode_blocks(field.substr(c1 + 1, c2 - c1 - 1)));
        std::vector<int> map;
        std::stringstream ms(field.substr(c2 + 1));
        std::string v;
        while (std::getline(ms, v, ',')) map.push_back(std::stoi(v));
        isos.emplace_back(std::move(dom), std::move(ran), std::move(map));
    }
    return PartialIsoSystem(amb, std::move(isos));
}

PartialIsoSystem relabel_boolean(const PartialIsoSystem& s,
                                 const std::vector<int>& p)
{
    auto relabel_block = [&](const Block& b) {
        Block out;
        for (int a : b) out.push_back(p[static_cast<size_t>(a)]);
        std::sort(out.begin(), out.end());
        return out;
    };
    std::vector<PartialIso> isos;
    for (const PartialIso& iso : s.isos) {
        std::vector<std::pair<Block, Block>> pairs;
        for (int i = 0; i < iso.domain.block_count(); ++i)
            pairs.push_back(
                {relabel_block(iso.domain.blocks[static_cast<size_t>(i)]),
                 relabel_block(iso.range.blocks[static_cast<size_t>(
                     iso.map[static_cast<size_t>(i)])])});
        std::vector<Block> d, r;
        for (const auto& pr : pairs) {
            d.push_back(pr.first);
            r.push_back(pr.second);
        }
        Subalgebra dom(s.ambient, d), ran(s.ambient, r);
        std::vector<int> map(pairs.size());
        for (const auto& pr : pairs)
            map[static_cast<size_t>(dom.find_block(pr.first))] =
                ran.find_block(pr.second);
        isos.emplace_back(std::move(dom), std::move(ran), std::move(map));
    }
    return PartialIsoSystem(s.ambient, std::move(isos));
}

// Reindex a system onto plain 0..k-1 atoms, keeping atom order.
PartialIsoSystem plain_boolean(const PartialIsoSystem& s)
{
    AmbientAlgebra plain = AmbientAlgebra::of_size(s.ambient.size());
    std::vector<PartialIso> isos;
    for (const PartialIso& p : s.isos)
        isos.emplace_back(Subalgebra(plain, p.domain.blocks),
                          Subalgebra(plain, p.range.blocks), p.map);
    return PartialIsoSystem(plain, std::move(isos));
}

std::string canonical_boolean(const PartialIsoSystem& s)
{
    std::vector<int> p(static_cast<size_t>(s.ambient.size()));
    std::iota(p.begin(), p.end(), 0);
    std::string best;
    do {
        std::string enc = encode_boolean(relabel_boolean(s, p));
        if (best.empty() || enc < best) best = enc;
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

void enumerate_partitions(int k, std::vector<std::vector<Block>>& out)
{
    // Restricted growth strings enumerate set partitions exactly once.
    std::vector<int> assign(static_cast<size_t>(k), 0);
    while (true) {
        int blocks = *std::max_element(assign.begin(), assign.end()) + 1;
        std::vector<Block> part(static_cast<size_t>(blocks));
        for (int a = 0; a < k; ++a)
            part[static_cast<size_t>(assign[static_cast<size_t>(a)])]
                .push_back(a);
        out.push_back(std::move(part));
        int i = k - 1;
        while (i > 0) {
            int cap =
                *std::max_element(assign.begin(), assign.begin() + i) + 1;
            if (assign[static_cast<size_t>(i)] < cap) break;
            --i;
        }
        if (i == 0) break;
        ++assign[static_cast<size_t>(i)];
        std::fill(assign.begin() + i + 1, assign.end(), 0);
    }
}

class BooleanDriver : public ClassDriver {
public:
    std::string name() const override { return "boolean"; }

    std::vector<std::string> enumerate_systems(int n, int bound) const override
    {
        std::set<std::string> canon;
        for (int k = 1; k <= bound; ++k) {
            AmbientAlgebra amb = AmbientAlgebra::of_size(k);
            std::vector<std::vector<Block>> parts;
            enumerate_partitions(k, parts);
            std::vector<PartialIso> isos;
            for (const auto& dom : parts)
                for (const auto& ran : parts) {
                    if (dom.size() != ran.size()) continue;
                    std::vector<int> perm(dom.size());
                    std::iota(perm.begin(), perm.end(), 0);
                    do {
                        isos.emplace_back(Subalgebra(amb, dom),
                                          Subalgebra(amb, ran), perm);
                    } while (std::next_permutation(perm.begin(), perm.end()));
                }
            std::vector<size_t> pick(static_cast<size_t>(n), 0);
            while (true) {
                std::vector<PartialIso> tuple;
                for (size_t i = 0; i < pick.size(); ++i)
                    tuple.push_back(isos[pick[i]]);
                canon.insert(canonical_boolean(PartialIsoSystem(amb, tuple)));
                size_t j = 0;
                while (j < pick.size() && ++pick[j] == isos.size())
                    pick[j++] = 0;
                if (j == pick.size()) break;
            }
        }
        return {canon.begin(), canon.end()};
    }

    int system_size(const std::string& sys) const override
    {
        return std::stoi(sys.substr(1, sys.find('|') - 1));
    }

    int system_arity(const std::string& sys) const override
    {
        return static_cast<int>(std::count(sys.begin(), sys.end(), '|'));
    }

    std::vector<Morphism> enumerate_embeddings(
        const std::string& se, const std::string& te) const override
    {
        PartialIsoSystem s = decode_boolean(se), t = decode_boolean(te);
        std::vector<Morphism> out;
        // Embeddings correspond to surjections atoms(T) -> atoms(S) whose
        // fibers form the image blocks.
        int ks = s.ambient.size(), kt = t.ambient.size();
        std::vector<int> g(static_cast<size_t>(kt), 0);
        while (true) {
            std::vector<Block> image(static_cast<size_t>(ks));
            for (int a = 0; a < kt; ++a)
                image[static_cast<size_t>(g[static_cast<size_t>(a)])]
                    .push_back(a);
            bool total =
                std::none_of(image.begin(), image.end(),
                             [](const Block& b) { return b.empty(); });
            if (total) {
                AlgebraEmbedding f(s.ambient, t.ambient, image);
                if (is_system_embedding(s, t, f)) out.push_back(image);
            }
            int i = 0;
            while (i < kt && ++g[static_cast<size_t>(i)] == ks)
                g[static_cast<size_t>(i++)] = 0;
            if (i == kt) break;
        }
        return out;
    }

    bool embeds(const std::string& se, const std::string& te) const override
    {
        return find_iso_embedding(decode_boolean(se), decode_boolean(te))
            .has_value();
    }

    std::optional<Morphism> find_embedding(
        const std::string& se, const std::string& te) const override
    {
        auto e =
            find_iso_embedding(decode_boolean(se), decode_boolean(te));
        if (!e) return std::nullopt;
        return e->image;
    }

    std::optional<Morphism> find_embedding_over(
        const std::string& base, const Morphism& left, const std::string& se,
        const Morphism& right, const std::string& te) const override
    {
        PartialIsoSystem s = decode_boolean(se), t = decode_boolean(te);
        PartialIsoSystem b = decode_boolean(base);
        if (static_cast<int>(left.size()) != b.ambient.size() ||
            static_cast<int>(right.size()) != b.ambient.size())
            return std::nullopt;
        // Pin every target atom below right(u) to colors below left(u).
        std::vector<std::vector<int>> pins(
            static_cast<size_t>(t.ambient.size()));
        for (size_t u = 0; u < right.size(); ++u) {
            std::vector<int> allowed = left[u];
            std::sort(allowed.begin(), allowed.end());
            for (int x : right[u])
                pins[static_cast<size_t>(x)] = allowed;
        }
        for (const auto& p : pins)
            if (p.empty()) return std::nullopt; // right is not a partition
        auto e = find_iso_embedding(s, t, &pins);
        if (!e) return std::nullopt;
        if (compose_morphisms(left, e->image) != right) return std::nullopt;
        return e->image;
    }

    bool valid_embedding(const std::string& se, const std::string& te,
                         const Morphism& f) const override
    {
        PartialIsoSystem s = decode_boolean(se), t = decode_boolean(te);
        if (static_cast<int>(f.size()) != s.ambient.size()) return false;
        try {
            AlgebraEmbedding emb(s.ambient, t.ambient, f);
            return is_system_embedding(s, t, emb);
        } catch (const std::exception&) {
            return false;
        }
    }

    std::optional<std::string> joint_embed(const std::string& se,
                                           const std::string& te) const override
    {
        PartialIsoSystem s = decode_boolean(se), t = decode_boolean(te);
        if (s.arity() != t.arity()) return std::nullopt;
        return encode_boolean(plain_boolean(jep_boolean(s, t).system));
    }

    std::optional<JointWitness> joint_embed_with_legs(
        const std::string& se, const std::string& te) const override
    {
        PartialIsoSystem s = decode_boolean(se), t = decode_boolean(te);
        if (s.arity() != t.arity()) return std::nullopt;
        JointEmbedding je = jep_boolean(s, t);
        JointWitness w;
        // plain_boolean renames atoms in index order, so the legs' image
        // blocks remain valid under the re-encoding.
        w.system = encode_boolean(plain_boolean(je.system));
        w.left = je.left.image;
        w.right = je.right.image;
        return w;
    }

    std::optional<SpanAmalgam> amalgamate(const std::string& base,
                                          const Morphism& f1,
                                          const std::string& t1e,
                                          const Morphism& f2,
                                          const std::string& t2e) const override
    {
        PartialIsoSystem b = decode_boolean(base);
        PartialIsoSystem t1 = decode_boolean(t1e), t2 = decode_boolean(t2e);
        if (b.arity() != 1 || t1.arity() != 1 || t2.arity() != 1)
            return std::nullopt;
        if (!decompose(b.isos[0]).normal) return std::nullopt;
        try {
            Refinement left{t1.isos[0],
                            AlgebraEmbedding(b.ambient, t1.ambient, f1)};
            Refinement right{t2.isos[0],
                             AlgebraEmbedding(b.ambient, t2.ambient, f2)};
            Amalgam am = amalgamate_over_normal(b.isos[0], left, right);
            SpanAmalgam out;
            out.system = encode_boolean(plain_boolean(am.system));
            out.left = am.left.image;
            out.right = am.right.image;
            return out;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    std::vector<std::string> extension_candidates(
        const std::string& se) const override
    {
        PartialIsoSystem s = decode_boolean(se);
        if (s.arity() != 1) return {};
        NormalizeResult nr = normalize(s.isos[0]);
        PartialIsoSystem hat(nr.iso.domain.ambient, {nr.iso});
        return {encode_boolean(plain_boolean(hat))};
    }

    bool has_cofinal_oracle() const override { return true; }
    bool cofinal_member(const std::string& sys) const override
    {
        PartialIsoSystem s = decode_boolean(sys);
        for (const PartialIso& p : s.isos)
            if (!decompose(p).normal) return false;
        return true;
    }
};

// Search for an amalgam of the span t1 <-f1- base -f2-> t2 whose square
// over the composites c1, c2 commutes: the driver's constructive candidate
// first (its legs re-verified individually), then the capped universe.
bool find_amalgam(const ClassDriver& d, const std::string& base,
                  const Morphism& f1, const std::string& t1,
                  const Morphism& f2, const std::string& t2,
                  const Morphism& c1, const Morphism& c2,
                  const std::vector<std::string>& universe,
                  std::string* witness)
{
    if (auto am = d.amalgamate(base, f1, t1, f2, t2)) {
        if (d.valid_embedding(t1, am->system, am->left) &&
            d.valid_embedding(t2, am->system, am->right) &&
            compose_morphisms(c1, am->left) ==
                compose_morphisms(c2, am->right)) {
            if (witness) *witness = am->system;
            return true;
        }
    }
    int size_cap = d.system_size(t1) + d.system_size(t2);
    for (const std::string& u : universe) {
        if (d.system_size(u) > size_cap) continue;
        for (const Morphism& g1 : d.enumerate_embeddings(t1, u)) {
            Morphism left = compose_morphisms(c1, g1);
            for (const Morphism& g2 : d.enumerate_embeddings(t2, u))
                if (left == compose_morphisms(c2, g2)) {
                    if (witness) *witness = u;
                    return true;
                }
        }
    }
    return false;
}

} // namespace

CheckReport check_jep(const ClassDriver& d, int n, int bound,
                      const std::string* pinned_base, const CheckOptions& opt)
{
    CheckReport rep;
    rep.property = pinned_base ? "CJEP" : "JEP";
    rep.driver = d.name();
    rep.n = n;
    rep.bound = bound;

    std::vector<std::string> systems = d.enumerate_systems(n, bound);
    if (pinned_base) {
        std::vector<std::string> kept;
        for (const std::string& s : systems)
            if (d.embeds(*pinned_base, s)) kept.push_back(s);
        systems = std::move(kept);
    }
    std::vector<std::pair<int, int>> pairs;
    for (size_t i = 0; i < systems.size(); ++i)
        for (size_t j = i; j < systems.size(); ++j)
            pairs.push_back({static_cast<int>(i), static_cast<int>(j)});

    // Pass 1: constructive witnesses, independent pairs in parallel.
    std::vector<std::string> witness(pairs.size());
    std::vector<char> open(pairs.size(), 0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (long pi = 0; pi < static_cast<long>(pairs.size()); ++pi) {
        const std::string& s =
            systems[static_cast<size_t>(pairs[static_cast<size_t>(pi)].first)];
        const std::string& t = systems[static_cast<size_t>(
            pairs[static_cast<size_t>(pi)].second)];
        auto u = d.joint_embed(s, t);
        if (u && d.embeds(s, *u) && d.embeds(t, *u))
            witness[static_cast<size_t>(pi)] = *u;
        else
            open[static_cast<size_t>(pi)] = 1;
    }
    // Pass 2: exhaustive search for the remaining pairs.
    std::vector<std::string> universe;
    if (std::any_of(open.begin(), open.end(), [](char c) { return c != 0; }))
        universe =
            d.enumerate_systems(n, std::min(2 * bound, d.enumeration_cap()));
    for (size_t pi = 0; pi < pairs.size(); ++pi) {
        if (!open[pi]) continue;
        const std::string& s = systems[static_cast<size_t>(pairs[pi].first)];
        const std::string& t = systems[static_cast<size_t>(pairs[pi].second)];
        int cap = d.system_size(s) + d.system_size(t);
        for (const std::string& u : universe) {
            if (d.system_size(u) > cap) continue;
            if (d.embeds(s, u) && d.embeds(t, u)) {
                witness[pi] = u;
                open[pi] = 0;
                break;
            }
        }
        if (open[pi]) {
            rep.holds = false;
            rep.bound_independent = d.jep_failure_bound_independent();
            rep.counterexample = {s, t};
            rep.detail =
                "no joint embedding for the pair within target size " +
                std::to_string(cap) +
                (rep.bound_independent
                     ? " (class-level failure, bound-independent)"
                     : " (bound-relative)");
            return rep;
        }
    }
    rep.holds = true;
    std::string table;
    for (size_t pi = 0; pi < pairs.size(); ++pi)
        table += systems[static_cast<size_t>(pairs[pi].first)] + "  +  " +
                 systems[static_cast<size_t>(pairs[pi].second)] + "  ->  " +
                 witness[pi] + "\n";
    rep.detail = "joint embedding witnesses (target size |S|+|T|):\n" + table;
    return rep;
}

bool wap_witness_ok(const ClassDriver& d, const std::string& s,
                    const std::string& s_hat, int bound)
{
    int n = d.system_arity(s);
    int ext_bound = std::max(bound, d.system_size(s_hat) + 1);
    std::vector<std::string> all =
        d.enumerate_systems(n, std::min(ext_bound, d.enumeration_cap()));
    std::vector<std::string> extensions;
    for (const std::string& t : all)
        if (d.embeds(s_hat, t)) extensions.push_back(t);
    // Amalgams may need to identify fresh points of the two extensions, so
    // the universe they are drawn from is larger than the extension list.
    std::vector<std::string> amalgam_universe =
        d.enumerate_systems(n, std::min(2 * ext_bound, d.enumeration_cap()));

    for (const Morphism& i : d.enumerate_embeddings(s, s_hat)) {
        bool all_ok = true;
        for (size_t a = 0; a < extensions.size() && all_ok; ++a)
            for (size_t b = a; b < extensions.size() && all_ok; ++b)
                for (const Morphism& f1 :
                     d.enumerate_embeddings(s_hat, extensions[a])) {
                    if (!all_ok) break;
                    for (const Morphism& f2 :
                         d.enumerate_embeddings(s_hat, extensions[b]))
                        if (!find_amalgam(d, s_hat, f1, extensions[a], f2,
                                          extensions[b],
                                          compose_morphisms(i, f1),
                                          compose_morphisms(i, f2),
                                          amalgam_universe, nullptr)) {
                            all_ok = false;
                            break;
                        }
                }
        if (all_ok) return true;
    }
    return false;
}

CheckReport check_wap(const ClassDriver& d, int n, int bound,
                      const CheckOptions& opt)
{
    CheckReport rep;
    rep.property = "WAP";
    rep.driver = d.name();
    rep.n = n;
    rep.bound = bound;

    std::vector<std::string> systems = d.enumerate_systems(n, bound);
    std::vector<std::string> pool =
        d.enumerate_systems(n, std::min(2 * bound, d.enumeration_cap()));
    std::vector<std::string> found(systems.size());
    std::vector<char> missing(systems.size(), 0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (long si = 0; si < static_cast<long>(systems.size()); ++si) {
        const std::string& s = systems[static_cast<size_t>(si)];
        std::vector<std::string> candidates = d.extension_candidates(s);
        for (const std::string& c : pool)
            if (d.system_size(c) <= 2 * d.system_size(s))
                candidates.push_back(c);
        bool ok = false;
        for (const std::string& c : candidates)
            if (d.embeds(s, c) && wap_witness_ok(d, s, c, bound)) {
                found[static_cast<size_t>(si)] = c;
                ok = true;
                break;
            }
        if (!ok) missing[static_cast<size_t>(si)] = 1;
    }
    for (size_t si = 0; si < systems.size(); ++si)
        if (missing[si]) {
            rep.holds = false;
            rep.counterexample = {systems[si]};
            rep.detail =
                "no extension within twice the system size admits bounded "
                "amalgamation (bound-relative, not a refutation)";
            return rep;
        }
    rep.holds = true;
    std::string table;
    for (size_t si = 0; si < systems.size(); ++si)
        table += systems[si] + "  ->  witness " + found[si] + "\n";
    rep.detail = "WAP witnesses (extension bound 2|S|, generic searches "
                 "capped at size " +
                 std::to_string(d.enumeration_cap()) + "):\n" + table;
    return rep;
}

CheckReport check_cap(const ClassDriver& d, int n, int bound,
                      const CheckOptions& opt)
{
    require(d.has_cofinal_oracle(), "driver lacks a cofinal subclass oracle");
    CheckReport rep;
    rep.property = "CAP";
    rep.driver = d.name();
    rep.n = n;
    rep.bound = bound;

    std::vector<std::string> systems = d.enumerate_systems(n, bound);
    std::vector<std::string> pool =
        d.enumerate_systems(n, std::min(2 * bound, d.enumeration_cap()));

    // Clause (a): every system embeds into a subclass member.
    for (const std::string& s : systems) {
        bool ok = false;
        std::vector<std::string> candidates = d.extension_candidates(s);
        for (const std::string& c : pool)
            if (d.system_size(c) <= 2 * d.system_size(s))
                candidates.push_back(c);
        for (const std::string& c : candidates)
            if (d.cofinal_member(c) && d.embeds(s, c)) {
                ok = true;
                break;
            }
        if (!ok) {
            rep.holds = false;
            rep.counterexample = {s};
            rep.detail = "no subclass member above the system within twice "
                         "its size (bound-relative)";
            return rep;
        }
    }

    // Clause (b): spans of subclass members amalgamate over their base.
    std::vector<std::string> members;
    for (const std::string& s : systems)
        if (d.cofinal_member(s)) members.push_back(s);
    std::vector<char> failed(members.size(), 0);
    std::vector<std::string> failure_note(members.size());
    // Amalgams may identify fresh points of both extensions, so they are
    // drawn from a larger (capped) slice of the subclass.
    std::vector<std::string> big_universe;
    for (const std::string& t : d.enumerate_systems(
             n, std::min(2 * (bound + 1), d.enumeration_cap())))
        if (d.cofinal_member(t)) big_universe.push_back(t);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (long mi = 0; mi < static_cast<long>(members.size()); ++mi) {
        const std::string& base = members[static_cast<size_t>(mi)];
        int ext_bound = std::max(bound, d.system_size(base) + 1);
        std::vector<std::string> all = d.enumerate_systems(
            n, std::min(ext_bound, d.enumeration_cap()));
        std::vector<std::string> exts;
        const std::vector<std::string>& amalgam_universe = big_universe;
        for (const std::string& t : all)
            if (d.cofinal_member(t) && d.embeds(base, t)) exts.push_back(t);
        for (size_t a = 0; a < exts.size(); ++a)
            for (size_t b = a; b < exts.size(); ++b)
                for (const Morphism& f1 :
                     d.enumerate_embeddings(base, exts[a]))
                    for (const Morphism& f2 :
                         d.enumerate_embeddings(base, exts[b]))
                        if (!find_amalgam(d, base, f1, exts[a], f2, exts[b],
                                          f1, f2, amalgam_universe,
                                          nullptr)) {
                            failed[static_cast<size_t>(mi)] = 1;
                            failure_note[static_cast<size_t>(mi)] =
                                exts[a] + " / " + exts[b];
                        }
    }
    for (size_t mi = 0; mi < members.size(); ++mi)
        if (failed[mi]) {
            rep.holds = false;
            rep.counterexample = {members[mi]};
            rep.detail =
                "span of subclass extensions failed to amalgamate: " +
                failure_note[mi] + " (bound-relative)";
            return rep;
        }
    rep.holds = true;
    rep.detail = "both CAP clauses hold at the bound over " +
                 std::to_string(members.size()) + " subclass members";
    return rep;
}

std::string encode_boolean_system(const PartialIsoSystem& s)
{
    return encode_boolean(plain_boolean(s));
}

PartialIsoSystem decode_boolean_system(const std::string& enc)
{
    return decode_boolean(enc);
}

namespace {

bool sorted_intersect(const std::vector<int>& a, const std::vector<int>& b)
{
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return false;
}

} // namespace

std::optional<AlgebraEmbedding> find_iso_embedding(
    const PartialIsoSystem& s, const PartialIsoSystem& t,
    const std::vector<std::vector<int>>* atom_pins)
{
    if (s.arity() != 1 || t.arity() != 1) {
        if (atom_pins) return std::nullopt;
        auto e = embed_system(s, t);
        if (!e) return std::nullopt;
        return e->base;
    }
    int ns = s.ambient.size(), nt = t.ambient.size();
    if (ns > nt) return std::nullopt;
    const PartialIso& si = s.isos[0];
    const PartialIso& ti = t.isos[0];
    int sd = si.domain.block_count();
    int td = ti.domain.block_count();
    if (ti.range.block_count() != td || si.range.block_count() != sd)
        return std::nullopt;

    // A candidate embedding is determined by (i) an assignment of each
    // target domain block to a source domain block (range blocks follow by
    // commuting) and (ii) an atom coloring consistent with both the domain
    // and range assignments.  Atoms of the target couple the assignment of
    // their domain block with that of the block mapping onto their range
    // block, so the search is a binary CSP over domain blocks.
    std::vector<int> t_inv(static_cast<size_t>(td), -1);
    for (int D = 0; D < td; ++D)
        t_inv[static_cast<size_t>(ti.map[static_cast<size_t>(D)])] = D;

    // Atoms of S lying in a given (domain block, range block) cell.
    std::vector<std::vector<std::vector<int>>> cell(
        static_cast<size_t>(sd), std::vector<std::vector<int>>(
                                     static_cast<size_t>(sd)));
    for (int a = 0; a < ns; ++a)
        cell[static_cast<size_t>(si.domain.block_of(a))]
            [static_cast<size_t>(si.range.block_of(a))]
                .push_back(a);

    std::vector<std::pair<int, int>> atom_pair(static_cast<size_t>(nt));
    std::map<std::pair<int, int>, int> pair_index;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::set<std::vector<int>>> pair_pins;
    for (int x = 0; x < nt; ++x) {
        int D = ti.domain.block_of(x);
        int D2 = t_inv[static_cast<size_t>(ti.range.block_of(x))];
        atom_pair[static_cast<size_t>(x)] = {D, D2};
        auto [it, fresh] = pair_index.try_emplace({D, D2},
                                                  static_cast<int>(pairs.size()));
        if (fresh) {
            pairs.push_back({D, D2});
            pair_pins.emplace_back();
        }
        if (atom_pins)
            pair_pins[static_cast<size_t>(it->second)].insert(
                (*atom_pins)[static_cast<size_t>(x)]);
    }
    // adj[v] = (other endpoint, role, pair index); role 0 when v is the
    // domain side of the constraint.
    std::vector<std::vector<std::tuple<int, int, int>>> adj(
        static_cast<size_t>(td));
    for (size_t p = 0; p < pairs.size(); ++p) {
        auto [D, D2] = pairs[p];
        adj[static_cast<size_t>(D)].push_back({D2, 0, static_cast<int>(p)});
        if (D2 != D)
            adj[static_cast<size_t>(D2)].push_back(
                {D, 1, static_cast<int>(p)});
    }
    auto ok = [&](int p, int aD, int aD2) {
        const std::vector<int>& atoms =
            cell[static_cast<size_t>(aD)]
                [static_cast<size_t>(si.map[static_cast<size_t>(aD2)])];
        if (atoms.empty()) return false;
        for (const std::vector<int>& pin : pair_pins[static_cast<size_t>(p)])
            if (!sorted_intersect(atoms, pin)) return false;
        return true;
    };

    // Visit variables in breadth-first order over the constraint graph so
    // chain constraints propagate as early as possible.
    std::vector<int> order;
    order.reserve(static_cast<size_t>(td));
    {
        std::vector<char> seen(static_cast<size_t>(td), 0);
        for (int v0 = 0; v0 < td; ++v0) {
            if (seen[static_cast<size_t>(v0)]) continue;
            std::vector<int> queue{v0};
            seen[static_cast<size_t>(v0)] = 1;
            for (size_t h = 0; h < queue.size(); ++h) {
                order.push_back(queue[h]);
                for (const auto& [o, role, p] :
                     adj[static_cast<size_t>(queue[h])])
                    if (!seen[static_cast<size_t>(o)]) {
                        seen[static_cast<size_t>(o)] = 1;
                        queue.push_back(o);
                    }
            }
        }
    }

    std::vector<int> assign(static_cast<size_t>(td), -1);
    std::function<std::optional<AlgebraEmbedding>(int)> dfs =
        [&](int idx) -> std::optional<AlgebraEmbedding> {
        if (idx == td) {
            // Pick atom colors; a matching guarantees every source atom a
            // non-empty image.
            std::vector<std::vector<int>> cand(static_cast<size_t>(nt));
            for (int x = 0; x < nt; ++x) {
                auto [D, D2] = atom_pair[static_cast<size_t>(x)];
                cand[static_cast<size_t>(x)] =
                    cell[static_cast<size_t>(assign[static_cast<size_t>(D)])]
                        [static_cast<size_t>(
                            si.map[static_cast<size_t>(
                                assign[static_cast<size_t>(D2)])])];
                if (atom_pins) {
                    std::vector<int> keep;
                    const std::vector<int>& pin =
                        (*atom_pins)[static_cast<size_t>(x)];
                    for (int c : cand[static_cast<size_t>(x)])
                        if (std::binary_search(pin.begin(), pin.end(), c))
                            keep.push_back(c);
                    if (keep.empty()) return std::nullopt;
                    cand[static_cast<size_t>(x)] = std::move(keep);
                }
            }
            std::vector<std::vector<int>> s_adj(static_cast<size_t>(ns));
            for (int x = 0; x < nt; ++x)
                for (int c : cand[static_cast<size_t>(x)])
                    s_adj[static_cast<size_t>(c)].push_back(x);
            std::vector<int> match_t(static_cast<size_t>(nt), -1);
            std::function<bool(int, std::vector<char>&)> aug =
                [&](int c, std::vector<char>& used) {
                    for (int x : s_adj[static_cast<size_t>(c)]) {
                        if (used[static_cast<size_t>(x)]) continue;
                        used[static_cast<size_t>(x)] = 1;
                        if (match_t[static_cast<size_t>(x)] < 0 ||
                            aug(match_t[static_cast<size_t>(x)], used)) {
                            match_t[static_cast<size_t>(x)] = c;
                            return true;
                        }
                    }
                    return false;
                };
            for (int c = 0; c < ns; ++c) {
                std::vector<char> used(static_cast<size_t>(nt), 0);
                if (!aug(c, used)) return std::nullopt;
            }
            std::vector<Block> image(static_cast<size_t>(ns));
            for (int x = 0; x < nt; ++x) {
                int c = match_t[static_cast<size_t>(x)] >= 0
                            ? match_t[static_cast<size_t>(x)]
                            : cand[static_cast<size_t>(x)].front();
                image[static_cast<size_t>(c)].push_back(x);
            }
            AlgebraEmbedding emb(s.ambient, t.ambient, image);
            if (!is_system_embedding(s, t, emb)) return std::nullopt;
            return emb;
        }
        int v = order[static_cast<size_t>(idx)];
        for (int val = 0; val < sd; ++val) {
            assign[static_cast<size_t>(v)] = val;
            bool feasible = true;
            for (const auto& [o, role, p] : adj[static_cast<size_t>(v)]) {
                if (o != v && assign[static_cast<size_t>(o)] < 0) continue;
                int other = o == v ? val : assign[static_cast<size_t>(o)];
                int aD = role == 0 ? val : other;
                int aD2 = role == 0 ? other : val;
                if (!ok(p, aD, aD2)) {
                    feasible = false;
                    break;
                }
            }
            if (feasible)
                if (auto r = dfs(idx + 1)) return r;
        }
        assign[static_cast<size_t>(v)] = -1;
        return std::nullopt;
    };
    return dfs(0);
}

std::unique_ptr<ClassDriver> make_boolean_driver()
{
    return std::make_unique<BooleanDriver>();
}
std::unique_ptr<ClassDriver> make_equiv2_driver()
{
    return std::make_unique<Equiv2Driver>();
}
std::unique_ptr<ClassDriver> make_linear_order_driver()
{
    return std::make_unique<LinearOrderDriver>();
}
std::unique_ptr<ClassDriver> make_graph_driver()
{
    return std::make_unique<GraphDriver>();
}
std::unique_ptr<ClassDriver> make_metric_driver()
{
    return std::make_unique<MetricDriver>();
}

} // namespace amalgam
