#include "amalgam/measured.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "amalgam/chains.hpp"

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

void ensure(bool cond, const std::string& msg)
{
    if (!cond) throw std::logic_error(msg);
}

// Check the dyadic flag on a freshly computed mass vector.  A violation
// with dyadic inputs would contradict the closure the module relies on, so
// it is an internal error, not a usage error.
void check_dyadic(const std::vector<Rational>& mass, bool dyadic)
{
    if (!dyadic) return;
    for (const Rational& m : mass)
        ensure(m.is_dyadic(), "dyadic flag violated by computed mass " + m.str());
}

// Unique (left-atom, right-atom) pair under a product atom, recovered from
// the coordinate embeddings instead of parsing labels.
std::pair<int, int> product_coordinates(const AlgebraEmbedding& left,
                                        const AlgebraEmbedding& right,
                                        int product_atom)
{
    int x = -1;
    int y = -1;
    for (int i = 0; i < left.source.size() && x < 0; ++i)
        if (block_subset({product_atom}, left.image[i])) x = i;
    for (int j = 0; j < right.source.size() && y < 0; ++j)
        if (block_subset({product_atom}, right.image[j])) y = j;
    ensure(x >= 0 && y >= 0, "product atom without coordinates");
    return {x, y};
}

} // namespace

RationalMeasure::RationalMeasure(AmbientAlgebra amb, std::vector<Rational> m,
                                 bool dyadic_flag)
    : ambient(std::move(amb)), mass(std::move(m)), dyadic(dyadic_flag)
{
    require(static_cast<int>(mass.size()) == ambient.size(),
            "measure needs one mass per atom");
    Rational total(0);
    for (const Rational& r : mass) {
        require(r > Rational(0), "atom masses must be strictly positive");
        if (dyadic)
            require(r.is_dyadic(), "dyadic measure has non-dyadic mass " + r.str());
        total += r;
    }
    require(total == Rational(1), "atom masses must sum to 1");
}

Rational RationalMeasure::mass_of(const Block& b) const
{
    Rational total(0);
    for (int a : b) total += mass.at(static_cast<size_t>(a));
    return total;
}

MeasuredSystem::MeasuredSystem(PartialIsoSystem s, RationalMeasure m)
    : system(std::move(s)), measure(std::move(m))
{
    require(system.ambient == measure.ambient,
            "system and measure must share an ambient algebra");
    for (const PartialIso& p : system.isos)
        for (int i = 0; i < p.domain.block_count(); ++i)
            require(measure.mass_of(p.domain.blocks[i]) ==
                        measure.mass_of(p.range.blocks[p.map[i]]),
                    "partial iso does not preserve block mass");
}

bool is_full_system(const MeasuredSystem& s)
{
    const Subalgebra discrete = Subalgebra::discrete(s.system.ambient);
    for (const PartialIso& p : s.system.isos)
        if (p.domain != discrete || p.range != discrete) return false;
    return true;
}

MeasuredAmalgam amalgamate_measured(const RationalMeasure& mu,
                                    const AlgebraEmbedding& f,
                                    const RationalMeasure& nu,
                                    const AlgebraEmbedding& g,
                                    const RationalMeasure& rho)
{
    require(f.source == mu.ambient && g.source == mu.ambient,
            "embeddings must share the source (A, mu)");
    require(f.target == nu.ambient, "f must land in (B, nu)");
    require(g.target == rho.ambient, "g must land in (C, rho)");
    for (int a = 0; a < mu.ambient.size(); ++a) {
        require(nu.mass_of(f.image[a]) == mu.mass[a],
                "f is not measure-preserving");
        require(rho.mass_of(g.image[a]) == mu.mass[a],
                "g is not measure-preserving");
    }

    // Product atoms b (x) c over a common A-atom, labelled "b|c".
    std::vector<std::string> labels;
    for (int a = 0; a < mu.ambient.size(); ++a)
        for (int b : f.image[a])
            for (int c : g.image[a])
                labels.push_back(nu.ambient.atoms[b] + "|" +
                                 rho.ambient.atoms[c]);
    AmbientAlgebra amb(labels);

    std::vector<Rational> sigma(static_cast<size_t>(amb.size()));
    std::vector<Block> left_img(static_cast<size_t>(nu.ambient.size()));
    std::vector<Block> right_img(static_cast<size_t>(rho.ambient.size()));
    for (int a = 0; a < mu.ambient.size(); ++a)
        for (int b : f.image[a])
            for (int c : g.image[a]) {
                int k = amb.index_of(nu.ambient.atoms[b] + "|" +
                                     rho.ambient.atoms[c]);
                sigma[static_cast<size_t>(k)] = nu.mass[b] * rho.mass[c] / mu.mass[a];
                left_img[static_cast<size_t>(b)].push_back(k);
                right_img[static_cast<size_t>(c)].push_back(k);
            }
    for (Block& blk : left_img) std::sort(blk.begin(), blk.end());
    for (Block& blk : right_img) std::sort(blk.begin(), blk.end());

    bool dyadic = mu.dyadic && nu.dyadic && rho.dyadic;
    check_dyadic(sigma, dyadic);
    MeasuredAmalgam out;
    out.measure = RationalMeasure(amb, std::move(sigma), dyadic);
    out.left = AlgebraEmbedding(nu.ambient, amb, std::move(left_img));
    out.right = AlgebraEmbedding(rho.ambient, amb, std::move(right_img));
    for (int b = 0; b < nu.ambient.size(); ++b)
        ensure(out.measure.mass_of(out.left.image[b]) == nu.mass[b],
               "amalgam embedding fails to preserve measure");
    for (int c = 0; c < rho.ambient.size(); ++c)
        ensure(out.measure.mass_of(out.right.image[c]) == rho.mass[c],
               "amalgam embedding fails to preserve measure");
    return out;
}

MeasuredJointEmbedding jep_measured_systems(const MeasuredSystem& s,
                                            const MeasuredSystem& t)
{
    require(s.system.arity() == t.system.arity(),
            "joint embedding needs systems of equal arity");
    JointEmbedding je = jep_boolean(s.system, t.system);

    std::vector<Rational> sigma(
        static_cast<size_t>(je.system.ambient.size()));
    for (int k = 0; k < je.system.ambient.size(); ++k) {
        auto [x, y] = product_coordinates(je.left, je.right, k);
        sigma[static_cast<size_t>(k)] = s.measure.mass[x] * t.measure.mass[y];
    }
    bool dyadic = s.measure.dyadic && t.measure.dyadic;
    check_dyadic(sigma, dyadic);

    MeasuredJointEmbedding out;
    out.system = MeasuredSystem(
        je.system,
        RationalMeasure(je.system.ambient, std::move(sigma), dyadic));
    out.left = std::move(je.left);
    out.right = std::move(je.right);
    return out;
}

AutomorphismExtension extend_to_automorphisms(const MeasuredSystem& s)
{
    // Grain: every refined atom carries mass 1/N, so atom a splits into
    // mass(a) * N children.
    std::int64_t n = 1;
    for (const Rational& m : s.measure.mass) n = checked_lcm(n, m.den());
    std::vector<int> parts;
    parts.reserve(static_cast<size_t>(s.measure.ambient.size()));
    for (const Rational& m : s.measure.mass) {
        Rational count = m * Rational(n);
        ensure(count.den() == 1, "grain does not divide an atom mass");
        parts.push_back(static_cast<int>(count.num()));
    }
    AmbientRefinement ref = split_atoms(s.system.ambient, parts);
    const Subalgebra discrete = Subalgebra::discrete(ref.after);

    std::vector<PartialIso> autos;
    for (const PartialIso& p : s.system.isos) {
        // The refined image cell of each domain block is fixed; the least
        // completion sends each cell's atoms to the target cell's atoms in
        // ascending order.
        std::vector<int> map(static_cast<size_t>(ref.after.size()), -1);
        for (int i = 0; i < p.domain.block_count(); ++i) {
            Block from = lift_block(ref, p.domain.blocks[i]);
            Block to = lift_block(ref, p.range.blocks[p.map[i]]);
            ensure(from.size() == to.size(),
                   "mass-preserving blocks refine to equal atom counts");
            for (size_t k = 0; k < from.size(); ++k)
                map[static_cast<size_t>(from[k])] = to[k];
        }
        autos.emplace_back(discrete, discrete, std::move(map));
    }

    std::vector<Rational> mass(static_cast<size_t>(ref.after.size()),
                               Rational(1, n));
    check_dyadic(mass, s.measure.dyadic);

    AutomorphismExtension out;
    out.system = MeasuredSystem(
        PartialIsoSystem(ref.after, std::move(autos)),
        RationalMeasure(ref.after, std::move(mass), s.measure.dyadic));
    out.embedding = ref.as_embedding();
    std::string why;
    ensure(is_system_embedding(s.system, out.system.system, out.embedding, &why),
           "automorphism extension does not extend the system: " + why);
    return out;
}

FullSystemAmalgam amalgamate_full_systems(const MeasuredSystem& s,
                                          const MeasuredSystem& t,
                                          const MeasuredSystem& r,
                                          const AlgebraEmbedding& into_t,
                                          const AlgebraEmbedding& into_r)
{
    require(is_full_system(s) && is_full_system(t) && is_full_system(r),
            "amalgamate_full_systems needs full automorphism systems");
    require(s.system.arity() == t.system.arity() &&
                s.system.arity() == r.system.arity(),
            "systems must have equal arity");
    std::string why;
    require(is_system_embedding(s.system, t.system, into_t, &why),
            "S does not embed into T: " + why);
    require(is_system_embedding(s.system, r.system, into_r, &why),
            "S does not embed into R: " + why);
    for (int a = 0; a < s.measure.ambient.size(); ++a) {
        require(t.measure.mass_of(into_t.image[a]) == s.measure.mass[a],
                "embedding into T is not measure-preserving");
        require(r.measure.mass_of(into_r.image[a]) == s.measure.mass[a],
                "embedding into R is not measure-preserving");
    }

    // Atoms: pairs b (x) c over a common S-atom.
    std::vector<std::string> labels;
    std::map<std::pair<int, int>, std::string> label_of;
    for (int a = 0; a < s.measure.ambient.size(); ++a)
        for (int b : into_t.image[a])
            for (int c : into_r.image[a]) {
                std::string lab = t.measure.ambient.atoms[b] + "|" +
                                  r.measure.ambient.atoms[c];
                label_of[{b, c}] = lab;
                labels.push_back(std::move(lab));
            }
    AmbientAlgebra amb(labels);
    auto index_of = [&](int b, int c) {
        return amb.index_of(label_of.at({b, c}));
    };

    std::vector<Rational> mass(static_cast<size_t>(amb.size()));
    std::vector<Block> left_img(static_cast<size_t>(t.measure.ambient.size()));
    std::vector<Block> right_img(static_cast<size_t>(r.measure.ambient.size()));
    for (const auto& [bc, lab] : label_of) {
        auto [b, c] = bc;
        int a = -1;
        for (int i = 0; i < into_t.source.size() && a < 0; ++i)
            if (block_subset({b}, into_t.image[i])) a = i;
        ensure(a >= 0, "T-atom outside every S-image");
        int k = amb.index_of(lab);
        mass[static_cast<size_t>(k)] =
            t.measure.mass[b] * r.measure.mass[c] / s.measure.mass[a];
        left_img[static_cast<size_t>(b)].push_back(k);
        right_img[static_cast<size_t>(c)].push_back(k);
    }
    for (Block& blk : left_img) std::sort(blk.begin(), blk.end());
    for (Block& blk : right_img) std::sort(blk.begin(), blk.end());

    // theta_j(b (x) c) = phi_j(b) (x) chi_j(c); coordinatewise images stay
    // over a common S-atom because the embeddings commute with the maps.
    const Subalgebra discrete = Subalgebra::discrete(amb);
    std::vector<PartialIso> thetas;
    for (int j = 0; j < t.system.arity(); ++j) {
        const PartialIso& phi = t.system.isos[j];
        const PartialIso& chi = r.system.isos[j];
        std::vector<int> map(static_cast<size_t>(amb.size()));
        for (const auto& [bc, lab] : label_of) {
            auto [b, c] = bc;
            int pb = phi.domain.block_of(b);
            int pc = chi.domain.block_of(c);
            map[static_cast<size_t>(index_of(b, c))] =
                index_of(phi.range.blocks[phi.map[pb]][0],
                         chi.range.blocks[chi.map[pc]][0]);
        }
        thetas.emplace_back(discrete, discrete, std::move(map));
    }

    bool dyadic = s.measure.dyadic && t.measure.dyadic && r.measure.dyadic;
    check_dyadic(mass, dyadic);
    FullSystemAmalgam out;
    out.system = MeasuredSystem(PartialIsoSystem(amb, std::move(thetas)),
                                RationalMeasure(amb, std::move(mass), dyadic));
    out.left = AlgebraEmbedding(t.measure.ambient, amb, std::move(left_img));
    out.right = AlgebraEmbedding(r.measure.ambient, amb, std::move(right_img));
    ensure(is_system_embedding(t.system, out.system.system, out.left, &why),
           "amalgam left embedding invalid: " + why);
    ensure(is_system_embedding(r.system, out.system.system, out.right, &why),
           "amalgam right embedding invalid: " + why);
    ensure(compose_embeddings(into_t, out.left).image ==
               compose_embeddings(into_r, out.right).image,
           "amalgam embeddings disagree on S");
    return out;
}

IntervalElement::IntervalElement(
    std::vector<std::pair<Rational, Rational>> parts)
    : intervals(std::move(parts))
{
    for (const auto& [p, q] : intervals) {
        require(Rational(0) <= p && p < q && q <= Rational(1),
                "interval endpoints must satisfy 0 <= p < q <= 1");
    }
    for (size_t i = 0; i + 1 < intervals.size(); ++i)
        require(intervals[i].second <= intervals[i + 1].first,
                "intervals must be sorted and disjoint");
}

Rational IntervalElement::mass() const
{
    Rational total(0);
    for (const auto& [p, q] : intervals) total += q - p;
    return total;
}

std::vector<IntervalElement> extend_interval_embedding(
    const RationalMeasure& mu, const std::vector<IntervalElement>& f,
    const AlgebraEmbedding& into_b, const RationalMeasure& nu)
{
    require(static_cast<int>(f.size()) == mu.ambient.size(),
            "one interval element per A-atom");
    require(into_b.source == mu.ambient && into_b.target == nu.ambient,
            "embedding must go from (A, mu) to (B, nu)");
    for (int a = 0; a < mu.ambient.size(); ++a) {
        require(f[static_cast<size_t>(a)].mass() == mu.mass[a],
                "f is not measure-preserving on atom " + mu.ambient.atoms[a]);
        require(nu.mass_of(into_b.image[a]) == mu.mass[a],
                "B is not a measured extension of A");
    }
    // Disjointness and full cover of [0,1): the sorted union must tile.
    {
        std::vector<std::pair<Rational, Rational>> all;
        for (const IntervalElement& e : f)
            all.insert(all.end(), e.intervals.begin(), e.intervals.end());
        std::sort(all.begin(), all.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        Rational cursor(0);
        for (const auto& [p, q] : all) {
            require(p == cursor, "images do not tile [0,1)");
            cursor = q;
        }
        require(cursor == Rational(1), "images do not cover [0,1)");
    }

    std::vector<IntervalElement> out(static_cast<size_t>(nu.ambient.size()));
    for (int a = 0; a < mu.ambient.size(); ++a) {
        // Consume f(a) left to right, one B-atom at a time in atom order.
        std::vector<std::pair<Rational, Rational>> pool =
            f[static_cast<size_t>(a)].intervals;
        size_t at = 0;
        for (int b : into_b.image[a]) {
            Rational need = nu.mass[b];
            std::vector<std::pair<Rational, Rational>> got;
            while (need > Rational(0)) {
                ensure(at < pool.size(), "interval pool exhausted early");
                auto& [p, q] = pool[at];
                if (q - p <= need) {
                    got.emplace_back(p, q);
                    need -= q - p;
                    ++at;
                } else {
                    got.emplace_back(p, p + need);
                    p += need;
                    need = Rational(0);
                }
            }
            out[static_cast<size_t>(b)] = IntervalElement(std::move(got));
        }
        ensure(at == pool.size(), "interval pool not fully consumed");
    }
    for (int b = 0; b < nu.ambient.size(); ++b)
        ensure(out[static_cast<size_t>(b)].mass() == nu.mass[b],
               "extended embedding fails to preserve measure");
    return out;
}

} // namespace amalgam
