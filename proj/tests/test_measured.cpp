#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "amalgam/chains.hpp"
#include "amalgam/measured.hpp"

using namespace amalgam;

namespace {

Rational q(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

PartialIso iso_of(const AmbientAlgebra& amb,
                  const std::vector<std::pair<Block, Block>>& pairs)
{
    std::vector<Block> d, r;
    for (const auto& p : pairs) {
        d.push_back(p.first);
        r.push_back(p.second);
    }
    Subalgebra dom(amb, d), ran(amb, r);
    std::vector<int> map(pairs.size());
    for (const auto& p : pairs)
        map[dom.find_block(p.first)] = ran.find_block(p.second);
    return PartialIso(dom, ran, map);
}

RationalMeasure random_measure(std::mt19937_64& rng, const AmbientAlgebra& amb)
{
    std::vector<std::int64_t> w(static_cast<size_t>(amb.size()));
    std::int64_t total = 0;
    for (auto& x : w) {
        x = 1 + static_cast<std::int64_t>(rng() % 6);
        total += x;
    }
    std::vector<Rational> mass;
    for (auto x : w) mass.push_back(q(x, total));
    return RationalMeasure(amb, mass, false);
}

// A random measured extension of (A, mu): split atoms and distribute each
// atom's mass over its children with positive rational weights.
struct MeasuredExtension {
    AlgebraEmbedding embedding;
    RationalMeasure measure;
};

MeasuredExtension random_extension(std::mt19937_64& rng,
                                   const RationalMeasure& mu)
{
    std::vector<int> parts(static_cast<size_t>(mu.ambient.size()));
    for (auto& p : parts) p = 1 + static_cast<int>(rng() % 3);
    AmbientRefinement ref = split_atoms(mu.ambient, parts);
    std::vector<Rational> mass(static_cast<size_t>(ref.after.size()));
    for (int a = 0; a < mu.ambient.size(); ++a) {
        const Block& kids = ref.children[static_cast<size_t>(a)];
        std::vector<std::int64_t> w(kids.size());
        std::int64_t total = 0;
        for (auto& x : w) {
            x = 1 + static_cast<std::int64_t>(rng() % 5);
            total += x;
        }
        for (size_t k = 0; k < kids.size(); ++k)
            mass[static_cast<size_t>(kids[k])] =
                mu.mass[a] * q(w[k], total);
    }
    return {ref.as_embedding(), RationalMeasure(ref.after, mass, false)};
}

MeasuredSystem swap_half()
{
    AmbientAlgebra amb = AmbientAlgebra::of_size(2);
    PartialIso sw = iso_of(amb, {{{0}, {1}}, {{1}, {0}}});
    return MeasuredSystem(PartialIsoSystem(amb, {sw}),
                          RationalMeasure(amb, {q(1, 2), q(1, 2)}, true));
}

} // namespace

TEST_CASE("measure construction rejects bad data")
{
    AmbientAlgebra amb = AmbientAlgebra::of_size(2);
    CHECK_THROWS_AS(RationalMeasure(amb, {q(0), q(1)}, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(RationalMeasure(amb, {q(1, 2), q(1, 3)}, false),
                    std::invalid_argument);
    CHECK_THROWS_AS(RationalMeasure(amb, {q(1, 3), q(2, 3)}, true),
                    std::invalid_argument);
    CHECK_NOTHROW(RationalMeasure(amb, {q(1, 4), q(3, 4)}, true));
}

TEST_CASE("amalgamating quarters with thirds over the trivial algebra")
{
    AmbientAlgebra a = AmbientAlgebra::of_size(1);
    AmbientAlgebra b = AmbientAlgebra::of_size(2);
    AmbientAlgebra c = AmbientAlgebra::of_size(2);
    RationalMeasure mu(a, {q(1)});
    RationalMeasure nu(b, {q(1, 4), q(3, 4)});
    RationalMeasure rho(c, {q(1, 3), q(2, 3)});
    AlgebraEmbedding f(a, b, {{0, 1}});
    AlgebraEmbedding g(a, c, {{0, 1}});

    MeasuredAmalgam am = amalgamate_measured(mu, f, nu, g, rho);
    REQUIRE(am.measure.ambient.size() == 4);
    CHECK(am.measure.mass ==
          std::vector<Rational>{q(1, 12), q(1, 6), q(1, 4), q(1, 2)});
    for (int i = 0; i < 2; ++i) {
        CHECK(am.measure.mass_of(am.left.image[i]) == nu.mass[i]);
        CHECK(am.measure.mass_of(am.right.image[i]) == rho.mass[i]);
    }
    CHECK(compose_embeddings(f, am.left).image ==
          compose_embeddings(g, am.right).image);
}

TEST_CASE("amalgamation over identity embeddings is idempotent")
{
    AmbientAlgebra a = AmbientAlgebra::of_size(3);
    RationalMeasure mu(a, {q(1, 2), q(1, 4), q(1, 4)}, true);
    std::vector<Block> id_img = {{0}, {1}, {2}};
    AlgebraEmbedding id(a, a, id_img);
    MeasuredAmalgam am = amalgamate_measured(mu, id, mu, id, mu);
    REQUIRE(am.measure.ambient.size() == 3);
    CHECK(am.measure.mass == mu.mass);
    CHECK(am.measure.dyadic);
}

TEST_CASE("joint embedding of the swap with an uneven identity")
{
    MeasuredSystem s = swap_half();
    AmbientAlgebra tb = AmbientAlgebra::of_size(2);
    MeasuredSystem t(
        PartialIsoSystem(tb, {PartialIso::identity(Subalgebra::discrete(tb))}),
        RationalMeasure(tb, {q(1, 3), q(2, 3)}, false));

    MeasuredJointEmbedding je = jep_measured_systems(s, t);
    REQUIRE(je.system.measure.ambient.size() == 4);
    CHECK(je.system.measure.mass ==
          std::vector<Rational>{q(1, 6), q(1, 3), q(1, 6), q(1, 3)});
    // The product iso is swap (x) identity.
    const PartialIso& chi = je.system.system.isos[0];
    const AmbientAlgebra& amb = je.system.measure.ambient;
    auto maps_to = [&](const std::string& from, const std::string& to) {
        Block img = chi.image_of({amb.index_of(from)});
        return img == Block{amb.index_of(to)};
    };
    CHECK(maps_to("0|0", "1|0"));
    CHECK(maps_to("0|1", "1|1"));
    CHECK(maps_to("1|0", "0|0"));
    CHECK(maps_to("1|1", "0|1"));
    CHECK_FALSE(je.system.measure.dyadic);

    std::string why;
    CHECK(is_system_embedding(s.system, je.system.system, je.left, &why));
    CHECK(is_system_embedding(t.system, je.system.system, je.right, &why));
}

TEST_CASE("joint embedding preserves the dyadic flag")
{
    MeasuredSystem s = swap_half();
    MeasuredJointEmbedding je = jep_measured_systems(s, s);
    CHECK(je.system.measure.dyadic);
    for (const Rational& m : je.system.measure.mass) CHECK(m == q(1, 4));
}

TEST_CASE("extending the one-third rotation to an automorphism")
{
    AmbientAlgebra amb = AmbientAlgebra::of_size(3);
    RationalMeasure mu(amb, {q(1, 3), q(1, 3), q(1, 3)});
    PartialIso psi = iso_of(amb, {{{0}, {2}}, {{1, 2}, {0, 1}}});
    MeasuredSystem s(PartialIsoSystem(amb, {psi}), mu);

    AutomorphismExtension ext = extend_to_automorphisms(s);
    REQUIRE(ext.system.measure.ambient.size() == 3); // no refinement needed
    REQUIRE(is_full_system(ext.system));
    const PartialIso& phi = ext.system.system.isos[0];
    CHECK(phi.map == std::vector<int>{2, 0, 1});
    CHECK(ext.embedding.image == std::vector<Block>{{0}, {1}, {2}});
}

TEST_CASE("equal-mass refinement uses the denominator lcm")
{
    AmbientAlgebra amb = AmbientAlgebra::of_size(3);
    RationalMeasure mu(amb, {q(1, 2), q(1, 4), q(1, 4)}, true);
    MeasuredSystem s(
        PartialIsoSystem(amb,
                         {PartialIso::identity(Subalgebra::discrete(amb))}),
        mu);
    AutomorphismExtension ext = extend_to_automorphisms(s);
    REQUIRE(ext.system.measure.ambient.size() == 4);
    for (const Rational& m : ext.system.measure.mass) CHECK(m == q(1, 4));
    CHECK(ext.embedding.image[0].size() == 2); // the half-atom split in two
    CHECK(ext.embedding.image[1].size() == 1);
    CHECK(ext.system.measure.dyadic);
}

TEST_CASE("already-total measured systems extend to themselves")
{
    MeasuredSystem s = swap_half();
    AutomorphismExtension ext = extend_to_automorphisms(s);
    CHECK(ext.system.system == s.system);
    CHECK(ext.system.measure.mass == s.measure.mass);
}

TEST_CASE("full-system amalgam of an identity and a swap is their product")
{
    AmbientAlgebra sa = AmbientAlgebra::of_size(1);
    MeasuredSystem s(
        PartialIsoSystem(sa,
                         {PartialIso::identity(Subalgebra::discrete(sa))}),
        RationalMeasure(sa, {q(1)}, true));
    AmbientAlgebra two = AmbientAlgebra::of_size(2);
    RationalMeasure half(two, {q(1, 2), q(1, 2)}, true);
    MeasuredSystem t(
        PartialIsoSystem(two,
                         {PartialIso::identity(Subalgebra::discrete(two))}),
        half);
    MeasuredSystem r(
        PartialIsoSystem(two, {iso_of(two, {{{0}, {1}}, {{1}, {0}}})}), half);
    AlgebraEmbedding into(sa, two, {{0, 1}});

    FullSystemAmalgam am = amalgamate_full_systems(s, t, r, into, into);
    REQUIRE(am.system.measure.ambient.size() == 4);
    for (const Rational& m : am.system.measure.mass) CHECK(m == q(1, 4));
    CHECK(am.system.measure.dyadic);
    const PartialIso& theta = am.system.system.isos[0];
    const AmbientAlgebra& amb = am.system.measure.ambient;
    // theta = id (x) swap on labels "b|c".
    CHECK(theta.image_of({amb.index_of("0|0")}) ==
          Block{amb.index_of("0|1")});
    CHECK(theta.image_of({amb.index_of("1|1")}) ==
          Block{amb.index_of("1|0")});
}

TEST_CASE("full-system amalgam over itself is the system again")
{
    MeasuredSystem s = swap_half();
    AlgebraEmbedding id(s.measure.ambient, s.measure.ambient, {{0}, {1}});
    FullSystemAmalgam am = amalgamate_full_systems(s, s, s, id, id);
    CHECK(canonical_system_key(am.system.system) ==
          canonical_system_key(s.system));
    CHECK(am.system.measure.mass == s.measure.mass);
}

TEST_CASE("interval images split left to right")
{
    AmbientAlgebra a = AmbientAlgebra::of_size(2);
    RationalMeasure mu(a, {q(1, 2), q(1, 2)});
    std::vector<IntervalElement> f = {
        IntervalElement({{q(0), q(1, 2)}}),
        IntervalElement({{q(1, 2), q(1)}})};
    AmbientRefinement ref = split_atoms(a, {2, 1});
    RationalMeasure nu(ref.after, {q(1, 4), q(1, 4), q(1, 2)});

    auto out = extend_interval_embedding(mu, f, ref.as_embedding(), nu);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == IntervalElement({{q(0), q(1, 4)}}));
    CHECK(out[1] == IntervalElement({{q(1, 4), q(1, 2)}}));
    CHECK(out[2] == f[1]);
}

TEST_CASE("greedy split consumes whole leading intervals")
{
    AmbientAlgebra a = AmbientAlgebra::of_size(2);
    RationalMeasure mu(a, {q(1, 2), q(1, 2)});
    std::vector<IntervalElement> f = {
        IntervalElement({{q(0), q(1, 4)}, {q(1, 2), q(3, 4)}}),
        IntervalElement({{q(1, 4), q(1, 2)}, {q(3, 4), q(1)}})};
    AmbientRefinement ref = split_atoms(a, {2, 1});
    RationalMeasure nu(ref.after, {q(1, 4), q(1, 4), q(1, 2)});

    auto out = extend_interval_embedding(mu, f, ref.as_embedding(), nu);
    CHECK(out[0] == IntervalElement({{q(0), q(1, 4)}}));
    CHECK(out[1] == IntervalElement({{q(1, 2), q(3, 4)}}));
}

TEST_CASE("unrefined interval embeddings pass through unchanged")
{
    AmbientAlgebra a = AmbientAlgebra::of_size(2);
    RationalMeasure mu(a, {q(1, 3), q(2, 3)});
    std::vector<IntervalElement> f = {
        IntervalElement({{q(0), q(1, 3)}}),
        IntervalElement({{q(1, 3), q(1)}})};
    AlgebraEmbedding id(a, a, {{0}, {1}});
    auto out = extend_interval_embedding(mu, f, id, mu);
    CHECK(out == f);
}

TEST_CASE("randomized measured laws hold exactly")
{
    std::mt19937_64 rng(20260826);
    for (int trial = 0; trial < 300; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        AmbientAlgebra a = AmbientAlgebra::of_size(n);
        RationalMeasure mu = random_measure(rng, a);

        MeasuredExtension left = random_extension(rng, mu);
        MeasuredExtension right = random_extension(rng, mu);
        MeasuredAmalgam am = amalgamate_measured(
            mu, left.embedding, left.measure, right.embedding, right.measure);
        Rational total(0);
        for (const Rational& m : am.measure.mass) total += m;
        REQUIRE(total == q(1));
        for (int b = 0; b < left.measure.ambient.size(); ++b)
            REQUIRE(am.measure.mass_of(am.left.image[b]) ==
                    left.measure.mass[b]);
        for (int c = 0; c < right.measure.ambient.size(); ++c)
            REQUIRE(am.measure.mass_of(am.right.image[c]) ==
                    right.measure.mass[c]);
        REQUIRE(compose_embeddings(left.embedding, am.left).image ==
                compose_embeddings(right.embedding, am.right).image);
    }
}

TEST_CASE("randomized automorphism extensions restrict to their input")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        AmbientAlgebra amb = AmbientAlgebra::of_size(n);
        // An equal-mass measure makes every block bijection mass-preserving.
        std::vector<Rational> mass(static_cast<size_t>(n), q(1, n));
        RationalMeasure mu(amb, mass);
        // Random block permutation of a random partition.
        std::vector<Block> blocks(1 + rng() % static_cast<unsigned>(n));
        for (int x = 0; x < n; ++x)
            blocks[x < static_cast<int>(blocks.size())
                       ? x
                       : static_cast<int>(rng() % blocks.size())]
                .push_back(x);
        // Mass preservation needs equal block sizes; use singletons instead
        // when sizes differ.
        std::vector<size_t> sizes;
        for (const Block& b : blocks) sizes.push_back(b.size());
        std::sort(sizes.begin(), sizes.end());
        bool uniform = sizes.front() == sizes.back();
        if (!uniform) {
            blocks.clear();
            for (int x = 0; x < n; ++x) blocks.push_back({x});
        }
        Subalgebra sub(amb, blocks);
        std::vector<int> perm(blocks.size());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        std::shuffle(perm.begin(), perm.end(), rng);
        MeasuredSystem s(
            PartialIsoSystem(amb, {PartialIso(sub, sub, perm)}), mu);

        AutomorphismExtension ext = extend_to_automorphisms(s);
        REQUIRE(is_full_system(ext.system));
        std::string why;
        REQUIRE(is_system_embedding(s.system, ext.system.system,
                                    ext.embedding, &why));
    }
}

TEST_CASE("randomized interval extensions tile their images")
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        AmbientAlgebra a = AmbientAlgebra::of_size(n);
        RationalMeasure mu = random_measure(rng, a);
        // Tile [0,1) left to right in atom order.
        std::vector<IntervalElement> f;
        Rational cursor(0);
        for (int x = 0; x < n; ++x) {
            f.push_back(IntervalElement({{cursor, cursor + mu.mass[x]}}));
            cursor += mu.mass[x];
        }
        MeasuredExtension ext = random_extension(rng, mu);
        auto out = extend_interval_embedding(mu, f, ext.embedding, ext.measure);
        for (int b = 0; b < ext.measure.ambient.size(); ++b)
            REQUIRE(out[static_cast<size_t>(b)].mass() == ext.measure.mass[b]);
        // Images of distinct atoms stay disjoint: their sorted union tiles.
        std::vector<std::pair<Rational, Rational>> all;
        for (const IntervalElement& e : out)
            all.insert(all.end(), e.intervals.begin(), e.intervals.end());
        std::sort(all.begin(), all.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        Rational at(0);
        for (const auto& [p, qq] : all) {
            REQUIRE(p >= at);
            REQUIRE(p == at); // no gaps either, images cover [0,1)
            at = qq;
        }
        REQUIRE(at == q(1));
    }
}
