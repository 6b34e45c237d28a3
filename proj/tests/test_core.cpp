#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "amalgam/boolean_core.hpp"
#include "amalgam/rational.hpp"

using namespace amalgam;

TEST_CASE("rational arithmetic stays in lowest terms")
{
    Rational a(2, 4);
    CHECK(a.num() == 1);
    CHECK(a.den() == 2);
    CHECK((a + Rational(1, 3)).str() == "5/6");
    CHECK((Rational(1, 3) * Rational(3, 5)).str() == "1/5");
    CHECK((Rational(1, 2) - Rational(1, 2)).str() == "0");
    CHECK((Rational(-1, -2)).str() == "1/2");
    CHECK(Rational(1, -2).den() == 2);
    CHECK(Rational(1, -2).num() == -1);
    CHECK(Rational::parse("7/3") == Rational(7, 3));
    CHECK(Rational::parse("-4") == Rational(-4));
    CHECK(Rational(3, 8).is_dyadic());
    CHECK(!Rational(1, 3).is_dyadic());
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(Rational(1, 2) / Rational(0), std::invalid_argument);
    CHECK(checked_lcm(4, 6) == 12);
}

TEST_CASE("lineage suffixes and atom splitting")
{
    CHECK(lineage_suffix(0) == "a");
    CHECK(lineage_suffix(25) == "z");
    CHECK(lineage_suffix(26) == "aa");

    auto amb = AmbientAlgebra::of_size(2);
    auto r = split_atom(amb, 0, 2);
    CHECK(r.after.size() == 3);
    CHECK(r.after.index_of("0.a") >= 0);
    CHECK(r.after.index_of("0.b") >= 0);
    CHECK(r.after.index_of("1") >= 0);
    CHECK(r.children[0].size() == 2);
    CHECK(r.children[1].size() == 1);
}

TEST_CASE("subalgebra join is the common refinement")
{
    auto amb = AmbientAlgebra::of_size(4);
    Subalgebra b(amb, {{0, 1}, {2, 3}});
    Subalgebra c(amb, {{0, 2}, {1, 3}});
    auto j = join_subalgebras(b, c);
    CHECK(j.block_count() == 4);
    CHECK(refines(j, b));
    CHECK(refines(j, c));
    CHECK(join_subalgebras(b, b) == b);

    CHECK_THROWS(Subalgebra(amb, {{0, 1}, {1, 2, 3}}));
    CHECK_THROWS(Subalgebra(amb, {{0, 1}, {2}}));
}

TEST_CASE("partial iso block images")
{
    auto amb = AmbientAlgebra::of_size(3);
    // {0} -> {2}, {1,2} -> {0,1}
    PartialIso psi(Subalgebra(amb, {{0}, {1, 2}}),
                   Subalgebra(amb, {{0, 1}, {2}}), {1, 0});
    CHECK(psi.image_of({0}) == Block{2});
    CHECK(psi.image_of({1, 2}) == Block{0, 1});
    CHECK(psi.image_of({0, 1, 2}) == Block{0, 1, 2});
    CHECK(psi.inverse().image_of({2}) == Block{0});
    CHECK_THROWS(psi.image_of({1}));
}

TEST_CASE("system embedding validation and search")
{
    // S: identity on the 2-atom algebra; T: identity on the 3-atom one.
    auto a2 = AmbientAlgebra::of_size(2);
    auto a3 = AmbientAlgebra::of_size(3);
    PartialIsoSystem s(a2, {PartialIso::identity(Subalgebra::discrete(a2))});
    PartialIsoSystem t(a3, {PartialIso::identity(Subalgebra::discrete(a3))});
    auto w = embed_system(s, t);
    REQUIRE(w.has_value());
    std::string why;
    CHECK(is_system_embedding(s, t, w->base, &why));

    // The 2-atom swap does not embed into the 2-atom identity.
    PartialIsoSystem sw(a2, {PartialIso(Subalgebra::discrete(a2),
                                        Subalgebra::discrete(a2), {1, 0})});
    CHECK(!embed_system(sw, s).has_value());
    // ... but embeds into the 4-atom double swap (01)(23) as {0,2},{1,3}.
    auto a4 = AmbientAlgebra::of_size(4);
    PartialIsoSystem dsw(a4, {PartialIso(Subalgebra::discrete(a4),
                                         Subalgebra::discrete(a4),
                                         {1, 0, 3, 2})});
    auto w2 = embed_system(sw, dsw);
    REQUIRE(w2.has_value());
    CHECK(is_system_embedding(sw, dsw, w2->base));
}

TEST_CASE("embedding composition and lifting")
{
    auto amb = AmbientAlgebra::of_size(2);
    auto r1 = split_atom(amb, 0, 2);
    auto r2 = split_atom(r1.after, r1.after.index_of("1"), 3);
    auto f = compose_embeddings(r1.as_embedding(), r2.as_embedding());
    CHECK(f.apply({0, 1}).size() == 5);

    PartialIso psi(Subalgebra(amb, {{0}, {1}}), Subalgebra(amb, {{0}, {1}}),
                   {1, 0});
    auto lifted = lift_iso(r1, psi);
    CHECK(lifted.domain.block_count() == 2);
    // "0.a","0.b" block maps to "1" block and vice versa.
    Block zero_block = lifted.domain.blocks[lifted.domain.block_of(
        r1.after.index_of("0.a"))];
    CHECK(lifted.image_of(zero_block) ==
          Block{r1.after.index_of("1")});
}

TEST_CASE("canonical keys identify isomorphic systems")
{
    auto amb = AmbientAlgebra::of_size(3);
    PartialIso p1(Subalgebra(amb, {{0}, {1, 2}}),
                  Subalgebra(amb, {{0, 1}, {2}}), {1, 0});
    PartialIso p2(Subalgebra(amb, {{2}, {0, 1}}),
                  Subalgebra(amb, {{1, 2}, {0}}), {1, 0});
    PartialIsoSystem s1(amb, {p1});
    PartialIsoSystem s2(amb, {p2});
    CHECK(canonical_system_key(s1) == canonical_system_key(s2));

    PartialIsoSystem id3(
        amb, {PartialIso::identity(Subalgebra(amb, {{0}, {1, 2}}))});
    CHECK(canonical_system_key(s1) != canonical_system_key(id3));
}
