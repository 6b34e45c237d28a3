#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "amalgam/checkers.hpp"

using namespace amalgam;

namespace {

bool mentions_pair_without_joint_embedding(const ClassDriver& d,
                                           const CheckReport& rep)
{
    if (rep.counterexample.size() != 2) return false;
    return !d.joint_embed(rep.counterexample[0], rep.counterexample[1])
                .has_value();
}

} // namespace

TEST_CASE("morphism composition takes unions of images")
{
    Morphism f = {{0, 1}, {2}};
    Morphism g = {{1}, {0, 2}, {2}};
    Morphism fg = compose_morphisms(f, g);
    CHECK(fg == Morphism{{0, 1, 2}, {2}});
}

TEST_CASE("two-class equivalences: the switching pair refutes JEP")
{
    auto d = make_equiv2_driver();
    // A same-class partial map and a class-crossing partial map admit no
    // common extension inside any structure with at most two classes.
    std::string same = "2|1111|1.";
    std::string cross = "2|1001|1.";
    CHECK(d->embeds(same, same));
    CHECK(d->embeds(cross, cross));
    CHECK_FALSE(d->joint_embed(same, cross).has_value());

    CheckReport rep = check_jep(*d, 1, 2);
    CHECK(rep.property == "JEP");
    CHECK_FALSE(rep.holds);
    CHECK(rep.bound_independent);
    CHECK(mentions_pair_without_joint_embedding(*d, rep));
}

TEST_CASE("two-class equivalences: JEP holds for same-class maps only")
{
    // Pinning the base to a cross-class pair keeps only systems that
    // contain the switching behaviour; those are jointly embeddable.
    auto d = make_equiv2_driver();
    std::string cross = "2|1001|1.";
    CheckReport rep = check_jep(*d, 1, 2, &cross);
    CHECK(rep.property == "CJEP");
    CHECK(rep.holds);
}

TEST_CASE("linear orders: JEP holds at n=1 and n=2")
{
    auto d = make_linear_order_driver();
    CheckReport r1 = check_jep(*d, 1, 3);
    CHECK(r1.holds);
    CheckReport r2 = check_jep(*d, 2, 2);
    CHECK(r2.holds);
}

TEST_CASE("graphs: JEP holds at n=1 and n=2")
{
    auto d = make_graph_driver();
    CHECK(check_jep(*d, 1, 2).holds);
    CHECK(check_jep(*d, 2, 2).holds);
}

TEST_CASE("metric systems: JEP holds and the full systems are recognized")
{
    auto d = make_metric_driver();
    CHECK(check_jep(*d, 1, 2).holds);
    CHECK(d->has_cofinal_oracle());
    CHECK(d->cofinal_member("2|1001|10"));      // total swap
    CHECK_FALSE(d->cofinal_member("2|1001|1.")); // partial map
}

TEST_CASE("boolean systems: JEP holds at n=1 and n=2")
{
    auto d = make_boolean_driver();
    CHECK(check_jep(*d, 1, 2).holds);
    CHECK(check_jep(*d, 2, 2).holds);
}

TEST_CASE("boolean systems: JEP holds over a pinned one-atom base")
{
    auto d = make_boolean_driver();
    std::string base = "B1|0;0;0";
    CHECK(d->embeds(base, base));
    CheckReport rep = check_jep(*d, 1, 2, &base);
    CHECK(rep.property == "CJEP");
    CHECK(rep.holds);
}

TEST_CASE("boolean WAP: the normal refinement always serves as the witness")
{
    auto d = make_boolean_driver();
    for (const std::string& s : d->enumerate_systems(1, 2)) {
        auto candidates = d->extension_candidates(s);
        REQUIRE(candidates.size() == 1);
        CHECK(d->embeds(s, candidates[0]));
        CHECK(wap_witness_ok(*d, s, candidates[0], 2));
    }
    CHECK(check_wap(*d, 1, 2).holds);
}

TEST_CASE("linear orders: WAP holds at the bound")
{
    auto d = make_linear_order_driver();
    CheckReport rep = check_wap(*d, 1, 2);
    CHECK(rep.holds);
}

TEST_CASE("graphs and metric systems: WAP holds at the bound")
{
    CHECK(check_wap(*make_graph_driver(), 1, 1).holds);
    CHECK(check_wap(*make_metric_driver(), 1, 1).holds);
}

TEST_CASE("CAP holds for boolean and metric drivers; equiv2 has no oracle")
{
    CHECK(check_cap(*make_boolean_driver(), 1, 2).holds);
    CHECK(check_cap(*make_metric_driver(), 1, 2).holds);
    CHECK_THROWS_AS(check_cap(*make_equiv2_driver(), 1, 2),
                    std::invalid_argument);
}

TEST_CASE("witness embeddings named in reports pass the validators")
{
    auto d = make_graph_driver();
    for (const std::string& s : d->enumerate_systems(1, 2))
        for (const std::string& t : d->enumerate_systems(1, 2)) {
            auto u = d->joint_embed(s, t);
            REQUIRE(u.has_value());
            bool found = false;
            for (const Morphism& f : d->enumerate_embeddings(s, *u)) {
                CHECK(d->valid_embedding(s, *u, f));
                found = true;
            }
            CHECK(found);
        }
}

TEST_CASE("parallel and serial runs produce identical reports")
{
    auto d = make_graph_driver();
    CheckOptions serial;
    serial.parallel = false;
    CheckOptions parallel;
    parallel.parallel = true;
    CheckReport a = check_jep(*d, 1, 2, nullptr, serial);
    CheckReport b = check_jep(*d, 1, 2, nullptr, parallel);
    CHECK(a.holds == b.holds);
    CHECK(a.detail == b.detail);

    auto lo = make_linear_order_driver();
    CheckReport wa = check_wap(*lo, 1, 2, serial);
    CheckReport wb = check_wap(*lo, 1, 2, parallel);
    CHECK(wa.holds == wb.holds);
    CHECK(wa.detail == wb.detail);
}

TEST_CASE("JEP is symmetric: flipping the pair yields a joint embedding too")
{
    auto d = make_linear_order_driver();
    auto systems = d->enumerate_systems(1, 2);
    for (const std::string& s : systems)
        for (const std::string& t : systems) {
            auto u = d->joint_embed(s, t);
            auto v = d->joint_embed(t, s);
            REQUIRE(u.has_value());
            REQUIRE(v.has_value());
            CHECK(d->embeds(s, *v));
            CHECK(d->embeds(t, *u));
        }
}
