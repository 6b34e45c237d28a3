#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "amalgam/io.hpp"

using namespace amalgam;

namespace {

PartialIsoSystem sample_boolean()
{
    AmbientAlgebra amb({"a", "b", "c"});
    Subalgebra dom(amb, {{0}, {1, 2}});
    Subalgebra ran(amb, {{0, 1}, {2}});
    return PartialIsoSystem(amb, {PartialIso(dom, ran, {1, 0})});
}

} // namespace

TEST_CASE("boolean systems round-trip exactly")
{
    PartialIsoSystem s = sample_boolean();
    nlohmann::json doc = to_document(s);
    CHECK(document_kind(doc) == "boolean-system");
    CHECK(doc["format_version"] == kFormatVersion);
    PartialIsoSystem back = boolean_system_from_document(doc);
    CHECK(back == s);
    // Text form is stable: dump, parse, dump again byte-identically.
    std::string text = dump_document(doc);
    CHECK(dump_document(parse_document(text)) == text);
}

TEST_CASE("measured systems round-trip with exact rationals")
{
    PartialIsoSystem s = sample_boolean();
    RationalMeasure mu(s.ambient,
                       {Rational(1, 4), Rational(1, 2), Rational(1, 4)},
                       true);
    MeasuredSystem ms(s, mu);
    nlohmann::json doc = to_document(ms);
    MeasuredSystem back = measured_system_from_document(doc);
    CHECK(back.system == s);
    CHECK(back.measure.mass == mu.mass);
    CHECK(back.measure.dyadic);
    CHECK(doc["payload"]["mass"][0] == "1/4");
}

TEST_CASE("metric systems round-trip and validate on load")
{
    FiniteMetricSpace sp({"x", "y", "z"},
                         {{Rational(0), Rational(1), Rational(2)},
                          {Rational(1), Rational(0), Rational(2)},
                          {Rational(2), Rational(2), Rational(0)}});
    PartialIsometry iso;
    iso.pairs = {{0, 1}, {1, 0}};
    MetricSystem ms(sp, {iso});
    nlohmann::json doc = to_document(ms);
    MetricSystem back = metric_system_from_document(doc);
    CHECK(back.space.points == sp.points);
    CHECK(back.space.dist == sp.dist);
    CHECK(back.isos[0].pairs == iso.pairs);

    nlohmann::json tampered = doc;
    tampered["payload"]["isos"][0][0] = {0, 2}; // x -> z is not distance
    CHECK_THROWS_AS(metric_system_from_document(tampered),
                    std::invalid_argument);
}

TEST_CASE("tree isomorphisms round-trip through node strings")
{
    FiniteTree src({{}, {0}});
    FiniteTree tgt({{}, {1}});
    TreeIso iso(src, tgt, {{}, {1}});
    nlohmann::json doc = to_document(iso, 2);
    auto [m, back] = tree_iso_from_document(doc);
    CHECK(m == 2);
    CHECK(back.source.nodes == src.nodes);
    CHECK(back.target.nodes == tgt.nodes);
    CHECK(back.images == iso.images);
    CHECK(doc["payload"]["source"][0] == "<>");
    CHECK(doc["payload"]["source"][1] == "<0>");
}

TEST_CASE("grid permutations round-trip")
{
    GridPermutation g{2, 3, {3, 4, 5, 0, 1, 2}};
    nlohmann::json doc = to_document(g);
    GridPermutation back = grid_permutation_from_document(doc);
    CHECK(back.rows == 2);
    CHECK(back.cols == 3);
    CHECK(back.perm == g.perm);
}

TEST_CASE("construction traces round-trip and still replay")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(3, 2);
    ConstructionTrace t =
        build_dense_orbit_approx(*d, sched.front(), sched, 32);
    REQUIRE(t.complete);
    nlohmann::json doc = to_document(t);
    ConstructionTrace back = trace_from_document(doc);
    CHECK(back.driver == t.driver);
    CHECK(back.mode == t.mode);
    CHECK(back.initial == t.initial);
    CHECK(back.final_condition == t.final_condition);
    CHECK(back.complete == t.complete);
    REQUIRE(back.stages.size() == t.stages.size());
    for (size_t i = 0; i < t.stages.size(); ++i) {
        CHECK(back.stages[i].kind == t.stages[i].kind);
        CHECK(back.stages[i].witness == t.stages[i].witness);
    }
    CHECK(replay_trace(*d, back));
    CHECK(dump_document(to_document(back)) == dump_document(doc));
}

TEST_CASE("check reports serialize with their verdict")
{
    auto d = make_equiv2_driver();
    CheckReport rep = check_jep(*d, 1, 2);
    nlohmann::json doc = to_document(rep);
    CHECK(document_kind(doc) == "check-report");
    CHECK(doc["payload"]["holds"] == false);
    CHECK(doc["payload"]["bound_independent"] == true);
    CHECK(doc["payload"]["counterexample"].size() == 2);
}

TEST_CASE("malformed documents are rejected")
{
    CHECK_THROWS_AS(parse_document("{not json"), std::invalid_argument);
    nlohmann::json doc = to_document(sample_boolean());
    nlohmann::json wrong = doc;
    wrong["kind"] = "metric-system";
    CHECK_THROWS_AS(boolean_system_from_document(wrong),
                    std::invalid_argument);
    wrong = doc;
    wrong["format_version"] = 99;
    CHECK_THROWS_AS(boolean_system_from_document(wrong),
                    std::invalid_argument);
    wrong = doc;
    wrong["payload"]["isos"][0]["domain"][0][0] = "zz"; // unknown label
    CHECK_THROWS_AS(boolean_system_from_document(wrong),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_document_file("/nonexistent/x.json"),
                    std::invalid_argument);
}
