#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "amalgam/builder.hpp"

using namespace amalgam;

namespace {

std::vector<GenericRequirement> with_split_extensions(
    const ClassDriver& d, const std::vector<std::string>& conditions)
{
    std::vector<GenericRequirement> out;
    for (const std::string& c : conditions) {
        GenericRequirement g;
        g.condition = c;
        std::string shat = d.extension_candidates(c).front();
        std::vector<std::string> splits = boolean_atom_splits(shat);
        g.extensions = {splits.front(), splits.back()};
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace

TEST_CASE("condition schedules enumerate up to isomorphism")
{
    CHECK(boolean_condition_schedule(2, 2).size() == 3);
    CHECK(boolean_condition_schedule(4, 2).size() == 12);
    CHECK(boolean_condition_schedule(3, 3).size() == 8);
    // Only the trivial condition embeds into the others; the eleven
    // proper conditions are mutually incomparable, so the schedule is not
    // an artifact of duplicates.
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    int comparable = 0;
    for (const auto& a : sched)
        for (const auto& b : sched)
            if (a != b && d->embeds(a, b)) ++comparable;
    CHECK(comparable == 11);
}

TEST_CASE("dense orbit build meets every scheduled condition and replays")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    ConstructionTrace t =
        build_dense_orbit_approx(*d, sched.front(), sched, 64);
    CHECK(t.complete);
    CHECK(t.stages.size() == sched.size());
    CHECK(t.mode == "dense-orbit");
    std::string why;
    CHECK(replay_trace(*d, t, &why));
    CHECK(why.empty());
    // The final condition stays desk-scale thanks to embedding reuse.
    CHECK(d->system_size(t.final_condition) <= 256);
    // Every stage witness embeds its requirement into that stage's
    // condition; the chain is validated stage by stage, statelessly.
    for (const BuildStage& st : t.stages) {
        CHECK(st.kind == "dense");
        CHECK(d->valid_embedding(st.requirement, st.condition, st.witness));
    }
}

TEST_CASE("dense orbit build works for a point-based class")
{
    auto d = make_metric_driver();
    auto sched = d->enumerate_systems(1, 2);
    REQUIRE(!sched.empty());
    ConstructionTrace t =
        build_dense_orbit_approx(*d, sched.front(), sched, 64);
    CHECK(t.complete);
    CHECK(replay_trace(*d, t));
}

TEST_CASE("stage budget exhaustion yields a partial, replayable trace")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    ConstructionTrace t =
        build_dense_orbit_approx(*d, sched.front(), sched, 3);
    CHECK(!t.complete);
    CHECK(t.stages.size() == 3);
    CHECK(replay_trace(*d, t));
}

TEST_CASE("tampered traces are rejected on replay")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    ConstructionTrace t =
        build_dense_orbit_approx(*d, sched.front(), sched, 64);
    REQUIRE(t.stages.size() >= 3);

    ConstructionTrace bad = t;
    bad.stages[2].witness = bad.stages[2].embed_prev;
    std::string why;
    CHECK(!replay_trace(*d, bad, &why));
    CHECK(!why.empty());

    bad = t;
    bad.stages[1].requirement = sched.back();
    CHECK(!replay_trace(*d, bad));

    bad = t;
    bad.final_condition = t.initial;
    CHECK(!replay_trace(*d, bad));
}

TEST_CASE("generic build routes conditions through extension witnesses")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    std::vector<std::string> some = {sched[2], sched[5], sched[9]};
    ConstructionTrace t = build_generic_approx(
        *d, sched.front(), with_split_extensions(*d, some), 64);
    CHECK(t.complete);
    CHECK(t.mode == "generic");
    // One witness stage plus two extension stages per condition.
    CHECK(t.stages.size() == 9);
    CHECK(replay_trace(*d, t));
    // Extension stages realize their extension over the same witness
    // placement: the recorded square commutes.
    for (const BuildStage& st : t.stages) {
        if (st.kind != "extension") continue;
        CHECK(compose_morphisms(st.base_embed, st.witness) ==
              st.base_to_condition);
    }
}

TEST_CASE("generic build completes on the full small-condition schedule")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    ConstructionTrace t = build_generic_approx(
        *d, sched.front(), with_split_extensions(*d, sched), 256);
    CHECK(t.complete);
    CHECK(t.stages.size() == 3 * sched.size());
    CHECK(replay_trace(*d, t));
    CHECK(d->system_size(t.final_condition) <= 4096);
}

TEST_CASE("generic build with empty extension families degenerates to the "
          "dense build")
{
    auto d = make_boolean_driver();
    auto sched = boolean_condition_schedule(4, 2);
    std::vector<GenericRequirement> gs;
    for (const auto& c : sched) gs.push_back({c, {}});
    ConstructionTrace t = build_generic_approx(*d, sched.front(), gs, 64);
    CHECK(t.complete);
    CHECK(t.stages.size() == sched.size());
    for (const BuildStage& st : t.stages) CHECK(st.kind == "witness");
    CHECK(replay_trace(*d, t));
    // Meeting the witness meets the condition itself.
    for (const BuildStage& st : t.stages)
        CHECK(d->valid_embedding(st.requirement, st.condition, st.witness));
}

TEST_CASE("generic build requires an extension witness")
{
    auto d = make_equiv2_driver();
    auto sched = d->enumerate_systems(1, 2);
    std::vector<GenericRequirement> gs = {{sched.front(), {}}};
    CHECK_THROWS_AS(build_generic_approx(*d, sched.front(), gs, 8),
                    std::invalid_argument);
}

TEST_CASE("grid factorization is exact and respects rows and columns")
{
    // Exhaustive over the 2 x 2 grid.
    GridPermutation rho{2, 2, {0, 1, 2, 3}};
    std::vector<int> base = {0, 1, 2, 3};
    int count = 0;
    do {
        rho.perm = base;
        GridFactorization f = factor_grid_permutation(rho);
        CHECK(grid_factorization_ok(rho, f));
        ++count;
    } while (std::next_permutation(base.begin(), base.end()));
    CHECK(count == 24);
}

TEST_CASE("grid factorization handles rectangular grids exhaustively")
{
    GridPermutation rho{2, 3, {}};
    std::vector<int> base(6);
    std::iota(base.begin(), base.end(), 0);
    int count = 0;
    do {
        rho.perm = base;
        GridFactorization f = factor_grid_permutation(rho);
        CHECK(grid_factorization_ok(rho, f));
        ++count;
    } while (std::next_permutation(base.begin(), base.end()));
    CHECK(count == 720);
}

TEST_CASE("grid factorization is deterministic and canonical on identity")
{
    GridPermutation rho{3, 3, {}};
    rho.perm.resize(9);
    std::iota(rho.perm.begin(), rho.perm.end(), 0);
    GridFactorization f = factor_grid_permutation(rho);
    CHECK(f.f1.perm == rho.perm);
    CHECK(f.h.perm == rho.perm);
    CHECK(f.f2.perm == rho.perm);

    GridPermutation swap{2, 2, {3, 2, 1, 0}};
    GridFactorization a = factor_grid_permutation(swap);
    GridFactorization b = factor_grid_permutation(swap);
    CHECK(a.f1.perm == b.f1.perm);
    CHECK(a.h.perm == b.h.perm);
    CHECK(a.f2.perm == b.f2.perm);
}

TEST_CASE("grid factorization validator rejects improper factorizations")
{
    GridPermutation rho{2, 2, {1, 0, 2, 3}};
    GridFactorization f = factor_grid_permutation(rho);
    CHECK(grid_factorization_ok(rho, f));
    GridFactorization bad = f;
    std::swap(bad.f1, bad.h); // roles no longer match
    CHECK(!grid_factorization_ok(rho, bad));
    GridPermutation other{2, 2, {0, 1, 2, 3}};
    CHECK(!grid_factorization_ok(other, f));
}

TEST_CASE("grid permutation input is validated")
{
    CHECK_THROWS_AS(factor_grid_permutation({0, 2, {}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(factor_grid_permutation({2, 2, {0, 1, 2}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(factor_grid_permutation({2, 2, {0, 0, 1, 2}}),
                    std::invalid_argument);
}

TEST_CASE("shift independence certificates count product atoms exactly")
{
    ShiftCertificate c0 = shift_independence(0, 2);
    CHECK(c0.valid);
    CHECK(c0.power == 1);
    CHECK(c0.atom_count == 4);

    ShiftCertificate c1 = shift_independence(1, 6);
    CHECK(c1.valid);
    CHECK(c1.power == 3);
    CHECK(c1.atom_count == 64);

    ShiftCertificate c2 = shift_independence(2, 12);
    CHECK(c2.valid);
    CHECK(c2.power == 5);
    CHECK(c2.atom_count == 1024);
}

TEST_CASE("shift independence rejects too-shallow truncations")
{
    CHECK_THROWS_AS(shift_independence(1, 5), std::invalid_argument);
    CHECK_THROWS_AS(shift_independence(-1, 10), std::invalid_argument);
}
