#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "amalgam/metric.hpp"

using namespace amalgam;

namespace {

Rational q(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

FiniteMetricSpace one_point(const std::string& label)
{
    return FiniteMetricSpace({label}, {{q(0)}});
}

FiniteMetricSpace path(const std::vector<std::string>& pts, const Rational& step)
{
    std::vector<std::vector<Rational>> d(pts.size(),
                                         std::vector<Rational>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = 0; j < pts.size(); ++j)
            d[i][j] = step * q(static_cast<std::int64_t>(i > j ? i - j : j - i));
    return FiniteMetricSpace(pts, d);
}

// A random metric: start from a random symmetric integer matrix in [1,9]
// and close it under shortest paths, which repairs every triangle.
FiniteMetricSpace random_space(std::mt19937_64& rng, int n)
{
    std::vector<std::string> pts;
    for (int i = 0; i < n; ++i) pts.push_back("p" + std::to_string(i));
    std::vector<std::vector<Rational>> d(n, std::vector<Rational>(n, q(0)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d[i][j] = d[j][i] = q(1 + static_cast<std::int64_t>(rng() % 9));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && d[i][k] + d[k][j] < d[i][j])
                    d[i][j] = d[i][k] + d[k][j];
    return FiniteMetricSpace(pts, d);
}

} // namespace

TEST_CASE("metric construction enforces the axioms")
{
    CHECK_THROWS_AS(FiniteMetricSpace({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(FiniteMetricSpace({"a", "b"},
                                      {{q(0), q(0)}, {q(0), q(0)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteMetricSpace({"a", "b"}, {{q(0), q(1)}, {q(2), q(0)}}),
                    std::invalid_argument);
    // Triangle violation: d(a,c)=5 > 1+1.
    CHECK_THROWS_AS(FiniteMetricSpace({"a", "b", "c"},
                                      {{q(0), q(1), q(5)},
                                       {q(1), q(0), q(1)},
                                       {q(5), q(1), q(0)}}),
                    std::invalid_argument);
    CHECK(one_point("a").diameter() == q(0));
}

TEST_CASE("joint embedding of two single points sits at distance 1")
{
    MetricSystem s(one_point("a"), {PartialIsometry{{{0, 0}}}});
    MetricSystem t(one_point("b"), {PartialIsometry{{{0, 0}}}});
    MetricJointEmbedding je = jep_metric_systems(s, t);
    REQUIRE(je.system.space.size() == 2);
    CHECK(je.system.space.dist[0][1] == q(1));
    CHECK(je.system.space.points ==
          std::vector<std::string>{"s.a", "t.b"});
}

TEST_CASE("cross distance is the diameter sum plus one")
{
    MetricSystem s(path({"a", "b"}, q(3)), {});
    MetricSystem t(path({"c", "d"}, q(2)), {});
    MetricJointEmbedding je = jep_metric_systems(s, t);
    const Rational k = q(6);
    for (int i : je.left)
        for (int j : je.right) {
            CHECK(je.system.space.dist[i][j] == k);
            CHECK(k > s.space.diameter() + t.space.diameter());
        }
}

TEST_CASE("joint embedding takes isos to partial isometries of the union")
{
    // S: two points at distance 2 with the swap; T: three on a line with a
    // shift by one step.
    MetricSystem s(path({"a", "b"}, q(2)),
                   {PartialIsometry{{{0, 1}, {1, 0}}}});
    MetricSystem t(path({"x", "y", "z"}, q(1)),
                   {PartialIsometry{{{0, 1}, {1, 2}}}});
    MetricJointEmbedding je = jep_metric_systems(s, t);
    std::string why;
    CHECK(is_partial_isometry(je.system.space, je.system.isos[0], &why));
    CHECK(je.system.isos[0].pairs.size() == 4);
}

TEST_CASE("amalgamation over the whole space changes nothing")
{
    FiniteMetricSpace a = path({"a", "b", "c"}, q(1));
    FiniteMetricSpace d = amalgamate_metric(a, a);
    CHECK(d.points == a.points);
    CHECK(d.dist == a.dist);
}

TEST_CASE("single shared point gives the sum distance")
{
    FiniteMetricSpace b({"z", "b"}, {{q(0), q(1)}, {q(1), q(0)}});
    FiniteMetricSpace c({"z", "c"}, {{q(0), q(2)}, {q(2), q(0)}});
    FiniteMetricSpace d = amalgamate_metric(b, c);
    REQUIRE(d.size() == 3);
    CHECK(d.dist[d.index_of("b")][d.index_of("c")] == q(3));
    CHECK(d.dist[d.index_of("z")][d.index_of("b")] == q(1));
    CHECK(d.dist[d.index_of("z")][d.index_of("c")] == q(2));
}

TEST_CASE("two shared points give the minimum path")
{
    // d(b,c) = min(1+6, 4+1) = 5: the two candidate paths differ and the
    // smaller one wins.
    FiniteMetricSpace b({"z1", "z2", "b"},
                        {{q(0), q(5), q(1)},
                         {q(5), q(0), q(4)},
                         {q(1), q(4), q(0)}});
    FiniteMetricSpace c({"z1", "z2", "c"},
                        {{q(0), q(5), q(6)},
                         {q(5), q(0), q(1)},
                         {q(6), q(1), q(0)}});
    FiniteMetricSpace d = amalgamate_metric(b, c);
    CHECK(d.dist[d.index_of("b")][d.index_of("c")] == q(5));
}

TEST_CASE("disagreeing restrictions are rejected")
{
    FiniteMetricSpace b({"z1", "z2", "b"},
                        {{q(0), q(2), q(1)},
                         {q(2), q(0), q(1)},
                         {q(1), q(1), q(0)}});
    FiniteMetricSpace c({"z1", "z2"}, {{q(0), q(3)}, {q(3), q(0)}});
    CHECK_THROWS_AS(amalgamate_metric(b, c), std::invalid_argument);
}

TEST_CASE("identity isometries union to the identity on the amalgam")
{
    FiniteMetricSpace b({"z", "b"}, {{q(0), q(1)}, {q(1), q(0)}});
    FiniteMetricSpace c({"z", "c"}, {{q(0), q(2)}, {q(2), q(0)}});
    PartialIsometry phi{{{0, 0}, {1, 1}}};
    PartialIsometry chi{{{0, 0}, {1, 1}}};
    UnionIsometry u = union_isometry(b, c, phi, chi);
    REQUIRE(u.theta.pairs.size() == 3);
    for (const auto& [x, y] : u.theta.pairs) CHECK(x == y);
}

TEST_CASE("an A-equidistant swap unions with the identity")
{
    // b1, b2 both at distance 2 from z and distance 3 from each other.
    FiniteMetricSpace b({"z", "b1", "b2"},
                        {{q(0), q(2), q(2)},
                         {q(2), q(0), q(3)},
                         {q(2), q(3), q(0)}});
    FiniteMetricSpace c({"z", "c"}, {{q(0), q(1)}, {q(1), q(0)}});
    PartialIsometry phi{{{0, 0}, {1, 2}, {2, 1}}};
    PartialIsometry chi{{{0, 0}, {1, 1}}};
    UnionIsometry u = union_isometry(b, c, phi, chi);
    std::string why;
    CHECK(is_partial_isometry(u.amalgam, u.theta, &why));
    CHECK(u.theta.image_of(u.amalgam.index_of("b1")) ==
          u.amalgam.index_of("b2"));
    CHECK(u.theta.image_of(u.amalgam.index_of("c")) ==
          u.amalgam.index_of("c"));
}

TEST_CASE("maps disagreeing on shared points are rejected")
{
    FiniteMetricSpace b({"z1", "z2", "b"},
                        {{q(0), q(2), q(2)},
                         {q(2), q(0), q(2)},
                         {q(2), q(2), q(0)}});
    FiniteMetricSpace c({"z1", "z2"}, {{q(0), q(2)}, {q(2), q(0)}});
    PartialIsometry phi{{{0, 0}, {1, 1}}};
    PartialIsometry chi{{{0, 1}, {1, 0}}}; // swaps z1, z2
    CHECK_THROWS_AS(union_isometry(b, c, phi, chi), std::invalid_argument);
}

TEST_CASE("randomized amalgams extend both sides and stay metric")
{
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 300; ++trial) {
        int na = 1 + static_cast<int>(rng() % 3);
        int nb = na + static_cast<int>(rng() % 3);
        int nc = na + static_cast<int>(rng() % 3);
        // Build B and C extending a common A: close a random matrix over
        // the union, then read off the two restrictions.
        FiniteMetricSpace whole = random_space(rng, nb + nc - na);
        auto restrict_to = [&](std::vector<int> idx) {
            std::vector<std::string> pts;
            std::vector<std::vector<Rational>> d(
                idx.size(), std::vector<Rational>(idx.size()));
            for (size_t i = 0; i < idx.size(); ++i) {
                pts.push_back(whole.points[static_cast<size_t>(idx[i])]);
                for (size_t j = 0; j < idx.size(); ++j)
                    d[i][j] = whole.dist[idx[i]][idx[j]];
            }
            return FiniteMetricSpace(pts, d);
        };
        std::vector<int> bi, ci;
        for (int i = 0; i < nb; ++i) bi.push_back(i);
        for (int i = 0; i < na; ++i) ci.push_back(i);
        for (int i = nb; i < nb + nc - na; ++i) ci.push_back(i);
        FiniteMetricSpace b = restrict_to(bi), c = restrict_to(ci);

        // The constructor inside certifies the triangle inequality.
        FiniteMetricSpace d = amalgamate_metric(b, c);
        for (int i = 0; i < b.size(); ++i)
            for (int j = 0; j < b.size(); ++j)
                REQUIRE(d.dist[d.index_of(b.points[i])]
                              [d.index_of(b.points[j])] == b.dist[i][j]);
        for (int i = 0; i < c.size(); ++i)
            for (int j = 0; j < c.size(); ++j)
                REQUIRE(d.dist[d.index_of(c.points[i])]
                              [d.index_of(c.points[j])] == c.dist[i][j]);
    }
}

TEST_CASE("randomized joint embeddings keep cross distances uniform")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        FiniteMetricSpace a = random_space(rng, 1 + static_cast<int>(rng() % 4));
        FiniteMetricSpace bsp =
            random_space(rng, 1 + static_cast<int>(rng() % 4));
        MetricSystem s(a, {}), t(bsp, {});
        MetricJointEmbedding je = jep_metric_systems(s, t);
        Rational k = a.diameter() + bsp.diameter() + q(1);
        for (int i : je.left)
            for (int j : je.right) REQUIRE(je.system.space.dist[i][j] == k);
    }
}
