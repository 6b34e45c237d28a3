#ifndef AMALGAM_METRIC_HPP
#define AMALGAM_METRIC_HPP

#include <string>
#include <utility>
#include <vector>

#include "amalgam/rational.hpp"

namespace amalgam {

// A finite metric space with labelled points and exact rational distances.
// Construction validates the metric axioms, including the triangle
// inequality over all triples; empty spaces are rejected.
struct FiniteMetricSpace {
    std::vector<std::string> points;
    std::vector<std::vector<Rational>> dist;

    FiniteMetricSpace() = default;
    FiniteMetricSpace(std::vector<std::string> pts,
                      std::vector<std::vector<Rational>> d);

    int size() const { return static_cast<int>(points.size()); }
    int index_of(const std::string& label) const; // -1 when absent
    Rational diameter() const;                    // 0 for one point
};

// A distance-preserving bijection between two subsets of one space, given
// as (source, target) point-index pairs.
struct PartialIsometry {
    std::vector<std::pair<int, int>> pairs;

    // Image of a point, or -1 when outside the domain.
    int image_of(int point) const;
};

bool is_partial_isometry(const FiniteMetricSpace& space,
                         const PartialIsometry& iso,
                         std::string* why = nullptr);

// A space together with n partial isometries of it.
struct MetricSystem {
    FiniteMetricSpace space;
    std::vector<PartialIsometry> isos;

    MetricSystem() = default;
    MetricSystem(FiniteMetricSpace sp, std::vector<PartialIsometry> is);

    int arity() const { return static_cast<int>(isos.size()); }
};

// Joint embedding: the disjoint union with every cross distance equal to
// diam(S) + diam(T) + 1, each iso acting as the union of the two inputs.
// `left`/`right` give the point index of each input point in the union.
struct MetricJointEmbedding {
    MetricSystem system;
    std::vector<int> left;
    std::vector<int> right;
};

MetricJointEmbedding jep_metric_systems(const MetricSystem& s,
                                        const MetricSystem& t);

// Amalgam of B and C over their shared labelled points A = B cap C:
// cross distances d(x,y) = min over z in A of d_B(x,z) + d_C(z,y).  The
// result keeps B's points first, then the C-only points.
FiniteMetricSpace amalgamate_metric(const FiniteMetricSpace& b,
                                    const FiniteMetricSpace& c);

// theta = phi cup chi on the amalgam of B and C.  phi and chi must agree
// on the shared points; the union is certified distance-preserving on the
// amalgam pointwise.
struct UnionIsometry {
    FiniteMetricSpace amalgam;
    PartialIsometry theta;
};

UnionIsometry union_isometry(const FiniteMetricSpace& b,
                             const FiniteMetricSpace& c,
                             const PartialIsometry& phi,
                             const PartialIsometry& chi);

} // namespace amalgam

#endif
