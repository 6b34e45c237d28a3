#ifndef AMALGAM_MEASURED_HPP
#define AMALGAM_MEASURED_HPP

#include <utility>
#include <vector>

#include "amalgam/boolean_core.hpp"
#include "amalgam/rational.hpp"

namespace amalgam {

// A strictly positive rational probability measure on the atoms of an
// ambient algebra.  When `dyadic` is set every mass must have a power-of-two
// denominator, and every operation in this module preserves the flag (a
// non-dyadic result under the flag is reported as an internal error rather
// than silently widening the class).
struct RationalMeasure {
    AmbientAlgebra ambient;
    std::vector<Rational> mass; // indexed by atom
    bool dyadic = false;

    RationalMeasure() = default;
    RationalMeasure(AmbientAlgebra amb, std::vector<Rational> m,
                    bool dyadic_flag = false);

    Rational mass_of(const Block& b) const;
};

// An n-system together with a measure every partial iso preserves
// blockwise: mass(b) = mass(psi_i(b)) for each domain block b.
struct MeasuredSystem {
    PartialIsoSystem system;
    RationalMeasure measure;

    MeasuredSystem() = default;
    MeasuredSystem(PartialIsoSystem s, RationalMeasure m);
};

// True when every iso of the system is a permutation of the atoms (domain
// and range are the discrete subalgebra).
bool is_full_system(const MeasuredSystem& s);

// Amalgam of two measure-preserving embeddings f : (A,mu) -> (B,nu) and
// g : (A,mu) -> (C,rho).  Atoms of the result are the pairs b (x) c lying
// over a common A-atom a, with mass nu(b) * rho(c) / mu(a); the returned
// embeddings carry B and C in and agree on A.
struct MeasuredAmalgam {
    RationalMeasure measure;
    AlgebraEmbedding left;  // B -> D
    AlgebraEmbedding right; // C -> D
};

MeasuredAmalgam amalgamate_measured(const RationalMeasure& mu,
                                    const AlgebraEmbedding& f,
                                    const RationalMeasure& nu,
                                    const AlgebraEmbedding& g,
                                    const RationalMeasure& rho);

// Joint embedding of two measured n-systems: the product system over the
// trivial common subalgebra, carrying the product measure.
struct MeasuredJointEmbedding {
    MeasuredSystem system;
    AlgebraEmbedding left;
    AlgebraEmbedding right;
};

MeasuredJointEmbedding jep_measured_systems(const MeasuredSystem& s,
                                            const MeasuredSystem& t);

// Refine a measured system into equal-mass atoms (mass 1/N with N the lcm
// of the mass denominators) and extend every partial iso to a permutation
// of the refined atoms.  Completions are lexicographically least.
struct AutomorphismExtension {
    MeasuredSystem system;       // full system on the refined algebra
    AlgebraEmbedding embedding;  // original ambient -> refined ambient
};

AutomorphismExtension extend_to_automorphisms(const MeasuredSystem& s);

// Amalgam of two full equal-mass-atom systems T, R over a common full
// system S (along the given system embeddings).  Atoms are the pairs
// b (x) c over a common S-atom; each automorphism acts coordinatewise.
struct FullSystemAmalgam {
    MeasuredSystem system;
    AlgebraEmbedding left;  // T -> amalgam
    AlgebraEmbedding right; // R -> amalgam
};

FullSystemAmalgam amalgamate_full_systems(const MeasuredSystem& s,
                                          const MeasuredSystem& t,
                                          const MeasuredSystem& r,
                                          const AlgebraEmbedding& into_t,
                                          const AlgebraEmbedding& into_r);

// An element of the interval algebra on [0,1): a finite union of disjoint
// half-open rational intervals [p,q), kept sorted by left endpoint.
struct IntervalElement {
    std::vector<std::pair<Rational, Rational>> intervals;

    IntervalElement() = default;
    explicit IntervalElement(
        std::vector<std::pair<Rational, Rational>> parts);

    Rational mass() const;
    bool operator==(const IntervalElement& o) const
    {
        return intervals == o.intervals;
    }
};

// Given a measure-preserving assignment of interval elements to the atoms
// of (A,mu) tiling [0,1), and a measured refinement (B,nu) of A presented
// by the embedding A -> B, split each image left-to-right so every B-atom
// receives an interval element of its own mass.  Returns the image per
// B-atom.
std::vector<IntervalElement> extend_interval_embedding(
    const RationalMeasure& mu, const std::vector<IntervalElement>& f,
    const AlgebraEmbedding& into_b, const RationalMeasure& nu);

} // namespace amalgam

#endif
