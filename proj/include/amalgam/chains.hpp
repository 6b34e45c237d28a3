#ifndef AMALGAM_CHAINS_HPP
#define AMALGAM_CHAINS_HPP

#include <set>
#include <utility>

#include "amalgam/boolean_core.hpp"

namespace amalgam {

// Chain decomposition of a partial isomorphism psi : B -> C over its
// ambient algebra A.  The decomposition works with the atoms of A: an atom
// belongs to B (resp. C) when its singleton is a block of the domain
// (resp. range) partition.
//
// Chains:
//  - cyclic:  a_1 .. a_n, atoms of both B and C, psi maps each to the next
//    cyclically;
//  - stable:  a_0 .. a_n plus an end block; type I is oriented with psi
//    (psi(a_n) = end, a_0 <= end), type II with psi^{-1};
//  - linking: a_1 .. a_n with psi(a_i) = a_{i+1} and both endpoints free
//    atoms of stable chains (length 1 is allowed).
struct StableChain {
    bool type_one = true;       // end lies in the range (I) or domain (II)
    std::vector<int> terms;     // ambient atoms, beginning first, map order
    Block end;                  // ambient atom set of the end block
    std::vector<int> free_atoms; // atoms under the end other than terms[0]

    int beginning() const { return terms.front(); }
};

struct ChainDecomposition {
    struct Role {
        enum Kind { CyclicTerm, StableTerm, FreeAtom, LinkingTerm };
        Kind kind;
        int chain; // index into the corresponding chain list
        int pos;   // position within the chain (unused for FreeAtom)
    };

    std::vector<std::vector<int>> cyclic;
    std::vector<StableChain> stable;
    std::vector<std::vector<int>> linking;
    std::vector<std::vector<Role>> assignment; // per ambient atom

    bool normal = false;
    // When not normal: the least violating atom set and a description.
    Block violating_block;
    bool violation_in_domain = true;
    std::string violation;
};

ChainDecomposition decompose(const PartialIso& psi);

// Refine psi (splitting ambient atoms with lineage labels) until every
// domain or range block that is not a single ambient atom is the end of a
// stable chain (condition (i) of normality).  The returned embedding
// carries the original ambient into the refined one.
struct RefineResult {
    PartialIso iso;
    AlgebraEmbedding embedding;
};

RefineResult refine_condition_i(const PartialIso& psi);

// Normal refinement: refine_condition_i followed by the decomposition
// certificate.  Condition (ii) is automatic once (i) holds; failure of the
// certificate indicates a defect and throws std::logic_error.
struct NormalizeResult {
    PartialIso iso;
    AlgebraEmbedding embedding;
    ChainDecomposition chains;
};

NormalizeResult normalize(const PartialIso& psi);

// Joint embedding of two n-systems by the product construction: atoms of
// the result are pairs of atoms, each iso acts coordinatewise on the
// product blocks.
struct JointEmbedding {
    PartialIsoSystem system;
    AlgebraEmbedding left;
    AlgebraEmbedding right;
};

JointEmbedding jep_boolean(const PartialIsoSystem& s,
                           const PartialIsoSystem& t);

// ---------------------------------------------------------------------
// Derivation on index grids (the combinatorial heart of the stable-chain
// amalgamation).  Indices are 0-based; blocks are subsets of {0..k-1}.
// gamma/delta blocks must be pairwise disjoint per side and together
// partition {0..k-1}; each lambda family partitions {0..k-1}.
// ---------------------------------------------------------------------
using PairSet = std::set<std::pair<int, int>>;

struct DerivationData {
    int k_left = 0, k_right = 0; // grid dimensions (rows, columns)
    std::vector<std::vector<int>> gamma_l, gamma_r;  // Gamma(1,e)
    std::vector<std::vector<std::vector<int>>> delta_l, delta_r; // [beta][e]
    std::vector<std::vector<int>> lambda_l, lambda_r; // Lambda(e)
};

// D(Y) = { (i,j) in Y : (i,j) in Gamma_l(1,e) x Gamma_r(1,d)  =>
//          (Lambda_l(e) x Lambda_r(d)) meets Y }.
PairSet derivation_step(const PairSet& y, const DerivationData& d);

// X_0 = union of all Gamma_l(1,e) x Gamma_r(1,d) and, per beta, all
// Delta_l(1,beta,e) x Delta_r(1,beta,d).
PairSet derivation_x0(const DerivationData& d);

// Least D-stable subset of X_0 reached by iteration.  Every row and column
// of the result is non-empty; emptiness contradicts the supporting lemma
// and throws std::logic_error.
PairSet derivation_fixed_point(const DerivationData& d);

// ---------------------------------------------------------------------
// Amalgamation of two refinements of a normal psi over psi.
// ---------------------------------------------------------------------

// A refinement of a base iso: a finer iso over a split ambient, together
// with the unital embedding of the base ambient witnessing blockwise
// containment of the base map.
struct Refinement {
    PartialIso iso;
    AlgebraEmbedding from_base;
};

// Convenience: derive the embedding from lineage labels (every refined
// atom's label extends a base atom's label).
AlgebraEmbedding lineage_embedding(const AmbientAlgebra& base,
                                   const AmbientAlgebra& refined);

struct Amalgam {
    PartialIsoSystem system;   // single-iso system on the selected atoms E
    AlgebraEmbedding left;     // from the left refinement's ambient
    AlgebraEmbedding right;    // from the right refinement's ambient
    AlgebraEmbedding from_base; // composite embedding of the base ambient
};

// Requires decompose(psi).normal; throws std::invalid_argument otherwise.
Amalgam amalgamate_over_normal(const PartialIso& psi, const Refinement& left,
                               const Refinement& right);

} // namespace amalgam

#endif
