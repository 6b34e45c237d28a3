#ifndef AMALGAM_BUILDER_HPP
#define AMALGAM_BUILDER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "amalgam/checkers.hpp"

namespace amalgam {

// One stage of a staged construction.  Every field is absolute (encoded
// systems and explicit morphisms), so a stage can be re-verified without
// trusting any construction-time state.
//
// Kinds:
//   "dense"     - the requirement was embedded into the condition.
//   "witness"   - the requirement's extension witness (base) was embedded;
//                 base_embed : requirement -> base,
//                 base_to_condition : base -> condition,
//                 witness = base_to_condition . base_embed.
//   "extension" - a scheduled extension (requirement) of the witness
//                 (base) was realized over the fixed placement
//                 base_to_condition; base_embed : base -> requirement and
//                 base_to_condition = witness . base_embed.
struct BuildStage {
    std::string kind;
    std::string requirement;
    std::string base;
    Morphism base_embed;
    std::string condition;  // the condition after this stage
    Morphism embed_prev;    // previous condition -> condition
    Morphism witness;       // requirement -> condition
    Morphism base_to_condition;
};

struct ConstructionTrace {
    std::string driver;
    std::string mode; // "dense-orbit" | "generic"
    std::string note; // scheduling and modeling choices, free-form
    std::string initial;
    std::vector<BuildStage> stages;
    std::string final_condition;
    bool complete = true;
};

// Meets the dense sets D(psi) for each scheduled condition psi: either an
// embedding of psi into the current condition is found, or the condition
// is extended by the driver's joint-embedding witness.  Exceeding the
// stage budget yields a partial trace flagged incomplete; a missing
// joint-embedding witness is a domain error.
ConstructionTrace build_dense_orbit_approx(
    const ClassDriver& d, const std::string& initial,
    const std::vector<std::string>& schedule, int stage_budget);

// A scheduled condition together with the extensions of its witness that
// the generic build must realize.  Which extensions are scheduled is a
// modeling choice recorded in the trace note.
struct GenericRequirement {
    std::string condition;
    std::vector<std::string> extensions;
};

// Additionally meets the sets E(psi): each condition is routed through
// the driver's extension witness S-hat, and every scheduled extension of
// S-hat is realized by a conjugator fixing the witness placement (an
// embedding over it, amalgamating when none exists yet).  An empty
// extension schedule degenerates to the dense-orbit build.
ConstructionTrace build_generic_approx(
    const ClassDriver& d, const std::string& initial,
    const std::vector<GenericRequirement>& schedule, int stage_budget);

// Re-verifies every stage of a trace from its recorded data alone.  On
// failure, *why (when given) describes the first offending stage.
bool replay_trace(const ClassDriver& d, const ConstructionTrace& t,
                  std::string* why = nullptr);

// All canonical single-map Boolean systems over at most `ambient_atoms`
// atoms whose domain (and range) have at most `max_blocks` blocks: the
// conditions over the small subalgebras of a finite Cantor algebra.
std::vector<std::string> boolean_condition_schedule(int ambient_atoms,
                                                    int max_blocks);

// One-atom-split refinements of an encoded Boolean system, one per atom:
// the minimal proper extensions used as scheduled extension families.
std::vector<std::string> boolean_atom_splits(const std::string& enc);

// ------------------------------------------------------------------
// Factorization of grid permutations: every permutation of an n x m grid
// is a composition f1 . h . f2 with f1, f2 preserving rows and h
// preserving columns.
// ------------------------------------------------------------------

struct GridPermutation {
    int rows = 0;
    int cols = 0;
    std::vector<int> perm; // cell (r, c) is index r * cols + c
};

struct GridFactorization {
    GridPermutation f1; // row-preserving
    GridPermutation h;  // column-preserving
    GridPermutation f2; // row-preserving
};

// Deterministic factorization via repeated perfect matchings (a proper
// edge coloring of the row-to-row occupancy multigraph).  Throws on
// malformed input.
GridFactorization factor_grid_permutation(const GridPermutation& rho);

// Accepts any proper factorization, not just the canonical one.
bool grid_factorization_ok(const GridPermutation& rho,
                           const GridFactorization& fact);

// ------------------------------------------------------------------
// Shift independence certificate: over the coordinate algebra truncated
// to positions [-depth, depth], every nonzero element of the window
// algebra on [-k, k] meets every nonzero element of its (2k+1)-shift,
// checked exhaustively over cylinder atoms.
// ------------------------------------------------------------------

struct ShiftCertificate {
    int k = 0;
    int depth = 0;
    int power = 0; // the shift exponent 2k + 1
    std::int64_t atom_count = 0; // atoms of the product algebra
    bool valid = false;
};

// Requires depth >= 2 * (2k + 1); smaller depths cannot carry the
// certificate and are a domain error.
ShiftCertificate shift_independence(int k, int depth);

} // namespace amalgam

#endif
