#ifndef AMALGAM_BOOLEAN_CORE_HPP
#define AMALGAM_BOOLEAN_CORE_HPP

#include <optional>
#include <string>
#include <vector>

namespace amalgam {

// A finite Boolean algebra presented by its atoms.  Atom labels are
// hierarchical lineage strings: splitting atom "3" yields "3.a", "3.b", ...
// so provenance of every atom is readable off its label.  Labels are kept
// sorted lexicographically and all tie-breaking in the library follows that
// order.
struct AmbientAlgebra {
    std::vector<std::string> atoms;

    explicit AmbientAlgebra(std::vector<std::string> labels = {});
    static AmbientAlgebra of_size(int n);

    int size() const { return static_cast<int>(atoms.size()); }
    int index_of(const std::string& label) const; // -1 when absent

    bool operator==(const AmbientAlgebra& o) const { return atoms == o.atoms; }
};

// A set of atoms of the ambient algebra, i.e. an element of the algebra,
// kept as a sorted index vector.
using Block = std::vector<int>;

std::string block_to_string(const AmbientAlgebra& ambient, const Block& b);
bool blocks_disjoint(const Block& a, const Block& b);
Block block_union(const Block& a, const Block& b);
bool block_subset(const Block& a, const Block& b);
Block block_intersection(const Block& a, const Block& b);

// A subalgebra of the ambient algebra, presented as the partition of the
// ambient atoms into the subalgebra's atoms ("blocks").  Blocks are sorted
// internally and ordered by their least atom, so equal subalgebras compare
// equal structurally.
struct Subalgebra {
    AmbientAlgebra ambient;
    std::vector<Block> blocks;

    Subalgebra() = default;
    Subalgebra(AmbientAlgebra amb, std::vector<Block> bs);
    static Subalgebra trivial(const AmbientAlgebra& amb);  // one block
    static Subalgebra discrete(const AmbientAlgebra& amb); // singletons

    int block_count() const { return static_cast<int>(blocks.size()); }
    // Index of the block containing the given ambient atom.
    int block_of(int atom) const;
    // Index of the block equal to the given atom set, or -1.
    int find_block(const Block& b) const;

    bool operator==(const Subalgebra& o) const
    {
        return ambient == o.ambient && blocks == o.blocks;
    }
};

// Common refinement of two partitions: the subalgebra generated by both.
Subalgebra join_subalgebras(const Subalgebra& a, const Subalgebra& b);
// True when every block of `coarse` is a union of blocks of `fine`.
bool refines(const Subalgebra& fine, const Subalgebra& coarse);

// An isomorphism between two subalgebras of one ambient algebra, given by
// the bijection of their atoms: block i of the domain maps to block
// map[i] of the range.
struct PartialIso {
    Subalgebra domain;
    Subalgebra range;
    std::vector<int> map;

    PartialIso() = default;
    PartialIso(Subalgebra dom, Subalgebra ran, std::vector<int> m);

    static PartialIso identity(const Subalgebra& s);

    // Image/preimage of a union of domain/range blocks.
    Block image_of(const Block& b) const;
    Block preimage_of(const Block& b) const;
    PartialIso inverse() const;

    bool operator==(const PartialIso& o) const
    {
        return domain == o.domain && range == o.range && map == o.map;
    }
};

// An n-system: an ambient algebra with finitely many partial isomorphisms
// between its subalgebras.
struct PartialIsoSystem {
    AmbientAlgebra ambient;
    std::vector<PartialIso> isos;

    PartialIsoSystem() = default;
    PartialIsoSystem(AmbientAlgebra amb, std::vector<PartialIso> is);

    int arity() const { return static_cast<int>(isos.size()); }

    bool operator==(const PartialIsoSystem& o) const
    {
        return ambient == o.ambient && isos == o.isos;
    }
};

// A (unital) embedding of one ambient algebra into another: each source
// atom is sent to a non-empty set of target atoms; the images are disjoint
// and exhaust the target.  This is exactly an isomorphism of the source
// onto a subalgebra of the target containing 0 and 1.
struct AlgebraEmbedding {
    AmbientAlgebra source;
    AmbientAlgebra target;
    std::vector<Block> image; // indexed by source atom

    AlgebraEmbedding() = default;
    AlgebraEmbedding(AmbientAlgebra src, AmbientAlgebra tgt,
                     std::vector<Block> img);

    Block apply(const Block& source_block) const;
};

// f embeds system S into system T when, for every i, f carries the domain
// and range of S.isos[i] into those of T.isos[i] blockwise and commutes
// with the maps: f(psi_i(b)) = phi_i(f(b)) for every domain atom b.
struct SystemEmbedding {
    AlgebraEmbedding base;
};

bool is_system_embedding(const PartialIsoSystem& s, const PartialIsoSystem& t,
                         const AlgebraEmbedding& f, std::string* why = nullptr);

// Exhaustive search for an embedding of S into T, returning the first
// witness in lexicographic order of atom assignments (or nullopt).  The
// search enumerates maps g : atoms(T) -> atoms(S); the embedding is then
// atom -> g^{-1}(atom).
std::optional<SystemEmbedding> embed_system(const PartialIsoSystem& s,
                                            const PartialIsoSystem& t);

// Composition g . f of embeddings (f : A -> B, g : B -> C).
AlgebraEmbedding compose_embeddings(const AlgebraEmbedding& f,
                                    const AlgebraEmbedding& g);

// Splitting ambient atoms.  `children[i]` lists the new indices replacing
// old atom i (a single index when the atom was not split).
struct AmbientRefinement {
    AmbientAlgebra before;
    AmbientAlgebra after;
    std::vector<Block> children;

    AlgebraEmbedding as_embedding() const;
};

// Split one atom of the ambient algebra into `parts` children labelled
// label.a, label.b, ...  `parts` must be >= 1.
AmbientRefinement split_atom(const AmbientAlgebra& amb, int atom, int parts);
// Split several atoms at once; parts[i] >= 1 for each atom i.
AmbientRefinement split_atoms(const AmbientAlgebra& amb,
                              const std::vector<int>& parts);

// Transport structure through an ambient refinement.
Block lift_block(const AmbientRefinement& r, const Block& b);
Subalgebra lift_subalgebra(const AmbientRefinement& r, const Subalgebra& s);
PartialIso lift_iso(const AmbientRefinement& r, const PartialIso& p);
PartialIsoSystem lift_system(const AmbientRefinement& r,
                             const PartialIsoSystem& s);

// Canonical form of a system under relabelling of ambient atoms: a string
// key such that two systems are isomorphic iff their keys are equal.
// Intended for desk-scale ambients only (exhaustive over permutations).
std::string canonical_system_key(const PartialIsoSystem& s);

// Lexicographically least suffix labels "a", "b", ..., "z", "aa", ...
std::string lineage_suffix(int index);

} // namespace amalgam

#endif
