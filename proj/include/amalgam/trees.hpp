#ifndef AMALGAM_TREES_HPP
#define AMALGAM_TREES_HPP

#include <string>
#include <vector>

namespace amalgam {

// A node of the tree of finite sequences of naturals; the empty sequence
// is the root.  Sequence comparison (lexicographic) puts every node after
// its proper prefixes, so sorted node lists are parent-before-child.
using TreeNode = std::vector<int>;

std::string node_to_string(const TreeNode& t); // "<>" for the root

// A finite subtree: a prefix-closed set of nodes containing the root,
// kept sorted.
struct FiniteTree {
    std::vector<TreeNode> nodes;

    FiniteTree() = default;
    explicit FiniteTree(std::vector<TreeNode> ns);

    // The bounded tree m^{<=m}: entries < m, length <= m.  full(0) is the
    // root alone.
    static FiniteTree full(int m);

    int size() const { return static_cast<int>(nodes.size()); }
    bool contains(const TreeNode& t) const;
    int index_of(const TreeNode& t) const; // -1 when absent
};

// A level- and prefix-preserving bijection between two finite subtrees,
// stored as the image of each source node in source order.
struct TreeIso {
    FiniteTree source;
    FiniteTree target;
    std::vector<TreeNode> images;

    TreeIso() = default;
    TreeIso(FiniteTree src, FiniteTree tgt, std::vector<TreeNode> img);

    TreeNode image_of(const TreeNode& t) const;
};

// An automorphism of the full bounded tree m^{<=m}, stored as the image of
// each node in FiniteTree::full(m) order.
struct BoundedTreeAutomorphism {
    int m = 0;
    std::vector<TreeNode> images;

    TreeNode apply(const TreeNode& t) const;
    BoundedTreeAutomorphism inverse() const;
};

bool is_tree_automorphism(int m, const std::vector<TreeNode>& images,
                          std::string* why = nullptr);
BoundedTreeAutomorphism make_tree_automorphism(int m,
                                               std::vector<TreeNode> images);
// (f . g)(u) = f(g(u)).
BoundedTreeAutomorphism compose_tree(const BoundedTreeAutomorphism& f,
                                     const BoundedTreeAutomorphism& g);

// Extend an isomorphism of subtrees of m^{<=m} to an automorphism of the
// whole bounded tree, completing each partial sibling bijection to the
// lexicographically least full sibling permutation, level by level.
BoundedTreeAutomorphism extend_to_tree_automorphism(int m, const TreeIso& phi);

// Common extension of two tuples over n^{<=n} that restrict to one shared
// tuple of automorphisms of m^{<=m}: a conjugator xi of (2n)^{<=2n} fixing
// m^{<=m} pointwise with xi(n^{<=n}) meeting n^{<=n} exactly in m^{<=m},
// and a tuple extending both psi_i and xi . phi_i . xi^{-1} componentwise.
struct CommonExtension {
    BoundedTreeAutomorphism xi;
    std::vector<BoundedTreeAutomorphism> tuple; // over (2n)^{<=2n}
};

CommonExtension common_extension(int m,
                                 const std::vector<BoundedTreeAutomorphism>& psi,
                                 const std::vector<BoundedTreeAutomorphism>& phi);

// Stabilizer factorization: given an automorphism phi of m^{<=m} fixing
// S cap T pointwise, produce automorphisms f, g of M^{<=M} (M >= 2m) with
// g extending phi by g(s^t) = phi(s)^t, f fixing T pointwise, and
// f^{-1} . g . f fixing S pointwise.
struct StabilizerFactorization {
    BoundedTreeAutomorphism f;
    BoundedTreeAutomorphism g;
};

StabilizerFactorization factor_through_stabilizers(
    const BoundedTreeAutomorphism& phi, const FiniteTree& s,
    const FiniteTree& t, int big_m);

} // namespace amalgam

#endif
