#include "amalgam/trees.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

void ensure(bool cond, const std::string& msg)
{
    if (!cond) throw std::logic_error(msg);
}

bool is_prefix(const TreeNode& p, const TreeNode& t)
{
    return p.size() <= t.size() && std::equal(p.begin(), p.end(), t.begin());
}

TreeNode parent_of(const TreeNode& t)
{
    return TreeNode(t.begin(), t.end() - 1);
}

TreeNode child(TreeNode t, int c)
{
    t.push_back(c);
    return t;
}

} // namespace

std::string node_to_string(const TreeNode& t)
{
    std::string out = "<";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(t[i]);
    }
    return out + ">";
}

FiniteTree::FiniteTree(std::vector<TreeNode> ns) : nodes(std::move(ns))
{
    std::sort(nodes.begin(), nodes.end());
    require(std::adjacent_find(nodes.begin(), nodes.end()) == nodes.end(),
            "tree nodes must be distinct");
    require(!nodes.empty() && nodes.front().empty(),
            "a subtree must contain the root");
    for (const TreeNode& t : nodes)
        if (!t.empty())
            require(contains(parent_of(t)),
                    "subtree not prefix-closed at " + node_to_string(t));
}

FiniteTree FiniteTree::full(int m)
{
    std::vector<TreeNode> out = {TreeNode{}};
    size_t level_start = 0;
    for (int depth = 0; depth < m; ++depth) {
        size_t level_end = out.size();
        for (size_t i = level_start; i < level_end; ++i)
            for (int c = 0; c < m; ++c) out.push_back(child(out[i], c));
        level_start = level_end;
    }
    return FiniteTree(std::move(out));
}

bool FiniteTree::contains(const TreeNode& t) const
{
    return std::binary_search(nodes.begin(), nodes.end(), t);
}

int FiniteTree::index_of(const TreeNode& t) const
{
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    if (it == nodes.end() || *it != t) return -1;
    return static_cast<int>(it - nodes.begin());
}

TreeIso::TreeIso(FiniteTree src, FiniteTree tgt, std::vector<TreeNode> img)
    : source(std::move(src)), target(std::move(tgt)), images(std::move(img))
{
    require(images.size() == source.nodes.size(),
            "one image per source node");
    require(source.size() == target.size(),
            "isomorphic subtrees have equal size");
    std::set<TreeNode> seen;
    for (size_t i = 0; i < images.size(); ++i) {
        require(target.contains(images[i]),
                "image outside the target tree: " +
                    node_to_string(images[i]));
        require(seen.insert(images[i]).second, "image repeated");
        require(images[i].size() == source.nodes[i].size(),
                "tree isomorphisms preserve levels");
    }
    for (size_t i = 0; i < images.size(); ++i)
        for (size_t j = 0; j < images.size(); ++j)
            require(is_prefix(source.nodes[i], source.nodes[j]) ==
                        is_prefix(images[i], images[j]),
                    "tree isomorphisms preserve the prefix relation");
}

TreeNode TreeIso::image_of(const TreeNode& t) const
{
    int i = source.index_of(t);
    require(i >= 0, "node outside the source tree: " + node_to_string(t));
    return images[static_cast<size_t>(i)];
}

TreeNode BoundedTreeAutomorphism::apply(const TreeNode& t) const
{
    FiniteTree full = FiniteTree::full(m);
    int i = full.index_of(t);
    require(i >= 0, "node outside the bounded tree: " + node_to_string(t));
    return images[static_cast<size_t>(i)];
}

BoundedTreeAutomorphism BoundedTreeAutomorphism::inverse() const
{
    FiniteTree full = FiniteTree::full(m);
    std::vector<TreeNode> inv(images.size());
    for (size_t i = 0; i < images.size(); ++i)
        inv[static_cast<size_t>(full.index_of(images[i]))] = full.nodes[i];
    return BoundedTreeAutomorphism{m, std::move(inv)};
}

bool is_tree_automorphism(int m, const std::vector<TreeNode>& images,
                          std::string* why)
{
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    FiniteTree full = FiniteTree::full(m);
    if (images.size() != full.nodes.size())
        return fail("one image per node of the bounded tree");
    std::set<TreeNode> seen;
    for (size_t i = 0; i < images.size(); ++i) {
        if (!full.contains(images[i]))
            return fail("image escapes the bounded tree: " +
                        node_to_string(images[i]));
        if (!seen.insert(images[i]).second)
            return fail("image repeated: " + node_to_string(images[i]));
        if (images[i].size() != full.nodes[i].size())
            return fail("level not preserved at " +
                        node_to_string(full.nodes[i]));
    }
    for (size_t i = 0; i < images.size(); ++i) {
        if (full.nodes[i].empty()) continue;
        // Prefix preservation reduces to parents mapping to parents.
        size_t p = static_cast<size_t>(full.index_of(parent_of(full.nodes[i])));
        if (parent_of(images[i]) != images[p])
            return fail("prefix relation not preserved at " +
                        node_to_string(full.nodes[i]));
    }
    return true;
}

BoundedTreeAutomorphism make_tree_automorphism(int m,
                                               std::vector<TreeNode> images)
{
    std::string why;
    require(is_tree_automorphism(m, images, &why),
            "not an automorphism of the bounded tree: " + why);
    return BoundedTreeAutomorphism{m, std::move(images)};
}

BoundedTreeAutomorphism compose_tree(const BoundedTreeAutomorphism& f,
                                     const BoundedTreeAutomorphism& g)
{
    require(f.m == g.m, "composition needs a common bounded tree");
    FiniteTree full = FiniteTree::full(f.m);
    std::vector<TreeNode> images(g.images.size());
    for (size_t i = 0; i < images.size(); ++i)
        images[i] = f.images[static_cast<size_t>(full.index_of(g.images[i]))];
    return BoundedTreeAutomorphism{f.m, std::move(images)};
}

BoundedTreeAutomorphism extend_to_tree_automorphism(int m, const TreeIso& phi)
{
    FiniteTree full = FiniteTree::full(m);
    for (const TreeNode& t : phi.source.nodes)
        require(full.contains(t), "source not a subtree of the bounded tree");
    for (const TreeNode& t : phi.target.nodes)
        require(full.contains(t), "target not a subtree of the bounded tree");

    // Sorted order puts parents first, so each node's image is fixed before
    // its sibling permutation is completed.
    std::vector<TreeNode> images(full.nodes.size());
    images[0] = TreeNode{};
    for (size_t i = 0; i < full.nodes.size(); ++i) {
        const TreeNode& u = full.nodes[i];
        if (static_cast<int>(u.size()) >= m) continue;
        const TreeNode v = images[i];
        std::vector<int> pi(static_cast<size_t>(m), -1);
        std::vector<bool> used(static_cast<size_t>(m), false);
        for (int c = 0; c < m; ++c) {
            int ci = phi.source.index_of(child(u, c));
            if (ci < 0) continue;
            const TreeNode& img = phi.images[static_cast<size_t>(ci)];
            ensure(is_prefix(v, img),
                   "iso image of a child leaves its parent's image");
            pi[static_cast<size_t>(c)] = img.back();
            used[static_cast<size_t>(img.back())] = true;
        }
        for (int c = 0; c < m; ++c) {
            if (pi[static_cast<size_t>(c)] >= 0) continue;
            for (int j = 0; j < m; ++j)
                if (!used[static_cast<size_t>(j)]) {
                    pi[static_cast<size_t>(c)] = j;
                    used[static_cast<size_t>(j)] = true;
                    break;
                }
        }
        for (int c = 0; c < m; ++c)
            images[static_cast<size_t>(full.index_of(child(u, c)))] =
                child(v, pi[static_cast<size_t>(c)]);
    }
    BoundedTreeAutomorphism out = make_tree_automorphism(m, std::move(images));
    for (size_t i = 0; i < phi.source.nodes.size(); ++i)
        ensure(out.apply(phi.source.nodes[i]) == phi.images[i],
               "extension does not restrict to the input iso");
    return out;
}

CommonExtension common_extension(
    int m, const std::vector<BoundedTreeAutomorphism>& psi,
    const std::vector<BoundedTreeAutomorphism>& phi)
{
    require(psi.size() == phi.size(), "tuples must have equal length");
    require(!psi.empty(), "tuples must be nonempty");
    const int n = psi.front().m;
    require(m <= n, "the shared bound must not exceed the tuple bound");
    for (const auto& a : psi) require(a.m == n, "mixed bounds in psi");
    for (const auto& a : phi) require(a.m == n, "mixed bounds in phi");
    FiniteTree small = FiniteTree::full(m);
    for (size_t i = 0; i < psi.size(); ++i)
        for (const TreeNode& u : small.nodes) {
            TreeNode a = psi[i].apply(u), b = phi[i].apply(u);
            require(a == b && small.contains(a),
                    "tuples do not restrict to a shared tuple over the "
                    "small tree");
        }

    // The conjugator: at small-tree nodes swap child labels into the fresh
    // band [n, 2n) -- labels [m, n) below inner nodes, all of [0, n) below
    // depth-m leaves -- so xi(n^{<=n}) meets n^{<=n} exactly in m^{<=m}.
    const int l = 2 * n;
    FiniteTree big = FiniteTree::full(l);
    std::vector<TreeNode> xi_img(big.nodes.size());
    for (size_t i = 0; i < big.nodes.size(); ++i) {
        const TreeNode& u = big.nodes[i];
        TreeNode v;
        for (size_t t = 0; t < u.size(); ++t) {
            TreeNode prefix(u.begin(), u.begin() + static_cast<long>(t));
            int c = u[t];
            bool in_small = small.contains(prefix);
            int len = static_cast<int>(t);
            if (in_small && len < m) {
                if (c >= m && c < n) c += n;
                else if (c >= n + m && c < 2 * n) c -= n;
            } else if (in_small && len == m && n > m) {
                if (c < n) c += n;
                else c -= n;
            }
            v.push_back(c);
        }
        xi_img[i] = std::move(v);
    }
    BoundedTreeAutomorphism xi = make_tree_automorphism(l, std::move(xi_img));

    // Union iso psi_i cup xi.phi_i.xi^{-1}, domain n^{<=n} cup xi(n^{<=n}).
    FiniteTree medium = FiniteTree::full(n);
    std::vector<BoundedTreeAutomorphism> tuple;
    for (size_t i = 0; i < psi.size(); ++i) {
        std::map<TreeNode, TreeNode> glue;
        for (const TreeNode& u : medium.nodes) {
            TreeNode a = psi[i].apply(u);
            auto [it, fresh] = glue.insert({u, a});
            ensure(fresh || it->second == a, "union iso inconsistent");
        }
        for (const TreeNode& u : medium.nodes) {
            TreeNode from = xi.apply(u);
            TreeNode to = xi.apply(phi[i].apply(u));
            auto [it, fresh] = glue.insert({from, to});
            ensure(fresh || it->second == to,
                   "psi and conjugated phi disagree on the overlap");
        }
        std::vector<TreeNode> dom, ran, img;
        for (const auto& [u, v] : glue) {
            dom.push_back(u);
            ran.push_back(v);
        }
        std::sort(ran.begin(), ran.end());
        FiniteTree source(dom), target(ran);
        for (const TreeNode& u : source.nodes) img.push_back(glue.at(u));
        tuple.push_back(extend_to_tree_automorphism(
            l, TreeIso(source, target, img)));
    }
    return CommonExtension{std::move(xi), std::move(tuple)};
}

StabilizerFactorization factor_through_stabilizers(
    const BoundedTreeAutomorphism& phi, const FiniteTree& s,
    const FiniteTree& t, int big_m)
{
    const int m = phi.m;
    require(big_m >= 2 * m, "the working bound must be at least 2m");
    FiniteTree small = FiniteTree::full(m);
    for (const TreeNode& u : s.nodes)
        require(small.contains(u), "S must be a subtree of m^{<=m}");
    for (const TreeNode& u : t.nodes)
        require(small.contains(u), "T must be a subtree of m^{<=m}");
    std::set<TreeNode> both;
    for (const TreeNode& u : s.nodes)
        if (t.contains(u)) both.insert(u);
    for (const TreeNode& u : both)
        require(phi.apply(u) == u, "phi must fix S cap T pointwise: moves " +
                                       node_to_string(u));

    FiniteTree big = FiniteTree::full(big_m);

    // g(s^t) = phi(s)^t with s the longest prefix inside m^{<=m}.
    std::vector<TreeNode> g_img(big.nodes.size());
    for (size_t i = 0; i < big.nodes.size(); ++i) {
        const TreeNode& u = big.nodes[i];
        size_t cut = 0;
        while (cut < u.size() && static_cast<int>(cut) < m && u[cut] < m)
            ++cut;
        TreeNode head(u.begin(), u.begin() + static_cast<long>(cut));
        TreeNode out = phi.apply(head);
        out.insert(out.end(), u.begin() + static_cast<long>(cut), u.end());
        g_img[i] = std::move(out);
    }

    // f swaps the displaced labels: below p in S cap T, the children going
    // into S only move to the fresh band [m, 2m) and back.
    std::vector<TreeNode> f_img(big.nodes.size());
    for (size_t i = 0; i < big.nodes.size(); ++i) {
        const TreeNode& u = big.nodes[i];
        TreeNode prefix;
        TreeNode out;
        bool inside = true; // prefix so far lies in S cap T
        for (size_t k = 0; k < u.size(); ++k) {
            int c = u[k];
            int cc = c;
            if (inside) {
                if (c < m && s.contains(child(prefix, c)) &&
                    !both.count(child(prefix, c)))
                    cc = c + m;
                else if (c >= m && c < 2 * m &&
                         s.contains(child(prefix, c - m)) &&
                         !both.count(child(prefix, c - m)))
                    cc = c - m;
            }
            out.push_back(cc);
            prefix.push_back(c);
            inside = inside && both.count(prefix) > 0;
        }
        f_img[i] = std::move(out);
    }

    StabilizerFactorization out;
    out.g = make_tree_automorphism(big_m, std::move(g_img));
    out.f = make_tree_automorphism(big_m, std::move(f_img));
    for (const TreeNode& u : t.nodes)
        ensure(out.f.apply(u) == u, "f fails to fix T pointwise");
    BoundedTreeAutomorphism conj =
        compose_tree(out.f.inverse(), compose_tree(out.g, out.f));
    for (const TreeNode& u : s.nodes)
        ensure(conj.apply(u) == u, "f^-1.g.f fails to fix S pointwise");
    return out;
}

} // namespace amalgam
