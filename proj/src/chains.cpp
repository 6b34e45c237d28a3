#include "amalgam/chains.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw std::invalid_argument(msg);
}

void ensure(bool cond, const std::string& msg)
{
    if (!cond)
        throw std::logic_error(msg);
}

// Atom-level view of a partial iso: singleton membership and the induced
// successor/predecessor maps on atoms.
struct AtomView {
    std::vector<int> dom_block_of, ran_block_of;
    std::vector<char> is_b, is_c;
    std::vector<int> fwd, bwd; // -1 when undefined
    std::vector<int> inv_map;  // range block -> domain block

    explicit AtomView(const PartialIso& p)
    {
        const int n = p.domain.ambient.size();
        dom_block_of.assign(n, -1);
        ran_block_of.assign(n, -1);
        is_b.assign(n, 0);
        is_c.assign(n, 0);
        fwd.assign(n, -1);
        bwd.assign(n, -1);
        inv_map.assign(p.range.block_count(), -1);
        for (int b = 0; b < p.domain.block_count(); ++b)
            inv_map[p.map[b]] = b;
        for (int a = 0; a < n; ++a) {
            dom_block_of[a] = p.domain.block_of(a);
            ran_block_of[a] = p.range.block_of(a);
            is_b[a] = p.domain.blocks[dom_block_of[a]].size() == 1;
            is_c[a] = p.range.blocks[ran_block_of[a]].size() == 1;
            if (is_b[a]) {
                const Block& img = p.range.blocks[p.map[dom_block_of[a]]];
                if (img.size() == 1)
                    fwd[a] = img[0];
            }
            if (is_c[a]) {
                const Block& pre =
                    p.domain.blocks[inv_map[ran_block_of[a]]];
                if (pre.size() == 1)
                    bwd[a] = pre[0];
            }
        }
    }
};

// Certification walk for a multi-atom domain block X: follow psi-images
// from X; X is the end of a stable chain iff the walk reaches an atom of
// X.  On success the walk, reversed, lists the chain terms beginning
// first.  The analogous range-side certificate runs on the inverse.
struct CertWalk {
    bool ok = false;
    std::vector<int> walk; // atoms visited, image order
};

CertWalk certify_end(const PartialIso& p, const AtomView& v, int dom_block)
{
    CertWalk out;
    const Block& x = p.domain.blocks[dom_block];
    const Block& first = p.range.blocks[p.map[dom_block]];
    if (first.size() != 1)
        return out;
    int cur = first[0];
    while (true) {
        out.walk.push_back(cur);
        if (block_subset({cur}, x)) {
            out.ok = true;
            return out;
        }
        if (v.fwd[cur] < 0)
            return out;
        cur = v.fwd[cur];
        ensure(static_cast<int>(out.walk.size()) <=
                   p.domain.ambient.size(),
               "certification walk revisited an atom");
    }
}

PartialIso make_iso(const AmbientAlgebra& amb,
                    const std::vector<std::pair<Block, Block>>& pairs)
{
    std::vector<Block> doms, rans;
    doms.reserve(pairs.size());
    rans.reserve(pairs.size());
    for (const auto& pr : pairs) {
        doms.push_back(pr.first);
        rans.push_back(pr.second);
    }
    Subalgebra dom(amb, doms), ran(amb, rans);
    std::vector<int> map(pairs.size(), -1);
    for (const auto& pr : pairs) {
        int di = dom.find_block(pr.first);
        int ri = ran.find_block(pr.second);
        ensure(di >= 0 && ri >= 0, "make_iso lost a block");
        map[di] = ri;
    }
    return PartialIso(dom, ran, map);
}

AlgebraEmbedding identity_embedding(const AmbientAlgebra& amb)
{
    std::vector<Block> img;
    for (int i = 0; i < amb.size(); ++i)
        img.push_back({i});
    return AlgebraEmbedding(amb, amb, img);
}

int multi_block_count(const PartialIso& p)
{
    int n = 0;
    for (const Block& b : p.domain.blocks)
        n += b.size() > 1;
    for (const Block& b : p.range.blocks)
        n += b.size() > 1;
    return n;
}

} // namespace

// -----------------------------------------------------------------------
// decompose
// -----------------------------------------------------------------------

ChainDecomposition decompose(const PartialIso& psi)
{
    ChainDecomposition out;
    const AmbientAlgebra& amb = psi.domain.ambient;
    const int n = amb.size();
    AtomView v(psi);
    PartialIso inv = psi.inverse();
    AtomView vi(inv);

    // Certify every multi-atom block as a stable-chain end.
    struct Violation {
        Block block;
        bool in_domain;
    };
    std::vector<Violation> bad;
    std::vector<std::pair<int, CertWalk>> dom_ends, ran_ends;
    for (int b = 0; b < psi.domain.block_count(); ++b) {
        if (psi.domain.blocks[b].size() < 2)
            continue;
        CertWalk w = certify_end(psi, v, b);
        if (w.ok)
            dom_ends.push_back({b, std::move(w)});
        else
            bad.push_back({psi.domain.blocks[b], true});
    }
    for (int b = 0; b < inv.domain.block_count(); ++b) {
        if (inv.domain.blocks[b].size() < 2)
            continue;
        CertWalk w = certify_end(inv, vi, b);
        if (w.ok)
            ran_ends.push_back({b, std::move(w)});
        else
            bad.push_back({inv.domain.blocks[b], false});
    }
    if (!bad.empty()) {
        std::sort(bad.begin(), bad.end(), [](const Violation& a,
                                             const Violation& b) {
            if (a.block != b.block)
                return a.block < b.block;
            return a.in_domain && !b.in_domain;
        });
        out.normal = false;
        out.violating_block = bad[0].block;
        out.violation_in_domain = bad[0].in_domain;
        out.violation = std::string(bad[0].in_domain ? "domain" : "range") +
                        " block " + block_to_string(amb, bad[0].block) +
                        " is not the end of a stable chain";
        return out;
    }

    out.assignment.assign(n, {});
    std::vector<char> stable_term(n, 0), beginning(n, 0);
    auto add_role = [&](int atom, ChainDecomposition::Role r) {
        out.assignment[atom].push_back(r);
    };

    // Stable chains.  A range-side end yields a type I chain (terms in
    // psi order); a domain-side end a type II chain (psi inverse order).
    auto emit_stable = [&](bool type_one, const Block& end,
                           const std::vector<int>& walk) {
        StableChain ch;
        ch.type_one = type_one;
        ch.end = end;
        ch.terms.assign(walk.rbegin(), walk.rend());
        for (int a : end)
            if (a != ch.terms.front())
                ch.free_atoms.push_back(a);
        int idx = static_cast<int>(out.stable.size());
        for (int i = 0; i < static_cast<int>(ch.terms.size()); ++i) {
            stable_term[ch.terms[i]] = 1;
            add_role(ch.terms[i],
                     {ChainDecomposition::Role::StableTerm, idx, i});
        }
        beginning[ch.terms.front()] = 1;
        for (int a : ch.free_atoms)
            add_role(a, {ChainDecomposition::Role::FreeAtom, idx, -1});
        out.stable.push_back(std::move(ch));
    };
    for (const auto& [b, w] : ran_ends)
        emit_stable(true, inv.domain.blocks[b], w.walk);
    for (const auto& [b, w] : dom_ends)
        emit_stable(false, psi.domain.blocks[b], w.walk);

    // Linking chains: maximal psi-paths between free atoms, plus the
    // length-1 chains through atoms free on both sides.
    std::vector<char> linking(n, 0);
    auto emit_linking = [&](std::vector<int> terms) {
        int idx = static_cast<int>(out.linking.size());
        for (int i = 0; i < static_cast<int>(terms.size()); ++i) {
            linking[terms[i]] = 1;
            add_role(terms[i],
                     {ChainDecomposition::Role::LinkingTerm, idx, i});
        }
        out.linking.push_back(std::move(terms));
    };
    for (int a = 0; a < n; ++a) {
        if (v.is_b[a] && !v.is_c[a] && !beginning[a]) {
            std::vector<int> terms{a};
            ensure(v.fwd[a] >= 0, "free atom without successor");
            int cur = v.fwd[a];
            while (v.is_b[cur]) {
                ensure(v.is_c[cur] && !stable_term[cur],
                       "linking walk entered a stable chain");
                terms.push_back(cur);
                ensure(v.fwd[cur] >= 0, "linking walk lost its successor");
                cur = v.fwd[cur];
            }
            terms.push_back(cur);
            emit_linking(std::move(terms));
        } else if (!v.is_b[a] && !v.is_c[a]) {
            emit_linking({a});
        }
    }

    // Cyclic chains: whatever two-sided atoms remain.
    std::vector<char> cyclic(n, 0);
    for (int a = 0; a < n; ++a) {
        if (!v.is_b[a] || !v.is_c[a] || stable_term[a] || linking[a] ||
            cyclic[a])
            continue;
        std::vector<int> cyc{a};
        cyclic[a] = 1;
        int cur = v.fwd[a];
        while (cur != a) {
            ensure(cur >= 0 && v.is_b[cur] && v.is_c[cur] &&
                       !stable_term[cur] && !linking[cur] && !cyclic[cur],
                   "cycle walk left the cyclic part");
            cyclic[cur] = 1;
            cyc.push_back(cur);
            cur = v.fwd[cur];
        }
        int idx = static_cast<int>(out.cyclic.size());
        for (int i = 0; i < static_cast<int>(cyc.size()); ++i)
            add_role(cyc[i], {ChainDecomposition::Role::CyclicTerm, idx, i});
        out.cyclic.push_back(std::move(cyc));
    }

    for (int a = 0; a < n; ++a)
        ensure(!out.assignment[a].empty(), "atom received no role");
    out.normal = true;
    return out;
}

// -----------------------------------------------------------------------
// refine_condition_i
// -----------------------------------------------------------------------

namespace {

// One refinement step for a violating domain block X of iso p, following
// the inductive trace: images of X are single atoms a_0, a_1, ... until
// either (case i) an image is a multi-atom range block y, or (case ii)
// an atom that is not a singleton domain block is reached.
PartialIso refine_domain_violator(const PartialIso& p, int xb,
                                  AmbientRefinement& ref_out)
{
    const AmbientAlgebra& amb = p.domain.ambient;
    AtomView v(p);
    const Block x = p.domain.blocks[xb];
    const int px = static_cast<int>(x.size());

    std::vector<int> trail; // singleton two-sided atoms visited
    Block y;                // case (i) target
    bool case_i = false;
    int tail = -1; // case (ii) terminal atom
    {
        const Block& first = p.range.blocks[p.map[xb]];
        if (first.size() > 1) {
            case_i = true;
            y = first;
        } else {
            int u = first[0];
            while (true) {
                ensure(!block_subset({u}, x),
                       "trace re-entered a violating block");
                if (!v.is_b[u]) {
                    tail = u;
                    break;
                }
                const Block& img = p.range.blocks[p.map[v.dom_block_of[u]]];
                if (img.size() > 1) {
                    trail.push_back(u);
                    case_i = true;
                    y = img;
                    break;
                }
                trail.push_back(u);
                u = img[0];
                ensure(static_cast<int>(trail.size()) <= amb.size(),
                       "trace revisited an atom");
            }
        }
    }

    // Atoms to split and the width of the split.
    std::vector<int> split_set = trail;
    int width;
    if (case_i)
        width = std::min(px, static_cast<int>(y.size()));
    else {
        split_set.push_back(tail);
        width = px;
    }
    std::vector<int> parts(amb.size(), 1);
    for (int a : split_set)
        parts[a] = width;
    ref_out = split_atoms(amb, parts);
    const AmbientRefinement& rf = ref_out;
    auto child = [&](int a, int l) { return rf.children[a][l]; };
    auto lone = [&](int a) { return Block{rf.children[a][0]}; };

    std::set<int> touched_dom{xb}, touched_ran;
    for (int a : trail) {
        touched_dom.insert(v.dom_block_of[a]);
        touched_ran.insert(v.ran_block_of[a]);
    }
    if (case_i)
        touched_ran.insert(p.range.block_of(y[0]));
    else
        touched_ran.insert(v.ran_block_of[tail]);

    std::vector<std::pair<Block, Block>> pairs;
    for (int b = 0; b < p.domain.block_count(); ++b) {
        if (touched_dom.count(b))
            continue;
        ensure(!touched_ran.count(p.map[b]),
               "untouched block mapped onto the trace");
        pairs.push_back({lift_block(rf, p.domain.blocks[b]),
                         lift_block(rf, p.range.blocks[p.map[b]])});
    }

    if (case_i) {
        const int q = static_cast<int>(y.size());
        const int m = static_cast<int>(trail.size()); // chain a_0..a_{m-1}
        // Pieces of x on the domain side, of y on the range side.
        std::vector<Block> xs, ys;
        if (px <= q) {
            for (int l = 0; l < px; ++l)
                xs.push_back(lone(x[l]));
            for (int l = 0; l + 1 < px; ++l)
                ys.push_back(lone(y[l]));
            Block rest;
            for (int l = px - 1; l < q; ++l)
                rest = block_union(rest, lone(y[l]));
            ys.push_back(rest);
        } else {
            for (int l = 0; l + 1 < q; ++l)
                xs.push_back(lone(x[l]));
            Block rest;
            for (int l = q - 1; l < px; ++l)
                rest = block_union(rest, lone(x[l]));
            xs.push_back(rest);
            for (int l = 0; l < q; ++l)
                ys.push_back(lone(y[l]));
        }
        if (m == 0) {
            for (int l = 0; l < width; ++l)
                pairs.push_back({xs[l], ys[l]});
        } else {
            for (int l = 0; l < width; ++l) {
                pairs.push_back({xs[l], Block{child(trail[0], l)}});
                for (int i = 0; i + 1 < m; ++i)
                    pairs.push_back({Block{child(trail[i], l)},
                                     Block{child(trail[i + 1], l)}});
                pairs.push_back({Block{child(trail[m - 1], l)}, ys[l]});
            }
        }
    } else {
        // Case (ii): chain b_0..b_m with b_m = tail outside the domain.
        std::vector<int> bs = trail;
        bs.push_back(tail);
        const int m = static_cast<int>(bs.size()) - 1;
        for (int l = 0; l < px; ++l) {
            pairs.push_back({lone(x[l]), Block{child(bs[0], l)}});
            for (int i = 0; i < m; ++i)
                pairs.push_back({Block{child(bs[i], l)},
                                 Block{child(bs[i + 1], l)}});
        }
    }
    return make_iso(rf.after, pairs);
}

} // namespace

RefineResult refine_condition_i(const PartialIso& psi)
{
    PartialIso cur = psi;
    AlgebraEmbedding emb = identity_embedding(psi.domain.ambient);
    while (true) {
        AtomView v(cur);
        PartialIso inv = cur.inverse();
        AtomView vi(inv);
        struct Violator {
            Block block;
            bool in_domain;
            int index; // block index on its own side
        };
        std::vector<Violator> bad;
        for (int b = 0; b < cur.domain.block_count(); ++b)
            if (cur.domain.blocks[b].size() > 1 &&
                !certify_end(cur, v, b).ok)
                bad.push_back({cur.domain.blocks[b], true, b});
        for (int b = 0; b < inv.domain.block_count(); ++b)
            if (inv.domain.blocks[b].size() > 1 &&
                !certify_end(inv, vi, b).ok)
                bad.push_back({inv.domain.blocks[b], false, b});
        if (bad.empty())
            break;
        std::sort(bad.begin(), bad.end(),
                  [](const Violator& a, const Violator& b) {
                      if (a.block != b.block)
                          return a.block < b.block;
                      return a.in_domain && !b.in_domain;
                  });
        const int before = multi_block_count(cur);
        AmbientRefinement rf;
        if (bad[0].in_domain)
            cur = refine_domain_violator(cur, bad[0].index, rf);
        else
            cur = refine_domain_violator(inv, bad[0].index, rf).inverse();
        ensure(multi_block_count(cur) < before,
               "refinement step failed to simplify");
        emb = compose_embeddings(emb, rf.as_embedding());
    }
    return {cur, emb};
}

NormalizeResult normalize(const PartialIso& psi)
{
    RefineResult r = refine_condition_i(psi);
    ChainDecomposition d = decompose(r.iso);
    ensure(d.normal, "refined iso failed the decomposition certificate");
    return {r.iso, r.embedding, std::move(d)};
}

// -----------------------------------------------------------------------
// jep_boolean
// -----------------------------------------------------------------------

JointEmbedding jep_boolean(const PartialIsoSystem& s,
                           const PartialIsoSystem& t)
{
    require(s.arity() == t.arity(), "joint embedding needs equal arity");
    std::vector<std::string> labels;
    for (const std::string& a : s.ambient.atoms)
        for (const std::string& b : t.ambient.atoms)
            labels.push_back(a + "|" + b);
    AmbientAlgebra amb(labels);

    auto prod = [&](const Block& x, const AmbientAlgebra& xa, const Block& y,
                    const AmbientAlgebra& ya) {
        Block out;
        for (int i : x)
            for (int j : y)
                out.push_back(
                    amb.index_of(xa.atoms[i] + "|" + ya.atoms[j]));
        std::sort(out.begin(), out.end());
        return out;
    };

    std::vector<PartialIso> isos;
    for (int k = 0; k < s.arity(); ++k) {
        const PartialIso& f = s.isos[k];
        const PartialIso& g = t.isos[k];
        std::vector<std::pair<Block, Block>> pairs;
        for (int i = 0; i < f.domain.block_count(); ++i)
            for (int j = 0; j < g.domain.block_count(); ++j)
                pairs.push_back(
                    {prod(f.domain.blocks[i], s.ambient,
                          g.domain.blocks[j], t.ambient),
                     prod(f.range.blocks[f.map[i]], s.ambient,
                          g.range.blocks[g.map[j]], t.ambient)});
        isos.push_back(make_iso(amb, pairs));
    }

    std::vector<Block> left_img, right_img;
    for (const std::string& a : s.ambient.atoms) {
        Block b;
        for (const std::string& c : t.ambient.atoms)
            b.push_back(amb.index_of(a + "|" + c));
        std::sort(b.begin(), b.end());
        left_img.push_back(b);
    }
    for (const std::string& c : t.ambient.atoms) {
        Block b;
        for (const std::string& a : s.ambient.atoms)
            b.push_back(amb.index_of(a + "|" + c));
        std::sort(b.begin(), b.end());
        right_img.push_back(b);
    }
    return {PartialIsoSystem(amb, isos),
            AlgebraEmbedding(s.ambient, amb, left_img),
            AlgebraEmbedding(t.ambient, amb, right_img)};
}

// -----------------------------------------------------------------------
// derivation
// -----------------------------------------------------------------------

namespace {

void check_disjoint_cover(const std::vector<std::vector<int>>& blocks,
                          int k, bool must_cover, const char* what)
{
    std::vector<char> seen(k, 0);
    for (const auto& b : blocks) {
        require(!b.empty(), std::string(what) + ": empty block");
        for (int i : b) {
            require(i >= 0 && i < k, std::string(what) + ": index range");
            require(!seen[i], std::string(what) + ": blocks overlap");
            seen[i] = 1;
        }
    }
    if (must_cover)
        for (int i = 0; i < k; ++i)
            require(seen[i], std::string(what) + ": blocks do not cover");
}

void validate_side(const DerivationData& d, bool left)
{
    const int k = left ? d.k_left : d.k_right;
    const auto& gamma = left ? d.gamma_l : d.gamma_r;
    const auto& delta = left ? d.delta_l : d.delta_r;
    const auto& lambda = left ? d.lambda_l : d.lambda_r;
    require(k >= 1, "derivation: k must be positive");
    require(gamma.size() == lambda.size(),
            "derivation: one lambda block per gamma block");
    std::vector<std::vector<int>> all = gamma;
    for (const auto& fam : delta)
        all.insert(all.end(), fam.begin(), fam.end());
    check_disjoint_cover(all, k, true, "derivation gamma/delta");
    check_disjoint_cover(lambda, k, true, "derivation lambda");
}

} // namespace

PairSet derivation_step(const PairSet& y, const DerivationData& d)
{
    require(d.gamma_l.size() == d.lambda_l.size() &&
                d.gamma_r.size() == d.lambda_r.size(),
            "derivation: one lambda block per gamma block");
    check_disjoint_cover(d.gamma_l, d.k_left, false, "derivation gamma");
    check_disjoint_cover(d.gamma_r, d.k_right, false, "derivation gamma");
    check_disjoint_cover(d.lambda_l, d.k_left, true, "derivation lambda");
    check_disjoint_cover(d.lambda_r, d.k_right, true, "derivation lambda");

    std::vector<int> ge(d.k_left, -1), gd(d.k_right, -1);
    for (int e = 0; e < static_cast<int>(d.gamma_l.size()); ++e)
        for (int i : d.gamma_l[e])
            ge[i] = e;
    for (int e = 0; e < static_cast<int>(d.gamma_r.size()); ++e)
        for (int j : d.gamma_r[e])
            gd[j] = e;

    PairSet out;
    for (const auto& [i, j] : y) {
        require(i >= 0 && i < d.k_left && j >= 0 && j < d.k_right,
                "derivation: pair out of range");
        if (ge[i] < 0 || gd[j] < 0) {
            out.insert({i, j});
            continue;
        }
        bool hit = false;
        for (int a : d.lambda_l[ge[i]]) {
            for (int b : d.lambda_r[gd[j]])
                if (y.count({a, b})) {
                    hit = true;
                    break;
                }
            if (hit)
                break;
        }
        if (hit)
            out.insert({i, j});
    }
    return out;
}

PairSet derivation_x0(const DerivationData& d)
{
    validate_side(d, true);
    validate_side(d, false);
    require(d.delta_l.size() == d.delta_r.size(),
            "derivation: delta families must pair up");
    PairSet out;
    for (const auto& gl : d.gamma_l)
        for (const auto& gr : d.gamma_r)
            for (int i : gl)
                for (int j : gr)
                    out.insert({i, j});
    for (size_t beta = 0; beta < d.delta_l.size(); ++beta)
        for (const auto& dl : d.delta_l[beta])
            for (const auto& dr : d.delta_r[beta])
                for (int i : dl)
                    for (int j : dr)
                        out.insert({i, j});
    return out;
}

PairSet derivation_fixed_point(const DerivationData& d)
{
    PairSet cur = derivation_x0(d);
    while (true) {
        PairSet next = derivation_step(cur, d);
        if (next == cur)
            break;
        cur = std::move(next);
    }
    std::vector<char> row(d.k_left, 0), col(d.k_right, 0);
    for (const auto& [i, j] : cur) {
        row[i] = 1;
        col[j] = 1;
    }
    for (int i = 0; i < d.k_left; ++i)
        ensure(row[i], "derivation fixed point lost a row");
    for (int j = 0; j < d.k_right; ++j)
        ensure(col[j], "derivation fixed point lost a column");
    return cur;
}

// -----------------------------------------------------------------------
// amalgamation over a normal iso
// -----------------------------------------------------------------------

AlgebraEmbedding lineage_embedding(const AmbientAlgebra& base,
                                   const AmbientAlgebra& refined)
{
    std::vector<Block> img(base.size());
    for (int a = 0; a < refined.size(); ++a) {
        const std::string& lab = refined.atoms[a];
        int best = -1;
        size_t best_len = 0;
        for (int b = 0; b < base.size(); ++b) {
            const std::string& pref = base.atoms[b];
            bool match = lab == pref ||
                         (lab.size() > pref.size() + 1 &&
                          lab.compare(0, pref.size(), pref) == 0 &&
                          lab[pref.size()] == '.');
            if (match && pref.size() + 1 > best_len) {
                best = b;
                best_len = pref.size() + 1;
            }
        }
        require(best >= 0, "no lineage parent for atom " + lab);
        img[best].push_back(a);
    }
    return AlgebraEmbedding(base, refined, img);
}

namespace {

using Labels = std::vector<std::string>; // sorted label sets

Labels sorted_labels(Labels v)
{
    std::sort(v.begin(), v.end());
    return v;
}

// Mutable one-sided refinement: pairs of (domain block, its image) over a
// label-identified atom set, with the base region of every atom tracked.
struct WSide {
    std::vector<Labels> dom, ran; // pair i: dom[i] -> ran[i]
    std::map<std::string, int> region;
    std::map<std::string, std::string> origin;

    int pair_count() const { return static_cast<int>(dom.size()); }

    int region_of(const Labels& b) const
    {
        int r = region.at(b[0]);
        for (const std::string& l : b)
            ensure(region.at(l) == r, "block straddles base atoms");
        return r;
    }

    bool pure(const Labels& b) const
    {
        for (const std::string& l : b)
            if (region.at(l) != region.at(b[0]))
                return false;
        return true;
    }

    Labels split_atom(const std::string& lab, int parts)
    {
        if (parts <= 1)
            return {lab};
        Labels kids;
        for (int i = 0; i < parts; ++i)
            kids.push_back(lab + "." + lineage_suffix(i));
        const int reg = region.at(lab);
        const std::string org = origin.at(lab);
        region.erase(lab);
        origin.erase(lab);
        for (const std::string& k : kids) {
            region[k] = reg;
            origin[k] = org;
        }
        auto patch = [&](Labels& b) {
            auto it = std::find(b.begin(), b.end(), lab);
            if (it == b.end())
                return;
            b.erase(it);
            b.insert(b.end(), kids.begin(), kids.end());
            std::sort(b.begin(), b.end());
        };
        for (auto& b : dom)
            patch(b);
        for (auto& b : ran)
            patch(b);
        return kids;
    }

    // Split pair pi so that the chosen side is partitioned exactly as
    // `parts`; the partner side is split canonically: atoms ordered by
    // (region, label), the first m-1 parts singletons, the remainder one
    // part, padding by an atom split when the partner is too small.
    void split_pair(int pi, bool on_dom, std::vector<Labels> parts)
    {
        const int m = static_cast<int>(parts.size());
        if (m <= 1)
            return;
        for (auto& p : parts)
            std::sort(p.begin(), p.end());
        std::sort(parts.begin(), parts.end());
        const Labels& partner = on_dom ? ran[pi] : dom[pi];
        if (static_cast<int>(partner.size()) < m) {
            Labels by_reg = partner;
            std::sort(by_reg.begin(), by_reg.end(),
                      [&](const std::string& a, const std::string& b) {
                          if (region.at(a) != region.at(b))
                              return region.at(a) < region.at(b);
                          return a < b;
                      });
            const std::string pad = by_reg.back();
            Labels kids = split_atom(
                pad, m - static_cast<int>(partner.size()) + 1);
            // The padded atom may also occur in the requested parts
            // (domain and range share the atom set): rewrite them.
            for (auto& part : parts) {
                auto it = std::find(part.begin(), part.end(), pad);
                if (it == part.end())
                    continue;
                part.erase(it);
                part.insert(part.end(), kids.begin(), kids.end());
                std::sort(part.begin(), part.end());
            }
        }
        Labels by_reg = on_dom ? ran[pi] : dom[pi];
        std::sort(by_reg.begin(), by_reg.end(),
                  [&](const std::string& a, const std::string& b) {
                      if (region.at(a) != region.at(b))
                          return region.at(a) < region.at(b);
                      return a < b;
                  });
        std::vector<Labels> pparts;
        for (int l = 0; l + 1 < m; ++l)
            pparts.push_back({by_reg[l]});
        pparts.push_back(
            sorted_labels(Labels(by_reg.begin() + m - 1, by_reg.end())));

        const auto& dparts = on_dom ? parts : pparts;
        const auto& rparts = on_dom ? pparts : parts;
        dom[pi] = dparts[0];
        ran[pi] = rparts[0];
        for (int l = 1; l < m; ++l) {
            dom.push_back(dparts[l]);
            ran.push_back(rparts[l]);
        }
    }

    // Align every block with the base regions.
    void phase0()
    {
        while (true) {
            bool acted = false;
            for (int pi = 0; pi < pair_count() && !acted; ++pi) {
                for (int side = 0; side < 2 && !acted; ++side) {
                    const Labels& b = side == 0 ? dom[pi] : ran[pi];
                    if (pure(b))
                        continue;
                    std::map<int, Labels> by_reg;
                    for (const std::string& l : b)
                        by_reg[region.at(l)].push_back(l);
                    std::vector<Labels> parts;
                    for (auto& [r, ls] : by_reg)
                        parts.push_back(sorted_labels(ls));
                    split_pair(pi, side == 0, parts);
                    acted = true;
                }
            }
            if (!acted)
                return;
        }
    }
};

// Chain-oriented accessors: a type II chain runs along psi inverse, so its
// forward side is the range.
const Labels& fblk(const WSide& w, int pi, bool flip)
{
    return flip ? w.ran[pi] : w.dom[pi];
}
const Labels& bblk(const WSide& w, int pi, bool flip)
{
    return flip ? w.dom[pi] : w.ran[pi];
}

std::vector<int> pairs_with_fblk_in(const WSide& w, bool flip, int reg)
{
    std::vector<int> out;
    for (int pi = 0; pi < w.pair_count(); ++pi)
        if (w.region_of(fblk(w, pi, flip)) == reg)
            out.push_back(pi);
    return out;
}

std::vector<int> pairs_with_bblk_in(const WSide& w, bool flip, int reg)
{
    std::vector<int> out;
    for (int pi = 0; pi < w.pair_count(); ++pi)
        if (w.region_of(bblk(w, pi, flip)) == reg)
            out.push_back(pi);
    return out;
}

// Make the chain's forward partitions match its backward partitions along
// the interior terms t_2 .. t_w, by a forward refinement sweep followed by
// a backward equalisation sweep.
void conform_chain(WSide& w, bool flip, const std::vector<int>& terms)
{
    const int width = static_cast<int>(terms.size());
    for (int g = 1; g < width; ++g) { // forward sweep over t_(g+1)
        const int t = terms[g];
        bool acted = true;
        while (acted) {
            acted = false;
            for (int pi : pairs_with_fblk_in(w, flip, t)) {
                std::vector<Labels> parts;
                for (int qj : pairs_with_bblk_in(w, flip, t)) {
                    Labels common;
                    const Labels& f = fblk(w, pi, flip);
                    const Labels& b = bblk(w, qj, flip);
                    std::set_intersection(f.begin(), f.end(), b.begin(),
                                          b.end(),
                                          std::back_inserter(common));
                    if (!common.empty())
                        parts.push_back(common);
                }
                if (parts.size() > 1) {
                    w.split_pair(pi, !flip, parts);
                    acted = true;
                    break;
                }
            }
        }
    }
    for (int g = width - 1; g >= 1; --g) { // backward sweep over t_(g+1)
        const int t = terms[g];
        bool acted = true;
        while (acted) {
            acted = false;
            for (int qj : pairs_with_bblk_in(w, flip, t)) {
                std::vector<Labels> parts;
                for (int pi : pairs_with_fblk_in(w, flip, t)) {
                    Labels common;
                    const Labels& b = bblk(w, qj, flip);
                    const Labels& f = fblk(w, pi, flip);
                    std::set_intersection(b.begin(), b.end(), f.begin(),
                                          f.end(),
                                          std::back_inserter(common));
                    if (!common.empty())
                        parts.push_back(common);
                }
                if (parts.size() > 1) {
                    w.split_pair(qj, flip, parts);
                    acted = true;
                    break;
                }
            }
        }
    }
    // The interior partitions now agree from the two directions.
    for (int g = 1; g < width; ++g) {
        const int t = terms[g];
        std::set<Labels> fw, bw;
        for (int pi : pairs_with_fblk_in(w, flip, t))
            fw.insert(fblk(w, pi, flip));
        for (int qj : pairs_with_bblk_in(w, flip, t))
            bw.insert(bblk(w, qj, flip));
        ensure(fw == bw, "conforming sweeps failed to align a term");
    }
}

// Transport of the forward cells at the beginning through the whole
// chain; trail[g] is the cell's position over term g, trail[w] where it
// lands inside the end.
struct CellTrail {
    std::vector<Labels> trail;
};

std::vector<CellTrail> transport_cells(const WSide& w, bool flip,
                                       const std::vector<int>& terms)
{
    std::vector<CellTrail> cells;
    for (int pi : pairs_with_fblk_in(w, flip, terms[0])) {
        CellTrail c;
        c.trail.push_back(fblk(w, pi, flip));
        int cur = pi;
        for (int g = 1; g < static_cast<int>(terms.size()); ++g) {
            const Labels& img = bblk(w, cur, flip);
            int nxt = -1;
            for (int qj : pairs_with_fblk_in(w, flip, terms[g]))
                if (fblk(w, qj, flip) == img) {
                    nxt = qj;
                    break;
                }
            ensure(nxt >= 0, "transport lost a conformed cell");
            c.trail.push_back(img);
            cur = nxt;
        }
        c.trail.push_back(bblk(w, cur, flip));
        cells.push_back(std::move(c));
    }
    std::sort(cells.begin(), cells.end(),
              [](const CellTrail& a, const CellTrail& b) {
                  return a.trail[0] < b.trail[0];
              });
    return cells;
}

} // namespace

Amalgam amalgamate_over_normal(const PartialIso& psi, const Refinement& left,
                               const Refinement& right)
{
    ChainDecomposition dec = decompose(psi);
    require(dec.normal, "NotNormal: " + dec.violation);
    const AmbientAlgebra& base = psi.domain.ambient;
    PartialIsoSystem base_sys(base, {psi});
    {
        std::string why;
        require(is_system_embedding(base_sys,
                                    PartialIsoSystem(
                                        left.iso.domain.ambient, {left.iso}),
                                    left.from_base, &why),
                "left refinement does not extend the base: " + why);
        require(is_system_embedding(
                    base_sys,
                    PartialIsoSystem(right.iso.domain.ambient, {right.iso}),
                    right.from_base, &why),
                "right refinement does not extend the base: " + why);
    }

    // Trivial refinements add nothing: the amalgam is the base itself and
    // the factor embeddings are the relabellings back onto it.
    if (left.iso.domain.ambient.size() == base.size() &&
        right.iso.domain.ambient.size() == base.size()) {
        auto relabel = [&](const Refinement& r) {
            std::vector<Block> img(base.size());
            for (int t = 0; t < base.size(); ++t)
                img[r.from_base.image[t][0]] = {t};
            return AlgebraEmbedding(r.iso.domain.ambient, base, img);
        };
        return {base_sys, relabel(left), relabel(right),
                identity_embedding(base)};
    }

    // Working copies: conform both sides to the base regions and chains.
    WSide sides[2];
    const Refinement* refs[2] = {&left, &right};
    for (int s = 0; s < 2; ++s) {
        const PartialIso& iso = refs[s]->iso;
        const AmbientAlgebra& amb = iso.domain.ambient;
        WSide& w = sides[s];
        for (int t = 0; t < base.size(); ++t)
            for (int a : refs[s]->from_base.image[t])
                w.region[amb.atoms[a]] = t;
        for (int a = 0; a < amb.size(); ++a)
            w.origin[amb.atoms[a]] = amb.atoms[a];
        for (int b = 0; b < iso.domain.block_count(); ++b) {
            Labels d, r;
            for (int a : iso.domain.blocks[b])
                d.push_back(amb.atoms[a]);
            for (int a : iso.range.blocks[iso.map[b]])
                r.push_back(amb.atoms[a]);
            w.dom.push_back(sorted_labels(d));
            w.ran.push_back(sorted_labels(r));
        }
        w.phase0();
        for (const StableChain& ch : dec.stable)
            conform_chain(w, !ch.type_one, ch.terms);
    }

    // Pieces of every base atom on each side.
    auto pieces = [&](const WSide& w, int t) {
        Labels out;
        for (const auto& [lab, reg] : w.region)
            if (reg == t)
                out.push_back(lab);
        return sorted_labels(out);
    };

    // Selected tensor atoms per base region, defaulting to all products.
    std::map<int, std::set<std::pair<std::string, std::string>>> selected;
    for (int t = 0; t < base.size(); ++t) {
        auto& e = selected[t];
        for (const std::string& a : pieces(sides[0], t))
            for (const std::string& b : pieces(sides[1], t))
                e.insert({a, b});
    }

    // Stable chains override their term regions via the derivation.
    for (const StableChain& ch : dec.stable) {
        const bool flip = !ch.type_one;
        const int t1 = ch.terms[0];
        const int width = static_cast<int>(ch.terms.size());
        std::vector<CellTrail> cl = transport_cells(sides[0], flip, ch.terms);
        std::vector<CellTrail> cr = transport_cells(sides[1], flip, ch.terms);

        Labels pl = pieces(sides[0], t1), pr = pieces(sides[1], t1);
        auto index_of = [](const Labels& p, const std::string& l) {
            return static_cast<int>(
                std::lower_bound(p.begin(), p.end(), l) - p.begin());
        };
        auto to_idx = [&](const Labels& p, const Labels& cell) {
            std::vector<int> out;
            for (const std::string& l : cell)
                out.push_back(index_of(p, l));
            std::sort(out.begin(), out.end());
            return out;
        };

        DerivationData dd;
        dd.k_left = static_cast<int>(pl.size());
        dd.k_right = static_cast<int>(pr.size());
        std::vector<int> free_atoms = ch.free_atoms;
        std::sort(free_atoms.begin(), free_atoms.end());
        std::map<int, int> beta_of;
        for (int b = 0; b < static_cast<int>(free_atoms.size()); ++b)
            beta_of[free_atoms[b]] = b;
        dd.delta_l.resize(free_atoms.size());
        dd.delta_r.resize(free_atoms.size());
        // gamma_kind[side][cell] : -1 for a Lambda landing, else beta.
        std::vector<std::vector<int>> family(2);
        for (int s = 0; s < 2; ++s) {
            const auto& cells = s == 0 ? cl : cr;
            const Labels& p = s == 0 ? pl : pr;
            auto& gam = s == 0 ? dd.gamma_l : dd.gamma_r;
            auto& del = s == 0 ? dd.delta_l : dd.delta_r;
            auto& lam = s == 0 ? dd.lambda_l : dd.lambda_r;
            for (const CellTrail& c : cells) {
                const int land = sides[s].region_of(c.trail.back());
                if (land == t1) {
                    gam.push_back(to_idx(p, c.trail[0]));
                    lam.push_back(to_idx(p, c.trail.back()));
                    family[s].push_back(-1);
                } else {
                    ensure(beta_of.count(land),
                           "cell landed outside the chain's end");
                    del[beta_of[land]].push_back(to_idx(p, c.trail[0]));
                    family[s].push_back(beta_of[land]);
                }
            }
        }
        for (size_t b = 0; b < free_atoms.size(); ++b)
            ensure(!dd.delta_l[b].empty() && !dd.delta_r[b].empty(),
                   "free atom received no landing");

        PairSet fp = derivation_fixed_point(dd);

        // E over the beginning.
        auto& e1 = selected[t1];
        e1.clear();
        for (const auto& [i, j] : fp)
            e1.insert({pl[i], pr[j]});

        // E over the interior terms: gamma products survive when their
        // level-1 product meets the fixed point; delta products of the
        // same free atom are all kept.
        auto meets = [&](const CellTrail& a, const CellTrail& b) {
            for (const std::string& x : a.trail[0])
                for (const std::string& y : b.trail[0])
                    if (fp.count({index_of(pl, x), index_of(pr, y)}))
                        return true;
            return false;
        };
        for (int g = 1; g < width; ++g) {
            auto& eg = selected[ch.terms[g]];
            eg.clear();
            for (size_t a = 0; a < cl.size(); ++a)
                for (size_t b = 0; b < cr.size(); ++b) {
                    const int fa = family[0][a], fb = family[1][b];
                    bool keep = false;
                    if (fa == -1 && fb == -1)
                        keep = meets(cl[a], cr[b]);
                    else if (fa >= 0 && fa == fb)
                        keep = true;
                    if (keep)
                        for (const std::string& x : cl[a].trail[g])
                            for (const std::string& y : cr[b].trail[g])
                                eg.insert({x, y});
                }
        }
    }

    // Assemble the amalgam.
    std::vector<std::string> labels;
    std::map<std::string, std::pair<std::string, std::string>> parts_of;
    for (const auto& [t, e] : selected)
        for (const auto& [a, b] : e) {
            labels.push_back(a + "|" + b);
            parts_of[labels.back()] = {a, b};
        }
    AmbientAlgebra amb(labels);

    auto tensor_block = [&](const Labels& x, const Labels& y) {
        Block out;
        for (const std::string& a : x)
            for (const std::string& b : y) {
                int i = amb.index_of(a + "|" + b);
                if (i >= 0)
                    out.push_back(i);
            }
        std::sort(out.begin(), out.end());
        return out;
    };

    std::vector<std::pair<Block, Block>> iso_pairs;
    for (int pi = 0; pi < sides[0].pair_count(); ++pi)
        for (int pj = 0; pj < sides[1].pair_count(); ++pj) {
            Block d = tensor_block(sides[0].dom[pi], sides[1].dom[pj]);
            Block r = tensor_block(sides[0].ran[pi], sides[1].ran[pj]);
            ensure(d.empty() == r.empty(),
                   "amalgam block and its image differ in support");
            if (d.empty())
                continue;
            ensure(sides[0].region_of(sides[0].ran[pi]) ==
                       sides[1].region_of(sides[1].ran[pj]),
                   "amalgam image straddles base atoms");
            iso_pairs.push_back({d, r});
        }
    PartialIsoSystem sys(amb, {make_iso(amb, iso_pairs)});

    auto side_embedding = [&](int s) {
        const AmbientAlgebra& src = refs[s]->iso.domain.ambient;
        std::vector<Block> img(src.size());
        for (int i = 0; i < amb.size(); ++i) {
            const auto& pr = parts_of.at(amb.atoms[i]);
            const std::string& part = s == 0 ? pr.first : pr.second;
            img[src.index_of(sides[s].origin.at(part))].push_back(i);
        }
        return AlgebraEmbedding(src, amb, img);
    };
    AlgebraEmbedding le = side_embedding(0), re = side_embedding(1);
    {
        std::string why;
        ensure(is_system_embedding(
                   PartialIsoSystem(left.iso.domain.ambient, {left.iso}),
                   sys, le, &why),
               "left factor does not embed in the amalgam: " + why);
        ensure(is_system_embedding(
                   PartialIsoSystem(right.iso.domain.ambient, {right.iso}),
                   sys, re, &why),
               "right factor does not embed in the amalgam: " + why);
    }
    AlgebraEmbedding be = compose_embeddings(left.from_base, le);
    {
        std::string why;
        ensure(is_system_embedding(base_sys, sys, be, &why),
               "base does not embed in the amalgam: " + why);
    }
    return {std::move(sys), std::move(le), std::move(re), std::move(be)};
}

} // namespace amalgam
