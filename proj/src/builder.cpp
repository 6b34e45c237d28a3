#include "amalgam/builder.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "amalgam/boolean_core.hpp"

namespace amalgam {

namespace {

void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

Morphism identity_morphism(int n)
{
    Morphism m(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i)] = {i};
    return m;
}

struct EnsureResult {
    Morphism witness;    // requirement -> condition
    Morphism embed_prev; // old condition -> condition
};

// Embeds `req` into the condition, extending the condition by the
// driver's joint-embedding witness when no embedding exists.
EnsureResult ensure_embedded(const ClassDriver& d, std::string& condition,
                             const std::string& req)
{
    if (auto w = d.find_embedding(req, condition))
        return {*w, identity_morphism(d.system_size(condition))};
    auto jw = d.joint_embed_with_legs(condition, req);
    require(jw.has_value(),
            "driver provides no joint-embedding witness for the scheduled "
            "condition");
    condition = jw->system;
    return {jw->right, jw->left};
}

} // namespace

ConstructionTrace build_dense_orbit_approx(
    const ClassDriver& d, const std::string& initial,
    const std::vector<std::string>& schedule, int stage_budget)
{
    require(stage_budget > 0, "stage budget must be positive");
    ConstructionTrace t;
    t.driver = d.name();
    t.mode = "dense-orbit";
    t.note = "meets D(psi) for each scheduled condition";
    t.initial = initial;
    std::string f = initial;
    for (const std::string& req : schedule) {
        if (static_cast<int>(t.stages.size()) >= stage_budget) {
            t.complete = false;
            break;
        }
        EnsureResult er = ensure_embedded(d, f, req);
        BuildStage st;
        st.kind = "dense";
        st.requirement = req;
        st.condition = f;
        st.embed_prev = er.embed_prev;
        st.witness = er.witness;
        t.stages.push_back(std::move(st));
    }
    t.final_condition = f;
    return t;
}

ConstructionTrace build_generic_approx(
    const ClassDriver& d, const std::string& initial,
    const std::vector<GenericRequirement>& schedule, int stage_budget)
{
    require(stage_budget > 0, "stage budget must be positive");
    ConstructionTrace t;
    t.driver = d.name();
    t.mode = "generic";
    t.note = "routes each condition through the driver's extension witness; "
             "the scheduled extension families are a modeling choice";
    t.initial = initial;
    std::string f = initial;
    for (const GenericRequirement& gr : schedule) {
        if (static_cast<int>(t.stages.size()) >= stage_budget) {
            t.complete = false;
            break;
        }
        std::vector<std::string> cands = d.extension_candidates(gr.condition);
        require(!cands.empty(),
                "driver provides no extension witness for the scheduled "
                "condition");
        const std::string shat = cands.front();
        auto psi_to_shat = d.find_embedding(gr.condition, shat);
        require(psi_to_shat.has_value(),
                "extension witness does not extend its condition");

        EnsureResult er = ensure_embedded(d, f, shat);
        Morphism ghat = er.witness;
        BuildStage st;
        st.kind = "witness";
        st.requirement = gr.condition;
        st.base = shat;
        st.base_embed = *psi_to_shat;
        st.condition = f;
        st.embed_prev = er.embed_prev;
        st.base_to_condition = ghat;
        st.witness = compose_morphisms(*psi_to_shat, ghat);
        t.stages.push_back(std::move(st));

        for (const std::string& theta : gr.extensions) {
            if (static_cast<int>(t.stages.size()) >= stage_budget) {
                t.complete = false;
                break;
            }
            auto e0 = d.find_embedding(shat, theta);
            require(e0.has_value(),
                    "scheduled extension does not extend the witness");
            BuildStage ex;
            ex.kind = "extension";
            ex.requirement = theta;
            ex.base = shat;
            ex.base_embed = *e0;
            if (auto w = d.find_embedding_over(shat, *e0, theta, ghat, f)) {
                ex.condition = f;
                ex.embed_prev = identity_morphism(d.system_size(f));
                ex.witness = *w;
                ex.base_to_condition = ghat;
            } else {
                auto am = d.amalgamate(shat, ghat, f, *e0, theta);
                require(am.has_value(),
                        "span over the extension witness does not "
                        "amalgamate");
                f = am->system;
                ghat = compose_morphisms(ghat, am->left);
                ex.condition = f;
                ex.embed_prev = am->left;
                ex.witness = am->right;
                ex.base_to_condition = ghat;
            }
            t.stages.push_back(std::move(ex));
        }
        if (!t.complete) break;
    }
    t.final_condition = f;
    return t;
}

namespace {

bool fail(std::string* why, const std::string& msg)
{
    if (why) *why = msg;
    return false;
}

} // namespace

bool replay_trace(const ClassDriver& d, const ConstructionTrace& t,
                  std::string* why)
{
    std::string prev = t.initial;
    for (size_t i = 0; i < t.stages.size(); ++i) {
        const BuildStage& st = t.stages[i];
        std::string at = "stage " + std::to_string(i) + " (" + st.kind + "): ";
        if (!d.valid_embedding(prev, st.condition, st.embed_prev))
            return fail(why, at + "previous condition does not embed");
        if (!d.valid_embedding(st.requirement, st.condition, st.witness))
            return fail(why, at + "requirement witness is not an embedding");
        if (st.kind == "witness") {
            if (!d.valid_embedding(st.requirement, st.base, st.base_embed))
                return fail(why,
                            at + "condition does not embed into its witness");
            if (!d.valid_embedding(st.base, st.condition,
                                   st.base_to_condition))
                return fail(why, at + "witness placement is not an embedding");
            if (compose_morphisms(st.base_embed, st.base_to_condition) !=
                st.witness)
                return fail(why, at + "witness square does not commute");
        } else if (st.kind == "extension") {
            if (!d.valid_embedding(st.base, st.requirement, st.base_embed))
                return fail(why,
                            at + "witness does not embed into the extension");
            if (!d.valid_embedding(st.base, st.condition,
                                   st.base_to_condition))
                return fail(why, at + "witness placement is not an embedding");
            if (compose_morphisms(st.base_embed, st.witness) !=
                st.base_to_condition)
                return fail(why,
                            at + "conjugator does not fix the witness "
                                 "placement");
        } else if (st.kind != "dense") {
            return fail(why, at + "unknown stage kind");
        }
        prev = st.condition;
    }
    if (prev != t.final_condition)
        return fail(why, "final condition does not match the last stage");
    return true;
}

std::vector<std::string> boolean_condition_schedule(int ambient_atoms,
                                                    int max_blocks)
{
    require(ambient_atoms >= 1 && max_blocks >= 1,
            "schedule parameters must be positive");
    AmbientAlgebra amb = AmbientAlgebra::of_size(ambient_atoms);
    // Partitions of the atoms into at most max_blocks blocks, as
    // restricted growth strings.
    std::vector<std::vector<Block>> parts;
    std::vector<int> rgs(static_cast<size_t>(ambient_atoms), 0);
    while (true) {
        int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        if (blocks <= max_blocks) {
            std::vector<Block> bs(static_cast<size_t>(blocks));
            for (int a = 0; a < ambient_atoms; ++a)
                bs[static_cast<size_t>(rgs[static_cast<size_t>(a)])]
                    .push_back(a);
            parts.push_back(std::move(bs));
        }
        int i = ambient_atoms - 1;
        while (i > 0) {
            int cap = *std::max_element(rgs.begin(),
                                        rgs.begin() + i) + 1;
            if (rgs[static_cast<size_t>(i)] < cap) break;
            rgs[static_cast<size_t>(i--)] = 0;
        }
        if (i == 0) break;
        ++rgs[static_cast<size_t>(i)];
    }
    std::map<std::string, std::string> canon; // canonical key -> encoding
    for (const auto& dom : parts)
        for (const auto& ran : parts) {
            if (dom.size() != ran.size()) continue;
            std::vector<int> perm(dom.size());
            std::iota(perm.begin(), perm.end(), 0);
            do {
                PartialIsoSystem s(
                    amb, {PartialIso(Subalgebra(amb, dom),
                                     Subalgebra(amb, ran), perm)});
                canon.emplace(canonical_system_key(s),
                              encode_boolean_system(s));
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
    std::vector<std::string> out;
    out.reserve(canon.size());
    for (auto& [key, enc] : canon) out.push_back(enc);
    return out;
}

std::vector<std::string> boolean_atom_splits(const std::string& enc)
{
    PartialIsoSystem s = decode_boolean_system(enc);
    int k = s.ambient.size();
    AmbientAlgebra big = AmbientAlgebra::of_size(k + 1);
    std::vector<std::string> out;
    for (int split = 0; split < k; ++split) {
        // Atom `split` becomes {split, k}; every block keeps its labels.
        std::vector<PartialIso> isos;
        for (const PartialIso& p : s.isos) {
            auto widen = [&](const Subalgebra& sub) {
                std::vector<Block> bs = sub.blocks;
                for (Block& b : bs)
                    if (std::find(b.begin(), b.end(), split) != b.end())
                        b.push_back(k);
                return Subalgebra(big, bs);
            };
            isos.emplace_back(widen(p.domain), widen(p.range), p.map);
        }
        out.push_back(
            encode_boolean_system(PartialIsoSystem(big, isos)));
    }
    return out;
}

// ------------------------------------------------------------------
// Grid permutation factorization.
// ------------------------------------------------------------------

namespace {

void check_grid(const GridPermutation& g)
{
    require(g.rows >= 1 && g.cols >= 1, "grid dimensions must be positive");
    int n = g.rows * g.cols;
    require(static_cast<int>(g.perm.size()) == n,
            "grid permutation has the wrong length");
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (int v : g.perm) {
        require(v >= 0 && v < n && !seen[static_cast<size_t>(v)],
                "grid permutation is not a permutation");
        seen[static_cast<size_t>(v)] = 1;
    }
}

bool row_preserving(const GridPermutation& g)
{
    for (int x = 0; x < g.rows * g.cols; ++x)
        if (g.perm[static_cast<size_t>(x)] / g.cols != x / g.cols)
            return false;
    return true;
}

bool column_preserving(const GridPermutation& g)
{
    for (int x = 0; x < g.rows * g.cols; ++x)
        if (g.perm[static_cast<size_t>(x)] % g.cols != x % g.cols)
            return false;
    return true;
}

} // namespace

GridFactorization factor_grid_permutation(const GridPermutation& rho)
{
    check_grid(rho);
    int n = rho.rows, m = rho.cols;
    // Items are the grid cells; the occupancy multigraph has an edge
    // (source row -> target row) per item.  Its proper edge coloring with
    // m colors assigns each item an intermediate column.
    std::vector<std::vector<std::vector<int>>> bucket(
        static_cast<size_t>(n),
        std::vector<std::vector<int>>(static_cast<size_t>(n)));
    for (int x = 0; x < n * m; ++x)
        bucket[static_cast<size_t>(x / m)]
              [static_cast<size_t>(rho.perm[static_cast<size_t>(x)] / m)]
                  .push_back(x);
    std::vector<std::vector<int>> remaining(
        static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n), 0));
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q)
            remaining[static_cast<size_t>(r)][static_cast<size_t>(q)] =
                static_cast<int>(
                    bucket[static_cast<size_t>(r)][static_cast<size_t>(q)]
                        .size());

    std::vector<int> color(static_cast<size_t>(n * m), -1);
    std::vector<std::vector<int>> used(
        static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n), 0));
    for (int k = 0; k < m; ++k) {
        // Perfect matching source rows -> target rows on remaining
        // multiplicities, scanning in ascending order for determinism.
        std::vector<int> match_to(static_cast<size_t>(n), -1); // target->src
        std::function<bool(int, std::vector<char>&)> aug =
            [&](int r, std::vector<char>& vis) {
                for (int q = 0; q < n; ++q) {
                    if (vis[static_cast<size_t>(q)] ||
                        remaining[static_cast<size_t>(r)]
                                 [static_cast<size_t>(q)] == 0)
                        continue;
                    vis[static_cast<size_t>(q)] = 1;
                    if (match_to[static_cast<size_t>(q)] < 0 ||
                        aug(match_to[static_cast<size_t>(q)], vis)) {
                        match_to[static_cast<size_t>(q)] = r;
                        return true;
                    }
                }
                return false;
            };
        for (int r = 0; r < n; ++r) {
            std::vector<char> vis(static_cast<size_t>(n), 0);
            // An (m - k)-regular bipartite multigraph always has a
            // perfect matching (Hall), so this cannot fail.
            require(aug(r, vis), "internal error: matching failed");
        }
        for (int q = 0; q < n; ++q) {
            int r = match_to[static_cast<size_t>(q)];
            --remaining[static_cast<size_t>(r)][static_cast<size_t>(q)];
            int idx = used[static_cast<size_t>(r)][static_cast<size_t>(q)]++;
            int item =
                bucket[static_cast<size_t>(r)][static_cast<size_t>(q)]
                      [static_cast<size_t>(idx)];
            color[static_cast<size_t>(item)] = k;
        }
    }

    GridFactorization out;
    out.f1 = {n, m, std::vector<int>(static_cast<size_t>(n * m))};
    out.h = {n, m, std::vector<int>(static_cast<size_t>(n * m))};
    out.f2 = {n, m, std::vector<int>(static_cast<size_t>(n * m))};
    for (int x = 0; x < n * m; ++x) {
        int r = x / m;
        int y = rho.perm[static_cast<size_t>(x)];
        int rq = y / m, cq = y % m;
        int k = color[static_cast<size_t>(x)];
        out.f2.perm[static_cast<size_t>(x)] = r * m + k;
        out.h.perm[static_cast<size_t>(r * m + k)] = rq * m + k;
        out.f1.perm[static_cast<size_t>(rq * m + k)] = rq * m + cq;
    }
    return out;
}

bool grid_factorization_ok(const GridPermutation& rho,
                           const GridFactorization& fact)
{
    try {
        check_grid(rho);
        check_grid(fact.f1);
        check_grid(fact.h);
        check_grid(fact.f2);
    } catch (const std::exception&) {
        return false;
    }
    if (fact.f1.rows != rho.rows || fact.f1.cols != rho.cols ||
        fact.h.rows != rho.rows || fact.h.cols != rho.cols ||
        fact.f2.rows != rho.rows || fact.f2.cols != rho.cols)
        return false;
    if (!row_preserving(fact.f1) || !row_preserving(fact.f2) ||
        !column_preserving(fact.h))
        return false;
    for (int x = 0; x < rho.rows * rho.cols; ++x) {
        int y = fact.f1.perm[static_cast<size_t>(
            fact.h.perm[static_cast<size_t>(
                fact.f2.perm[static_cast<size_t>(x)])])];
        if (y != rho.perm[static_cast<size_t>(x)]) return false;
    }
    return true;
}

// ------------------------------------------------------------------
// Shift independence.
// ------------------------------------------------------------------

ShiftCertificate shift_independence(int k, int depth)
{
    require(k >= 0, "window radius must be non-negative");
    int p = 2 * k + 1;
    require(depth >= 2 * p,
            "truncation depth too small to carry the certificate");
    ShiftCertificate cert;
    cert.k = k;
    cert.depth = depth;
    cert.power = p;
    int w = 2 * k + 1; // window width
    // Window on [-k, k], shifted window on [p - k, p + k]; both must fit
    // inside the truncation.
    require(p + k <= depth, "shifted window exceeds the truncation");
    std::int64_t total = 0;
    bool all_meet = true;
    for (std::int64_t a = 0; a < (std::int64_t{1} << w); ++a)
        for (std::int64_t b = 0; b < (std::int64_t{1} << w); ++b) {
            // Cylinder atoms conflict only where the windows overlap.
            bool meet = true;
            for (int pos = -k; pos <= k; ++pos) {
                int shifted = pos - p; // position in the shifted window
                if (shifted < -k || shifted > k) continue;
                int bit_a = static_cast<int>((a >> (pos + k)) & 1);
                int bit_b = static_cast<int>((b >> (shifted + k)) & 1);
                if (bit_a != bit_b) {
                    meet = false;
                    break;
                }
            }
            if (meet)
                ++total;
            else
                all_meet = false;
        }
    cert.atom_count = total;
    cert.valid =
        all_meet && total == (std::int64_t{1} << (2 * w));
    return cert;
}

} // namespace amalgam
