#include "amalgam/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace amalgam {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg)
{
    throw std::invalid_argument("malformed document: " + msg);
}

json wrap(const std::string& kind, json payload)
{
    return json{{"format_version", kFormatVersion},
                {"kind", kind},
                {"payload", std::move(payload)}};
}

const json& payload_of(const json& doc, const std::string& kind)
{
    if (!doc.is_object() || !doc.contains("format_version") ||
        !doc.contains("kind") || !doc.contains("payload"))
        bad("missing format_version/kind/payload");
    if (doc["format_version"] != kFormatVersion)
        bad("unsupported format version");
    if (doc["kind"] != kind)
        bad("expected kind '" + kind + "'");
    return doc["payload"];
}

json morphism_to_json(const Morphism& m)
{
    json out = json::array();
    for (const auto& img : m) out.push_back(img);
    return out;
}

Morphism morphism_from_json(const json& j)
{
    if (!j.is_array()) bad("morphism must be an array");
    Morphism m;
    for (const auto& img : j) {
        if (!img.is_array()) bad("morphism image must be an array");
        m.push_back(img.get<std::vector<int>>());
    }
    return m;
}

json blocks_to_json(const AmbientAlgebra& amb,
                    const std::vector<Block>& blocks)
{
    json out = json::array();
    for (const Block& b : blocks) {
        json jb = json::array();
        for (int a : b) {
            if (a < 0 || a >= amb.size()) bad("atom index out of range");
            jb.push_back(amb.atoms[static_cast<size_t>(a)]);
        }
        out.push_back(std::move(jb));
    }
    return out;
}

std::vector<Block> blocks_from_json(const AmbientAlgebra& amb,
                                    const json& j)
{
    if (!j.is_array()) bad("blocks must be an array");
    std::vector<Block> out;
    for (const auto& jb : j) {
        if (!jb.is_array()) bad("block must be an array of atom labels");
        Block b;
        for (const auto& lab : jb) {
            if (!lab.is_string()) bad("atom labels must be strings");
            int idx = -1;
            for (int a = 0; a < amb.size(); ++a)
                if (amb.atoms[static_cast<size_t>(a)] ==
                    lab.get<std::string>()) {
                    idx = a;
                    break;
                }
            if (idx < 0) bad("unknown atom label " + lab.get<std::string>());
            b.push_back(idx);
        }
        out.push_back(std::move(b));
    }
    return out;
}

json boolean_payload(const PartialIsoSystem& s)
{
    json isos = json::array();
    for (const PartialIso& p : s.isos)
        isos.push_back(json{{"domain", blocks_to_json(s.ambient,
                                                      p.domain.blocks)},
                            {"range", blocks_to_json(s.ambient,
                                                     p.range.blocks)},
                            {"map", p.map}});
    return json{{"atoms", s.ambient.atoms}, {"isos", std::move(isos)}};
}

PartialIsoSystem boolean_from_payload(const json& p)
{
    if (!p.contains("atoms") || !p.contains("isos"))
        bad("boolean system needs atoms and isos");
    AmbientAlgebra amb(p["atoms"].get<std::vector<std::string>>());
    std::vector<PartialIso> isos;
    for (const auto& ji : p["isos"]) {
        if (!ji.contains("domain") || !ji.contains("range") ||
            !ji.contains("map"))
            bad("iso needs domain, range and map");
        isos.emplace_back(
            Subalgebra(amb, blocks_from_json(amb, ji["domain"])),
            Subalgebra(amb, blocks_from_json(amb, ji["range"])),
            ji["map"].get<std::vector<int>>());
    }
    return PartialIsoSystem(amb, std::move(isos));
}

json rational_to_json(const Rational& r) { return r.str(); }

Rational rational_from_json(const json& j)
{
    if (!j.is_string()) bad("rationals must be \"p/q\" strings");
    return Rational::parse(j.get<std::string>());
}

TreeNode node_from_string(const std::string& s)
{
    if (s.size() < 2 || s.front() != '<' || s.back() != '>')
        bad("tree node must look like <i,j,...>");
    TreeNode t;
    std::string body = s.substr(1, s.size() - 2);
    if (body.empty()) return t;
    std::istringstream in(body);
    std::string part;
    while (std::getline(in, part, ','))
        t.push_back(std::stoi(part));
    return t;
}

json tree_to_json(const FiniteTree& t)
{
    json out = json::array();
    for (const TreeNode& n : t.nodes) out.push_back(node_to_string(n));
    return out;
}

FiniteTree tree_from_json(const json& j)
{
    if (!j.is_array()) bad("tree must be an array of node strings");
    std::vector<TreeNode> nodes;
    for (const auto& n : j) {
        if (!n.is_string()) bad("tree nodes must be strings");
        nodes.push_back(node_from_string(n.get<std::string>()));
    }
    return FiniteTree(std::move(nodes));
}

} // namespace

json to_document(const PartialIsoSystem& s)
{
    return wrap("boolean-system", boolean_payload(s));
}

json to_document(const MeasuredSystem& s)
{
    json mass = json::array();
    for (const Rational& r : s.measure.mass)
        mass.push_back(rational_to_json(r));
    return wrap("measured-system",
                json{{"system", boolean_payload(s.system)},
                     {"mass", std::move(mass)},
                     {"dyadic", s.measure.dyadic}});
}

json to_document(const MetricSystem& s)
{
    json dist = json::array();
    for (const auto& row : s.space.dist) {
        json jr = json::array();
        for (const Rational& r : row) jr.push_back(rational_to_json(r));
        dist.push_back(std::move(jr));
    }
    json isos = json::array();
    for (const PartialIsometry& p : s.isos) {
        json jp = json::array();
        for (const auto& [a, b] : p.pairs)
            jp.push_back(json::array({a, b}));
        isos.push_back(std::move(jp));
    }
    return wrap("metric-system", json{{"points", s.space.points},
                                      {"dist", std::move(dist)},
                                      {"isos", std::move(isos)}});
}

json to_document(const TreeIso& iso, int m)
{
    json images = json::array();
    for (const TreeNode& n : iso.images) images.push_back(node_to_string(n));
    return wrap("tree-iso", json{{"m", m},
                                 {"source", tree_to_json(iso.source)},
                                 {"target", tree_to_json(iso.target)},
                                 {"images", std::move(images)}});
}

json to_document(const GridPermutation& g)
{
    return wrap("grid-permutation",
                json{{"rows", g.rows}, {"cols", g.cols}, {"perm", g.perm}});
}

json to_document(const ConstructionTrace& t)
{
    json stages = json::array();
    for (const BuildStage& st : t.stages)
        stages.push_back(
            json{{"kind", st.kind},
                 {"requirement", st.requirement},
                 {"base", st.base},
                 {"base_embed", morphism_to_json(st.base_embed)},
                 {"condition", st.condition},
                 {"embed_prev", morphism_to_json(st.embed_prev)},
                 {"witness", morphism_to_json(st.witness)},
                 {"base_to_condition",
                  morphism_to_json(st.base_to_condition)}});
    return wrap("construction-trace",
                json{{"driver", t.driver},
                     {"mode", t.mode},
                     {"note", t.note},
                     {"initial", t.initial},
                     {"stages", std::move(stages)},
                     {"final_condition", t.final_condition},
                     {"complete", t.complete}});
}

json to_document(const CheckReport& r)
{
    return wrap("check-report",
                json{{"property", r.property},
                     {"driver", r.driver},
                     {"n", r.n},
                     {"bound", r.bound},
                     {"holds", r.holds},
                     {"bound_independent", r.bound_independent},
                     {"detail", r.detail},
                     {"counterexample", r.counterexample}});
}

std::string document_kind(const json& doc)
{
    if (!doc.is_object() || !doc.contains("kind") ||
        !doc["kind"].is_string())
        bad("missing kind tag");
    return doc["kind"].get<std::string>();
}

PartialIsoSystem boolean_system_from_document(const json& doc)
{
    return boolean_from_payload(payload_of(doc, "boolean-system"));
}

MeasuredSystem measured_system_from_document(const json& doc)
{
    const json& p = payload_of(doc, "measured-system");
    if (!p.contains("system") || !p.contains("mass") ||
        !p.contains("dyadic"))
        bad("measured system needs system, mass and dyadic");
    PartialIsoSystem sys = boolean_from_payload(p["system"]);
    std::vector<Rational> mass;
    for (const auto& jm : p["mass"]) mass.push_back(rational_from_json(jm));
    if (!p["dyadic"].is_boolean()) bad("dyadic must be a boolean");
    return MeasuredSystem(
        sys, RationalMeasure(sys.ambient, std::move(mass),
                             p["dyadic"].get<bool>()));
}

MetricSystem metric_system_from_document(const json& doc)
{
    const json& p = payload_of(doc, "metric-system");
    if (!p.contains("points") || !p.contains("dist") || !p.contains("isos"))
        bad("metric system needs points, dist and isos");
    std::vector<std::vector<Rational>> dist;
    for (const auto& row : p["dist"]) {
        std::vector<Rational> r;
        for (const auto& jm : row) r.push_back(rational_from_json(jm));
        dist.push_back(std::move(r));
    }
    FiniteMetricSpace space(p["points"].get<std::vector<std::string>>(),
                            std::move(dist));
    std::vector<PartialIsometry> isos;
    for (const auto& jp : p["isos"]) {
        PartialIsometry iso;
        for (const auto& pr : jp) {
            if (!pr.is_array() || pr.size() != 2)
                bad("isometry pairs must be [source, target]");
            iso.pairs.emplace_back(pr[0].get<int>(), pr[1].get<int>());
        }
        std::string why;
        if (!is_partial_isometry(space, iso, &why))
            bad("invalid partial isometry: " + why);
        isos.push_back(std::move(iso));
    }
    return MetricSystem(std::move(space), std::move(isos));
}

std::pair<int, TreeIso> tree_iso_from_document(const json& doc)
{
    const json& p = payload_of(doc, "tree-iso");
    if (!p.contains("m") || !p.contains("source") || !p.contains("target") ||
        !p.contains("images"))
        bad("tree iso needs m, source, target and images");
    std::vector<TreeNode> images;
    for (const auto& n : p["images"]) {
        if (!n.is_string()) bad("tree nodes must be strings");
        images.push_back(node_from_string(n.get<std::string>()));
    }
    return {p["m"].get<int>(),
            TreeIso(tree_from_json(p["source"]), tree_from_json(p["target"]),
                    std::move(images))};
}

GridPermutation grid_permutation_from_document(const json& doc)
{
    const json& p = payload_of(doc, "grid-permutation");
    if (!p.contains("rows") || !p.contains("cols") || !p.contains("perm"))
        bad("grid permutation needs rows, cols and perm");
    GridPermutation g;
    g.rows = p["rows"].get<int>();
    g.cols = p["cols"].get<int>();
    g.perm = p["perm"].get<std::vector<int>>();
    return g;
}

ConstructionTrace trace_from_document(const json& doc)
{
    const json& p = payload_of(doc, "construction-trace");
    for (const char* f : {"driver", "mode", "note", "initial", "stages",
                          "final_condition", "complete"})
        if (!p.contains(f)) bad(std::string("trace needs field ") + f);
    ConstructionTrace t;
    t.driver = p["driver"].get<std::string>();
    t.mode = p["mode"].get<std::string>();
    t.note = p["note"].get<std::string>();
    t.initial = p["initial"].get<std::string>();
    t.final_condition = p["final_condition"].get<std::string>();
    t.complete = p["complete"].get<bool>();
    for (const auto& js : p["stages"]) {
        BuildStage st;
        st.kind = js.at("kind").get<std::string>();
        st.requirement = js.at("requirement").get<std::string>();
        st.base = js.at("base").get<std::string>();
        st.base_embed = morphism_from_json(js.at("base_embed"));
        st.condition = js.at("condition").get<std::string>();
        st.embed_prev = morphism_from_json(js.at("embed_prev"));
        st.witness = morphism_from_json(js.at("witness"));
        st.base_to_condition = morphism_from_json(js.at("base_to_condition"));
        t.stages.push_back(std::move(st));
    }
    return t;
}

std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

json parse_document(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        bad(e.what());
    }
}

json load_document_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) bad("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str());
}

void save_document_file(const std::string& path, const json& doc)
{
    std::ofstream out(path);
    if (!out) bad("cannot write " + path);
    out << dump_document(doc);
}

} // namespace amalgam
