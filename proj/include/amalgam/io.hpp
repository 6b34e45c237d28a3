#ifndef AMALGAM_IO_HPP
#define AMALGAM_IO_HPP

#include <string>
#include <utility>

#include "json.hpp"

#include "amalgam/builder.hpp"
#include "amalgam/checkers.hpp"
#include "amalgam/boolean_core.hpp"
#include "amalgam/measured.hpp"
#include "amalgam/metric.hpp"
#include "amalgam/trees.hpp"

namespace amalgam {

// Versioned structure documents: {"format_version": 1, "kind": <tag>,
// "payload": <kind-specific object>}.  Rationals are serialized as "p/q"
// strings and atoms as their lineage labels; loading validates against the
// library invariants and throws std::invalid_argument on malformed input.
inline constexpr int kFormatVersion = 1;

nlohmann::json to_document(const PartialIsoSystem& s);   // boolean-system
nlohmann::json to_document(const MeasuredSystem& s);     // measured-system
nlohmann::json to_document(const MetricSystem& s);       // metric-system
nlohmann::json to_document(const TreeIso& iso, int m);   // tree-iso
nlohmann::json to_document(const GridPermutation& g);    // grid-permutation
nlohmann::json to_document(const ConstructionTrace& t);  // construction-trace
nlohmann::json to_document(const CheckReport& r);        // check-report

std::string document_kind(const nlohmann::json& doc);

PartialIsoSystem boolean_system_from_document(const nlohmann::json& doc);
MeasuredSystem measured_system_from_document(const nlohmann::json& doc);
MetricSystem metric_system_from_document(const nlohmann::json& doc);
std::pair<int, TreeIso> tree_iso_from_document(const nlohmann::json& doc);
GridPermutation grid_permutation_from_document(const nlohmann::json& doc);
ConstructionTrace trace_from_document(const nlohmann::json& doc);

// Canonical text form (stable field order, two-space indent, trailing
// newline): identical values produce byte-identical text.
std::string dump_document(const nlohmann::json& doc);
nlohmann::json parse_document(const std::string& text);

// File helpers; throw std::invalid_argument when the file is unreadable.
nlohmann::json load_document_file(const std::string& path);
void save_document_file(const std::string& path, const nlohmann::json& doc);

} // namespace amalgam

#endif
