#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "renormlab/norms.hpp"
#include "renormlab/probes.hpp"
#include "renormlab/tree.hpp"
#include "renormlab/weights.hpp"

// Single-header json library is vendored; pull the full header in the .cpp
// only. Reports carry a schema tag, the tool version, a config echo and the
// result payload; no timestamps, so identical runs produce identical bytes.

namespace renormlab {

inline constexpr const char* kReportSchema = "renormlab-report/1";
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::ordered_json norm_value_json(const NormValue& v);
nlohmann::ordered_json probe_report_json(const ProbeReport& r);
nlohmann::ordered_json finite_tree_json(const FiniteTree& t);
nlohmann::ordered_json classification_json(const TreePresentation& p, const Classification& c);

nlohmann::ordered_json make_report(const std::string& subcommand,
                                   const nlohmann::ordered_json& config,
                                   const nlohmann::ordered_json& results);

void write_report(const nlohmann::ordered_json& report, const std::string& path);

struct DiffResult {
    bool identical = true;
    std::vector<std::string> entries;
};

// Semantic diff of the results sections: timestamps ignored, exact rationals
// compared exactly, certified values within the wider radius reported as
// within-certified-error. Throws SchemaMismatch on different schema tags.
DiffResult report_diff(const std::string& path_a, const std::string& path_b);

}  // namespace renormlab
