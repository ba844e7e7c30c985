#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "medtrace/analysis.hpp"

namespace medtrace {

inline constexpr const char* kToolVersion = "medtrace 1.0.0";

// A fully validated run configuration.
struct Scenario {
    std::string name;
    std::string description;
    SurfaceSpec surface;
    ChartPoint p;
    ChartPoint q;
    MediatrixParams tracer;
    DistanceParams distance;
    std::uint64_t seed = 1;
    std::vector<std::string> analyses;  // subset of analysis_names()
    std::vector<std::string> outputs;   // subset of {"json","csv","svg"}
};

// Names of the analysis suites a scenario may request.
const std::vector<std::string>& analysis_names();

// Parse and validate; throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& config);
Scenario load_scenario_file(const std::string& path);

// Bundled scenarios shipped with the tool.
std::vector<std::pair<std::string, std::string>> bundled_scenarios();
bool is_bundled_scenario(const std::string& name);
nlohmann::json bundled_scenario_config(const std::string& name);

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<std::string> files;                       // emitted paths
    std::vector<std::pair<std::string, bool>> analyses;   // name -> passed
    bool all_passed = true;
};

// Execute a scenario, writing artifacts under out_dir:
// curve.json, curve.csv, figure.svg, analysis/<name>.json, manifest.json.
RunManifest run_scenario(const Scenario& scenario, const std::string& out_dir);

// Render a curve document (the curve.json format) as an SVG drawing.
// projection is "chart_plane" (longitude/height development) or
// "orthographic_3d"; the output is byte-deterministic for identical input.
std::string render_curve_svg(const nlohmann::json& curve_doc,
                             const std::string& projection);

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

}  // namespace medtrace
