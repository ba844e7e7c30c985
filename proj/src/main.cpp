#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "medtrace/scenario.hpp"

namespace {

int cmd_run(const std::string& config, std::string out_dir) {
    medtrace::Scenario sc;
    if (medtrace::is_bundled_scenario(config))
        sc = medtrace::parse_scenario(medtrace::bundled_scenario_config(config));
    else
        sc = medtrace::load_scenario_file(config);
    if (out_dir.empty()) out_dir = "out/" + sc.name;
    medtrace::RunManifest m = medtrace::run_scenario(sc, out_dir);
    for (const auto& [name, ok] : m.analyses)
        std::cout << (ok ? "pass  " : "FAIL  ") << name << "\n";
    std::cout << (m.all_passed ? "all analyses passed" : "some analyses failed")
              << " (" << out_dir << "/manifest.json)\n";
    return m.all_passed ? 0 : 1;
}

int cmd_list() {
    for (const auto& [name, description] : medtrace::bundled_scenarios())
        std::cout << name << "\n    " << description << "\n";
    return 0;
}

int cmd_render(const std::string& curve_path, const std::string& projection,
               const std::string& out_path) {
    std::ifstream in(curve_path);
    if (!in) throw medtrace::ConfigError("cannot open " + curve_path);
    nlohmann::json doc;
    in >> doc;
    std::string svg = medtrace::render_curve_svg(doc, projection);
    if (out_path.empty() || out_path == "-") {
        std::cout << svg;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        out << svg;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mediatrix tracer for surfaces of revolution"};
    app.set_version_flag("--version", std::string(medtrace::kToolVersion));
    app.require_subcommand(1);

    std::string config, out_dir;
    CLI::App* run = app.add_subcommand(
        "run", "trace a scenario and run its analyses");
    run->add_option("config", config,
                    "scenario config file or bundled scenario name")
        ->required();
    run->add_option("--out", out_dir,
                    "output directory (default: out/<scenario name>)");

    app.add_subcommand("list-scenarios", "list the bundled scenarios");

    std::string curve_path, projection = "chart_plane", svg_out;
    CLI::App* render =
        app.add_subcommand("render", "render a traced curve to SVG");
    render->add_option("curve", curve_path, "curve.json produced by run")
        ->required();
    render->add_option("--projection", projection,
                       "chart_plane or orthographic_3d")
        ->check(CLI::IsMember({"chart_plane", "orthographic_3d"}));
    render->add_option("--out", svg_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (run->parsed()) return cmd_run(config, out_dir);
        if (render->parsed())
            return cmd_render(curve_path, projection, svg_out);
        return cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
