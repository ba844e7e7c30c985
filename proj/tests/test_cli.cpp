#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "medtrace/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Runs the installed binary with stdout/stderr captured to a file; returns
// the exit code.
int run_cli(const std::string& args, std::string* output = nullptr) {
    std::string log = (fs::temp_directory_path() / "medtrace_cli_log").string();
    std::string cmd =
        std::string(MEDTRACE_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log);
        std::ostringstream os;
        os << in.rdbuf();
        *output = os.str();
    }
    return WEXITSTATUS(rc);
}

std::string write_temp_config(const json& j, const std::string& name) {
    std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

json small_sphere_config() {
    json j = medtrace::bundled_scenario_config("sphere_generic");
    j["name"] = "sphere_small";
    j["tracer"]["step"] = 0.02;
    j["distance"]["n_fan"] = 512;
    j["analyses"] = {"deficiency_budget", "wedge_containment"};
    return j;
}

}  // namespace

TEST_CASE("list-scenarios names the bundled scenarios") {
    std::string out;
    REQUIRE(run_cli("list-scenarios", &out) == 0);
    for (const char* name :
         {"sphere_generic", "sphere_poles", "cigar_poles", "cigar_one_bump",
          "cigar_three_bumps", "spheroid_generic"})
        CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("validation errors name the offending field") {
    json j = small_sphere_config();
    j["tracer"].erase("step");
    std::string path = write_temp_config(j, "bad_config.json");
    std::string out;
    CHECK(run_cli("run " + path, &out) != 0);
    CHECK(out.find("scenario.tracer.step") != std::string::npos);

    j = small_sphere_config();
    j["tracer"]["step"] = 1.0;  // far above injectivity_bound / 20
    path = write_temp_config(j, "bad_config2.json");
    CHECK(run_cli("run " + path, &out) != 0);
    CHECK(out.find("scenario.tracer.step") != std::string::npos);

    j = small_sphere_config();
    j["q"] = j["p"];
    path = write_temp_config(j, "bad_config3.json");
    CHECK(run_cli("run " + path, &out) != 0);
    CHECK(out.find("scenario.q") != std::string::npos);
}

TEST_CASE("run produces the advertised artifacts and render accepts them") {
    std::string cfg = write_temp_config(small_sphere_config(), "small.json");
    std::string out_dir =
        (fs::temp_directory_path() / "medtrace_cli_out").string();
    fs::remove_all(out_dir);
    std::string out;
    REQUIRE(run_cli("run " + cfg + " --out " + out_dir, &out) == 0);
    for (const char* rel : {"curve.json", "curve.csv", "figure.svg",
                            "manifest.json", "analysis/deficiency_budget.json",
                            "analysis/wedge_containment.json"})
        CHECK(fs::exists(out_dir + "/" + rel));

    json manifest = json::parse(std::ifstream(out_dir + "/manifest.json"));
    CHECK(manifest.at("all_passed").get<bool>());
    CHECK(manifest.at("tool_version").get<std::string>() ==
          medtrace::kToolVersion);
    CHECK(manifest.at("analyses").size() == 2);

    json curve = json::parse(std::ifstream(out_dir + "/curve.json"));
    CHECK(curve.at("closed").get<bool>());
    CHECK(curve.contains("p"));

    std::string svg = out_dir + "/render.svg";
    REQUIRE(run_cli("render " + out_dir +
                        "/curve.json --projection=orthographic_3d --out " + svg,
                    &out) == 0);
    std::ifstream in(svg);
    std::ostringstream os;
    os << in.rdbuf();
    CHECK(os.str().find("<svg") == 0);
}

TEST_CASE("bundled scenario names are accepted as run configs") {
    // Parse-and-validate every bundled config without running it.
    for (const auto& [name, description] : medtrace::bundled_scenarios()) {
        CHECK(medtrace::is_bundled_scenario(name));
        CHECK(!description.empty());
        CHECK_NOTHROW(
            medtrace::parse_scenario(medtrace::bundled_scenario_config(name)));
    }
    CHECK(!medtrace::is_bundled_scenario("no_such_scenario"));
}
