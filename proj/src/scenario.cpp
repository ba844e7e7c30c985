#include "medtrace/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace medtrace {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& path, const std::string& why) {
    throw ConfigError("scenario field `" + path + "`: " + why);
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.is_object() || !j.contains(key))
        field_error(path + "." + key, "missing");
    return j.at(key);
}

double need_number(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_number()) field_error(path + "." + key, "must be a number");
    return v.get<double>();
}

double positive_number(const json& j, const std::string& path,
                       const char* key) {
    double v = need_number(j, path, key);
    if (!(v > 0.0)) field_error(path + "." + key, "must be positive");
    return v;
}

std::string need_string(const json& j, const std::string& path,
                        const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_string()) field_error(path + "." + key, "must be a string");
    return v.get<std::string>();
}

ChartPoint parse_point(const json& j, const std::string& path) {
    std::string chart = need_string(j, path, "chart");
    ChartPoint x;
    try {
        x.chart = chart_from_name(chart);
    } catch (const std::runtime_error&) {
        field_error(path + ".chart",
                    "must be one of body, north_cap, south_cap");
    }
    x.u = need_number(j, path, "u");
    x.v = need_number(j, path, "v");
    return x;
}

SurfaceSpec parse_surface(const json& j, const std::string& path) {
    SurfaceSpec spec;
    std::string kind = need_string(j, path, "kind");
    if (kind == "round_sphere") {
        spec.kind = SurfaceSpec::Kind::RoundSphere;
        spec.radius = positive_number(j, path, "radius");
    } else if (kind == "spheroid") {
        spec.kind = SurfaceSpec::Kind::Spheroid;
        spec.a = positive_number(j, path, "a");
        spec.c = positive_number(j, path, "c");
    } else if (kind == "cigar" || kind == "bumped_cigar") {
        spec.kind = kind == "cigar" ? SurfaceSpec::Kind::Cigar
                                    : SurfaceSpec::Kind::BumpedCigar;
        spec.cylinder_half_height =
            positive_number(j, path, "cylinder_half_height");
        spec.smoothing_width = positive_number(j, path, "smoothing_width");
        if (spec.kind == SurfaceSpec::Kind::BumpedCigar) {
            const json& bumps = need(j, path, "bumps");
            if (!bumps.is_array() || bumps.empty())
                field_error(path + ".bumps", "must be a non-empty array");
            for (std::size_t i = 0; i < bumps.size(); ++i) {
                std::string bp = path + ".bumps[" + std::to_string(i) + "]";
                BumpSpec b;
                b.center_z = need_number(bumps[i], bp, "center_z");
                b.center_phi = need_number(bumps[i], bp, "center_phi");
                b.radius = positive_number(bumps[i], bp, "radius");
                b.height = positive_number(bumps[i], bp, "height");
                spec.bumps.push_back(b);
            }
        }
    } else {
        field_error(path + ".kind",
                    "must be one of round_sphere, spheroid, cigar, "
                    "bumped_cigar");
    }
    if (j.contains("injectivity_bound"))
        spec.injectivity_bound = positive_number(j, path, "injectivity_bound");
    return spec;
}

ordered_json scenario_to_json(const Scenario& sc) {
    ordered_json j;
    j["name"] = sc.name;
    j["description"] = sc.description;
    ordered_json surf;
    switch (sc.surface.kind) {
        case SurfaceSpec::Kind::RoundSphere:
            surf["kind"] = "round_sphere";
            surf["radius"] = sc.surface.radius;
            break;
        case SurfaceSpec::Kind::Spheroid:
            surf["kind"] = "spheroid";
            surf["a"] = sc.surface.a;
            surf["c"] = sc.surface.c;
            break;
        case SurfaceSpec::Kind::Cigar:
        case SurfaceSpec::Kind::BumpedCigar:
            surf["kind"] = sc.surface.kind == SurfaceSpec::Kind::Cigar
                               ? "cigar"
                               : "bumped_cigar";
            surf["cylinder_half_height"] = sc.surface.cylinder_half_height;
            surf["smoothing_width"] = sc.surface.smoothing_width;
            if (sc.surface.kind == SurfaceSpec::Kind::BumpedCigar) {
                surf["bumps"] = ordered_json::array();
                for (const BumpSpec& b : sc.surface.bumps)
                    surf["bumps"].push_back({{"center_z", b.center_z},
                                             {"center_phi", b.center_phi},
                                             {"radius", b.radius},
                                             {"height", b.height}});
            }
            break;
    }
    if (sc.surface.injectivity_bound > 0.0)
        surf["injectivity_bound"] = sc.surface.injectivity_bound;
    j["surface"] = surf;
    auto pt = [](const ChartPoint& x) {
        return ordered_json{
            {"chart", chart_name(x.chart)}, {"u", x.u}, {"v", x.v}};
    };
    j["p"] = pt(sc.p);
    j["q"] = pt(sc.q);
    j["tracer"] = {{"step", sc.tracer.step},
                   {"max_points", sc.tracer.max_points},
                   {"tol_f", sc.tracer.tol_f},
                   {"beta_min", sc.tracer.beta_min},
                   {"deficiency_threshold", sc.tracer.deficiency_threshold}};
    j["distance"] = {{"n_fan", sc.distance.n_fan},
                     {"max_length", sc.distance.max_length},
                     {"rel_tol_min", sc.distance.rel_tol_min},
                     {"cluster_gap", sc.distance.cluster_gap},
                     {"tol_hit", sc.distance.tol_hit}};
    j["seed"] = sc.seed;
    j["analyses"] = sc.analyses;
    j["outputs"] = sc.outputs;
    return j;
}

// ---------------------------------------------------------------------------
// Bundled scenarios

const char* kBundledTexts[] = {
    R"({
  "name": "sphere_generic",
  "description": "Unit sphere, generic equatorial endpoints; the mediatrix is a great circle",
  "surface": {"kind": "round_sphere", "radius": 1.0},
  "p": {"chart": "body", "u": 0.0, "v": 0.0},
  "q": {"chart": "body", "u": 0.0, "v": 1.0},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005281,
  "analyses": ["prop1", "lemma6", "linearizability", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
    R"({
  "name": "sphere_poles",
  "description": "Unit sphere with polar endpoints; the mediatrix is the equator",
  "surface": {"kind": "round_sphere", "radius": 1.0},
  "p": {"chart": "north_cap", "u": 0.0, "v": 0.0},
  "q": {"chart": "south_cap", "u": 0.0, "v": 0.0},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005282,
  "analyses": ["prop1", "lemma6", "linearizability", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
    R"({
  "name": "cigar_poles",
  "description": "Smoothed cigar with polar endpoints; the mediatrix is the flat equator",
  "surface": {"kind": "cigar", "cylinder_half_height": 1.2, "smoothing_width": 0.2},
  "p": {"chart": "north_cap", "u": 0.0, "v": 0.0},
  "q": {"chart": "south_cap", "u": 0.0, "v": 0.0},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005283,
  "analyses": ["prop1", "lemma6", "linearizability", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
    R"({
  "name": "cigar_one_bump",
  "description": "Cigar with one northern bump; the mediatrix has a single corner facing it",
  "surface": {"kind": "bumped_cigar", "cylinder_half_height": 1.2, "smoothing_width": 0.2,
              "bumps": [{"center_z": 0.5, "center_phi": 1.0, "radius": 0.3, "height": 0.2}]},
  "p": {"chart": "north_cap", "u": 0.0, "v": 0.0},
  "q": {"chart": "south_cap", "u": 0.0, "v": 0.0},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005284,
  "analyses": ["prop1", "lemma6", "linearizability", "gauss_bonnet", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
    R"({
  "name": "cigar_three_bumps",
  "description": "Cigar with three disjoint bumps on both halves; several mediatrix corners",
  "surface": {"kind": "bumped_cigar", "cylinder_half_height": 1.2, "smoothing_width": 0.2,
              "bumps": [{"center_z": 0.5, "center_phi": 1.0, "radius": 0.3, "height": 0.2},
                        {"center_z": -0.4, "center_phi": 2.8, "radius": 0.25, "height": 0.15},
                        {"center_z": 0.3, "center_phi": 4.6, "radius": 0.2, "height": 0.12}]},
  "p": {"chart": "north_cap", "u": 0.0, "v": 0.0},
  "q": {"chart": "south_cap", "u": 0.0, "v": 0.0},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005285,
  "analyses": ["prop1", "lemma6", "linearizability", "gauss_bonnet", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
    R"({
  "name": "spheroid_generic",
  "description": "Prolate spheroid with generic endpoints",
  "surface": {"kind": "spheroid", "a": 1.0, "c": 1.4},
  "p": {"chart": "body", "u": 0.4, "v": 0.0},
  "q": {"chart": "body", "u": -0.3, "v": 1.2},
  "tracer": {"step": 0.01, "max_points": 2000, "tol_f": 1e-06, "beta_min": 0.01, "deficiency_threshold": 0.05},
  "distance": {"n_fan": 2048, "max_length": 0.0, "rel_tol_min": 0.0001, "cluster_gap": 0.01, "tol_hit": 1e-06},
  "seed": 74005286,
  "analyses": ["prop1", "lemma6", "linearizability", "deficiency_budget", "wedge_containment"],
  "outputs": ["json", "csv", "svg"]
})",
};

// ---------------------------------------------------------------------------
// Analysis suites

std::vector<int> flagged_indices(const MediatrixCurve& curve,
                                 double threshold) {
    std::vector<int> out;
    for (int i = 0; i < (int)curve.points.size(); ++i)
        if (curve.points[i].deficiency > threshold) out.push_back(i);
    return out;
}

// Directional-derivative oracle: the one-sided derivative of each distance
// field along a ray equals -cos of the angular distance to the minimizing
// direction set; compared against Richardson-extrapolated finite differences.
ordered_json run_prop1(const Surface& s, const DistanceField& fp,
                       const DistanceField& fq, const MediatrixCurve& curve,
                       std::uint64_t seed, bool& passed) {
    const double tol = 1e-3;
    Rng rng(seed ^ fnv1a64("directional-derivative"));
    double max_err = 0.0;
    int samples = 0;
    for (int k = 0; k < 40; ++k) {
        int i = (int)(rng.next_u64() % curve.points.size());
        double theta = rng.uniform(0.0, kTwoPi);
        const MediatrixPoint& mp = curve.points[i];
        for (const DistanceField* f : {&fp, &fq}) {
            const DistanceResult& at = f == &fp ? mp.to_p : mp.to_q;
            if (at.degenerate) continue;
            // The first-order expansion holds only while the minimizing
            // branch stays active across the stencil; skip points where a
            // near-minimizing branch within the stencil scale could take
            // over (near cut points and mediatrix corners).
            DistanceResult wide = f->query(mp.position, &at.launches, 5e-2);
            if (wide.degenerate ||
                wide.directions.size() != at.directions.size())
                continue;
            double analytic = directional_derivative(at, {theta});
            double d0 = at.distance;
            std::vector<LaunchData> hints = at.launches;
            auto fd = [&](double t) {
                ChartPoint z = exp_map(s, mp.position, {theta}, t);
                DistanceResult r = f->query(z, &hints);
                hints = r.launches;
                return (r.distance - d0) / t;
            };
            double d1 = fd(1e-2), d2 = fd(5e-3), d3 = fd(2.5e-3);
            double r1 = 2.0 * d2 - d1, r2 = 2.0 * d3 - d2;
            double rr = (4.0 * r2 - r1) / 3.0;
            max_err = std::max(max_err, std::fabs(rr - analytic));
            ++samples;
        }
    }
    passed = max_err <= tol;
    return {{"samples", samples},
            {"max_error", max_err},
            {"tolerance", tol},
            {"passed", passed}};
}

// Bisector-ray residual decay: |f| along each wedge bisector is o(t).
ordered_json run_lemma6(const Surface&, const DistanceField& fp,
                        const DistanceField& fq, const MediatrixCurve& curve,
                        const MediatrixParams& params, std::uint64_t seed,
                        bool& passed) {
    const std::vector<double> grid = {0.2, 0.1, 0.05, 0.025};
    std::vector<int> flagged =
        flagged_indices(curve, params.deficiency_threshold);
    std::vector<int> targets = flagged;
    Rng rng(seed ^ fnv1a64("bisector-residual"));
    for (int k = 0; k < 6; ++k)
        targets.push_back((int)(rng.next_u64() % curve.points.size()));
    passed = true;
    ordered_json points = ordered_json::array();
    for (int i : targets) {
        const MediatrixPoint& mp = curve.points[i];
        bool is_flagged =
            std::find(flagged.begin(), flagged.end(), i) != flagged.end();
        for (int w = 0; w < (int)mp.prewedges.size(); ++w) {
            EtaReport er = bisector_ray_residual(fp, fq, mp, w, grid);
            bool decreasing = true;
            double max_f = 0.0;
            ordered_json etas = ordered_json::array();
            for (std::size_t a = 0; a < er.samples.size(); ++a) {
                etas.push_back(
                    {{"t", er.samples[a].t}, {"eta", er.samples[a].eta}});
                max_f = std::max(max_f, er.samples[a].eta * er.samples[a].t);
                if (a > 0 && er.samples[a].eta >= er.samples[a - 1].eta)
                    decreasing = false;
            }
            // Singularities must decay strictly on the whole grid. Smooth
            // samples may sit near a singularity (large-t rays cross its
            // influence zone) or on the corrector's residual floor where
            // |f| is a tiny constant, so they pass on net decay or when |f|
            // never leaves the floor.
            bool net_decay = er.samples.back().eta < er.samples.front().eta;
            bool point_ok = is_flagged ? decreasing
                                       : (decreasing || net_decay ||
                                          max_f <= 10.0 * params.tol_f);
            passed = passed && point_ok;
            points.push_back({{"index", i},
                              {"wedge", w},
                              {"eta", etas},
                              {"loglog_slope", er.loglog_slope},
                              {"decreasing", decreasing},
                              {"passed", point_ok}});
        }
    }
    return {{"grid", grid}, {"points", points}, {"passed", passed}};
}

ordered_json run_linearizability(const Surface&, const DistanceField& fp,
                                 const DistanceField& fq,
                                 const MediatrixCurve& curve,
                                 const MediatrixParams& params, bool& passed) {
    std::vector<int> corners =
        flagged_indices(curve, params.deficiency_threshold);
    std::vector<double> smooth_grid = {4.0 * params.step, 2.0 * params.step,
                                       params.step};
    std::vector<double> corner_grid = {0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
    bool all_converged = true;
    double max_gap = 0.0;
    int worst = 0;
    for (int i = 0; i < (int)curve.points.size(); ++i) {
        bool is_corner = curve.points[i].deficiency >
                         params.deficiency_threshold;
        LinearizabilityReport rep = radial_linearizability_check(
            fp, fq, curve, i, is_corner ? corner_grid : smooth_grid, params);
        if (!rep.converged) all_converged = false;
        if (rep.terminal_gap > max_gap) {
            max_gap = rep.terminal_gap;
            worst = i;
        }
    }
    // The same check against a deliberately wrong reference direction must
    // fail; run it at a corner when one exists.
    int adv = corners.empty() ? 0 : corners.front();
    LinearizabilityReport advrep = radial_linearizability_check(
        fp, fq, curve, adv, corners.empty() ? smooth_grid : corner_grid,
        params, true);
    passed = all_converged && !advrep.converged;
    return {{"points", (int)curve.points.size()},
            {"all_converged", all_converged},
            {"max_terminal_gap", max_gap},
            {"worst_index", worst},
            {"adversarial_index", adv},
            {"adversarial_converged", advrep.converged},
            {"adversarial_terminal_gap", advrep.terminal_gap},
            {"passed", passed}};
}

ordered_json run_gauss_bonnet(const Surface&, const DistanceField& fp,
                              const DistanceField& fq,
                              const MediatrixCurve& curve,
                              const MediatrixParams& params, bool& passed) {
    passed = true;
    ordered_json rows = ordered_json::array();
    for (int i : flagged_indices(curve, params.deficiency_threshold)) {
        const MediatrixPoint& mp = curve.points[i];
        JordanWedgeReport wp = jordan_wedge_report(fp, mp.position, mp.to_p);
        JordanWedgeReport wq = jordan_wedge_report(fq, mp.position, mp.to_q);
        double identity_err =
            std::fabs(2.0 * mp.deficiency - std::fabs(wp.mu - wq.mu));
        bool ok = identity_err <= kGaussBonnetTol;
        for (const JordanWedgeReport* w : {&wp, &wq})
            if (!w->empty) ok = ok && w->residual <= kGaussBonnetTol;
        passed = passed && ok;
        rows.push_back({{"index", i},
                        {"deficiency", mp.deficiency},
                        {"mu_p", wp.mu},
                        {"alpha_p", wp.alpha},
                        {"integral_p", wp.curvature_integral},
                        {"residual_p", wp.residual},
                        {"mu_q", wq.mu},
                        {"alpha_q", wq.alpha},
                        {"integral_q", wq.curvature_integral},
                        {"residual_q", wq.residual},
                        {"identity_error", identity_err},
                        {"passed", ok}});
    }
    return {{"tolerance", kGaussBonnetTol},
            {"singularities", rows},
            {"passed", passed}};
}

ordered_json run_deficiency_budget(const Surface& s, const DistanceField&,
                                   const DistanceField&,
                                   const MediatrixCurve& curve,
                                   const MediatrixParams& params,
                                   bool& passed) {
    DeficiencyBudget b =
        deficiency_sum_bound(s, curve, params.deficiency_threshold);
    double max_def = 0.0;
    for (const MediatrixPoint& mp : curve.points)
        max_def = std::max(max_def, mp.deficiency);
    bool bumpless = s.spec().bumps.empty();
    passed = b.sum <= b.bound && (!bumpless || max_def <= 5e-3);
    return {{"flagged", b.flagged},
            {"sum", b.sum},
            {"bound", b.bound},
            {"max_deficiency", max_def},
            {"noise_floor_applies", bumpless},
            {"passed", passed}};
}

ordered_json run_wedge_containment(const Surface&, const DistanceField& fp,
                                   const DistanceField& fq,
                                   const MediatrixCurve& curve,
                                   const MediatrixParams& params,
                                   bool& passed) {
    std::vector<int> targets =
        flagged_indices(curve, params.deficiency_threshold);
    for (int i = 0; i < (int)curve.points.size(); i += 25) targets.push_back(i);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    passed = true;
    ordered_json checked = ordered_json::array();
    for (int i : targets) {
        bool ok =
            wedge_containment_check(fp, fq, curve, i, params.step, params);
        passed = passed && ok;
        checked.push_back({{"index", i}, {"passed", ok}});
    }
    return {{"radius", params.step}, {"checked", checked}, {"passed", passed}};
}

// ---------------------------------------------------------------------------
// SVG rendering

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

struct Screen {
    double x, y;
};

std::string polyline_paths(const std::vector<Screen>& pts,
                           const std::vector<bool>& wrap_before,
                           const char* style) {
    std::ostringstream os;
    std::size_t n = pts.size();
    std::string d;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || wrap_before[i]) {
            if (!d.empty())
                os << "  <path d=\"" << d << "\" " << style << "/>\n";
            d = "M " + fmt(pts[i].x) + " " + fmt(pts[i].y);
        } else {
            d += " L " + fmt(pts[i].x) + " " + fmt(pts[i].y);
        }
    }
    if (!d.empty()) os << "  <path d=\"" << d << "\" " << style << "/>\n";
    return os.str();
}

}  // namespace

const std::vector<std::string>& analysis_names() {
    static const std::vector<std::string> names = {
        "prop1",        "lemma6",
        "linearizability", "gauss_bonnet",
        "deficiency_budget", "wedge_containment"};
    return names;
}

Scenario parse_scenario(const json& config) {
    if (!config.is_object()) throw ConfigError("scenario: not a JSON object");
    Scenario sc;
    sc.name = need_string(config, "scenario", "name");
    sc.description = config.value("description", std::string{});
    sc.surface = parse_surface(need(config, "scenario", "surface"),
                               "scenario.surface");
    sc.p = parse_point(need(config, "scenario", "p"), "scenario.p");
    sc.q = parse_point(need(config, "scenario", "q"), "scenario.q");

    const json& tr = need(config, "scenario", "tracer");
    sc.tracer.step = positive_number(tr, "scenario.tracer", "step");
    double mp = need_number(tr, "scenario.tracer", "max_points");
    if (mp < 10) field_error("scenario.tracer.max_points", "must be >= 10");
    sc.tracer.max_points = (int)mp;
    sc.tracer.tol_f = positive_number(tr, "scenario.tracer", "tol_f");
    sc.tracer.beta_min = positive_number(tr, "scenario.tracer", "beta_min");
    sc.tracer.deficiency_threshold =
        positive_number(tr, "scenario.tracer", "deficiency_threshold");

    const json& di = need(config, "scenario", "distance");
    double nf = need_number(di, "scenario.distance", "n_fan");
    if (nf < 256) field_error("scenario.distance.n_fan", "must be >= 256");
    sc.distance.n_fan = (int)nf;
    sc.distance.max_length = need_number(di, "scenario.distance", "max_length");
    if (sc.distance.max_length < 0.0)
        field_error("scenario.distance.max_length",
                    "must be >= 0 (0 selects the diameter default)");
    sc.distance.rel_tol_min =
        positive_number(di, "scenario.distance", "rel_tol_min");
    sc.distance.cluster_gap =
        positive_number(di, "scenario.distance", "cluster_gap");
    sc.distance.tol_hit = positive_number(di, "scenario.distance", "tol_hit");
    sc.distance.step = kShootStep;

    if (config.contains("seed")) {
        if (!config.at("seed").is_number_unsigned())
            field_error("scenario.seed", "must be a non-negative integer");
        sc.seed = config.at("seed").get<std::uint64_t>();
    }

    const json& an = need(config, "scenario", "analyses");
    if (!an.is_array()) field_error("scenario.analyses", "must be an array");
    for (const json& a : an) {
        if (!a.is_string())
            field_error("scenario.analyses", "entries must be strings");
        std::string name = a.get<std::string>();
        const auto& known = analysis_names();
        if (std::find(known.begin(), known.end(), name) == known.end())
            field_error("scenario.analyses", "unknown analysis `" + name + "`");
        sc.analyses.push_back(name);
    }
    const json& outs = need(config, "scenario", "outputs");
    if (!outs.is_array()) field_error("scenario.outputs", "must be an array");
    for (const json& o : outs) {
        std::string name = o.is_string() ? o.get<std::string>() : "";
        if (name != "json" && name != "csv" && name != "svg")
            field_error("scenario.outputs", "entries must be json, csv or svg");
        sc.outputs.push_back(name);
    }

    // Cross-field validation needs the constructed surface.
    Surface s(sc.surface);  // throws ConfigError on bad surface parameters
    s.require_contains(sc.p);
    s.require_contains(sc.q);
    if ((s.embed(sc.p) - s.embed(sc.q)).norm() < 1e-12)
        field_error("scenario.q", "p and q must be distinct");
    if (sc.tracer.step > s.injectivity_bound() / 20.0)
        field_error("scenario.tracer.step",
                    "must be at most injectivity_bound/20");
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("scenario file " + path + ": " + e.what());
    }
    return parse_scenario(j);
}

std::vector<std::pair<std::string, std::string>> bundled_scenarios() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const char* text : kBundledTexts) {
        json j = json::parse(text);
        out.push_back({j.at("name"), j.at("description")});
    }
    return out;
}

bool is_bundled_scenario(const std::string& name) {
    for (const char* text : kBundledTexts)
        if (json::parse(text).at("name") == name) return true;
    return false;
}

json bundled_scenario_config(const std::string& name) {
    for (const char* text : kBundledTexts) {
        json j = json::parse(text);
        if (j.at("name") == name) return j;
    }
    throw ConfigError("unknown bundled scenario: " + name);
}

std::string render_curve_svg(const json& doc, const std::string& projection) {
    if (!doc.contains("points") || doc.at("points").empty())
        throw ConfigError("curve document has no points");
    bool plane = projection == "chart_plane";
    if (!plane && projection != "orthographic_3d")
        throw ConfigError("projection must be chart_plane or orthographic_3d");

    // Orthographic view basis (fixed yaw/tilt).
    const double yaw = 0.6, tilt = 0.45;
    auto project = [&](double x, double y, double z) -> Screen {
        if (plane) return {std::atan2(y, x), z};
        double x1 = x * std::cos(yaw) + y * std::sin(yaw);
        double y1 = -x * std::sin(yaw) + y * std::cos(yaw);
        return {x1, z * std::cos(tilt) - y1 * std::sin(tilt)};
    };

    const json& pts = doc.at("points");
    std::vector<Screen> raw;
    std::vector<bool> flagged;
    for (const json& p : pts) {
        raw.push_back(project(p.at("x"), p.at("y"), p.at("z")));
        flagged.push_back(p.value("deficiency", 0.0) > 5e-2);
    }
    // Close the loop for drawing.
    raw.push_back(raw.front());
    flagged.push_back(false);

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Screen& s : raw) {
        xmin = std::min(xmin, s.x);
        xmax = std::max(xmax, s.x);
        ymin = std::min(ymin, s.y);
        ymax = std::max(ymax, s.y);
    }
    if (plane) {
        xmin = -kPi;
        xmax = kPi;
    }
    double xpad = std::max(0.15, 0.08 * (xmax - xmin));
    double ypad = std::max(0.15, 0.08 * (ymax - ymin));
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;
    const double W = 800.0, H = 560.0, margin = 10.0;
    double scale = std::min((W - 2 * margin) / (xmax - xmin),
                            (H - 2 * margin) / (ymax - ymin));
    auto to_screen = [&](Screen s) -> Screen {
        return {margin + (s.x - xmin) * scale, H - margin - (s.y - ymin) * scale};
    };

    std::vector<Screen> scr;
    std::vector<bool> wrap_before;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        scr.push_back(to_screen(raw[i]));
        wrap_before.push_back(plane && i > 0 &&
                              std::fabs(raw[i].x - raw[i - 1].x) > kPi);
    }

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)W
       << "\" height=\"" << (int)H << "\" viewBox=\"0 0 " << (int)W << " "
       << (int)H << "\">\n";
    os << "  <rect width=\"" << (int)W << "\" height=\"" << (int)H
       << "\" fill=\"white\"/>\n";
    os << polyline_paths(
        scr, wrap_before,
        "fill=\"none\" stroke=\"#1f3a8a\" stroke-width=\"1.5\"");
    for (std::size_t i = 0; i + 1 < scr.size(); ++i)
        if (flagged[i])
            os << "  <circle cx=\"" << fmt(scr[i].x) << "\" cy=\""
               << fmt(scr[i].y)
               << "\" r=\"5\" fill=\"none\" stroke=\"#c1121f\" "
                  "stroke-width=\"2\"/>\n";
    auto marker = [&](const char* key, const char* color, const char* label) {
        if (!doc.contains(key)) return;
        const json& e = doc.at(key);
        Screen s = to_screen(project(e.at("x"), e.at("y"), e.at("z")));
        os << "  <circle cx=\"" << fmt(s.x) << "\" cy=\"" << fmt(s.y)
           << "\" r=\"4\" fill=\"" << color << "\"/>\n";
        os << "  <text x=\"" << fmt(s.x + 7.0) << "\" y=\"" << fmt(s.y + 4.0)
           << "\" font-family=\"monospace\" font-size=\"14\" fill=\"" << color
           << "\">" << label << "</text>\n";
    };
    marker("p", "#0a6e31", "p");
    marker("q", "#7a2ca0", "q");
    os << "</svg>\n";
    return os.str();
}

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["config_hash"] = m.config_hash;
    j["tool_version"] = m.tool_version;
    j["stages"] = ordered_json::array();
    for (const auto& [name, sec] : m.stage_seconds)
        j["stages"].push_back({{"name", name}, {"seconds", sec}});
    j["files"] = m.files;
    j["analyses"] = ordered_json::array();
    for (const auto& [name, ok] : m.analyses)
        j["analyses"].push_back({{"name", name}, {"passed", ok}});
    j["all_passed"] = m.all_passed;
    return j;
}

RunManifest run_scenario(const Scenario& sc, const std::string& out_dir) {
    namespace fs = std::filesystem;
    using Clock = std::chrono::steady_clock;
    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      (unsigned long long)fnv1a64(scenario_to_json(sc).dump()));
        manifest.config_hash = buf;
    }
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/analysis");

    Surface s(sc.surface);
    auto t0 = Clock::now();
    DistanceField fp(s, sc.p, sc.distance);
    DistanceField fq(s, sc.q, sc.distance);
    auto t1 = Clock::now();
    manifest.stage_seconds.push_back(
        {"fields", std::chrono::duration<double>(t1 - t0).count()});

    MediatrixCurve curve = trace_mediatrix(fp, fq, sc.tracer);
    auto t2 = Clock::now();
    manifest.stage_seconds.push_back(
        {"trace", std::chrono::duration<double>(t2 - t1).count()});

    ordered_json curve_doc = curve_to_json(s, curve);
    auto embed_of = [&](const ChartPoint& x) {
        Vec3 e = s.embed(x);
        return ordered_json{{"x", e.x}, {"y", e.y}, {"z", e.z}};
    };
    curve_doc["scenario"] = sc.name;
    curve_doc["p"] = embed_of(sc.p);
    curve_doc["q"] = embed_of(sc.q);

    auto emit = [&](const std::string& rel, const std::string& text) {
        std::string path = out_dir + "/" + rel;
        std::ofstream out(path, std::ios::binary);
        out << text;
        manifest.files.push_back(path);
    };
    bool want_json = std::find(sc.outputs.begin(), sc.outputs.end(), "json") !=
                     sc.outputs.end();
    bool want_csv = std::find(sc.outputs.begin(), sc.outputs.end(), "csv") !=
                    sc.outputs.end();
    bool want_svg = std::find(sc.outputs.begin(), sc.outputs.end(), "svg") !=
                    sc.outputs.end();
    if (want_json) emit("curve.json", curve_doc.dump(2) + "\n");
    if (want_csv) {
        std::ostringstream os;
        write_curve_csv(os, s, curve);
        emit("curve.csv", os.str());
    }
    if (want_svg) emit("figure.svg", render_curve_svg(curve_doc, "chart_plane"));

    auto prev = Clock::now();
    for (const std::string& name : sc.analyses) {
        bool ok = false;
        ordered_json body;
        if (name == "prop1")
            body = run_prop1(s, fp, fq, curve, sc.seed, ok);
        else if (name == "lemma6")
            body = run_lemma6(s, fp, fq, curve, sc.tracer, sc.seed, ok);
        else if (name == "linearizability")
            body = run_linearizability(s, fp, fq, curve, sc.tracer, ok);
        else if (name == "gauss_bonnet")
            body = run_gauss_bonnet(s, fp, fq, curve, sc.tracer, ok);
        else if (name == "deficiency_budget")
            body = run_deficiency_budget(s, fp, fq, curve, sc.tracer, ok);
        else if (name == "wedge_containment")
            body = run_wedge_containment(s, fp, fq, curve, sc.tracer, ok);
        ordered_json doc;
        doc["name"] = name;
        doc["scenario"] = sc.name;
        for (auto& [k, v] : body.items()) doc[k] = v;
        if (want_json) emit("analysis/" + name + ".json", doc.dump(2) + "\n");
        manifest.analyses.push_back({name, ok});
        manifest.all_passed = manifest.all_passed && ok;
        auto now = Clock::now();
        manifest.stage_seconds.push_back(
            {name, std::chrono::duration<double>(now - prev).count()});
        prev = now;
    }

    {
        std::string path = out_dir + "/manifest.json";
        manifest.files.push_back(path);
        std::ofstream out(path, std::ios::binary);
        out << manifest_to_json(manifest).dump(2) << "\n";
    }
    return manifest;
}

}  // namespace medtrace
