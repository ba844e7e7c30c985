#include "medtrace/analysis.hpp"
#include <array>

#include <algorithm>
#include <cmath>

namespace medtrace {

double directional_derivative(const DistanceResult& at_x,
                              TangentDirection theta) {
    if (at_x.directions.empty() || at_x.degenerate)
        throw DegeneracyError("degenerate minimizing direction set");
    std::vector<double> angles;
    for (const TangentDirection& d : at_x.directions) angles.push_back(d.angle);
    return -std::cos(circ_dist_to_set(theta.angle, angles));
}

double directional_derivative(const DistanceField& field_p, const ChartPoint& x,
                              TangentDirection theta) {
    return directional_derivative(field_p.query(x), theta);
}

EtaReport bisector_ray_residual(const DistanceField& field_p,
                                const DistanceField& field_q,
                                const MediatrixPoint& x, int prewedge_index,
                                const std::vector<double>& t_grid) {
    const Surface& s = field_p.surface();
    TangentDirection mid = x.prewedges.at(prewedge_index).midpoint;
    EtaReport report;
    std::vector<LaunchData> hp = x.to_p.launches, hq = x.to_q.launches;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw ConfigError("t grid must be positive");
        ChartPoint z = exp_map(s, x.position, mid, t);
        DistanceResult rp = field_p.query(z, &hp);
        DistanceResult rq = field_q.query(z, &hq);
        hp = rp.launches;
        hq = rq.launches;
        report.samples.push_back({t, std::fabs(rq.distance - rp.distance) / t});
    }
    // Least-squares slope of log eta against log t (clamped away from zero).
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const EtaSample& sm : report.samples) {
        double lx = std::log(sm.t), ly = std::log(std::max(sm.eta, 1e-16));
        n += 1;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double denom = n * sxx - sx * sx;
    report.loglog_slope = denom > 0 ? (n * sxy - sx * sy) / denom : 0.0;
    return report;
}

namespace {

bool side_converged(std::vector<LinearizabilitySample> samples, double& terminal) {
    if (samples.empty()) return false;
    std::sort(samples.begin(), samples.end(),
              [](const LinearizabilitySample& a, const LinearizabilitySample& b) {
                  return a.t > b.t;
              });
    terminal = samples.back().gap;
    if (terminal > kLinTol) return false;
    // Dyadic window maxima must be non-increasing toward t -> 0, up to noise.
    double t_min = samples.back().t;
    std::vector<double> wmax;
    for (const LinearizabilitySample& sm : samples) {
        int band = (int)std::floor(std::log2(std::max(sm.t / t_min, 1.0)) + 1e-9);
        if ((int)wmax.size() <= band) wmax.resize(band + 1, 0.0);
        wmax[band] = std::max(wmax[band], sm.gap);
    }
    for (std::size_t k = 0; k + 1 < wmax.size(); ++k) {
        if (wmax[k + 1] > 0.0 && wmax[k] > wmax[k + 1] + kLinNoiseFloor)
            return false;
    }
    return true;
}

}  // namespace

LinearizabilityReport radial_linearizability_check(
    const DistanceField& field_p, const DistanceField& field_q,
    const MediatrixCurve& curve, int x_index, const std::vector<double>& t_grid,
    const MediatrixParams& params, bool adversarial) {
    const Surface& s = field_p.surface();
    const MediatrixPoint& x = curve.points.at(x_index);
    int n = (int)curve.points.size();
    LinearizabilityReport report;
    report.base_index = x_index;
    if (x.prewedges.size() < 2)
        throw DegeneracyError("need at least two pre-wedges for spokes");

    // Map curve directions (+1 / -1 index steps) to pre-wedge midpoints.
    PolarResult fwd =
        polar_coordinates(s, x.position, curve.points[(x_index + 1) % n].position);
    int side_fwd = 0;
    double best = kTwoPi;
    for (std::size_t w = 0; w < x.prewedges.size(); ++w) {
        double d = circ_dist(fwd.direction.angle, x.prewedges[w].midpoint.angle);
        if (d < best) {
            best = d;
            side_fwd = (int)w;
        }
    }
    int side_bwd = side_fwd == 0 ? 1 : 0;

    double t_max = 0.0, t_min_grid = 1e300;
    for (double t : t_grid) {
        t_max = std::max(t_max, t);
        t_min_grid = std::min(t_min_grid, t);
    }

    bool converged = true;
    double terminal_all = 0.0;
    for (int side = 0; side < 2; ++side) {
        int widx = side == 0 ? side_fwd : side_bwd;
        double theta_true = x.prewedges[widx].midpoint.angle;
        int other = widx == 0 ? 1 : 0;
        double theta_ref =
            adversarial ? x.prewedges[other].midpoint.angle : theta_true;
        int dir = side == 0 ? 1 : -1;

        std::vector<LinearizabilitySample> samples;
        // Samples at existing curve points.
        std::vector<std::pair<double, double>> walked;  // (distance, angle)
        PolarResult hint;
        bool have_hint = false;
        for (int j = 1; j <= n / 2; ++j) {
            int idx = ((x_index + dir * j) % n + n) % n;
            PolarResult pr =
                polar_coordinates(s, x.position, curve.points[idx].position,
                                  kShootStep, have_hint ? &hint : nullptr);
            hint = pr;
            hint.distance += params.step;
            have_hint = true;
            walked.push_back({pr.distance, pr.direction.angle});
            if (pr.distance > 1.3 * t_max + params.step) break;
        }
        std::vector<LaunchData> hp = x.to_p.launches, hq = x.to_q.launches;
        for (double t : t_grid) {
            if (t >= 0.9 * params.step) {
                const std::pair<double, double>* nearest = nullptr;
                for (const auto& w : walked)
                    if (!nearest ||
                        std::fabs(w.first - t) < std::fabs(nearest->first - t))
                        nearest = &w;
                if (!nearest) continue;
                samples.push_back({nearest->first,
                                   circ_dist(nearest->second, theta_ref), side});
            } else {
                // Sub-step: re-trace the spoke by projection below the step.
                ChartPoint z = exp_map(s, x.position, {theta_true}, t);
                ProjectionResult pr = project_to_mediatrix(
                    field_p, field_q, z, params.beta_min, params, &hp, &hq);
                hp = pr.to_p.launches;
                hq = pr.to_q.launches;
                PolarResult pol =
                    polar_coordinates(s, x.position, pr.projected);
                if (pol.distance < 0.25 * t) continue;  // collapsed to base
                samples.push_back(
                    {pol.distance, circ_dist(pol.direction.angle, theta_ref),
                     side});
            }
        }
        double terminal = 0.0;
        bool side_ok = side_converged(samples, terminal);
        converged = converged && side_ok;
        terminal_all = std::max(terminal_all, terminal);
        for (const LinearizabilitySample& sm : samples)
            report.samples.push_back(sm);
    }
    report.converged = converged;
    report.terminal_gap = terminal_all;
    return report;
}

JordanWedgeReport jordan_wedge_report(const DistanceField& field,
                                      const ChartPoint& x,
                                      const DistanceResult& at_x) {
    JordanWedgeReport report;
    if (at_x.degenerate)
        throw DegeneracyError("saturated direction set has no isolated wedge");
    if (at_x.directions.size() < 2) return report;  // empty lens, 0 = 0 + 0
    const Surface& s = field.surface();
    report.empty = false;
    // The two extreme minimizing directions and their launch data.
    std::size_t i1 = 0, i2 = 1;
    if (at_x.directions.size() > 2) {
        double best = 0.0;
        for (std::size_t a = 0; a < at_x.directions.size(); ++a)
            for (std::size_t b = a + 1; b < at_x.directions.size(); ++b) {
                double d = circ_dist(at_x.directions[a].angle,
                                     at_x.directions[b].angle);
                if (d > best) {
                    best = d;
                    i1 = a;
                    i2 = b;
                }
            }
    }
    report.mu = circ_dist(at_x.directions[i1].angle, at_x.directions[i2].angle);
    double a1 = at_x.launches[i1].launch_angle;
    double a2 = at_x.launches[i2].launch_angle;
    report.alpha = circ_dist(a1, a2);
    // Integrate K over the lens bounded by the two minimizing geodesic
    // traces from x to the source. The traces are paired by arc fraction and
    // the strip between them is triangulated; each strip cell is evaluated
    // in the chart of its more-polar row, converting neighbors through the
    // overlap band, so pole endpoints are handled natively by a cap chart.
    std::array<GeodesicTrace, 2> traces = {
        integrate_geodesic(s, x, at_x.directions[i1], at_x.launches[i1].length,
                           kShootStep),
        integrate_geodesic(s, x, at_x.directions[i2], at_x.launches[i2].length,
                           kShootStep)};
    int rows = (int)std::max(traces[0].samples.size(), traces[1].samples.size());
    std::array<std::vector<ChartPoint>, 2> edge;
    for (int e = 0; e < 2; ++e) {
        const GeodesicTrace& tr = traces[e];
        for (int i = 0; i < rows; ++i) {
            double arc = tr.terminal_length * i / (rows - 1);
            int idx = (int)std::llround(arc / tr.h_sample);
            idx = std::min(idx, (int)tr.samples.size() - 1);
            edge[e].push_back(tr.samples[idx].position);
        }
    }
    // Canonical rung discretization: each rung (the chord between paired
    // edge points) is subdivided once, in body coordinates when both
    // endpoints reach the body chart and in the ambient cap otherwise, so
    // that adjacent strip rows share identical node sets across chart seams.
    const int kTransverse = 48;
    auto body_ok = [&](const ChartPoint& z) {
        if (z.chart == ChartId::Body) return true;
        return (z.chart == ChartId::NorthCap ? s.colat_north(z)
                                             : s.colat_south(z)) >
               Surface::kBodyExclusion + 1e-9;
    };
    std::vector<std::vector<ChartPoint>> rung(rows);
    for (int i = 0; i < rows; ++i) {
        const ChartPoint &a = edge[0][i], &b = edge[1][i];
        ChartId rung_chart;
        Vec2 pa, pb;
        if (body_ok(a) && body_ok(b)) {
            rung_chart = ChartId::Body;
            ChartPoint ba = a.chart == ChartId::Body
                                ? a
                                : s.transition(a, ChartId::Body);
            ChartPoint bb = b.chart == ChartId::Body
                                ? b
                                : s.transition(b, ChartId::Body);
            double phi = bb.v + kTwoPi * std::round((ba.v - bb.v) / kTwoPi);
            pa = {ba.u, ba.v};
            pb = {bb.u, phi};
        } else {
            rung_chart = a.chart != ChartId::Body ? a.chart : b.chart;
            ChartPoint ca =
                a.chart == rung_chart ? a : s.transition(a, rung_chart);
            ChartPoint cb =
                b.chart == rung_chart ? b : s.transition(b, rung_chart);
            pa = {ca.u, ca.v};
            pb = {cb.u, cb.v};
        }
        for (int j = 0; j <= kTransverse; ++j) {
            double t = (double)j / kTransverse;
            double u = pa.x + (pb.x - pa.x) * t, v = pa.y + (pb.y - pa.y) * t;
            rung[i].push_back(
                {rung_chart, u, rung_chart == ChartId::Body ? wrap_angle(v) : v});
        }
    }
    double integral = 0.0;
    for (int i = 0; i + 1 < rows; ++i) {
        // Evaluate the row in a chart holding all its nodes; a cap wins when
        // any node lies beyond the body chart's reach.
        ChartId chart = ChartId::Body;
        for (const ChartPoint& z : rung[i])
            if (!body_ok(z)) chart = z.chart;
        for (const ChartPoint& z : rung[i + 1])
            if (!body_ok(z)) chart = z.chart;
        double phi_ref = 0.0;
        bool have_ref = false;
        auto node = [&](const ChartPoint& z) -> Vec2 {
            ChartPoint c = z.chart == chart ? z : s.transition(z, chart);
            if (chart == ChartId::Body) {
                double phi = c.v;
                if (have_ref)
                    phi += kTwoPi * std::round((phi_ref - phi) / kTwoPi);
                phi_ref = phi;
                have_ref = true;
                return {c.u, phi};
            }
            return {c.u, c.v};
        };
        std::vector<Vec2> lo, hi;
        for (const ChartPoint& z : rung[i]) lo.push_back(node(z));
        for (const ChartPoint& z : rung[i + 1]) hi.push_back(node(z));
        auto kden = [&](Vec2 w) {
            ChartPoint z{chart, w.x, chart == ChartId::Body ? wrap_angle(w.y)
                                                            : w.y};
            return s.gaussian_curvature_at(z) *
                   std::sqrt(s.metric_at(z).det());
        };
        double row_int = 0.0, row_area = 0.0;
        auto tri = [&](Vec2 p1, Vec2 p2, Vec2 p3) {
            double area = 0.5 * ((p2.x - p1.x) * (p3.y - p1.y) -
                                 (p3.x - p1.x) * (p2.y - p1.y));
            Vec2 c{(p1.x + p2.x + p3.x) / 3.0, (p1.y + p2.y + p3.y) / 3.0};
            row_area += area;
            row_int += kden(c) * area;
        };
        for (int j = 0; j < kTransverse; ++j) {
            tri(lo[j], hi[j], hi[j + 1]);
            tri(lo[j], hi[j + 1], lo[j + 1]);
        }
        // Chart orientation is not shared between body and cap rows; fold
        // each row in with the orientation of its own chart area.
        integral += row_area < 0 ? -row_int : row_int;
    }
    report.curvature_integral = std::fabs(integral);
    report.residual =
        std::fabs(report.curvature_integral - (report.mu + report.alpha));
    return report;
}

DeficiencyBudget deficiency_sum_bound(const Surface& s,
                                      const MediatrixCurve& curve,
                                      double deficiency_threshold,
                                      int quadrature_resolution) {
    DeficiencyBudget budget;
    for (int i = 0; i < (int)curve.points.size(); ++i) {
        const MediatrixPoint& p = curve.points[i];
        if (p.deficiency > deficiency_threshold) {
            budget.flagged.push_back(i);
            budget.deficiencies.push_back(p.deficiency);
            budget.sum += p.deficiency;
        }
    }
    budget.bound =
        0.5 * (s.total_abs_curvature(quadrature_resolution) + kTwoPi);
    return budget;
}

}  // namespace medtrace
