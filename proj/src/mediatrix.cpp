#include "medtrace/mediatrix.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace medtrace {

namespace {

const Surface& surface_of(const DistanceField& f) { return f.surface(); }

double chord(const Surface& s, const ChartPoint& a, const ChartPoint& b) {
    return (s.embed(a) - s.embed(b)).norm();
}

}  // namespace

std::vector<PreWedge> prewedges_from_sets(const std::vector<double>& dirs_p,
                                          const std::vector<double>& dirs_q,
                                          double beta_min) {
    if (dirs_p.empty() || dirs_q.empty())
        throw DegeneracyError("empty minimizing direction set");
    for (double a : dirs_p)
        for (double b : dirs_q)
            if (circ_dist(a, b) < beta_min) {
                std::ostringstream os;
                os << "direction sets separated by " << circ_dist(a, b)
                   << " < beta_min " << beta_min;
                throw SeparationError(os.str());
            }
    struct Dir {
        double angle;
        bool from_p;
    };
    std::vector<Dir> all;
    for (double a : dirs_p) all.push_back({wrap_angle(a), true});
    for (double a : dirs_q) all.push_back({wrap_angle(a), false});
    std::sort(all.begin(), all.end(),
              [](const Dir& a, const Dir& b) { return a.angle < b.angle; });
    std::vector<PreWedge> wedges;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const Dir& a = all[i];
        const Dir& b = all[(i + 1) % all.size()];
        if (a.from_p == b.from_p) continue;  // both endpoints from one set
        double gap = ccw_gap(a.angle, b.angle);
        PreWedge w;
        w.endpoint_p = {a.from_p ? a.angle : b.angle};
        w.endpoint_q = {a.from_p ? b.angle : a.angle};
        w.midpoint = {wrap_angle(a.angle + 0.5 * gap)};
        w.opening = gap;
        wedges.push_back(w);
    }
    if (wedges.size() < 2)
        throw DegeneracyError("fewer than 2 pre-wedges at a mediatrix point");
    return wedges;
}

MediatrixPoint prewedges_at(const DistanceField& field_p,
                            const DistanceField& field_q, const ChartPoint& x,
                            const MediatrixParams& params,
                            const std::vector<LaunchData>* hints_p,
                            const std::vector<LaunchData>* hints_q) {
    MediatrixPoint pt;
    pt.position = surface_of(field_p).normalized(x);
    pt.to_p = field_p.query(x, hints_p);
    pt.to_q = field_q.query(x, hints_q);
    pt.residual = std::fabs(pt.to_q.distance - pt.to_p.distance);
    if (pt.residual > params.tol_f) {
        std::ostringstream os;
        os << "point is off the mediatrix: |f_pq| = " << pt.residual << " > "
           << params.tol_f;
        throw DomainError(os.str());
    }
    if (pt.to_p.degenerate || pt.to_q.degenerate)
        throw DegeneracyError("degenerate (fan-saturated) direction set");
    std::vector<double> dp, dq;
    for (const TangentDirection& d : pt.to_p.directions) dp.push_back(d.angle);
    for (const TangentDirection& d : pt.to_q.directions) dq.push_back(d.angle);
    pt.prewedges = prewedges_from_sets(dp, dq, params.beta_min);
    pt.beta = direction_separation(pt.to_p, pt.to_q);
    pt.branch = pt.prewedges.size() > 2;
    if (pt.prewedges.size() == 2) {
        pt.deficiency = std::fabs(
            kPi - circ_dist(pt.prewedges[0].midpoint.angle,
                            pt.prewedges[1].midpoint.angle));
    }
    return pt;
}

ProjectionResult project_to_mediatrix(const DistanceField& field_p,
                                      const DistanceField& field_q,
                                      const ChartPoint& z, double beta_floor,
                                      const MediatrixParams& params,
                                      const std::vector<LaunchData>* hints_p,
                                      const std::vector<LaunchData>* hints_q) {
    const Surface& s = surface_of(field_p);
    ProjectionResult out;
    out.to_p = field_p.query(z, hints_p);
    out.to_q = field_q.query(z, hints_q);
    double f = out.to_q.distance - out.to_p.distance;
    if (std::fabs(f) <= params.tol_f) {
        out.projected = s.normalized(z);
        out.moved = 0.0;
        out.beta_observed = kPi;  // vacuous: no march happened
        return out;
    }
    double sep = direction_separation(out.to_p, out.to_q);
    if (sep < beta_floor) {
        std::ostringstream os;
        os << "direction separation " << sep << " below beta floor "
           << beta_floor;
        throw SeparationError(os.str());
    }
    // March toward the farther point along its minimizing direction; f_pq
    // decreases toward that point, so a sign change exists within the budget.
    const DistanceResult& far = f > 0.0 ? out.to_q : out.to_p;
    TangentDirection theta = far.directions.front();
    double budget = std::fabs(f) / (1.0 - std::cos(beta_floor)) + params.tol_f;
    double g0 = f > 0.0 ? f : -f;  // |f| at t = 0; sign convention: g > 0 start

    std::vector<LaunchData> hp = out.to_p.launches, hq = out.to_q.launches;
    DistanceResult rp, rq;
    double beta_observed = sep;
    auto eval = [&](double t) {
        ChartPoint zt = exp_map(s, z, theta, t);
        rp = field_p.query(zt, &hp);
        rq = field_q.query(zt, &hq);
        hp = rp.launches;
        hq = rq.launches;
        double sep_t = direction_separation(rp, rq);
        beta_observed = std::min(beta_observed, sep_t);
        if (sep_t < beta_floor) {
            std::ostringstream os;
            os << "direction separation " << sep_t
               << " dropped below the beta floor " << beta_floor
               << " during the corrector march";
            throw SeparationError(os.str());
        }
        double ft = rq.distance - rp.distance;
        return f > 0.0 ? ft : -ft;  // positive at t = 0, decreasing
    };

    // Bracket the sign change.
    double lo = 0.0, glo = g0;
    double hi = std::min(budget, std::max(0.5 * g0, 0.25 * params.step));
    double ghi = eval(hi);
    while (ghi > 0.0) {
        if (hi >= budget) {
            std::ostringstream os;
            os << "no sign change of f_pq within the travel budget " << budget
               << " (residual " << ghi << ")";
            throw ProjectionError(os.str());
        }
        lo = hi;
        glo = ghi;
        hi = std::min(budget, 1.6 * hi + 0.1 * g0);
        ghi = eval(hi);
    }
    // Illinois secant for |f_pq| <= tol_f.
    double t_final = hi, g_final = ghi;
    for (int it = 0; it < 60 && std::fabs(g_final) > params.tol_f; ++it) {
        double t = (lo * ghi - hi * glo) / (ghi - glo);
        if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
        double g = eval(t);
        t_final = t;
        g_final = g;
        if (g > 0.0) {
            lo = t;
            glo = g;
        } else {
            hi = t;
            ghi = g;
        }
        if (g > 0.0) ghi *= 0.5;  // Illinois damping on the stale end
        else glo *= 0.5;
    }
    if (std::fabs(g_final) > params.tol_f)
        throw ProjectionError("projection failed to reach |f_pq| <= tol_f");
    out.projected = s.normalized(exp_map(s, z, theta, t_final));
    out.moved = t_final;
    out.beta_observed = beta_observed;
    out.to_p = rp;
    out.to_q = rq;
    if (out.moved > budget)
        throw ProjectionError("projection travel exceeded the Lemma bound");
    return out;
}

ChartPoint seed_point(const DistanceField& field_p, const DistanceField& field_q,
                      const MediatrixParams& params) {
    const Surface& s = surface_of(field_p);
    const ChartPoint& p = field_p.source();
    const ChartPoint& q = field_q.source();
    if (chord(s, p, q) < 1e-12)
        throw ConfigError("p and q must be distinct");
    // Minimizing geodesic from p to q: query q's field at p and reverse.
    DistanceResult at_p = field_q.query(p);
    double d = at_p.distance;
    TangentDirection toward_q = at_p.directions.front();
    std::vector<LaunchData> hp, hq;
    auto f_at = [&](double t) {
        ChartPoint zt = exp_map(s, p, toward_q, t);
        DistanceResult rp = field_p.query(zt, hp.empty() ? nullptr : &hp);
        DistanceResult rq = field_q.query(zt, hq.empty() ? nullptr : &hq);
        hp = rp.launches;
        hq = rq.launches;
        return std::make_pair(rq.distance - rp.distance, zt);
    };
    double lo = 0.05 * d, hi = 0.95 * d;
    auto [flo, zlo] = f_at(lo);
    auto [fhi, zhi] = f_at(hi);
    if (!(flo > 0.0 && fhi < 0.0))
        throw SolverError("f_pq does not change sign along the p-q geodesic");
    ChartPoint best = zlo;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        auto [fm, zm] = f_at(mid);
        best = zm;
        if (std::fabs(fm) <= 0.1 * params.tol_f) break;
        if (fm > 0.0) lo = mid;
        else hi = mid;
    }
    return s.normalized(best);
}

namespace {

// A Lipschitz corner of the mediatrix (two tied minimizing branches on one
// side) generically falls between trace samples, where the tie is invisible to
// the minimal-direction query. Detect high chord turning, then bisect the
// signed length difference of the two branches to land on the corner itself,
// and replace the nearest sample with the resolved corner point.
void refine_corners(const DistanceField& field_p, const DistanceField& field_q,
                    const MediatrixParams& params, MediatrixCurve& curve) {
    const Surface& s = field_p.surface();
    int n = (int)curve.points.size();
    if (n < 5) return;
    std::vector<Vec3> emb(n);
    for (int i = 0; i < n; ++i) emb[i] = s.embed(curve.points[i].position);
    auto turn = [&](int i) {
        Vec3 a = emb[i] - emb[(i + n - 1) % n];
        Vec3 b = emb[(i + 1) % n] - emb[i];
        double c = a.dot(b) / (a.norm() * b.norm());
        return std::acos(std::clamp(c, -1.0, 1.0));
    };
    double window = 6.0 * params.step;
    int last_handled = -10;
    for (int i = 0; i < n; ++i) {
        if (turn(i) < params.deficiency_threshold) continue;
        if (i - last_handled < 3) continue;
        // Which side carries the tied branches?
        const ChartPoint& xi = curve.points[i].position;
        DistanceResult wp = field_p.query(xi, &curve.points[i].to_p.launches, window);
        DistanceResult wq = field_q.query(xi, &curve.points[i].to_q.launches, window);
        const DistanceField* side = nullptr;
        const DistanceResult* wide = nullptr;
        if (wp.directions.size() >= 2 && wq.directions.size() < 2) {
            side = &field_p;
            wide = &wp;
        } else if (wq.directions.size() >= 2 && wp.directions.size() < 2) {
            side = &field_q;
            wide = &wq;
        } else {
            continue;  // ambiguous or plain high curvature; leave as is
        }
        // Signed branch length difference, branches ordered by arrival angle
        // from the opposite side's direction.
        double opp = (side == &field_p ? wq : wp).directions.front().angle;
        auto branch_gap = [&](const DistanceResult& r) -> std::optional<double> {
            if (r.directions.size() < 2) return std::nullopt;
            struct B {
                double off, len;
            };
            std::vector<B> bs;
            for (std::size_t k = 0; k < r.directions.size(); ++k)
                bs.push_back({ccw_gap(opp, r.directions[k].angle),
                              r.launches[k].length});
            std::sort(bs.begin(), bs.end(),
                      [](const B& a, const B& b) { return a.off < b.off; });
            return bs.front().len - bs.back().len;
        };
        // Bisect along the curve between the neighbors of i.
        int ia = (i + n - 1) % n, ib = (i + 1) % n;
        const ChartPoint base = curve.points[ia].position;
        PolarResult span = polar_coordinates(s, base, curve.points[ib].position);
        std::vector<LaunchData> hp = curve.points[ia].to_p.launches;
        std::vector<LaunchData> hq = curve.points[ia].to_q.launches;
        MediatrixPoint corner;
        auto eval = [&](double t) -> std::optional<double> {
            ChartPoint z = exp_map(s, base, span.direction, t);
            ProjectionResult pr = project_to_mediatrix(
                field_p, field_q, z, params.beta_min, params, &hp, &hq);
            hp = pr.to_p.launches;
            hq = pr.to_q.launches;
            DistanceResult wr =
                side->query(pr.projected,
                            side == &field_p ? &hp : &hq, window);
            corner.position = pr.projected;
            corner.to_p = side == &field_p ? wr : pr.to_p;
            corner.to_q = side == &field_q ? wr : pr.to_q;
            return branch_gap(wr);
        };
        double lo = 0.0, hi = span.distance;
        auto glo = eval(lo), ghi = eval(hi);
        if (!glo || !ghi || (*glo > 0) == (*ghi > 0)) continue;
        for (int it = 0; it < 20 && hi - lo > 1e-5; ++it) {
            double mid = 0.5 * (lo + hi);
            auto gm = eval(mid);
            if (!gm) break;
            if ((*gm > 0) == (*glo > 0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        // The projection cannot land exactly on the corner (its march
        // direction flips branch there, leaving a gap in reachable points),
        // so finish with Newton on the two-branch equidistance system:
        // d_other(z) = len_A(z) = len_B(z), using the distance gradients
        // -(cos theta, sin theta) of each arrival direction.
        bool ok = false;
        const DistanceField* other = side == &field_p ? &field_q : &field_p;
        std::vector<LaunchData>* sh = side == &field_p ? &hp : &hq;
        std::vector<LaunchData>* oh = side == &field_p ? &hq : &hp;
        ChartPoint z = corner.position;
        for (int it = 0; it < 30; ++it) {
            DistanceResult ws = side->query(z, sh, window);
            DistanceResult wo = other->query(z, oh);
            *sh = ws.launches;
            *oh = wo.launches;
            if (ws.directions.size() < 2) break;
            struct B {
                double off, th, len;
            };
            std::vector<B> bs;
            for (std::size_t k = 0; k < ws.directions.size(); ++k)
                bs.push_back({ccw_gap(opp, ws.directions[k].angle),
                              ws.directions[k].angle, ws.launches[k].length});
            std::sort(bs.begin(), bs.end(),
                      [](const B& a, const B& b) { return a.off < b.off; });
            double tha = bs.front().th, thb = bs.back().th;
            double tho = wo.directions.front().angle;
            double r1 = wo.distance - bs.front().len;
            double r2 = wo.distance - bs.back().len;
            if (std::max(std::fabs(r1), std::fabs(r2)) <= 1e-8) {
                corner.position = z;
                corner.to_p = side == &field_p ? ws : wo;
                corner.to_q = side == &field_q ? ws : wo;
                ok = true;
                break;
            }
            double a11 = std::cos(tha) - std::cos(tho);
            double a12 = std::sin(tha) - std::sin(tho);
            double a21 = std::cos(thb) - std::cos(tho);
            double a22 = std::sin(thb) - std::sin(tho);
            double det = a11 * a22 - a12 * a21;
            if (std::fabs(det) < 1e-8) break;
            double dx = (-r1 * a22 + r2 * a12) / det;
            double dy = (-r2 * a11 + r1 * a21) / det;
            double len = std::hypot(dx, dy);
            if (len > params.step) {
                dx *= params.step / len;
                dy *= params.step / len;
                len = params.step;
            }
            if (len < 1e-14) break;
            z = exp_map(s, z, {std::atan2(dy, dx)}, len);
        }
        if (!ok) continue;
        // Assemble the corner point from the tied direction sets.
        std::vector<double> dp, dq;
        for (const TangentDirection& d : corner.to_p.directions)
            dp.push_back(d.angle);
        for (const TangentDirection& d : corner.to_q.directions)
            dq.push_back(d.angle);
        try {
            corner.prewedges = prewedges_from_sets(dp, dq, params.beta_min);
        } catch (const std::runtime_error&) {
            continue;
        }
        corner.residual =
            std::fabs(corner.to_q.distance - corner.to_p.distance);
        corner.beta = direction_separation(corner.to_p, corner.to_q);
        corner.branch = corner.prewedges.size() > 2;
        if (corner.prewedges.size() == 2)
            corner.deficiency = std::fabs(
                kPi - circ_dist(corner.prewedges[0].midpoint.angle,
                                corner.prewedges[1].midpoint.angle));
        curve.points[i] = corner;
        emb[i] = s.embed(corner.position);
        if (corner.branch) curve.branch_points.push_back(i);
        last_handled = i;
    }
    std::sort(curve.branch_points.begin(), curve.branch_points.end());
}

}  // namespace

MediatrixCurve trace_mediatrix(const DistanceField& field_p,
                               const DistanceField& field_q,
                               const MediatrixParams& params) {
    const Surface& s = surface_of(field_p);
    if (params.step > s.injectivity_bound() / 20.0)
        throw ConfigError("tracer step exceeds injectivity_bound/20");
    MediatrixCurve curve;
    curve.step = params.step;

    ChartPoint seed = seed_point(field_p, field_q, params);
    MediatrixPoint current = prewedges_at(field_p, field_q, seed, params);
    curve.points.push_back(current);
    if (current.branch) curve.branch_points.push_back(0);

    double travel = current.prewedges[0].midpoint.angle;
    Vec3 seed3 = s.embed(seed);

    for (int n = 1; n <= params.max_points; ++n) {
        // Predictor: step along the pre-wedge midpoint nearest the current
        // travel direction.
        const PreWedge* chosen = &current.prewedges[0];
        for (const PreWedge& w : current.prewedges)
            if (circ_dist(w.midpoint.angle, travel) <
                circ_dist(chosen->midpoint.angle, travel))
                chosen = &w;
        ChartPoint predicted =
            exp_map(s, current.position, chosen->midpoint, params.step);
        double beta_floor = std::max(params.beta_min, 0.5 * current.beta);
        ProjectionResult proj = project_to_mediatrix(
            field_p, field_q, predicted, beta_floor, params,
            &current.to_p.launches, &current.to_q.launches);

        MediatrixPoint next = prewedges_at(field_p, field_q, proj.projected,
                                           params, &proj.to_p.launches,
                                           &proj.to_q.launches);
        // Direction of actual travel, measured at the new point.
        PolarResult back = polar_coordinates(s, next.position, current.position);
        travel = wrap_angle(back.direction.angle + kPi);
        curve.points.push_back(next);
        if (next.branch) curve.branch_points.push_back((int)curve.points.size() - 1);
        current = curve.points.back();

        if (n >= 10 &&
            (s.embed(current.position) - seed3).norm() <= 1.5 * params.step) {
            curve.closed = true;
            refine_corners(field_p, field_q, params, curve);
            return curve;
        }
    }
    throw TraceError("mediatrix trace did not close within max_points");
}

bool wedge_containment_check(const DistanceField& field_p,
                             const DistanceField& field_q,
                             const MediatrixCurve& curve, int x_index,
                             double rho, const MediatrixParams& params) {
    const Surface& s = surface_of(field_p);
    if (!(rho < s.injectivity_bound()))
        throw ConfigError("rho must be below the injectivity bound");
    const MediatrixPoint& x = curve.points.at(x_index);
    for (int i = 0; i < (int)curve.points.size(); ++i) {
        if (i == x_index) continue;
        const ChartPoint& y = curve.points[i].position;
        if (chord(s, x.position, y) > rho) continue;  // chord <= distance
        PolarResult pr = polar_coordinates(s, x.position, y);
        if (pr.distance > rho || pr.distance < 1e-12) continue;
        bool inside = false;
        for (const PreWedge& w : x.prewedges) {
            double a = wrap_angle(w.midpoint.angle - 0.5 * w.opening);
            double off = ccw_gap(a, pr.direction.angle);
            if (off <= w.opening + params.wedge_slack ||
                off >= kTwoPi - params.wedge_slack) {
                inside = true;
                break;
            }
        }
        if (!inside) return false;
    }
    return true;
}

nlohmann::ordered_json curve_to_json(const Surface& s,
                                     const MediatrixCurve& curve) {
    nlohmann::ordered_json j;
    j["step"] = curve.step;
    j["closed"] = curve.closed;
    j["branch_points"] = curve.branch_points;
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const MediatrixPoint& p : curve.points) {
        nlohmann::ordered_json jp;
        jp["chart"] = chart_name(p.position.chart);
        jp["u"] = p.position.u;
        jp["v"] = p.position.v;
        Vec3 e = s.embed(p.position);
        jp["x"] = e.x;
        jp["y"] = e.y;
        jp["z"] = e.z;
        jp["residual"] = p.residual;
        jp["beta"] = p.beta;
        jp["deficiency"] = p.deficiency;
        jp["branch"] = p.branch;
        nlohmann::ordered_json jw = nlohmann::ordered_json::array();
        for (const PreWedge& w : p.prewedges) {
            jw.push_back({{"endpoint_p", w.endpoint_p.angle},
                          {"endpoint_q", w.endpoint_q.angle},
                          {"midpoint", w.midpoint.angle},
                          {"opening", w.opening}});
        }
        jp["prewedges"] = jw;
        pts.push_back(jp);
    }
    j["points"] = pts;
    return j;
}

void write_curve_csv(std::ostream& os, const Surface& s,
                     const MediatrixCurve& curve) {
    os << "index,chart,u,v,x,y,z,residual,beta,deficiency,branch\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const MediatrixPoint& p = curve.points[i];
        Vec3 e = s.embed(p.position);
        os << i << ',' << chart_name(p.position.chart) << ',' << p.position.u
           << ',' << p.position.v << ',' << e.x << ',' << e.y << ',' << e.z
           << ',' << p.residual << ',' << p.beta << ',' << p.deficiency << ','
           << (p.branch ? 1 : 0) << '\n';
    }
}

}  // namespace medtrace
