#include "medtrace/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace medtrace {

namespace {

// Orthonormal frame at x: e1 along d/du, e2 its positively oriented
// orthogonal complement. Returns chart components.
void frame_at(const Sym2& g, Vec2& e1, Vec2& e2) {
    double su = std::sqrt(g.uu);
    e1 = {1.0 / su, 0.0};
    double dt = g.det();
    double b = std::sqrt(g.uu / dt);
    e2 = {-g.uv / std::sqrt(g.uu * dt), b};
}

struct OdeState {
    double u, v, du, dv;
};

OdeState rhs(const Surface& s, ChartId chart, const OdeState& y) {
    Christoffel G = s.christoffel_at({chart, y.u, y.v});
    double au = -(G.u_uu * y.du * y.du + 2.0 * G.u_uv * y.du * y.dv +
                  G.u_vv * y.dv * y.dv);
    double av = -(G.v_uu * y.du * y.du + 2.0 * G.v_uv * y.du * y.dv +
                  G.v_vv * y.dv * y.dv);
    return {y.du, y.dv, au, av};
}

void rk4_step(const Surface& s, ChartId chart, OdeState& y, double h) {
    OdeState k1 = rhs(s, chart, y);
    OdeState y2{y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v,
                y.du + 0.5 * h * k1.du, y.dv + 0.5 * h * k1.dv};
    OdeState k2 = rhs(s, chart, y2);
    OdeState y3{y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v,
                y.du + 0.5 * h * k2.du, y.dv + 0.5 * h * k2.dv};
    OdeState k3 = rhs(s, chart, y3);
    OdeState y4{y.u + h * k3.u, y.v + h * k3.v, y.du + h * k3.du,
                y.dv + h * k3.dv};
    OdeState k4 = rhs(s, chart, y4);
    y.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    y.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    y.du += h / 6.0 * (k1.du + 2.0 * k2.du + 2.0 * k3.du + k4.du);
    y.dv += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
}

// Switch charts when the position enters the inner half of an overlap band.
void maybe_switch_chart(const Surface& s, GeodesicState& st) {
    ChartId target = st.position.chart;
    if (st.position.chart == ChartId::Body) {
        if (s.colat_north(st.position) < Surface::kSwitchToCap)
            target = ChartId::NorthCap;
        else if (s.colat_south(st.position) < Surface::kSwitchToCap)
            target = ChartId::SouthCap;
    } else {
        double colat = st.position.chart == ChartId::NorthCap
                           ? s.colat_north(st.position)
                           : s.colat_south(st.position);
        if (colat > Surface::kSwitchToBody) target = ChartId::Body;
    }
    if (target == st.position.chart) return;
    Mat2 J = s.transition_jacobian(st.position, target);
    ChartPoint moved = s.transition(st.position, target);
    st.velocity = J.apply(st.velocity);
    st.position = moved;
}

void advance(const Surface& s, GeodesicState& st, double length, double step,
             double& renorm_log, long& step_counter,
             const std::function<void(const GeodesicState&)>* on_sample) {
    if (length <= 0.0) return;
    long n = std::lround(std::ceil(length / step - 1e-9));
    double target = st.arc_length + length;
    for (long i = 0; i < n; ++i) {
        double h = std::min(step, target - st.arc_length);
        OdeState y{st.position.u, st.position.v, st.velocity.x, st.velocity.y};
        rk4_step(s, st.position.chart, y, h);
        st.position.u = y.u;
        st.position.v = y.v;
        st.velocity = {y.du, y.dv};
        st.arc_length += h;
        if (st.position.chart == ChartId::Body)
            st.position.v = wrap_angle(st.position.v);
        if (!s.contains(st.position)) {
            std::ostringstream os;
            os << "geodesic left the chart atlas at (" << chart_name(st.position.chart)
               << ", " << st.position.u << ", " << st.position.v
               << "), arc length " << st.arc_length;
            throw IntegrationError(os.str());
        }
        maybe_switch_chart(s, st);
        if (++step_counter % 100 == 0) {
            double nm = s.metric_at(st.position).norm(st.velocity);
            renorm_log = std::max(renorm_log, std::fabs(nm - 1.0));
            st.velocity = st.velocity * (1.0 / nm);
        }
        if (on_sample) (*on_sample)(st);
    }
}

}  // namespace

Vec2 direction_to_velocity(const Surface& s, const ChartPoint& x,
                           TangentDirection theta) {
    Sym2 g = s.metric_at(x);
    Vec2 e1, e2;
    frame_at(g, e1, e2);
    double c = std::cos(theta.angle), sn = std::sin(theta.angle);
    return {c * e1.x + sn * e2.x, c * e1.y + sn * e2.y};
}

TangentDirection velocity_to_direction(const Surface& s, const ChartPoint& x,
                                       Vec2 v) {
    Sym2 g = s.metric_at(x);
    Vec2 e1, e2;
    frame_at(g, e1, e2);
    double a = g.inner(v, e1), b = g.inner(v, e2);
    return {wrap_angle(std::atan2(b, a))};
}

GeodesicTrace integrate_geodesic(const Surface& s, const ChartPoint& x,
                                 TangentDirection theta, double length,
                                 double step) {
    if (!(step > 0.0)) throw ConfigError("integrator step must be positive");
    if (step > s.injectivity_bound() / 100.0)
        throw ConfigError("integrator step exceeds injectivity_bound/100");
    if (!(length > 0.0)) throw ConfigError("geodesic length must be positive");
    s.require_contains(x);
    GeodesicTrace trace;
    trace.initial_point = x;
    trace.initial_direction = {wrap_angle(theta.angle)};
    trace.h_sample = step;
    GeodesicState st{s.normalized(x), direction_to_velocity(s, x, theta), 0.0};
    trace.samples.push_back(st);
    long counter = 0;
    std::function<void(const GeodesicState&)> rec =
        [&](const GeodesicState& st2) { trace.samples.push_back(st2); };
    advance(s, st, length, step, trace.max_renorm_correction, counter, &rec);
    trace.terminal_length = st.arc_length;
    return trace;
}

GeodesicState flow(const Surface& s, GeodesicState state, double length,
                   double step, double* renorm_log) {
    double log_local = 0.0;
    long counter = 0;
    advance(s, state, length, step, log_local, counter, nullptr);
    if (renorm_log) *renorm_log = std::max(*renorm_log, log_local);
    return state;
}

ChartPoint exp_map(const Surface& s, const ChartPoint& x, TangentDirection theta,
                   double t, double step) {
    if (t < 0.0) throw ConfigError("exp_map length must be nonnegative");
    if (t == 0.0) {
        s.require_contains(x);
        return x;
    }
    GeodesicState st{s.normalized(x), direction_to_velocity(s, x, theta), 0.0};
    return flow(s, st, t, step).position;
}

double clairaut_quantity(const Surface& s, const GeodesicState& state) {
    Vec3 fu, fv;
    s.embed_jacobian(state.position, fu, fv);
    Vec3 V = fu * state.velocity.x + fv * state.velocity.y;
    Vec3 P = s.embed(state.position);
    return P.x * V.y - P.y * V.x;
}

namespace {

// Residual of shooting from center toward z: the terminal offset decomposed in
// the tangent plane at the terminal point (along the ray, and across it).
struct ShotMiss {
    double along = 0.0, across = 0.0, miss = 0.0;
    GeodesicState terminal;
};

ShotMiss shot_miss(const Surface& s, const ChartPoint& center, double theta,
                   double t, const Vec3& z3, double step) {
    GeodesicState st{s.normalized(center),
                     direction_to_velocity(s, center, {wrap_angle(theta)}), 0.0};
    if (t > 0.0) st = flow(s, st, t, step);
    Vec3 fu, fv;
    s.embed_jacobian(st.position, fu, fv);
    Vec3 V = fu * st.velocity.x + fv * st.velocity.y;
    V = V * (1.0 / V.norm());
    Vec3 n = fu.cross(fv);
    n = n * (1.0 / n.norm());
    Vec3 w = z3 - s.embed(st.position);
    ShotMiss m;
    m.along = w.dot(V);
    m.across = w.dot(n.cross(V));
    m.miss = w.norm();
    m.terminal = st;
    return m;
}

}  // namespace

std::optional<ShootResult> refine_shot(const Surface& s, const ChartPoint& from,
                                       double theta0, double t0,
                                       const Vec3& target, double step,
                                       double tol, double t_min, double t_max) {
    const double dtheta = 1e-5;
    double theta = theta0, t = t0;
    for (int it = 0; it < 40; ++it) {
        if (t < t_min || t > t_max) return std::nullopt;
        ShotMiss m = shot_miss(s, from, theta, t, target, step);
        if (m.miss <= tol) {
            return ShootResult{wrap_angle(theta), t, m.terminal, m.miss};
        }
        ShotMiss mp = shot_miss(s, from, theta + dtheta, t, target, step);
        double d_across = (mp.across - m.across) / dtheta;
        double dth =
            std::fabs(d_across) > 1e-12 ? -m.across / d_across : 0.0;
        dth = std::clamp(dth, -0.5, 0.5);
        double dt = std::clamp(m.along, -0.5 * (t_max - t_min),
                               0.5 * (t_max - t_min));
        theta += dth;
        t += dt;
        if (std::fabs(dth) < 1e-10 && std::fabs(dt) < 1e-11) {
            ShotMiss mf = shot_miss(s, from, theta, t, target, step);
            if (mf.miss <= std::max(tol, 1e-7)) {
                return ShootResult{wrap_angle(theta), t, mf.terminal, mf.miss};
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

PolarResult polar_coordinates(const Surface& s, const ChartPoint& center,
                              const ChartPoint& z, double step,
                              const PolarResult* hint) {
    s.require_contains(center);
    s.require_contains(z);
    Vec3 z3 = s.embed(z);
    Vec3 c3 = s.embed(center);
    double chord = (z3 - c3).norm();
    if (chord <= 1e-12) return {{0.0}, 0.0};

    // Initial guess: the chart displacement of z seen from center.
    double theta0, t0;
    if (hint && hint->distance > 0.0) {
        theta0 = hint->direction.angle;
        t0 = hint->distance;
    } else {
        ChartPoint zz = z;
        try {
            if (zz.chart != center.chart) zz = s.transition(zz, center.chart);
        } catch (const DomainError&) {
            zz.chart = center.chart;  // no overlap: fall through to the scan
            zz.u = center.u;
            zz.v = center.v;
        }
        Vec2 d{zz.u - center.u, zz.v - center.v};
        if (center.chart == ChartId::Body) d.y = wrap_pi(d.y);
        Sym2 g = s.metric_at(center);
        t0 = g.norm(d);
        theta0 = t0 > 1e-12 ? velocity_to_direction(s, center, d).angle : 0.0;
        if (t0 <= 1e-12) t0 = chord;
        t0 = std::max(t0, 0.5 * chord);
    }

    auto refine = [&](double theta, double t, PolarResult& out) -> bool {
        auto r = refine_shot(s, center, theta, t, z3, step, 1e-10,
                             0.25 * chord, s.injectivity_bound() * 1.5);
        if (!r) return false;
        out = {{r->theta}, r->t};
        return true;
    };

    PolarResult out;
    if (refine(theta0, t0, out)) {
        if (out.distance >= s.injectivity_bound() + 1e-9)
            throw DomainError("point outside the polar ball of the center");
        return out;
    }

    // Fallback: coarse 64-ray scan for the closest approach, then refine.
    double max_len = std::min(s.injectivity_bound(), s.diameter_estimate());
    double scan_step = std::max(step, max_len / 400.0);
    double best_miss = 1e300, best_theta = 0.0, best_t = chord;
    for (int i = 0; i < 64; ++i) {
        double theta = kTwoPi * i / 64.0;
        GeodesicState st{s.normalized(center),
                         direction_to_velocity(s, center, {theta}), 0.0};
        long nsteps = std::lround(std::ceil(max_len / scan_step));
        long counter = 0;
        double sink = 0.0;
        for (long k = 0; k < nsteps; ++k) {
            advance(s, st, scan_step, scan_step, sink, counter, nullptr);
            double miss = (z3 - s.embed(st.position)).norm();
            if (miss < best_miss) {
                best_miss = miss;
                best_theta = theta;
                best_t = st.arc_length;
            }
        }
    }
    if (refine(best_theta, best_t, out)) {
        if (out.distance >= s.injectivity_bound() + 1e-9)
            throw DomainError("point outside the polar ball of the center");
        return out;
    }
    std::ostringstream os;
    os << "polar shooting failed to converge from (" << chart_name(center.chart)
       << ", " << center.u << ", " << center.v << ")";
    throw SolverError(os.str());
}

void write_trace_csv(std::ostream& os, const Surface& s,
                     const GeodesicTrace& trace) {
    os << "arc_length,chart,u,v,x,y,z\n";
    os << std::setprecision(17);
    for (const GeodesicState& st : trace.samples) {
        Vec3 e = s.embed(st.position);
        os << st.arc_length << ',' << chart_name(st.position.chart) << ','
           << st.position.u << ',' << st.position.v << ',' << e.x << ',' << e.y
           << ',' << e.z << '\n';
    }
}

}  // namespace medtrace
