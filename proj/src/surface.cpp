#include "medtrace/surface.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace medtrace {

int worker_count() {
    static int n = [] {
        if (const char* env = std::getenv("MEDTRACE_WORKERS")) {
            int v = std::atoi(env);
            if (v >= 1) return v;
        }
        return 1;
    }();
    return n;
}

void parallel_for(int n, const std::function<void(int)>& f) {
    int workers = std::min(worker_count(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

const char* chart_name(ChartId id) {
    switch (id) {
        case ChartId::Body: return "body";
        case ChartId::NorthCap: return "north_cap";
        case ChartId::SouthCap: return "south_cap";
    }
    return "?";
}

ChartId chart_from_name(const std::string& name) {
    if (name == "body") return ChartId::Body;
    if (name == "north_cap") return ChartId::NorthCap;
    if (name == "south_cap") return ChartId::SouthCap;
    throw ConfigError("unknown chart id: " + name);
}

namespace {

// C2 smoothstep and its antiderivative; S(t) + S(1-t) = 1.
double smoothstep(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double smoothstep_integral(double t) {
    return t * t * t * t * (2.5 + t * (-3.0 + t));
}

}  // namespace

Surface::Surface(SurfaceSpec spec) : spec_(std::move(spec)) {
    using Kind = SurfaceSpec::Kind;
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
    };
    switch (spec_.kind) {
        case Kind::RoundSphere: {
            positive(spec_.radius, "radius");
            cap_scale_ = spec_.radius;
            pole_u_ = 0.5 * kPi * spec_.radius;
            meridian_length_ = 2.0 * pole_u_;
            diameter_ = kPi * spec_.radius;
            injectivity_bound_ = spec_.injectivity_bound > 0
                                     ? spec_.injectivity_bound
                                     : 0.9 * kPi * spec_.radius;
            if (injectivity_bound_ > kPi * spec_.radius + 1e-12)
                throw ConfigError("injectivity_bound exceeds pi*r");
            break;
        }
        case Kind::Spheroid: {
            positive(spec_.a, "a");
            positive(spec_.c, "c");
            cap_scale_ = spec_.a;
            pole_u_ = 0.5 * kPi;  // body coordinate is the ellipse parameter
            meridian_length_ = 2.0 * gauss_legendre16(
                [&](double t) {
                    double st = std::sin(t), ct = std::cos(t);
                    return std::sqrt(spec_.a * spec_.a * st * st +
                                     spec_.c * spec_.c * ct * ct);
                },
                0.0, 0.5 * kPi);
            diameter_ = meridian_length_;
            injectivity_bound_ =
                spec_.injectivity_bound > 0
                    ? spec_.injectivity_bound
                    : 0.9 * kPi * std::min(spec_.a, spec_.a * spec_.a / spec_.c);
            break;
        }
        case Kind::Cigar:
        case Kind::BumpedCigar: {
            positive(spec_.cylinder_half_height, "cylinder_half_height");
            positive(spec_.smoothing_width, "smoothing_width");
            double H = spec_.cylinder_half_height, w = spec_.smoothing_width;
            if (!(w < H)) throw ConfigError("smoothing_width must be < cylinder_half_height");
            if (w > 0.5) throw ConfigError("smoothing_width must be <= 0.5");
            cig_flat_end_ = H - w;
            cig_blend_end_ = H + w;
            // Solve for the cap arc curvature kappa so the profile is C^3 at
            // the blend end and the pole closes smoothly:
            //   r1(kappa) * kappa = cos(kappa * w)
            // where r1 is the blended profile radius at u = H + w.
            auto r1_of = [&](double kappa) {
                return 1.0 - gauss_legendre16(
                    [&](double u) {
                        double t = (u - cig_flat_end_) / (2.0 * w);
                        return std::sin(kappa * 2.0 * w * smoothstep_integral(t));
                    },
                    cig_flat_end_, cig_blend_end_);
            };
            double k0 = 1.0, f0 = r1_of(k0) * k0 - std::cos(k0 * w);
            double k1 = 1.0 + 2.0 * std::fabs(f0) + 1e-3;
            double f1 = r1_of(k1) * k1 - std::cos(k1 * w);
            for (int it = 0; it < 60 && std::fabs(f1) > 1e-15; ++it) {
                double k2 = k1 - f1 * (k1 - k0) / (f1 - f0);
                k0 = k1; f0 = f1;
                k1 = k2; f1 = r1_of(k1) * k1 - std::cos(k1 * w);
            }
            cig_kappa_ = k1;
            cig_Rc_ = 1.0 / cig_kappa_;
            cig_tau0_ = cig_kappa_ * w;
            cig_r1_ = r1_of(cig_kappa_);
            cig_h1_ = cig_flat_end_ +
                      gauss_legendre16(
                          [&](double u) {
                              double t = (u - cig_flat_end_) / (2.0 * w);
                              return std::cos(cig_kappa_ * 2.0 * w *
                                              smoothstep_integral(t));
                          },
                          cig_flat_end_, cig_blend_end_);
            cig_zc_ = cig_h1_ - cig_Rc_ * std::sin(cig_tau0_);
            cap_scale_ = cig_Rc_;
            pole_u_ = cig_blend_end_ + cig_Rc_ * (0.5 * kPi - cig_tau0_);
            meridian_length_ = 2.0 * pole_u_;
            diameter_ = meridian_length_;
            injectivity_bound_ = spec_.injectivity_bound > 0
                                     ? spec_.injectivity_bound
                                     : 0.9 * kPi * std::min(1.0, cig_Rc_);
            for (size_t i = 0; i < spec_.bumps.size(); ++i) {
                const BumpSpec& b = spec_.bumps[i];
                if (!(b.radius > 0.0)) throw ConfigError("bump radius must be positive");
                if (b.height < 0.0) throw ConfigError("bump height must be >= 0");
                if (std::fabs(b.center_z) + b.radius >= cig_flat_end_)
                    throw ConfigError("bump support must lie strictly inside the flat region");
                for (size_t j = 0; j < i; ++j) {
                    const BumpSpec& o = spec_.bumps[j];
                    double du = b.center_z - o.center_z;
                    double dp = wrap_pi(b.center_phi - o.center_phi);
                    if (std::sqrt(du * du + dp * dp) <= b.radius + o.radius)
                        throw ConfigError("bump supports must be pairwise disjoint");
                }
            }
            break;
        }
    }
    body_u_min_ = u_of_colat(false, kBodyExclusion);
    body_u_max_ = u_of_colat(true, kBodyExclusion);
    double rho_cap = profile_radius_of_colat(kCapExtent);
    cap_w2_max_ = rho_cap * rho_cap;
    if (!(injectivity_bound_ > 0.0)) throw ConfigError("injectivity_bound must be positive");
}

double Surface::u_of_colat(bool north, double colat) const {
    double u;
    if (spec_.kind == SurfaceSpec::Kind::Spheroid) {
        u = 0.5 * kPi - colat;
    } else {
        u = pole_u_ - colat * cap_scale_;
    }
    return north ? u : -u;
}

double Surface::colat_of_cap_radius(double rho) const {
    double s = std::min(1.0, rho / cap_scale_);
    return std::asin(s);
}

double Surface::profile_radius_of_colat(double colat) const {
    return profile(u_of_colat(true, colat)).r;
}

double Surface::colat_north(const ChartPoint& x) const {
    switch (x.chart) {
        case ChartId::Body:
            return spec_.kind == SurfaceSpec::Kind::Spheroid
                       ? 0.5 * kPi - x.u
                       : (pole_u_ - x.u) / cap_scale_;
        case ChartId::NorthCap:
            return colat_of_cap_radius(std::sqrt(x.u * x.u + x.v * x.v));
        case ChartId::SouthCap:
            return kPi;  // effectively far
    }
    return kPi;
}

double Surface::colat_south(const ChartPoint& x) const {
    switch (x.chart) {
        case ChartId::Body:
            return spec_.kind == SurfaceSpec::Kind::Spheroid
                       ? 0.5 * kPi + x.u
                       : (pole_u_ + x.u) / cap_scale_;
        case ChartId::SouthCap:
            return colat_of_cap_radius(std::sqrt(x.u * x.u + x.v * x.v));
        case ChartId::NorthCap:
            return kPi;
    }
    return kPi;
}

bool Surface::contains(const ChartPoint& x) const {
    switch (x.chart) {
        case ChartId::Body:
            return x.u >= body_u_min_ - 1e-12 && x.u <= body_u_max_ + 1e-12;
        case ChartId::NorthCap:
        case ChartId::SouthCap:
            return x.u * x.u + x.v * x.v <= cap_w2_max_ + 1e-12;
    }
    return false;
}

void Surface::require_contains(const ChartPoint& x) const {
    if (!contains(x)) {
        std::ostringstream os;
        os << "point (" << chart_name(x.chart) << ", " << x.u << ", " << x.v
           << ") outside chart domain";
        throw DomainError(os.str());
    }
}

ChartPoint Surface::normalized(ChartPoint x) const {
    if (x.chart == ChartId::Body) x.v = wrap_angle(x.v);
    return x;
}

ProfilePoint Surface::profile(double u) const {
    using Kind = SurfaceSpec::Kind;
    ProfilePoint p;
    switch (spec_.kind) {
        case Kind::RoundSphere: {
            double R = spec_.radius, t = u / R;
            p = {R * std::cos(t), -std::sin(t), -std::cos(t) / R,
                 R * std::sin(t), std::cos(t), -std::sin(t) / R};
            return p;
        }
        case Kind::Spheroid: {
            p = {spec_.a * std::cos(u), -spec_.a * std::sin(u), -spec_.a * std::cos(u),
                 spec_.c * std::sin(u), spec_.c * std::cos(u), -spec_.c * std::sin(u)};
            return p;
        }
        case Kind::Cigar:
        case Kind::BumpedCigar: {
            double au = std::fabs(u);
            double w = spec_.smoothing_width;
            if (au <= cig_flat_end_) {
                p = {1.0, 0.0, 0.0, au, 1.0, 0.0};
            } else if (au < cig_blend_end_) {
                auto tau = [&](double s) {
                    double t = (s - cig_flat_end_) / (2.0 * w);
                    return cig_kappa_ * 2.0 * w * smoothstep_integral(t);
                };
                double tu = tau(au);
                double kappa_u = cig_kappa_ *
                                 smoothstep((au - cig_flat_end_) / (2.0 * w));
                double r = 1.0 - gauss_legendre16(
                                     [&](double s) { return std::sin(tau(s)); },
                                     cig_flat_end_, au);
                double h = cig_flat_end_ + gauss_legendre16(
                                               [&](double s) { return std::cos(tau(s)); },
                                               cig_flat_end_, au);
                p = {r, -std::sin(tu), -std::cos(tu) * kappa_u,
                     h, std::cos(tu), -std::sin(tu) * kappa_u};
            } else {
                double tu = cig_tau0_ + (au - cig_blend_end_) * cig_kappa_;
                p = {cig_Rc_ * std::cos(tu), -std::sin(tu), -std::cos(tu) * cig_kappa_,
                     cig_zc_ + cig_Rc_ * std::sin(tu), std::cos(tu),
                     -std::sin(tu) * cig_kappa_};
            }
            if (u < 0.0) {
                p.dr = -p.dr;
                p.h = -p.h;
                p.ddh = -p.ddh;
            }
            return p;
        }
    }
    return p;
}

// ---- bumps ---------------------------------------------------------------

bool Surface::bump_eval(double u, double phi, double& b, double& bu, double& bp,
                        double& buu, double& bup, double& bpp) const {
    b = bu = bp = buu = bup = bpp = 0.0;
    bool hit = false;
    for (const BumpSpec& s : spec_.bumps) {
        double du = u - s.center_z;
        double dp = wrap_pi(phi - s.center_phi);
        double R2 = s.radius * s.radius;
        double rho2 = du * du + dp * dp;
        if (rho2 >= R2) continue;
        hit = true;
        double t = rho2 / R2;
        double m = 1.0 - t;
        double f = m * m * m * m;
        double df = -4.0 * m * m * m / R2;   // d f / d rho2
        double ddf = 12.0 * m * m / (R2 * R2);
        // rho2 derivatives: d/du = 2 du, d/dphi = 2 dp.
        b += s.height * f;
        bu += s.height * df * 2.0 * du;
        bp += s.height * df * 2.0 * dp;
        buu += s.height * (ddf * 4.0 * du * du + df * 2.0);
        bpp += s.height * (ddf * 4.0 * dp * dp + df * 2.0);
        bup += s.height * ddf * 4.0 * du * dp;
    }
    return hit;
}

bool Surface::is_revolution_at(const ChartPoint& x) const {
    if (spec_.kind != SurfaceSpec::Kind::BumpedCigar) return true;
    if (x.chart != ChartId::Body) return true;
    double b, bu, bp, buu, bup, bpp;
    return !bump_eval(x.u, x.v, b, bu, bp, buu, bup, bpp);
}

Sym2 Surface::metric_body_bumped(double u, double phi) const {
    double b, bu, bp, buu, bup, bpp;
    bump_eval(u, phi, b, bu, bp, buu, bup, bpp);
    double r = 1.0 + b;
    return {1.0 + bu * bu, bu * bp, bp * bp + r * r};
}

Christoffel Surface::christoffel_body_bumped(double u, double phi) const {
    double b, bu, bp, buu, bup, bpp;
    bump_eval(u, phi, b, bu, bp, buu, bup, bpp);
    double cp = std::cos(phi), sp = std::sin(phi);
    double r = 1.0 + b;
    Vec3 Fu{bu * cp, bu * sp, 1.0};
    Vec3 Fp{bp * cp - r * sp, bp * sp + r * cp, 0.0};
    Vec3 Fuu{buu * cp, buu * sp, 0.0};
    Vec3 Fup{bup * cp - bu * sp, bup * sp + bu * cp, 0.0};
    Vec3 Fpp{(bpp - r) * cp - 2.0 * bp * sp, (bpp - r) * sp + 2.0 * bp * cp, 0.0};
    Sym2 g{Fu.dot(Fu), Fu.dot(Fp), Fp.dot(Fp)};
    double dt = g.det();
    double iuu = g.vv / dt, iuv = -g.uv / dt, ivv = g.uu / dt;
    auto gamma = [&](Vec3 Fij, double& gu, double& gv) {
        double a = Fij.dot(Fu), c = Fij.dot(Fp);
        gu = iuu * a + iuv * c;
        gv = iuv * a + ivv * c;
    };
    Christoffel G;
    gamma(Fuu, G.u_uu, G.v_uu);
    gamma(Fup, G.u_uv, G.v_uv);
    gamma(Fpp, G.u_vv, G.v_vv);
    return G;
}

double Surface::curvature_body_bumped(double u, double phi) const {
    double b, bu, bp, buu, bup, bpp;
    bump_eval(u, phi, b, bu, bp, buu, bup, bpp);
    double cp = std::cos(phi), sp = std::sin(phi);
    double r = 1.0 + b;
    Vec3 Fu{bu * cp, bu * sp, 1.0};
    Vec3 Fp{bp * cp - r * sp, bp * sp + r * cp, 0.0};
    Vec3 Fuu{buu * cp, buu * sp, 0.0};
    Vec3 Fup{bup * cp - bu * sp, bup * sp + bu * cp, 0.0};
    Vec3 Fpp{(bpp - r) * cp - 2.0 * bp * sp, (bpp - r) * sp + 2.0 * bp * cp, 0.0};
    Vec3 n = Fu.cross(Fp);
    double nn = n.norm();
    n = n * (1.0 / nn);
    double L = n.dot(Fuu), M = n.dot(Fup), N = n.dot(Fpp);
    Sym2 g{Fu.dot(Fu), Fu.dot(Fp), Fp.dot(Fp)};
    return (L * N - M * M) / g.det();
}

// ---- caps ----------------------------------------------------------------

void Surface::cap_height(bool north, double w, double& H, double& dH,
                         double& ddH) const {
    (void)north;  // caps are mirror images; the graph height is shared
    using Kind = SurfaceSpec::Kind;
    switch (spec_.kind) {
        case Kind::RoundSphere: {
            double R2 = spec_.radius * spec_.radius;
            double s = std::sqrt(R2 - w);
            H = s;
            dH = -0.5 / s;
            ddH = -0.25 / (s * s * s);
            return;
        }
        case Kind::Spheroid: {
            double a2 = spec_.a * spec_.a;
            double m = 1.0 - w / a2;
            double s = std::sqrt(m);
            H = spec_.c * s;
            dH = -0.5 * spec_.c / (a2 * s);
            ddH = -0.25 * spec_.c / (a2 * a2 * s * m);
            return;
        }
        case Kind::Cigar:
        case Kind::BumpedCigar: {
            double R2 = cig_Rc_ * cig_Rc_;
            double s = std::sqrt(R2 - w);
            H = cig_zc_ + s;
            dH = -0.5 / s;
            ddH = -0.25 / (s * s * s);
            return;
        }
    }
}

// ---- metric / christoffel / curvature ------------------------------------

Sym2 Surface::metric_at(const ChartPoint& x) const {
    require_contains(x);
    if (x.chart == ChartId::Body) {
        if (spec_.kind == SurfaceSpec::Kind::BumpedCigar &&
            !is_revolution_at(x))
            return metric_body_bumped(x.u, x.v);
        ProfilePoint p = profile(x.u);
        double E = p.dr * p.dr + p.dh * p.dh;
        return {E, 0.0, p.r * p.r};
    }
    double w = x.u * x.u + x.v * x.v;
    double H, dH, ddH;
    cap_height(x.chart == ChartId::NorthCap, w, H, dH, ddH);
    double hx = 2.0 * x.u * dH, hy = 2.0 * x.v * dH;
    return {1.0 + hx * hx, hx * hy, 1.0 + hy * hy};
}

Christoffel Surface::christoffel_at(const ChartPoint& x) const {
    require_contains(x);
    if (x.chart == ChartId::Body) {
        if (spec_.kind == SurfaceSpec::Kind::BumpedCigar &&
            !is_revolution_at(x))
            return christoffel_body_bumped(x.u, x.v);
        ProfilePoint p = profile(x.u);
        double E = p.dr * p.dr + p.dh * p.dh;
        double dE = 2.0 * (p.dr * p.ddr + p.dh * p.ddh);
        Christoffel G;
        G.u_uu = 0.5 * dE / E;
        G.u_vv = -p.r * p.dr / E;
        G.v_uv = p.dr / p.r;
        return G;
    }
    double w = x.u * x.u + x.v * x.v;
    double H, dH, ddH;
    cap_height(x.chart == ChartId::NorthCap, w, H, dH, ddH);
    double hx = 2.0 * x.u * dH, hy = 2.0 * x.v * dH;
    double hxx = 2.0 * dH + 4.0 * x.u * x.u * ddH;
    double hyy = 2.0 * dH + 4.0 * x.v * x.v * ddH;
    double hxy = 4.0 * x.u * x.v * ddH;
    double W = 1.0 + hx * hx + hy * hy;
    Christoffel G;
    G.u_uu = hx * hxx / W;
    G.u_uv = hx * hxy / W;
    G.u_vv = hx * hyy / W;
    G.v_uu = hy * hxx / W;
    G.v_uv = hy * hxy / W;
    G.v_vv = hy * hyy / W;
    return G;
}

double Surface::gaussian_curvature_at(const ChartPoint& x) const {
    require_contains(x);
    if (x.chart == ChartId::Body) {
        if (spec_.kind == SurfaceSpec::Kind::BumpedCigar &&
            !is_revolution_at(x))
            return curvature_body_bumped(x.u, x.v);
        ProfilePoint p = profile(x.u);
        double E = p.dr * p.dr + p.dh * p.dh;
        return p.dh * (p.dr * p.ddh - p.ddr * p.dh) / (p.r * E * E);
    }
    double w = x.u * x.u + x.v * x.v;
    double H, dH, ddH;
    cap_height(x.chart == ChartId::NorthCap, w, H, dH, ddH);
    double hx = 2.0 * x.u * dH, hy = 2.0 * x.v * dH;
    double hxx = 2.0 * dH + 4.0 * x.u * x.u * ddH;
    double hyy = 2.0 * dH + 4.0 * x.v * x.v * ddH;
    double hxy = 4.0 * x.u * x.v * ddH;
    double W = 1.0 + hx * hx + hy * hy;
    return (hxx * hyy - hxy * hxy) / (W * W);
}

// ---- embedding -----------------------------------------------------------

Vec3 Surface::embed(const ChartPoint& x) const {
    require_contains(x);
    if (x.chart == ChartId::Body) {
        if (spec_.kind == SurfaceSpec::Kind::BumpedCigar &&
            !is_revolution_at(x)) {
            double b, bu, bp, buu, bup, bpp;
            bump_eval(x.u, x.v, b, bu, bp, buu, bup, bpp);
            double r = 1.0 + b;
            return {r * std::cos(x.v), r * std::sin(x.v), x.u};
        }
        ProfilePoint p = profile(x.u);
        return {p.r * std::cos(x.v), p.r * std::sin(x.v), p.h};
    }
    double w = x.u * x.u + x.v * x.v;
    double H, dH, ddH;
    cap_height(x.chart == ChartId::NorthCap, w, H, dH, ddH);
    double z = x.chart == ChartId::NorthCap ? H : -H;
    return {x.u, x.v, z};
}

void Surface::embed_jacobian(const ChartPoint& x, Vec3& fu, Vec3& fv) const {
    require_contains(x);
    if (x.chart == ChartId::Body) {
        double cp = std::cos(x.v), sp = std::sin(x.v);
        if (spec_.kind == SurfaceSpec::Kind::BumpedCigar &&
            !is_revolution_at(x)) {
            double b, bu, bp, buu, bup, bpp;
            bump_eval(x.u, x.v, b, bu, bp, buu, bup, bpp);
            double r = 1.0 + b;
            fu = {bu * cp, bu * sp, 1.0};
            fv = {bp * cp - r * sp, bp * sp + r * cp, 0.0};
            return;
        }
        ProfilePoint p = profile(x.u);
        fu = {p.dr * cp, p.dr * sp, p.dh};
        fv = {-p.r * sp, p.r * cp, 0.0};
        return;
    }
    double w = x.u * x.u + x.v * x.v;
    double H, dH, ddH;
    cap_height(x.chart == ChartId::NorthCap, w, H, dH, ddH);
    double sign = x.chart == ChartId::NorthCap ? 1.0 : -1.0;
    fu = {1.0, 0.0, sign * 2.0 * x.u * dH};
    fv = {0.0, 1.0, sign * 2.0 * x.v * dH};
}

// ---- transitions ---------------------------------------------------------

ChartPoint Surface::transition(const ChartPoint& x, ChartId target) const {
    require_contains(x);
    if (x.chart == target) return x;
    if (x.chart == ChartId::Body) {
        bool north = target == ChartId::NorthCap;
        if (target == ChartId::SouthCap) north = false;
        if (target == ChartId::Body) return x;
        double colat = north ? colat_north(x) : colat_south(x);
        if (colat > kCapExtent + 1e-12)
            throw DomainError("body point not in the cap overlap band");
        ProfilePoint p = profile(x.u);
        ChartPoint out{target, p.r * std::cos(x.v), p.r * std::sin(x.v)};
        require_contains(out);
        return out;
    }
    if (target != ChartId::Body)
        throw DomainError("cap charts do not overlap each other");
    double rho = std::sqrt(x.u * x.u + x.v * x.v);
    if (rho <= 1e-300) throw DomainError("pole is not covered by the body chart");
    bool north = x.chart == ChartId::NorthCap;
    double colat = colat_of_cap_radius(rho);
    ChartPoint out{ChartId::Body, u_of_colat(north, colat),
                   wrap_angle(std::atan2(x.v, x.u))};
    if (!contains(out))
        throw DomainError("cap point not in the body overlap band");
    return out;
}

Mat2 Surface::transition_jacobian(const ChartPoint& x, ChartId target) const {
    if (x.chart == target) return {};
    if (x.chart == ChartId::Body) {
        ProfilePoint p = profile(x.u);
        double cp = std::cos(x.v), sp = std::sin(x.v);
        // d(cap u, cap v) / d(u, phi)
        return {p.dr * cp, -p.r * sp, p.dr * sp, p.r * cp};
    }
    ChartPoint body = transition(x, ChartId::Body);
    return transition_jacobian(body, x.chart).inverse();
}

// ---- integral quantities -------------------------------------------------

double Surface::total_abs_curvature(int resolution) const {
    if (resolution < 16) throw ConfigError("quadrature resolution must be >= 16");
    double sum = 0.0;
    // Body band between the two quadrature split circles.
    double ulo = u_of_colat(false, kQuadSplit);
    double uhi = u_of_colat(true, kQuadSplit);
    double du = (uhi - ulo) / resolution;
    double dv = kTwoPi / resolution;
    for (int i = 0; i < resolution; ++i) {
        double u = ulo + (i + 0.5) * du;
        for (int j = 0; j < resolution; ++j) {
            double v = (j + 0.5) * dv;
            ChartPoint p{ChartId::Body, u, v};
            sum += std::fabs(gaussian_curvature_at(p)) *
                   std::sqrt(metric_at(p).det()) * du * dv;
        }
    }
    // Polar caps, integrated in polar coordinates of the cap chart.
    double rho_b = profile_radius_of_colat(kQuadSplit);
    double drho = rho_b / resolution;
    for (ChartId cap : {ChartId::NorthCap, ChartId::SouthCap}) {
        for (int i = 0; i < resolution; ++i) {
            double rho = (i + 0.5) * drho;
            for (int j = 0; j < resolution; ++j) {
                double a = (j + 0.5) * dv;
                ChartPoint p{cap, rho * std::cos(a), rho * std::sin(a)};
                sum += std::fabs(gaussian_curvature_at(p)) *
                       std::sqrt(metric_at(p).det()) * rho * drho * dv;
            }
        }
    }
    return sum;
}

std::string Surface::describe() const {
    std::ostringstream os;
    switch (spec_.kind) {
        case SurfaceSpec::Kind::RoundSphere:
            os << "round sphere, radius " << spec_.radius;
            break;
        case SurfaceSpec::Kind::Spheroid:
            os << "spheroid of revolution, a=" << spec_.a << " c=" << spec_.c;
            break;
        case SurfaceSpec::Kind::Cigar:
            os << "smoothed cigar, half height " << spec_.cylinder_half_height;
            break;
        case SurfaceSpec::Kind::BumpedCigar:
            os << "smoothed cigar with " << spec_.bumps.size() << " bump(s)";
            break;
    }
    return os.str();
}

}  // namespace medtrace
