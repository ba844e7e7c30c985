// Independent finite-difference oracles for the differential-geometric
// kernels, plus closed forms on the round sphere. These deliberately avoid
// the library's own Christoffel/curvature code paths: everything here is
// derived from metric_at (or the embedding) alone.
#pragma once

#include <cmath>

#include "medtrace/geodesic.hpp"
#include "medtrace/surface.hpp"

namespace medtrace::oracles {

inline Sym2 metric_fd_step(const Surface& s, ChartPoint x, int coord,
                           double h) {
    (coord == 0 ? x.u : x.v) += h;
    return s.metric_at(x);
}

// First partials of the metric components by central differences.
struct MetricDeriv {
    Sym2 du, dv;
};

inline MetricDeriv metric_derivatives(const Surface& s, const ChartPoint& x,
                                      double h = 1e-5) {
    MetricDeriv d;
    for (int c = 0; c < 2; ++c) {
        Sym2 gp = metric_fd_step(s, x, c, h);
        Sym2 gm = metric_fd_step(s, x, c, -h);
        Sym2& out = c == 0 ? d.du : d.dv;
        out.uu = (gp.uu - gm.uu) / (2 * h);
        out.uv = (gp.uv - gm.uv) / (2 * h);
        out.vv = (gp.vv - gm.vv) / (2 * h);
    }
    return d;
}

// Christoffel symbols from the Koszul formula applied to finite-difference
// metric derivatives.
inline Christoffel fd_christoffel(const Surface& s, const ChartPoint& x,
                                  double h = 1e-5) {
    Sym2 g = s.metric_at(x);
    MetricDeriv d = metric_derivatives(s, x, h);
    double inv_det = 1.0 / g.det();
    double iuu = g.vv * inv_det, iuv = -g.uv * inv_det, ivv = g.uu * inv_det;
    // Lowered symbols: G_{k,ij} = (g_{ki,j} + g_{kj,i} - g_{ij,k}) / 2.
    auto gd = [&](int i, int j, int k) -> double {  // d g_{ij} / d x_k
        const Sym2& m = k == 0 ? d.du : d.dv;
        if (i == 0 && j == 0) return m.uu;
        if (i == 1 && j == 1) return m.vv;
        return m.uv;
    };
    auto low = [&](int k, int i, int j) {
        return 0.5 * (gd(k, i, j) + gd(k, j, i) - gd(i, j, k));
    };
    Christoffel c;
    c.u_uu = iuu * low(0, 0, 0) + iuv * low(1, 0, 0);
    c.u_uv = iuu * low(0, 0, 1) + iuv * low(1, 0, 1);
    c.u_vv = iuu * low(0, 1, 1) + iuv * low(1, 1, 1);
    c.v_uu = iuv * low(0, 0, 0) + ivv * low(1, 0, 0);
    c.v_uv = iuv * low(0, 0, 1) + ivv * low(1, 0, 1);
    c.v_vv = iuv * low(0, 1, 1) + ivv * low(1, 1, 1);
    return c;
}

// Gaussian curvature by the Brioschi formula with finite-difference first and
// second metric derivatives.
inline double brioschi_curvature(const Surface& s, const ChartPoint& x,
                                 double h = 1e-4) {
    auto g_at = [&](double du, double dv) {
        ChartPoint y = x;
        y.u += du;
        y.v += dv;
        return s.metric_at(y);
    };
    Sym2 g = s.metric_at(x);
    Sym2 gu_p = g_at(h, 0), gu_m = g_at(-h, 0);
    Sym2 gv_p = g_at(0, h), gv_m = g_at(0, -h);
    Sym2 gpp = g_at(h, h), gpm = g_at(h, -h), gmp = g_at(-h, h),
         gmm = g_at(-h, -h);
    double E = g.uu, F = g.uv, G = g.vv;
    double Eu = (gu_p.uu - gu_m.uu) / (2 * h), Ev = (gv_p.uu - gv_m.uu) / (2 * h);
    double Fu = (gu_p.uv - gu_m.uv) / (2 * h), Fv = (gv_p.uv - gv_m.uv) / (2 * h);
    double Gu = (gu_p.vv - gu_m.vv) / (2 * h), Gv = (gv_p.vv - gv_m.vv) / (2 * h);
    double Evv = (gv_p.uu - 2 * g.uu + gv_m.uu) / (h * h);
    double Guu = (gu_p.vv - 2 * g.vv + gu_m.vv) / (h * h);
    double Fuv = (gpp.uv - gpm.uv - gmp.uv + gmm.uv) / (4 * h * h);
    double det = E * G - F * F;
    double m1[3][3] = {
        {-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
        {Fv - 0.5 * Gu, E, F},
        {0.5 * Gv, F, G}};
    double m2[3][3] = {{0.0, 0.5 * Ev, 0.5 * Gu},
                       {0.5 * Ev, E, F},
                       {0.5 * Gu, F, G}};
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    return (det3(m1) - det3(m2)) / (det * det);
}

// Great-circle distance on the sphere of radius R via the embedding.
inline double sphere_distance(const Surface& s, const ChartPoint& x,
                              const ChartPoint& y, double R) {
    Vec3 a = s.embed(x), b = s.embed(y);
    double c = a.dot(b) / (R * R);
    return R * std::acos(std::min(1.0, std::max(-1.0, c)));
}

// Geodesic distance from a point to the great circle cut by the plane with
// unit normal n (through the origin), on the unit sphere.
inline double sphere_circle_distance(const Vec3& x, const Vec3& n) {
    double c = x.dot(n) / x.norm();
    return std::fabs(std::asin(std::min(1.0, std::max(-1.0, c))));
}

// Distance from a point to a 3d segment (chordal; adequate below the scale
// where chord and arc diverge).
inline double point_segment_distance(const Vec3& p, const Vec3& a,
                                     const Vec3& b) {
    Vec3 ab{b.x - a.x, b.y - a.y, b.z - a.z};
    Vec3 ap{p.x - a.x, p.y - a.y, p.z - a.z};
    double denom = ab.dot(ab);
    double t = denom > 0 ? std::min(1.0, std::max(0.0, ap.dot(ab) / denom))
                         : 0.0;
    Vec3 c{a.x + t * ab.x - p.x, a.y + t * ab.y - p.y, a.z + t * ab.z - p.z};
    return c.norm();
}

}  // namespace medtrace::oracles
