#include <cmath>

#include "doctest.h"
#include "medtrace/surface.hpp"
#include "oracles.hpp"

using namespace medtrace;

namespace {

SurfaceSpec sphere_spec(double R = 1.0) {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::RoundSphere;
    sp.radius = R;
    return sp;
}

SurfaceSpec spheroid_spec(double a, double c) {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::Spheroid;
    sp.a = a;
    sp.c = c;
    return sp;
}

SurfaceSpec cigar_spec(double H = 1.2, double w = 0.2) {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::Cigar;
    sp.cylinder_half_height = H;
    sp.smoothing_width = w;
    return sp;
}

SurfaceSpec bumped_spec() {
    SurfaceSpec sp = cigar_spec();
    sp.kind = SurfaceSpec::Kind::BumpedCigar;
    sp.bumps.push_back({0.5, 1.0, 0.3, 0.2});
    return sp;
}

std::vector<ChartPoint> sample_points(const Surface& s, std::uint64_t seed,
                                      int n) {
    Rng rng(seed);
    std::vector<ChartPoint> out;
    while ((int)out.size() < n) {
        ChartPoint x;
        int which = (int)(rng.next_u64() % 3);
        if (which == 0) {
            x = {ChartId::Body, rng.uniform(s.body_u_min(), s.body_u_max()),
                 rng.uniform(0.0, kTwoPi)};
        } else {
            double rho = std::sqrt(rng.uniform(0.0, s.cap_w2_max()));
            double ang = rng.uniform(0.0, kTwoPi);
            x = {which == 1 ? ChartId::NorthCap : ChartId::SouthCap,
                 rho * std::cos(ang), rho * std::sin(ang)};
        }
        if (s.contains(x)) out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("chart transitions round-trip and preserve the embedding") {
    for (const SurfaceSpec& sp :
         {sphere_spec(), spheroid_spec(1.0, 1.4), cigar_spec(), bumped_spec()}) {
        Surface s(sp);
        for (const ChartPoint& x : sample_points(s, 11, 60)) {
            for (ChartId target :
                 {ChartId::Body, ChartId::NorthCap, ChartId::SouthCap}) {
                ChartPoint y;
                try {
                    y = s.transition(x, target);
                } catch (const DomainError&) {
                    continue;  // not in the overlap
                }
                CHECK((s.embed(x) - s.embed(y)).norm() < 1e-10);
                ChartPoint back = s.transition(y, x.chart);
                CHECK((s.embed(back) - s.embed(x)).norm() < 1e-10);
            }
        }
    }
}

TEST_CASE("metric equals the Gram matrix of the embedding Jacobian") {
    for (const SurfaceSpec& sp :
         {sphere_spec(), spheroid_spec(1.0, 1.4), cigar_spec(), bumped_spec()}) {
        Surface s(sp);
        for (const ChartPoint& x : sample_points(s, 12, 80)) {
            Sym2 g = s.metric_at(x);
            Vec3 fu, fv;
            s.embed_jacobian(x, fu, fv);
            CHECK(std::fabs(g.uu - fu.dot(fu)) < 1e-9);
            CHECK(std::fabs(g.uv - fu.dot(fv)) < 1e-9);
            CHECK(std::fabs(g.vv - fv.dot(fv)) < 1e-9);
            CHECK(g.det() > 0.0);
        }
    }
}

TEST_CASE("Christoffel symbols agree with the Koszul finite-difference "
          "oracle") {
    for (const SurfaceSpec& sp :
         {sphere_spec(), spheroid_spec(1.0, 1.4), cigar_spec(), bumped_spec()}) {
        Surface s(sp);
        for (const ChartPoint& x : sample_points(s, 13, 40)) {
            Christoffel a = s.christoffel_at(x);
            Christoffel b = oracles::fd_christoffel(s, x);
            CHECK(std::fabs(a.u_uu - b.u_uu) < 1e-5);
            CHECK(std::fabs(a.u_uv - b.u_uv) < 1e-5);
            CHECK(std::fabs(a.u_vv - b.u_vv) < 1e-5);
            CHECK(std::fabs(a.v_uu - b.v_uu) < 1e-5);
            CHECK(std::fabs(a.v_uv - b.v_uv) < 1e-5);
            CHECK(std::fabs(a.v_vv - b.v_vv) < 1e-5);
        }
    }
}

TEST_CASE("Gaussian curvature agrees with the Brioschi finite-difference "
          "oracle") {
    for (const SurfaceSpec& sp :
         {sphere_spec(), spheroid_spec(1.0, 1.4), cigar_spec(), bumped_spec()}) {
        Surface s(sp);
        for (const ChartPoint& x : sample_points(s, 14, 40)) {
            double K = s.gaussian_curvature_at(x);
            double Kb = oracles::brioschi_curvature(s, x);
            CHECK(std::fabs(K - Kb) < 2e-4);
        }
    }
}

TEST_CASE("sphere and spheroid closed-form curvature") {
    Surface sphere(sphere_spec(1.3));
    for (const ChartPoint& x : sample_points(sphere, 15, 30))
        CHECK(std::fabs(sphere.gaussian_curvature_at(x) - 1.0 / (1.3 * 1.3)) <
              1e-9);
    // Prolate spheroid at the equator: profile r(z) = a sqrt(1 - z^2/c^2)
    // gives K = -r'' / (r (1 + r'^2)^2) = 1 / c^2 there.
    Surface sph(spheroid_spec(1.0, 1.4));
    ChartPoint equator{ChartId::Body, 0.0, 0.3};
    CHECK(std::fabs(sph.gaussian_curvature_at(equator) - 1.0 / (1.4 * 1.4)) <
          1e-9);
}

TEST_CASE("total absolute curvature of convex surfaces is 4 pi") {
    CHECK(std::fabs(Surface(sphere_spec()).total_abs_curvature(192) -
                    4.0 * kPi) < 1e-3);
    CHECK(std::fabs(Surface(cigar_spec()).total_abs_curvature(192) -
                    4.0 * kPi) < 1e-3);
    CHECK(std::fabs(Surface(spheroid_spec(1.0, 1.4)).total_abs_curvature(192) -
                    4.0 * kPi) < 1e-3);
}

TEST_CASE("cigar curvature vanishes on the flat cylinder and bumps stay "
          "local") {
    Surface cigar(cigar_spec());
    CHECK(std::fabs(cigar.gaussian_curvature_at({ChartId::Body, 0.0, 1.0})) <
          1e-12);
    CHECK(std::fabs(cigar.gaussian_curvature_at({ChartId::Body, 0.9, 2.0})) <
          1e-12);
    Surface bumped(bumped_spec());
    // Outside the bump support the two surfaces agree exactly.
    ChartPoint far{ChartId::Body, -0.5, 2.5};
    CHECK(std::fabs(bumped.gaussian_curvature_at(far)) < 1e-12);
    CHECK((bumped.embed(far) - cigar.embed(far)).norm() < 1e-15);
    // Inside the bump the curvature is substantial.
    ChartPoint center{ChartId::Body, 0.5, 1.0};
    CHECK(std::fabs(bumped.gaussian_curvature_at(center)) > 1.0);
    CHECK(!bumped.is_revolution_at(center));
    CHECK(bumped.is_revolution_at(far));
}

TEST_CASE("invalid surface parameters are rejected") {
    SurfaceSpec sp = sphere_spec(-1.0);
    CHECK_THROWS_AS(Surface{sp}, ConfigError);
    SurfaceSpec big_bump = bumped_spec();
    big_bump.bumps[0].center_z = 1.15;  // support leaves the flat region
    CHECK_THROWS_AS(Surface{big_bump}, ConfigError);
}

TEST_CASE("points outside chart domains are rejected") {
    Surface s(sphere_spec());
    CHECK(s.contains({ChartId::Body, 0.0, 0.0}));
    CHECK(!s.contains({ChartId::Body, s.body_u_max() + 1.0, 0.0}));
    CHECK_THROWS_AS(
        s.require_contains({ChartId::NorthCap, 10.0, 0.0}), DomainError);
}
