#include <cmath>

#include "doctest.h"
#include "medtrace/geodesic.hpp"
#include "oracles.hpp"

using namespace medtrace;

namespace {

Surface unit_sphere() {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::RoundSphere;
    return Surface(sp);
}

Surface cigar() {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::Cigar;
    sp.cylinder_half_height = 1.2;
    sp.smoothing_width = 0.2;
    return Surface(sp);
}

}  // namespace

TEST_CASE("sphere geodesics match the closed-form great circle") {
    Surface s = unit_sphere();
    Rng rng(21);
    for (int k = 0; k < 20; ++k) {
        ChartPoint x{ChartId::Body, rng.uniform(-0.4, 0.4),
                     rng.uniform(0.0, kTwoPi)};
        double theta = rng.uniform(0.0, kTwoPi);
        double t = rng.uniform(0.1, 2.5);
        ChartPoint z = exp_map(s, x, {theta}, t);
        // Distance along the great circle equals the arc parameter.
        CHECK(std::fabs(oracles::sphere_distance(s, x, z, 1.0) -
                        std::min(t, kTwoPi - t)) < 1e-7);
    }
}

TEST_CASE("sphere geodesics close up after 2 pi") {
    Surface s = unit_sphere();
    ChartPoint x{ChartId::Body, 0.2, 1.1};
    ChartPoint z = exp_map(s, x, {0.7}, kTwoPi);
    CHECK((s.embed(x) - s.embed(z)).norm() < 1e-9);
}

TEST_CASE("unit-speed and Clairaut quantities are conserved") {
    for (const Surface& s : {unit_sphere(), cigar()}) {
        GeodesicTrace tr =
            integrate_geodesic(s, {ChartId::Body, 0.1, 0.4}, {0.9}, 4.0, 1e-3);
        CHECK(tr.max_renorm_correction < 1e-8);
        double c0 = clairaut_quantity(s, tr.samples.front());
        double worst = 0.0;
        for (const GeodesicState& st : tr.samples) {
            CHECK(std::fabs(s.metric_at(st.position).norm(st.velocity) - 1.0) <
                  1e-8);
            worst = std::max(worst,
                             std::fabs(clairaut_quantity(s, st) - c0));
        }
        CHECK(worst / tr.terminal_length < 1e-6);
    }
}

TEST_CASE("integrator converges at fourth order on a step ladder") {
    Surface s = unit_sphere();
    ChartPoint x{ChartId::Body, 0.0, 0.0};
    // Endpoint of a quarter great circle launched along the equator frame.
    auto endpoint_error = [&](double step) {
        ChartPoint z = exp_map(s, x, {0.5}, 1.3, step);
        return std::fabs(oracles::sphere_distance(s, x, z, 1.0) - 1.3);
    };
    double e1 = endpoint_error(8e-2);
    double e2 = endpoint_error(4e-2);
    double e3 = endpoint_error(2e-2);
    CHECK(std::log2(e1 / e2) > 3.8);
    CHECK(std::log2(e2 / e3) > 3.8);
}

TEST_CASE("geodesics cross the poles through the cap charts") {
    Surface s = cigar();
    // A meridian from the equator through the north pole and back: total
    // length is twice the pole-to-pole meridian distance.
    ChartPoint x{ChartId::Body, 0.0, 0.0};
    ChartPoint z = exp_map(s, x, {0.0}, s.meridian_length());
    // Antipodal on the axis-symmetric cigar: same height, phi + pi.
    Vec3 ex = s.embed(x), ez = s.embed(z);
    CHECK(std::fabs(ex.z + ez.z) < 1e-6);
    CHECK(std::fabs(ez.x + ex.x) < 1e-6);
    CHECK(std::fabs(ez.y + ex.y) < 1e-6);
}

TEST_CASE("cigar meridian length matches the profile arc length") {
    Surface s = cigar();
    CHECK(std::fabs(s.meridian_length() - 5.532597) < 1e-5);
}

TEST_CASE("polar coordinates invert the exponential map") {
    for (const Surface& s : {unit_sphere(), cigar()}) {
        Rng rng(22);
        ChartPoint c{ChartId::Body, 0.1, 0.7};
        for (int k = 0; k < 15; ++k) {
            double theta = rng.uniform(0.0, kTwoPi);
            double t = rng.uniform(0.05, 0.8 * s.injectivity_bound());
            ChartPoint z = exp_map(s, c, {theta}, t);
            PolarResult pr = polar_coordinates(s, c, z);
            CHECK(std::fabs(pr.distance - t) < 1e-7);
            CHECK(circ_dist(pr.direction.angle, theta) < 1e-6);
        }
    }
}

TEST_CASE("two-point shooting refines onto the target") {
    Surface s = cigar();
    ChartPoint from{ChartId::Body, -0.3, 2.0};
    ChartPoint to = exp_map(s, from, {1.2}, 1.7);
    auto shot =
        refine_shot(s, from, 1.25, 1.65, s.embed(to), kShootStep, 1e-10, 1.0,
                    2.5);
    REQUIRE(shot.has_value());
    CHECK(shot->miss < 1e-9);
    CHECK(std::fabs(shot->t - 1.7) < 1e-6);
}
