#include <cmath>

#include "doctest.h"
#include "medtrace/analysis.hpp"
#include "oracles.hpp"

using namespace medtrace;

namespace {

struct SphereSetup {
    Surface s;
    DistanceField fp, fq;
    MediatrixParams mp;
    MediatrixCurve curve;

    static DistanceParams fast() {
        DistanceParams dp;
        dp.n_fan = 1024;
        return dp;
    }
    static MediatrixParams tracer() {
        MediatrixParams mp;
        mp.step = 0.02;
        return mp;
    }
    SphereSetup()
        : s([] {
              SurfaceSpec sp;
              sp.kind = SurfaceSpec::Kind::RoundSphere;
              return Surface(sp);
          }()),
          fp(s, {ChartId::Body, 0.0, 0.0}, fast()),
          fq(s, {ChartId::Body, 0.0, 1.0}, fast()),
          mp(tracer()),
          curve(trace_mediatrix(fp, fq, mp)) {}
};

SphereSetup& setup() {
    static SphereSetup st;
    return st;
}

}  // namespace

TEST_CASE("directional derivative equals the cosine of the angle to the "
          "minimizing direction") {
    SphereSetup& st = setup();
    Rng rng(51);
    for (int k = 0; k < 20; ++k) {
        ChartPoint x{ChartId::Body, rng.uniform(-0.4, 0.4),
                     rng.uniform(1.5, 5.0)};
        DistanceResult r = st.fp.query(x);
        REQUIRE(r.directions.size() == 1);
        double theta = rng.uniform(0.0, kTwoPi);
        double analytic = directional_derivative(r, {theta});
        CHECK(std::fabs(analytic +
                        std::cos(circ_dist(theta, r.directions[0].angle))) <
              1e-12);
        // Coarse finite-difference cross-check through the actual field; the
        // one-sided stencil carries an O(t) curvature term, so the tolerance
        // is loose (the Richardson-extrapolated check lives in acceptance).
        double t = 5e-3;
        double fd =
            (st.fp.query(exp_map(st.s, x, {theta}, t)).distance - r.distance) /
            t;
        CHECK(std::fabs(fd - analytic) < 2e-2);
    }
}

TEST_CASE("bisector residual decays along the spoke of a smooth point") {
    SphereSetup& st = setup();
    const MediatrixPoint& x = st.curve.points[5];
    REQUIRE(x.prewedges.size() == 2);
    EtaReport er =
        bisector_ray_residual(st.fp, st.fq, x, 0, {0.2, 0.1, 0.05, 0.025});
    REQUIRE(er.samples.size() == 4);
    // On the sphere the spoke tracks the mediatrix great circle exactly; the
    // residual stays at the corrector floor.
    for (const EtaSample& e : er.samples) CHECK(e.eta * e.t < 1e-4);
}

TEST_CASE("radial linearizability holds on the sphere and the adversarial "
          "variant fails") {
    SphereSetup& st = setup();
    std::vector<double> grid = {4 * st.mp.step, 2 * st.mp.step, st.mp.step};
    LinearizabilityReport rep = radial_linearizability_check(
        st.fp, st.fq, st.curve, 7, grid, st.mp);
    CHECK(rep.converged);
    CHECK(rep.terminal_gap <= kLinTol);
    LinearizabilityReport bad = radial_linearizability_check(
        st.fp, st.fq, st.curve, 7, grid, st.mp, true);
    CHECK(!bad.converged);
}

TEST_CASE("Jordan wedge report is empty at a generic point") {
    SphereSetup& st = setup();
    const MediatrixPoint& x = st.curve.points[3];
    JordanWedgeReport w = jordan_wedge_report(st.fp, x.position, x.to_p);
    CHECK(w.empty);  // single minimizing direction, no lens
}

TEST_CASE("deficiency budget bound is 3 pi on the sphere") {
    SphereSetup& st = setup();
    DeficiencyBudget b =
        deficiency_sum_bound(st.s, st.curve, st.mp.deficiency_threshold);
    CHECK(std::fabs(b.bound - 3.0 * kPi) < 1e-2);
    CHECK(b.sum <= 5e-3);
    CHECK(b.flagged.empty());
}

TEST_CASE("degenerate inputs raise DegeneracyError") {
    SphereSetup& st = setup();
    DistanceResult degen;
    degen.degenerate = true;
    CHECK_THROWS_AS(directional_derivative(degen, {0.0}),
                    DegeneracyError);
    CHECK_THROWS_AS(
        jordan_wedge_report(st.fp, st.curve.points[0].position, degen),
        DegeneracyError);
}
