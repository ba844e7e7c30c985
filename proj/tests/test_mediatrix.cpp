#include <cmath>
#include <sstream>

#include "doctest.h"
#include "medtrace/mediatrix.hpp"
#include "oracles.hpp"

using namespace medtrace;

namespace {

Surface unit_sphere() {
    SurfaceSpec sp;
    sp.kind = SurfaceSpec::Kind::RoundSphere;
    return Surface(sp);
}

DistanceParams fast_params() {
    DistanceParams dp;
    dp.n_fan = 1024;
    return dp;
}

MediatrixParams tracer_params() {
    MediatrixParams mp;
    mp.step = 0.02;
    return mp;
}

}  // namespace

TEST_CASE("pre-wedge construction on synthetic direction sets") {
    // One direction to each source: two pre-wedges covering the circle.
    auto w = prewedges_from_sets({0.0}, {kPi}, 1e-2);
    REQUIRE(w.size() == 2);
    CHECK(std::fabs(circ_dist(w[0].midpoint.angle, w[1].midpoint.angle) -
                    kPi) < 1e-12);
    // Two tied directions to p: three pre-wedges is impossible (alternation);
    // expect exactly two arcs between consecutive p/q directions.
    auto w2 = prewedges_from_sets({0.5, 2.5}, {4.0}, 1e-2);
    CHECK(w2.size() == 2);
    for (const PreWedge& pw : w2) {
        double gap_p = circ_dist(pw.midpoint.angle, pw.endpoint_p.angle);
        double gap_q = circ_dist(pw.midpoint.angle, pw.endpoint_q.angle);
        CHECK(std::fabs(gap_p - gap_q) < 1e-12);
    }
}

TEST_CASE("seed point lies on the zero set midway between the sources") {
    Surface s = unit_sphere();
    ChartPoint p{ChartId::Body, 0.0, 0.0}, q{ChartId::Body, 0.0, 1.0};
    DistanceField fp(s, p, fast_params());
    DistanceField fq(s, q, fast_params());
    MediatrixParams mp = tracer_params();
    ChartPoint z = seed_point(fp, fq, mp);
    CHECK(std::fabs(fp.query(z).distance - fq.query(z).distance) < mp.tol_f);
}

TEST_CASE("sphere mediatrix is the bisecting great circle") {
    Surface s = unit_sphere();
    ChartPoint p{ChartId::Body, 0.0, 0.0}, q{ChartId::Body, 0.0, 1.0};
    DistanceField fp(s, p, fast_params());
    DistanceField fq(s, q, fast_params());
    MediatrixCurve curve = trace_mediatrix(fp, fq, tracer_params());
    CHECK(curve.closed);
    Vec3 n = s.embed(p) - s.embed(q);
    n = n * (1.0 / n.norm());
    double length = 0.0, worst = 0.0, max_def = 0.0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const MediatrixPoint& a = curve.points[i];
        const MediatrixPoint& b =
            curve.points[(i + 1) % curve.points.size()];
        length += (s.embed(a.position) - s.embed(b.position)).norm();
        worst = std::max(
            worst, oracles::sphere_circle_distance(s.embed(a.position), n));
        max_def = std::max(max_def, a.deficiency);
        CHECK(a.residual <= tracer_params().tol_f);
    }
    CHECK(worst < 1e-3);
    CHECK(std::fabs(length - kTwoPi) < 1e-2);
    CHECK(max_def < 5e-3);
}

TEST_CASE("projection moves no farther than the distance-gap bound") {
    Surface s = unit_sphere();
    ChartPoint p{ChartId::Body, 0.0, 0.0}, q{ChartId::Body, 0.0, 1.0};
    DistanceField fp(s, p, fast_params());
    DistanceField fq(s, q, fast_params());
    MediatrixParams mp = tracer_params();
    Rng rng(41);
    for (int k = 0; k < 25; ++k) {
        // Perturb a point near the zero set and project back.
        double phi0 = rng.uniform() < 0.5 ? 0.5 : 0.5 + kPi;
        ChartPoint z{ChartId::Body, rng.uniform(-0.4, 0.4),
                     wrap_angle(phi0 + rng.uniform(-0.05, 0.05))};
        DistanceResult rp = fp.query(z), rq = fq.query(z);
        double fval = std::fabs(rq.distance - rp.distance);
        if (fval > 0.1) continue;
        double beta = direction_separation(rp, rq);
        if (beta < mp.beta_min) continue;
        ProjectionResult pr = project_to_mediatrix(fp, fq, z, mp.beta_min, mp,
                                                   &rp.launches, &rq.launches);
        CHECK(pr.moved <=
              fval / (1.0 - std::cos(pr.beta_observed)) + mp.tol_f + 1e-12);
        CHECK(std::fabs(pr.to_q.distance - pr.to_p.distance) <= mp.tol_f);
    }
}

TEST_CASE("wedge containment holds along the traced sphere mediatrix") {
    Surface s = unit_sphere();
    DistanceField fp(s, {ChartId::Body, 0.0, 0.0}, fast_params());
    DistanceField fq(s, {ChartId::Body, 0.0, 1.0}, fast_params());
    MediatrixParams mp = tracer_params();
    MediatrixCurve curve = trace_mediatrix(fp, fq, mp);
    for (int i = 0; i < (int)curve.points.size(); i += 40)
        CHECK(wedge_containment_check(fp, fq, curve, i, mp.step, mp));
}

TEST_CASE("curve serialization is well formed") {
    Surface s = unit_sphere();
    DistanceField fp(s, {ChartId::Body, 0.0, 0.0}, fast_params());
    DistanceField fq(s, {ChartId::Body, 0.0, 1.0}, fast_params());
    MediatrixCurve curve = trace_mediatrix(fp, fq, tracer_params());
    nlohmann::ordered_json j = curve_to_json(s, curve);
    CHECK(j.at("closed").get<bool>());
    CHECK(j.at("points").size() == curve.points.size());
    std::ostringstream os;
    write_curve_csv(os, s, curve);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "index,chart,u,v,x,y,z,residual,beta,deficiency,branch");
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == curve.points.size());
}
