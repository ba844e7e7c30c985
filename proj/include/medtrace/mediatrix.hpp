#pragma once

#include "medtrace/distance.hpp"

#include "json.hpp"

namespace medtrace {

struct MediatrixParams {
    double step = 0.01;
    int max_points = 2000;
    double tol_f = 1e-6;
    double beta_min = 1e-2;
    double deficiency_threshold = 5e-2;  // rad; below is numerical noise
    double wedge_slack = 2e-2;           // rad; wedge containment slack
};

// Closed arc of the unit tangent circle between a minimizing direction to p
// and one to q, with no other minimizing direction inside.
struct PreWedge {
    TangentDirection endpoint_p;
    TangentDirection endpoint_q;
    TangentDirection midpoint;  // arc point equidistant from the endpoints
    double opening = 0.0;       // arc length of the wedge, in (0, 2*pi)
};

struct MediatrixPoint {
    ChartPoint position;
    std::vector<PreWedge> prewedges;
    double beta = 0.0;        // direction separation of the two sets
    double deficiency = 0.0;  // |pi - |mid1 - mid2|| for exactly 2 pre-wedges
    double residual = 0.0;    // |f_pq| at position
    bool branch = false;      // more than 2 pre-wedges
    DistanceResult to_p, to_q;
};

struct MediatrixCurve {
    std::vector<MediatrixPoint> points;  // cyclic order
    double step = 0.0;
    bool closed = false;
    std::vector<int> branch_points;
};

// Pre-wedge construction from explicit direction sets (angles in the tangent
// circle); exposed for synthetic-set tests.
std::vector<PreWedge> prewedges_from_sets(const std::vector<double>& dirs_p,
                                          const std::vector<double>& dirs_q,
                                          double beta_min);

MediatrixPoint prewedges_at(const DistanceField& field_p,
                            const DistanceField& field_q, const ChartPoint& x,
                            const MediatrixParams& params,
                            const std::vector<LaunchData>* hints_p = nullptr,
                            const std::vector<LaunchData>* hints_q = nullptr);

// Lemma-style projection: march along a minimizing geodesic toward the farther
// of p, q and localize the sign change of f_pq. Returns (z*, moved); moved is
// bounded by |f_pq(z)| / (1 - cos(beta_observed)) + tol_f, where beta_observed
// is the smallest direction separation sampled along the march. Throws
// SeparationError if the separation drops below beta_floor.
struct ProjectionResult {
    ChartPoint projected;
    double moved = 0.0;
    double beta_observed = 0.0;  // infimum of the separation along the march
    DistanceResult to_p, to_q;   // at the projected point
};
ProjectionResult project_to_mediatrix(const DistanceField& field_p,
                                      const DistanceField& field_q,
                                      const ChartPoint& z, double beta_floor,
                                      const MediatrixParams& params,
                                      const std::vector<LaunchData>* hints_p = nullptr,
                                      const std::vector<LaunchData>* hints_q = nullptr);

// A point with |f_pq| <= tol_f, found by bisection along a minimizing geodesic
// from p to q.
ChartPoint seed_point(const DistanceField& field_p, const DistanceField& field_q,
                      const MediatrixParams& params);

// Predictor-corrector tracing of the full mediatrix: predictor steps along the
// forward pre-wedge midpoint, corrector projects back onto the zero set.
MediatrixCurve trace_mediatrix(const DistanceField& field_p,
                               const DistanceField& field_q,
                               const MediatrixParams& params);

// True iff every curve point within surface distance rho of the base point has
// polar direction (seen from the base) inside some pre-wedge arc, within
// wedge_slack.
bool wedge_containment_check(const DistanceField& field_p,
                             const DistanceField& field_q,
                             const MediatrixCurve& curve, int x_index,
                             double rho, const MediatrixParams& params);

nlohmann::ordered_json curve_to_json(const Surface& s,
                                     const MediatrixCurve& curve);
void write_curve_csv(std::ostream& os, const Surface& s,
                     const MediatrixCurve& curve);

}  // namespace medtrace
