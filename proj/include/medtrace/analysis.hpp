#pragma once

#include "medtrace/mediatrix.hpp"

namespace medtrace {

// Derivative of t -> d(exp_x(t, theta), p) at t = 0+; equals the negative
// cosine of the circle distance from theta to the minimizing direction set.
double directional_derivative(const DistanceField& field_p, const ChartPoint& x,
                              TangentDirection theta);
double directional_derivative(const DistanceResult& at_x,
                              TangentDirection theta);

struct EtaSample {
    double t = 0.0;
    double eta = 0.0;  // |f_pq(exp_x(midpoint, t))| / t
};
struct EtaReport {
    std::vector<EtaSample> samples;  // t decreasing
    double loglog_slope = 0.0;       // least-squares slope of log eta vs log t
};
// The bisector-ray defect: the mediatrix deviates from the midpoint geodesic
// ray by eta(t) * t with eta -> 0.
EtaReport bisector_ray_residual(const DistanceField& field_p,
                                const DistanceField& field_q,
                                const MediatrixPoint& x, int prewedge_index,
                                const std::vector<double>& t_grid);

struct LinearizabilitySample {
    double t = 0.0;    // measured surface distance from the base point
    double gap = 0.0;  // |theta(t) - theta_hat|
    int side = 0;      // which pre-wedge midpoint the sample tracks
};
struct LinearizabilityReport {
    int base_index = -1;
    std::vector<LinearizabilitySample> samples;  // t decreasing per side
    bool converged = false;
    double terminal_gap = 0.0;  // max over sides at the smallest t
};

inline constexpr double kLinTol = 2e-2;        // rad, terminal gap bound
inline constexpr double kLinNoiseFloor = 2e-3;  // rad, window comparison clamp

// Radial linearizability of both spokes at a traced point: the polar direction
// theta(t) of the curve approaches the pre-wedge midpoint as t -> 0. Smooth
// points are sampled at existing trace samples; for t below the trace step the
// spoke is re-traced by projection sub-steps. The adversarial variant tests
// against the opposite midpoint and must not converge.
LinearizabilityReport radial_linearizability_check(
    const DistanceField& field_p, const DistanceField& field_q,
    const MediatrixCurve& curve, int x_index, const std::vector<double>& t_grid,
    const MediatrixParams& params, bool adversarial = false);

struct JordanWedgeReport {
    bool empty = true;
    double mu = 0.0;                  // opening angle at the base point
    double alpha = 0.0;               // angle between arrivals at the target
    double curvature_integral = 0.0;  // integral of K over the enclosed lens
    double residual = 0.0;            // |integral - (mu + alpha)|
};

inline constexpr double kGaussBonnetTol = 5e-3;

// Gauss-Bonnet on the lens bounded by two minimizing geodesics from the base
// point to the field source. The integral uses geodesic polar coordinates at
// the source with the Jacobi field integrated alongside each ray.
JordanWedgeReport jordan_wedge_report(const DistanceField& field,
                                      const ChartPoint& x,
                                      const DistanceResult& at_x);

struct DeficiencyBudget {
    std::vector<int> flagged;            // curve indices above threshold
    std::vector<double> deficiencies;    // parallel to flagged
    double sum = 0.0;
    double bound = 0.0;  // (total |K| + 2 pi) / 2
};

DeficiencyBudget deficiency_sum_bound(const Surface& s,
                                      const MediatrixCurve& curve,
                                      double deficiency_threshold,
                                      int quadrature_resolution = 192);

}  // namespace medtrace
