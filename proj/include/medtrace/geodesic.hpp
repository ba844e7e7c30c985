#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "medtrace/surface.hpp"

namespace medtrace {

// Direction in the unit tangent circle at a base point, measured against the
// orthonormal frame e1 = d/du normalized, e2 = its positively oriented
// metric-orthogonal complement.
struct TangentDirection {
    double angle = 0.0;  // normalized to [0, 2*pi)
};

// Chart-coordinate components of the unit tangent vector with frame angle
// theta at x.
Vec2 direction_to_velocity(const Surface& s, const ChartPoint& x,
                           TangentDirection theta);
TangentDirection velocity_to_direction(const Surface& s, const ChartPoint& x,
                                       Vec2 v);

struct GeodesicState {
    ChartPoint position;
    Vec2 velocity;  // chart components, metric norm 1
    double arc_length = 0.0;
};

struct GeodesicTrace {
    ChartPoint initial_point;
    TangentDirection initial_direction;
    std::vector<GeodesicState> samples;  // arc-length grid, step h_sample
    double h_sample = 0.0;
    double terminal_length = 0.0;
    double max_renorm_correction = 0.0;  // largest |renorm factor - 1| applied
};

inline constexpr double kShootStep = 5e-3;  // integrator step for solvers

// Unit-speed geodesic from x in direction theta, classical fixed-step RK4 with
// velocity renormalization every 100 steps and hysteresis chart switching.
GeodesicTrace integrate_geodesic(const Surface& s, const ChartPoint& x,
                                 TangentDirection theta, double length,
                                 double step);

// Advances a state without recording samples (fast path for solvers). If
// renorm_log is given, the largest applied renormalization correction is
// accumulated into it.
GeodesicState flow(const Surface& s, GeodesicState state, double length,
                   double step, double* renorm_log = nullptr);

ChartPoint exp_map(const Surface& s, const ChartPoint& x, TangentDirection theta,
                   double t, double step = kShootStep);

struct PolarResult {
    TangentDirection direction;
    double distance = 0.0;
};

// Inverse exponential map inside the injectivity bound: finds (theta, d) with
// exp_map(center, theta, d) = z. Gauss-Newton shooting from a chart-based
// initial guess (or the caller's hint), with a coarse 64-ray scan fallback.
PolarResult polar_coordinates(const Surface& s, const ChartPoint& center,
                              const ChartPoint& z, double step = kShootStep,
                              const PolarResult* hint = nullptr);

// Two-point shooting refinement: Gauss-Newton on (launch angle, length) of the
// terminal miss to an embedded target. Returns the refined shot with its
// terminal state, or nullopt on divergence.
struct ShootResult {
    double theta = 0.0;      // launch angle at `from`
    double t = 0.0;          // arc length
    GeodesicState terminal;  // state at arc length t
    double miss = 0.0;       // embedded distance of terminal to target
};
std::optional<ShootResult> refine_shot(const Surface& s, const ChartPoint& from,
                                       double theta0, double t0,
                                       const Vec3& target, double step,
                                       double tol, double t_min, double t_max);

// Conserved angular momentum about the symmetry axis (r sin psi on the body
// chart); evaluated through the embedding so it is chart independent.
double clairaut_quantity(const Surface& s, const GeodesicState& state);

// Columns: arc_length, chart, u, v, x, y, z.
void write_trace_csv(std::ostream& os, const Surface& s,
                     const GeodesicTrace& trace);

}  // namespace medtrace
