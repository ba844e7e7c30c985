#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <unordered_map>

#include "medtrace/geodesic.hpp"

namespace medtrace {

struct DistanceParams {
    int n_fan = 2048;
    double max_length = 0.0;  // 0 selects 1.05 * diameter estimate
    double step = kShootStep;
    double refine_step = 0.0;  // 0 selects min(4 * step, 2e-2)
    double rel_tol_min = 1e-4;
    double tol_hit = 1e-6;
    double cluster_gap = 1e-2;  // radians between distinct directions
};

// Diagnostic record of a minimizing geodesic: its launch angle at the source
// and its arc length. Also serves as a warm-start hint for nearby queries.
struct LaunchData {
    double launch_angle = 0.0;
    double length = 0.0;
};

struct DistanceResult {
    double distance = 0.0;
    std::vector<TangentDirection> directions;  // at the query point, toward p
    std::vector<LaunchData> launches;          // parallel to directions
    bool degenerate = false;  // minimizers saturate the fan (cut point blowup)
};

// Fan of geodesics from a source point, with a spatial hash over the sampled
// wavefront for candidate harvesting. Immutable after construction.
class DistanceField {
  public:
    DistanceField(const Surface& s, const ChartPoint& source,
                  const DistanceParams& params);

    const Surface& surface() const { return s_; }
    const ChartPoint& source() const { return source_; }
    const DistanceParams& params() const { return params_; }
    double h_cover() const { return h_cover_; }

    // Distance and the set of minimizing directions at x. Hints, when given,
    // seed the refinement and allow pruning the harvested candidates.
    // accept_window widens the acceptance band to min + accept_window absolute
    // (used to expose near-minimizing branches when localizing corners).
    DistanceResult query(const ChartPoint& x,
                         const std::vector<LaunchData>* hints = nullptr,
                         double accept_window = 0.0) const;

    // Verifies that every point of a chart test grid lies within h_cover of a
    // fan sample; throws CoverageError naming the first uncovered point.
    void check_coverage(int grid_resolution) const;

    // Diagnostic dump of the harvested candidates for one query.
    void dump_candidates_csv(std::ostream& os, const ChartPoint& x) const;

  private:
    struct Sample {
        float x, y, z;
        std::uint32_t ray;
        std::uint32_t index;  // sample index along the ray (stride applied)
    };
    std::uint64_t cell_key(double x, double y, double z) const;
    void harvest(const Vec3& x3, std::vector<LaunchData>& out) const;
    bool near_any_sample(const Vec3& x3, double radius) const;

    const Surface& s_;
    ChartPoint source_;
    DistanceParams params_;
    double h_cover_ = 0.0;
    double store_step_ = 0.0;    // arc length between stored samples
    double cell_size_ = 0.0;     // spatial hash cell edge = harvest radius
    std::vector<Sample> samples_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

DistanceField build_field(const Surface& s, const ChartPoint& p, int n_fan,
                          double max_length);

inline DistanceResult distance_and_directions(const DistanceField& field,
                                              const ChartPoint& x) {
    return field.query(x);
}

// Signed mediatrix defining function d(x, q) - d(x, p).
double f_pq(const DistanceField& field_p, const DistanceField& field_q,
            const ChartPoint& x);

// Minimal circle arc-distance between the two direction sets.
double direction_separation(const DistanceResult& result_p,
                            const DistanceResult& result_q);

}  // namespace medtrace
