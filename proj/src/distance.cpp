#include "medtrace/distance.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace medtrace {

namespace {

struct Candidate {
    double launch = 0.0;
    double length = 0.0;
    bool from_hint = false;
};

struct Accepted {
    double launch = 0.0;
    double length = 0.0;
    double arrival = 0.0;  // direction angle at the query point, toward source
};

}  // namespace

DistanceField::DistanceField(const Surface& s, const ChartPoint& source,
                             const DistanceParams& params)
    : s_(s), source_(s.normalized(source)), params_(params) {
    s.require_contains(source);
    if (params_.n_fan < 256)
        throw CoverageError(
            "fan too sparse for the coverage radius (need n_fan >= 256)");
    if (params_.max_length <= 0.0)
        params_.max_length = 1.05 * s.diameter_estimate();
    if (params_.max_length < s.diameter_estimate() - 1e-9)
        throw ConfigError("max_length below the surface diameter estimate");
    if (!(params_.step > 0.0)) throw ConfigError("field step must be positive");
    if (params_.refine_step <= 0.0)
        params_.refine_step = std::min(4.0 * params_.step, 2e-2);
    h_cover_ = 4.0 * kPi / params_.n_fan;

    int stride = std::max(1, (int)std::floor(h_cover_ / params_.step));
    store_step_ = stride * params_.step;
    // Harvest radius: covers the along-ray sample spacing and the worst-case
    // transverse spread of adjacent fan rays.
    cell_size_ = std::max({4.0 * store_step_, 2.0 * h_cover_,
                           params_.max_length * kTwoPi / params_.n_fan});

    int n_samples = (int)std::floor(params_.max_length / store_step_);
    std::vector<std::vector<Sample>> per_ray(params_.n_fan);
    parallel_for(params_.n_fan, [&](int i) {
        double theta = kTwoPi * i / params_.n_fan;
        GeodesicState st{source_, direction_to_velocity(s_, source_, {theta}),
                         0.0};
        std::vector<Sample>& out = per_ray[i];
        out.reserve(n_samples);
        for (int k = 1; k <= n_samples; ++k) {
            st = flow(s_, st, store_step_, params_.step);
            Vec3 e = s_.embed(st.position);
            out.push_back({(float)e.x, (float)e.y, (float)e.z,
                           (std::uint32_t)i, (std::uint32_t)k});
        }
    });
    std::size_t total = 0;
    for (auto& v : per_ray) total += v.size();
    samples_.reserve(total);
    for (auto& v : per_ray) {
        for (const Sample& sm : v) {
            std::uint32_t idx = (std::uint32_t)samples_.size();
            samples_.push_back(sm);
            cells_[cell_key(sm.x, sm.y, sm.z)].push_back(idx);
        }
    }
}

std::uint64_t DistanceField::cell_key(double x, double y, double z) const {
    auto q = [&](double c) {
        return (std::uint64_t)((std::int64_t)std::floor(c / cell_size_) +
                               (1 << 20)) &
               0x1fffff;
    };
    return (q(x) << 42) | (q(y) << 21) | q(z);
}

void DistanceField::harvest(const Vec3& x3, std::vector<LaunchData>& out) const {
    double r = cell_size_;
    double r2 = r * r;
    // Per-ray runs of consecutive samples inside the ball; one candidate per
    // run, at the closest sample.
    struct Hit {
        std::uint32_t ray, index;
        float d2;
    };
    std::vector<Hit> hits;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz) {
                auto it = cells_.find(cell_key(x3.x + dx * cell_size_,
                                               x3.y + dy * cell_size_,
                                               x3.z + dz * cell_size_));
                if (it == cells_.end()) continue;
                for (std::uint32_t idx : it->second) {
                    const Sample& sm = samples_[idx];
                    double ddx = sm.x - x3.x, ddy = sm.y - x3.y,
                           ddz = sm.z - x3.z;
                    double d2 = ddx * ddx + ddy * ddy + ddz * ddz;
                    if (d2 <= r2)
                        hits.push_back({sm.ray, sm.index, (float)d2});
                }
            }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        return a.ray != b.ray ? a.ray < b.ray : a.index < b.index;
    });
    for (std::size_t i = 0; i < hits.size();) {
        std::size_t j = i;
        std::size_t best = i;
        while (j + 1 < hits.size() && hits[j + 1].ray == hits[i].ray &&
               hits[j + 1].index <= hits[j].index + 3) {
            ++j;
            if (hits[j].d2 < hits[best].d2) best = j;
        }
        out.push_back({kTwoPi * hits[best].ray / params_.n_fan,
                       hits[best].index * store_step_});
        i = j + 1;
    }
}

bool DistanceField::near_any_sample(const Vec3& x3, double radius) const {
    double r2 = radius * radius;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dz = -1; dz <= 1; ++dz) {
                auto it = cells_.find(cell_key(x3.x + dx * cell_size_,
                                               x3.y + dy * cell_size_,
                                               x3.z + dz * cell_size_));
                if (it == cells_.end()) continue;
                for (std::uint32_t idx : it->second) {
                    const Sample& sm = samples_[idx];
                    double ddx = sm.x - x3.x, ddy = sm.y - x3.y,
                           ddz = sm.z - x3.z;
                    if (ddx * ddx + ddy * ddy + ddz * ddz <= r2) return true;
                }
            }
    return false;
}

DistanceResult DistanceField::query(const ChartPoint& x,
                                    const std::vector<LaunchData>* hints,
                                    double accept_window) const {
    s_.require_contains(x);
    Vec3 x3 = s_.embed(x);
    double chord = (x3 - s_.embed(source_)).norm();
    if (chord < 1e-9) {
        DistanceResult r;
        r.distance = 0.0;
        r.degenerate = true;
        return r;
    }

    std::vector<Accepted> accepted;
    double min_len = 1e300;
    auto try_candidate = [&](double launch, double length) -> bool {
        auto r = refine_shot(s_, source_, launch, length, x3,
                             params_.refine_step, 1e-10, 0.25 * chord,
                             1.3 * params_.max_length);
        if (!r || r->miss > params_.tol_hit) return false;
        // Arrival direction at x: the reversed arriving velocity, expressed in
        // x's chart.
        Vec2 w{-r->terminal.velocity.x, -r->terminal.velocity.y};
        ChartPoint at = r->terminal.position;
        if (at.chart != x.chart) {
            Mat2 J = s_.transition_jacobian(at, x.chart);
            w = J.apply(w);
        }
        double arrival = velocity_to_direction(s_, x, w).angle;
        accepted.push_back({r->theta, r->t, arrival});
        min_len = std::min(min_len, r->t);
        return true;
    };

    if (hints) {
        for (const LaunchData& h : *hints) try_candidate(h.launch_angle, h.length);
    }

    std::vector<LaunchData> cands;
    harvest(x3, cands);
    std::sort(cands.begin(), cands.end(),
              [](const LaunchData& a, const LaunchData& b) {
                  return a.length < b.length;
              });
    double slack = 2.0 * cell_size_;
    // Saturation detection before pruning: a cut point at x makes a large
    // fraction of the fan arrive at (near) minimal length.
    bool degenerate = false;
    if (!cands.empty()) {
        double lead = std::min(min_len, cands.front().length);
        int near_min = 0;
        for (const LaunchData& c : cands)
            if (c.length <= lead + slack) ++near_min;
        // Near the source the fan converges and saturates the harvest ball
        // geometrically; a genuine cut point cannot lie inside the
        // injectivity ball, so saturation there is not degeneracy.
        if (near_min > params_.n_fan / 4 &&
            lead + slack >= s_.injectivity_bound())
            degenerate = true;
    }

    int refined_budget = degenerate ? 16 : (int)cands.size();
    int used = 0;
    for (const LaunchData& c : cands) {
        if (used >= refined_budget) break;
        if (c.length >
            (1.0 + params_.rel_tol_min) * min_len + accept_window + slack)
            break;
        bool duplicate = false;
        for (const Accepted& a : accepted) {
            if (circ_dist(a.launch, c.launch_angle) <
                    1.5 * kTwoPi / params_.n_fan &&
                std::fabs(a.length - c.length) < slack) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        ++used;
        try_candidate(c.launch_angle, c.length);
    }

    if (accepted.empty()) {
        std::ostringstream os;
        os << "no candidate geodesic refined to a hit at (" << chart_name(x.chart)
           << ", " << x.u << ", " << x.v << "); " << cands.size()
           << " harvested candidates";
        throw SolverError(os.str());
    }

    // Keep global minimizers only, then cluster by arrival direction.
    std::vector<Accepted> mins;
    for (const Accepted& a : accepted)
        if (a.length <= (1.0 + params_.rel_tol_min) * min_len + accept_window)
            mins.push_back(a);
    std::sort(mins.begin(), mins.end(), [](const Accepted& a, const Accepted& b) {
        return a.arrival < b.arrival;
    });
    std::vector<std::vector<Accepted>> clusters;
    for (const Accepted& a : mins) {
        if (!clusters.empty() &&
            a.arrival - clusters.back().back().arrival < params_.cluster_gap) {
            clusters.back().push_back(a);
        } else {
            clusters.push_back({a});
        }
    }
    if (clusters.size() > 1) {
        // circular wrap merge
        double wrap = mins.front().arrival + kTwoPi - mins.back().arrival;
        if (wrap < params_.cluster_gap) {
            for (const Accepted& a : clusters.front()) clusters.back().push_back(a);
            clusters.erase(clusters.begin());
        }
    }

    DistanceResult result;
    result.distance = min_len;
    result.degenerate = degenerate;
    for (const auto& cl : clusters) {
        const Accepted* best = &cl.front();
        for (const Accepted& a : cl)
            if (a.length < best->length) best = &a;
        result.directions.push_back({wrap_angle(best->arrival)});
        result.launches.push_back({best->launch, best->length});
    }
    return result;
}

void DistanceField::check_coverage(int grid_resolution) const {
    auto check = [&](const ChartPoint& p) {
        Vec3 e = s_.embed(p);
        if ((e - s_.embed(source_)).norm() <= h_cover_) return;  // source itself
        if (!near_any_sample(e, h_cover_)) {
            std::ostringstream os;
            os << "uncovered point (" << chart_name(p.chart) << ", " << p.u
               << ", " << p.v << "): no fan sample within " << h_cover_;
            throw CoverageError(os.str());
        }
    };
    double du = (s_.body_u_max() - s_.body_u_min()) / grid_resolution;
    for (int i = 0; i <= grid_resolution; ++i)
        for (int j = 0; j < grid_resolution; ++j)
            check({ChartId::Body, s_.body_u_min() + i * du,
                   kTwoPi * j / grid_resolution});
    double rho_max = std::sqrt(s_.cap_w2_max());
    for (ChartId cap : {ChartId::NorthCap, ChartId::SouthCap})
        for (int i = 0; i <= grid_resolution; ++i)
            for (int j = 0; j < grid_resolution; ++j) {
                double rho = rho_max * i / grid_resolution;
                double a = kTwoPi * j / grid_resolution;
                check({cap, rho * std::cos(a), rho * std::sin(a)});
            }
}

void DistanceField::dump_candidates_csv(std::ostream& os,
                                        const ChartPoint& x) const {
    std::vector<LaunchData> cands;
    harvest(s_.embed(x), cands);
    os << "launch_angle,length\n" << std::setprecision(17);
    for (const LaunchData& c : cands)
        os << c.launch_angle << ',' << c.length << '\n';
}

DistanceField build_field(const Surface& s, const ChartPoint& p, int n_fan,
                          double max_length) {
    DistanceParams params;
    params.n_fan = n_fan;
    params.max_length = max_length;
    return DistanceField(s, p, params);
}

double f_pq(const DistanceField& field_p, const DistanceField& field_q,
            const ChartPoint& x) {
    return field_q.query(x).distance - field_p.query(x).distance;
}

double direction_separation(const DistanceResult& result_p,
                            const DistanceResult& result_q) {
    double best = kPi;
    for (const TangentDirection& a : result_p.directions)
        for (const TangentDirection& b : result_q.directions)
            best = std::min(best, circ_dist(a.angle, b.angle));
    return best;
}

}  // namespace medtrace
