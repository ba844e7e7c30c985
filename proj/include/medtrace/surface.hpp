#pragma once

#include <string>
#include <vector>

#include "medtrace/geom.hpp"

namespace medtrace {

enum class ChartId { Body, NorthCap, SouthCap };

const char* chart_name(ChartId id);
ChartId chart_from_name(const std::string& name);

// Coordinates in a chart. Body chart: (u, v) = (meridian coordinate, angle
// around the axis), v periodic. Cap charts: (u, v) = Cartesian coordinates of
// the graph chart over the tangent plane at the pole.
struct ChartPoint {
    ChartId chart = ChartId::Body;
    double u = 0.0, v = 0.0;
};

struct BumpSpec {
    double center_z = 0.0;    // meridian coordinate of the bump center
    double center_phi = 0.0;  // longitude of the bump center
    double radius = 0.0;      // support radius, chart metric ball
    double height = 0.0;      // normal displacement at the center
};

struct SurfaceSpec {
    enum class Kind { RoundSphere, Spheroid, Cigar, BumpedCigar };
    Kind kind = Kind::RoundSphere;
    double radius = 1.0;                // RoundSphere
    double a = 1.0, c = 1.0;            // Spheroid semi-axes (equator, polar)
    double cylinder_half_height = 1.0;  // Cigar family
    double smoothing_width = 0.2;       // Cigar family
    std::vector<BumpSpec> bumps;        // BumpedCigar
    double injectivity_bound = 0.0;     // 0 selects the per-family default
};

// Profile curve sample: radius r and axial height h with derivatives in the
// body chart coordinate.
struct ProfilePoint {
    double r = 0, dr = 0, ddr = 0;
    double h = 0, dh = 0, ddh = 0;
};

class Surface {
  public:
    explicit Surface(SurfaceSpec spec);

    const SurfaceSpec& spec() const { return spec_; }
    double injectivity_bound() const { return injectivity_bound_; }
    double diameter_estimate() const { return diameter_; }
    double meridian_length() const { return meridian_length_; }

    bool contains(const ChartPoint& x) const;
    void require_contains(const ChartPoint& x) const;  // DomainError otherwise
    ChartPoint normalized(ChartPoint x) const;         // wraps the body angle

    Sym2 metric_at(const ChartPoint& x) const;
    Christoffel christoffel_at(const ChartPoint& x) const;
    double gaussian_curvature_at(const ChartPoint& x) const;

    Vec3 embed(const ChartPoint& x) const;
    // Columns are d(embed)/du and d(embed)/dv.
    void embed_jacobian(const ChartPoint& x, Vec3& fu, Vec3& fv) const;

    ChartPoint transition(const ChartPoint& x, ChartId target) const;
    Mat2 transition_jacobian(const ChartPoint& x, ChartId target) const;

    double total_abs_curvature(int resolution) const;

    ProfilePoint profile(double u) const;  // body chart profile

    // Arc-like distance to the nearest pole, in cap-scale units; used for
    // chart domains and switch hysteresis.
    double colat_north(const ChartPoint& x) const;
    double colat_south(const ChartPoint& x) const;

    ChartPoint north_pole() const { return {ChartId::NorthCap, 0.0, 0.0}; }
    ChartPoint south_pole() const { return {ChartId::SouthCap, 0.0, 0.0}; }

    // Chart-domain constants (colat units).
    static constexpr double kBodyExclusion = 0.6;
    static constexpr double kCapExtent = 0.8;
    static constexpr double kSwitchToCap = 0.65;
    static constexpr double kSwitchToBody = 0.75;
    static constexpr double kQuadSplit = 0.7;

    double body_u_min() const { return body_u_min_; }
    double body_u_max() const { return body_u_max_; }
    double cap_w2_max() const { return cap_w2_max_; }
    bool is_revolution_at(const ChartPoint& x) const;  // false inside a bump

    std::string describe() const;

  private:
    using Kind = SurfaceSpec::Kind;

    // Cap graph height H(w), w = u^2 + v^2, with derivatives dH/dw, d2H/dw2.
    void cap_height(bool north, double w, double& H, double& dH,
                    double& ddH) const;
    double u_of_colat(bool north, double colat) const;  // body coordinate
    double colat_of_cap_radius(double rho) const;
    double profile_radius_of_colat(double colat) const;

    // Bump displacement and derivatives in the (u, phi) body chart.
    bool bump_eval(double u, double phi, double& b, double& bu, double& bp,
                   double& buu, double& bup, double& bpp) const;

    Sym2 metric_body_bumped(double u, double phi) const;
    Christoffel christoffel_body_bumped(double u, double phi) const;
    double curvature_body_bumped(double u, double phi) const;

    SurfaceSpec spec_;
    double injectivity_bound_ = 0.0;
    double diameter_ = 0.0;
    double meridian_length_ = 0.0;
    double body_u_min_ = 0.0, body_u_max_ = 0.0;
    double cap_w2_max_ = 0.0;
    double pole_u_ = 0.0;     // |u| of the pole (sphere/cigar kinds)
    double cap_scale_ = 1.0;  // R, Rc, or a

    // Cigar family geometry (solved at construction).
    double cig_flat_end_ = 0.0;   // H - w
    double cig_blend_end_ = 0.0;  // H + w
    double cig_kappa_ = 1.0;      // cap arc curvature
    double cig_Rc_ = 1.0;         // cap arc radius (1/kappa)
    double cig_tau0_ = 0.0;       // profile tangent angle at the blend end
    double cig_r1_ = 1.0;         // profile radius at the blend end
    double cig_h1_ = 0.0;         // profile height at the blend end
    double cig_zc_ = 0.0;         // axial center of the north cap sphere
};

}  // namespace medtrace
