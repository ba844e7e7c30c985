#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace medtrace {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec2 {
    double x = 0.0, y = 0.0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(Vec3 o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

// 2x2 symmetric positive definite matrix (a metric tensor in chart coordinates).
struct Sym2 {
    double uu = 1.0, uv = 0.0, vv = 1.0;
    double det() const { return uu * vv - uv * uv; }
    double inner(Vec2 a, Vec2 b) const {
        return uu * a.x * b.x + uv * (a.x * b.y + a.y * b.x) + vv * a.y * b.y;
    }
    double norm(Vec2 a) const { return std::sqrt(inner(a, a)); }
};

struct Mat2 {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;  // [a b; c d]
    Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        double dt = det();
        return {d / dt, -b / dt, -c / dt, a / dt};
    }
};

// Christoffel symbols, symmetric in the lower indices.
struct Christoffel {
    double u_uu = 0, u_uv = 0, u_vv = 0;
    double v_uu = 0, v_uv = 0, v_vv = 0;
};

// ---- angles --------------------------------------------------------------

inline double wrap_angle(double a) {  // into [0, 2*pi)
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    if (a >= kTwoPi) a -= kTwoPi;
    return a;
}

inline double wrap_pi(double a) {  // into [-pi, pi)
    a = std::fmod(a + kPi, kTwoPi);
    if (a < 0) a += kTwoPi;
    return a - kPi;
}

// Arc distance on the circle, in [0, pi].
inline double circ_dist(double a, double b) { return std::fabs(wrap_pi(a - b)); }

inline double circ_dist_to_set(double a, const std::vector<double>& set) {
    double best = kPi;
    for (double s : set) best = std::min(best, circ_dist(a, s));
    return best;
}

// Counterclockwise gap from a to b, in [0, 2*pi).
inline double ccw_gap(double a, double b) { return wrap_angle(b - a); }

// ---- errors --------------------------------------------------------------

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CoverageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SeparationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ProjectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- quadrature ----------------------------------------------------------

// 16-point Gauss-Legendre on [a, b].
template <typename F>
double gauss_legendre16(F&& f, double a, double b) {
    static const double xs[8] = {
        0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
        0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
        0.9445750230732326, 0.9894009349916499};
    static const double ws[8] = {
        0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
        0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
        0.0622535239386479, 0.0271524594117541};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
        s += ws[i] * (f(mid + half * xs[i]) + f(mid - half * xs[i]));
    }
    return s * half;
}

// ---- deterministic RNG ---------------------------------------------------

// Thin wrapper producing platform-independent doubles from a 64-bit PRNG
// (splitmix64). Distribution classes from <random> are implementation
// defined, which would break the byte-identical output contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// ---- parallel helper -----------------------------------------------------

int worker_count();  // from MEDTRACE_WORKERS, default 1

// Runs f(i) for i in [0, n). Results must be written to preallocated slots;
// iteration order must not matter.
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace medtrace
