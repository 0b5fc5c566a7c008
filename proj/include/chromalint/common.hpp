#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chromalint {

// Bad invocation: unknown flags, conflicting options, malformed parameter
// strings. The CLI maps this to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data-level failure: malformed file, violated contract, missing input.
// The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimation / extraction requested on an image that still carries its
// black-level pedestal. Kept as a distinct type so callers can offer the
// explicit unsafe override without string-matching messages.
struct PipelineError : DataError {
    using DataError::DataError;
};

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;

    double operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
    double& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }

    Rgb operator+(const Rgb& o) const { return {r + o.r, g + o.g, b + o.b}; }
    Rgb operator-(const Rgb& o) const { return {r - o.r, g - o.g, b - o.b}; }
    Rgb operator*(double k) const { return {r * k, g * k, b * k}; }
};

inline double dot(const Rgb& a, const Rgb& b) { return a.r * b.r + a.g * b.g + a.b * b.b; }
inline double norm(const Rgb& a) { return std::sqrt(dot(a, a)); }

// rb chromaticity: r = R/(R+G+B), b = B/(R+G+B).
struct RbPoint {
    double r = 0.0, b = 0.0;
};

// Neumaier-compensated accumulator. Statistical pooling uses this so that
// results stay permutation-stable to within an ulp or two.
class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Shortest decimal representation that still parses back to the same double.
std::string format_double(double v);

// Convex quadrilateral in pixel coordinates. Vertices in ring order
// (either winding).
struct Quad {
    std::array<std::array<double, 2>, 4> pts{};

    std::array<double, 2> centroid() const;
    // Scale toward the centroid: inset 0 keeps the quad, 0.5 collapses halfway.
    Quad shrunk(double inset) const;
    bool contains(double x, double y) const;
    bool is_convex() const;
    // Vertices within [0,w] x [0,h].
    bool within_bounds(int width, int height) const;
};

inline Quad rect_quad(double x0, double y0, double x1, double y1) {
    return Quad{{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}};
}

// Runs fn(0..n-1) on up to `jobs` threads. Work items write only to their own
// index, so results are identical for any job count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace chromalint
