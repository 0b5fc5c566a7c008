#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chromalint/illuminant.hpp"
#include "chromalint/image.hpp"

namespace chromalint {

enum class EstimatorKind { gray_world, white_patch, shades_of_gray, gray_edge };

// One Minkowski-norm framework covers the whole family:
//   e_c = ( mean_x |d_c(x)|^p )^(1/p)
// with d the channel value (order 0) or the Gaussian-derivative magnitude of
// order n at scale sigma. p = infinity is an exact per-channel maximum.
struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::gray_world;
    double p = 1.0;  // Minkowski exponent >= 1, or infinity
    int derivative_order = 0;
    double sigma = 0.0;  // Gaussian scale in pixels

    static EstimatorSpec gray_world() { return {EstimatorKind::gray_world, 1.0, 0, 0.0}; }
    static EstimatorSpec white_patch() {
        return {EstimatorKind::white_patch, std::numeric_limits<double>::infinity(), 0, 0.0};
    }
    static EstimatorSpec shades_of_gray(double p = 6.0) {
        return {EstimatorKind::shades_of_gray, p, 0, 0.0};
    }
    static EstimatorSpec gray_edge(int order = 1, double p = 6.0, double sigma = 6.0) {
        return {EstimatorKind::gray_edge, p, order, sigma};
    }

    // CLI form: "gray-world", "white-patch", "shades-of-gray:p=6",
    // "gray-edge:n=1,p=1,sigma=6".
    static EstimatorSpec parse(std::string_view text);
    std::string to_string() const;

    void validate() const;
};

// Pooled illuminant estimate over unmasked pixels. Requires a black-subtracted
// image; the unsafe override exists only to reproduce the wrong pipeline
// deliberately.
Illuminant estimate(const LinearImage& img, const EstimatorSpec& spec,
                    const SaturationMask* mask = nullptr, bool allow_unsubtracted = false);

// Single-channel grid for convolution work.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
};

// order 0: Gaussian blur. order n >= 1: gradient-magnitude grid
// sqrt((d^n/dx^n)^2 + (d^n/dy^n)^2) of the blurred channel. Kernels truncated
// at ceil(3*sigma), reflect padding, normalized to be exact on polynomials of
// matching degree.
Plane gaussian_derivative(const Plane& channel, int order, double sigma);

}  // namespace chromalint
