#pragma once

#include <cmath>

#include "chromalint/common.hpp"

namespace chromalint {

// Light-source color as a direction in linear sensor RGB. Stored
// L2-normalized; components are nonnegative and not all zero.
class Illuminant {
public:
    Illuminant() : rgb_{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)} {}

    explicit Illuminant(const Rgb& v) {
        if (v.r < 0.0 || v.g < 0.0 || v.b < 0.0)
            throw DataError("illuminant components must be nonnegative");
        double n = norm(v);
        if (!(n > 0.0)) throw DataError("illuminant must not be the zero vector");
        rgb_ = {v.r / n, v.g / n, v.b / n};
    }

    Illuminant(double r, double g, double b) : Illuminant(Rgb{r, g, b}) {}

    const Rgb& rgb() const { return rgb_; }
    double r() const { return rgb_.r; }
    double g() const { return rgb_.g; }
    double b() const { return rgb_.b; }

private:
    Rgb rgb_;
};

inline RbPoint rb_chromaticity(const Rgb& v) {
    double s = v.r + v.g + v.b;
    if (!(s > 0.0)) throw DataError("rb chromaticity undefined for the zero vector");
    return {v.r / s, v.b / s};
}

inline RbPoint rb_chromaticity(const Illuminant& e) { return rb_chromaticity(e.rgb()); }

}  // namespace chromalint
