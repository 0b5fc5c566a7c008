#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "chromalint/common.hpp"

namespace chromalint {

// Linear raster straight off the sensor (or the synthetic renderer): row-major
// RGB, real-valued so raw counts and synthetic radiances share one container.
// `black_level` stays recorded after subtraction; `black_subtracted` says
// whether it is still present in the data.
struct LinearImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;  // width*height*3, interleaved RGB
    std::array<double, 3> black_level{0.0, 0.0, 0.0};
    std::array<double, 3> saturation_level{65535.0, 65535.0, 65535.0};
    std::string camera_id;
    bool black_subtracted = false;

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    double at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    double& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    Rgb pixel(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }

    // Throws DataError on any violated invariant.
    void validate() const;
};

struct SaturationMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> flags;  // 1 = clipped (some channel near saturation)

    bool at(int x, int y) const { return flags[static_cast<std::size_t>(y) * width + x] != 0; }
    std::size_t flagged_count() const;
};

// Binary PPM "P6" with maxval 65535, big-endian samples, read verbatim with
// no scaling. Metadata comes from the required sidecar `<path>.meta.json`.
LinearImage read_ppm16(const std::filesystem::path& path);

// Canonical header plus big-endian samples; values quantized round-half-up.
void write_ppm16(const LinearImage& img, const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& image_path);
void write_sidecar(const LinearImage& img, const std::filesystem::path& image_path);

// v -> max(v - black, 0) per channel; saturation drops by the black level and
// the subtraction is recorded. Refuses a second application.
LinearImage subtract_black(const LinearImage& img);

// Flags pixels with any channel >= (1 - margin) * saturation_level.
SaturationMask saturation_mask(const LinearImage& img, double margin = 0.02);

constexpr double kDefaultSaturationMargin = 0.02;

}  // namespace chromalint
