#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chromalint/groundtruth.hpp"
#include "chromalint/illuminant.hpp"
#include "chromalint/image.hpp"

namespace chromalint::synthetic {

// 400-700 nm sampled every 10 nm, rectangle-rule integration.
constexpr int kBands = 31;
constexpr double kLambdaMin = 400.0;
constexpr double kLambdaStep = 10.0;
using Spd = std::array<double, kBands>;

inline double wavelength(int band) { return kLambdaMin + kLambdaStep * band; }

// Planck's-law spectral radiance at the 31 wavelengths, normalized to unit
// maximum. Valid for 1000 K <= cct <= 20000 K.
Spd planckian_spd(double cct_kelvin);

struct CameraModel {
    std::array<Spd, 3> sensitivities{};  // rho_c(lambda), rows R,G,B
    std::array<double, 3> black_level{129.0, 129.0, 129.0};
    std::array<double, 3> saturation_level{3692.0, 3692.0, 3692.0};
    double gain = 40.0;
    std::string camera_id;

    void validate() const;
};

// Gaussian sensitivity bumps; real curves are proprietary and Gaussians
// suffice to produce the spectral variability that matters here.
CameraModel virtual_camera(const std::string& camera_id, double peak_r, double peak_g,
                           double peak_b, double sigma_nm = 30.0);

// Stock pair used by the benchmark generator. Camera B's peaks each differ
// from camera A's by 20 nm (R +20, G -20, B +20); a uniform shift of all
// three peaks is nearly equivalent to re-indexing the illuminant temperature
// and would barely separate the cameras in chromaticity.
CameraModel default_camera_a();
CameraModel default_camera_b();

// Per-scene-element spectral description plus the pixel layout. A second SPD
// supports the two-region scenes used by the uniform-illumination check; all
// other scenes leave it unset.
struct SpectralScene {
    int width = 0;
    int height = 0;
    Spd illuminant_spd{};
    std::optional<Spd> secondary_spd;
    std::vector<Spd> reflectances;             // per element, values in [0,1]
    std::vector<std::uint8_t> illum_of_element;  // 0 = primary, 1 = secondary
    std::vector<std::uint16_t> element_of;     // per pixel, row-major
    std::vector<Quad> chart_quads;             // achromatic patches, bright to dark

    void validate() const;
};

// Observed illuminant for an SPD through a camera (the uniform-illuminant
// integral, discretized): e_c = sum_lambda I * rho_c * dlambda, normalized.
Illuminant observed_illuminant(const Spd& spd, const CameraModel& cam);
Rgb observed_illuminant_raw(const Spd& spd, const CameraModel& cam);

struct RenderResult {
    LinearImage image;
    Illuminant true_illuminant;  // from the primary SPD
};

// Discretized image formation: f_c = gain * sum I*R*rho_c*dlambda per pixel,
// clipped against the available range. With inject_black the per-channel
// pedestal is added afterwards and the image is marked unsubtracted;
// otherwise black_level is recorded as zero and the image as subtracted.
// Optional Gaussian noise is applied to the signal before clipping/injection.
RenderResult render(const SpectralScene& scene, const CameraModel& cam, bool inject_black,
                    double noise_sigma = 0.0, std::uint64_t noise_seed = 0);

// Achromatic chart reflectance levels, brightest to darkest.
constexpr std::array<double, 6> kChartLevels{0.9, 0.6, 0.35, 0.2, 0.09, 0.03};

struct BenchmarkConfig {
    int n_images = 10;
    int n_cameras = 1;  // 1 or 2; with 2 the first half uses camera A
    double cct_min = 2500.0;
    double cct_max = 7500.0;
    std::uint64_t seed = 0;
    int width = 64;
    int height = 48;
    bool inject_black = false;
    double noise_sigma = 0.0;
};

struct SyntheticImage {
    std::string id;
    SpectralScene scene;
    std::string camera_id;
    std::uint64_t noise_seed = 0;
};

struct Dataset {
    BenchmarkConfig config;
    std::vector<CameraModel> cameras;
    std::vector<SyntheticImage> images;
    GroundTruthTable truth;  // exact illuminants from the renderer

    const CameraModel& camera_for(const SyntheticImage& img) const;
    PatchAnnotation annotation_for(const SyntheticImage& img) const;
};

// Seeded benchmark generator: random smooth reflectances, Planckian
// illuminants, an embedded 6-patch achromatic chart row. Image i draws its
// randomness from seed xor i, so images are independent of render order.
Dataset make_benchmark(const BenchmarkConfig& config);

// Renders every image and writes PPMs, sidecars, annotations, the exact
// ground-truth CSV and a manifest.json into `dir`.
void write_dataset(const Dataset& ds, const std::filesystem::path& dir, int jobs = 1);

struct DatasetManifest {
    std::vector<CameraModel> cameras;
    struct Entry {
        std::string id;
        std::string camera_id;
        std::filesystem::path image;
    };
    std::vector<Entry> images;
    std::filesystem::path annotations;
    std::filesystem::path ground_truth;
};

DatasetManifest load_manifest(const std::filesystem::path& path);

// Least-norm SPD whose observed color through `cam` points at `target`,
// constructed as base_spd plus a combination of the camera's own sensitivity
// curves (negative dips clamped to zero). Verify the achieved direction with
// observed_illuminant when exactness matters.
Spd spd_for_target(const Spd& base_spd, const CameraModel& cam, const Rgb& target);

// Two flat "walls" split at x = width/2, left under the primary SPD and right
// under the secondary; region quads for the uniform-illumination check are
// the two wall rectangles inset by one pixel.
SpectralScene make_two_region_scene(int width, int height, const Spd& primary,
                                    const Spd& secondary, double wall_reflectance = 0.8);
std::vector<Quad> two_region_quads(int width, int height);

}  // namespace chromalint::synthetic
