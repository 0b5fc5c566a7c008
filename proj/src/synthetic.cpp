#include "chromalint/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "chromalint/rng.hpp"

namespace chromalint::synthetic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 2020 SI exact values.
constexpr double kPlanck = 6.62607015e-34;
constexpr double kLightSpeed = 2.99792458e8;
constexpr double kBoltzmann = 1.380649e-23;

nlohmann::json camera_to_json(const CameraModel& cam) {
    nlohmann::json j;
    j["camera_id"] = cam.camera_id;
    j["black_level"] = cam.black_level;
    j["saturation_level"] = cam.saturation_level;
    j["gain"] = cam.gain;
    nlohmann::json sens = nlohmann::json::array();
    for (const auto& row : cam.sensitivities) sens.push_back(row);
    j["sensitivities"] = sens;
    return j;
}

CameraModel camera_from_json(const nlohmann::json& j) {
    CameraModel cam;
    cam.camera_id = j.at("camera_id").get<std::string>();
    for (int c = 0; c < 3; ++c) {
        cam.black_level[c] = j.at("black_level")[c].get<double>();
        cam.saturation_level[c] = j.at("saturation_level")[c].get<double>();
        for (int i = 0; i < kBands; ++i)
            cam.sensitivities[c][i] = j.at("sensitivities")[c][i].get<double>();
    }
    cam.gain = j.at("gain").get<double>();
    cam.validate();
    return cam;
}

}  // namespace

Spd planckian_spd(double cct_kelvin) {
    if (!(cct_kelvin >= 1000.0) || !(cct_kelvin <= 20000.0))
        throw DataError("correlated color temperature out of range [1000, 20000] K");
    Spd spd{};
    double peak = 0.0;
    for (int i = 0; i < kBands; ++i) {
        double lam = wavelength(i) * 1e-9;
        double radiance = (2.0 * kPlanck * kLightSpeed * kLightSpeed / std::pow(lam, 5)) /
                          std::expm1(kPlanck * kLightSpeed / (lam * kBoltzmann * cct_kelvin));
        spd[i] = radiance;
        peak = std::max(peak, radiance);
    }
    for (double& v : spd) v /= peak;
    return spd;
}

void CameraModel::validate() const {
    for (int c = 0; c < 3; ++c) {
        bool any = false;
        for (double v : sensitivities[c]) {
            if (v < 0.0) throw DataError("camera sensitivity must be nonnegative");
            if (v > 0.0) any = true;
        }
        if (!any) throw DataError("camera channel sensitivity is identically zero");
        if (black_level[c] < 0.0 || !(black_level[c] < saturation_level[c]))
            throw DataError("camera black level must be in [0, saturation_level)");
    }
    if (!(gain > 0.0)) throw DataError("camera gain must be positive");
}

CameraModel virtual_camera(const std::string& camera_id, double peak_r, double peak_g,
                           double peak_b, double sigma_nm) {
    CameraModel cam;
    cam.camera_id = camera_id;
    const double peaks[3] = {peak_r, peak_g, peak_b};
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < kBands; ++i) {
            double d = (wavelength(i) - peaks[c]) / sigma_nm;
            cam.sensitivities[c][i] = std::exp(-0.5 * d * d);
        }
    cam.validate();
    return cam;
}

CameraModel default_camera_a() { return virtual_camera("cam_a", 600.0, 550.0, 450.0); }
CameraModel default_camera_b() { return virtual_camera("cam_b", 620.0, 530.0, 470.0); }

void SpectralScene::validate() const {
    if (width <= 0 || height <= 0) throw DataError("scene dimensions must be positive");
    if (element_of.size() != static_cast<std::size_t>(width) * height)
        throw DataError("scene layout does not cover the image");
    if (reflectances.empty()) throw DataError("scene has no elements");
    if (illum_of_element.size() != reflectances.size())
        throw DataError("per-element illuminant assignment size mismatch");
    for (std::uint16_t e : element_of)
        if (e >= reflectances.size()) throw DataError("scene layout references unknown element");
    for (const auto& refl : reflectances)
        for (double v : refl)
            if (v < 0.0 || v > 1.0) throw DataError("reflectance outside [0,1]");
    for (double v : illuminant_spd)
        if (v < 0.0) throw DataError("illuminant SPD must be nonnegative");
    for (std::uint8_t k : illum_of_element) {
        if (k > 1) throw DataError("element illuminant index must be 0 or 1");
        if (k == 1 && !secondary_spd)
            throw DataError("element references the secondary SPD but none is set");
    }
}

Rgb observed_illuminant_raw(const Spd& spd, const CameraModel& cam) {
    Rgb e;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = 0; i < kBands; ++i) acc += spd[i] * cam.sensitivities[c][i];
        e[c] = acc * kLambdaStep;
    }
    return e;
}

Illuminant observed_illuminant(const Spd& spd, const CameraModel& cam) {
    return Illuminant(observed_illuminant_raw(spd, cam));
}

RenderResult render(const SpectralScene& scene, const CameraModel& cam, bool inject_black,
                    double noise_sigma, std::uint64_t noise_seed) {
    scene.validate();
    cam.validate();

    // Per-(element, channel) signal; elements are few, pixels are many.
    std::vector<std::array<double, 3>> lut(scene.reflectances.size());
    for (std::size_t e = 0; e < scene.reflectances.size(); ++e) {
        const Spd& spd =
            scene.illum_of_element[e] == 0 ? scene.illuminant_spd : *scene.secondary_spd;
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kBands; ++i)
                acc += spd[i] * scene.reflectances[e][i] * cam.sensitivities[c][i];
            lut[e][c] = cam.gain * acc * kLambdaStep;
        }
    }

    LinearImage img;
    img.width = scene.width;
    img.height = scene.height;
    img.camera_id = cam.camera_id;
    img.data.resize(scene.element_of.size() * 3);
    img.saturation_level = cam.saturation_level;

    // The ADC clips signal-plus-pedestal at the saturation level, so the
    // usable headroom is saturation - black when the pedestal is injected.
    std::array<double, 3> headroom = cam.saturation_level;
    if (inject_black)
        for (int c = 0; c < 3; ++c) headroom[c] -= cam.black_level[c];

    SplitMix64 noise(noise_seed);
    std::size_t clipped_everywhere = 0;
    for (std::size_t p = 0; p < scene.element_of.size(); ++p) {
        const auto& base = lut[scene.element_of[p]];
        int clipped_channels = 0;
        for (int c = 0; c < 3; ++c) {
            double v = base[c];
            if (noise_sigma > 0.0) v = std::max(v + noise.gaussian(0.0, noise_sigma), 0.0);
            if (v >= headroom[c]) {
                v = headroom[c];
                ++clipped_channels;
            }
            if (inject_black) {
                // The pedestal path models the ADC: the clipped signal is
                // digitized to whole counts before the (integral) pedestal is
                // added, which keeps subtract_black an exact inverse.
                v = std::floor(v + 0.5) + cam.black_level[c];
            }
            img.data[p * 3 + c] = v;
        }
        if (clipped_channels == 3) ++clipped_everywhere;
    }
    if (clipped_everywhere == scene.element_of.size())
        throw DataError("render is fully saturated; lower the gain or the illuminant power");

    if (inject_black) {
        img.black_level = cam.black_level;
        img.black_subtracted = false;
    } else {
        img.black_level = {0.0, 0.0, 0.0};
        img.black_subtracted = true;
    }
    return {std::move(img), observed_illuminant(scene.illuminant_spd, cam)};
}

namespace {

Spd smooth_random_reflectance(SplitMix64& rng) {
    double base = rng.uniform(0.2, 0.8);
    double amp[3], phase[3];
    for (int h = 0; h < 3; ++h) {
        amp[h] = rng.uniform(-0.25, 0.25);
        phase[h] = rng.uniform(0.0, 2.0 * kPi);
    }
    Spd refl{};
    for (int i = 0; i < kBands; ++i) {
        double t = (wavelength(i) - kLambdaMin) / 300.0;
        double v = base;
        for (int h = 0; h < 3; ++h) v += amp[h] * std::cos(2.0 * kPi * (h + 1) * t + phase[h]);
        refl[i] = std::clamp(v, 0.0, 1.0);
    }
    return refl;
}

Spd flat_reflectance(double level) {
    Spd refl{};
    refl.fill(level);
    return refl;
}

void fill_rect(std::vector<std::uint16_t>& element_of, int width, int x0, int y0, int x1, int y1,
               std::uint16_t e) {
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) element_of[static_cast<std::size_t>(y) * width + x] = e;
}

struct ChartGeometry {
    int pw, ph, gap, x0, y0;
};

ChartGeometry chart_geometry(int width, int height) {
    ChartGeometry g;
    g.pw = std::max(4, width / 10);
    g.ph = std::max(4, height / 8);
    g.gap = std::max(1, g.pw / 2);
    int total = 6 * g.pw + 5 * g.gap;
    if (total > width - 2) throw DataError("image too narrow for the 6-patch chart row");
    g.x0 = (width - total) / 2;
    g.y0 = height - g.ph - std::max(2, height / 16);
    if (g.y0 < 0) throw DataError("image too short for the chart row");
    return g;
}

}  // namespace

const CameraModel& Dataset::camera_for(const SyntheticImage& img) const {
    for (const auto& cam : cameras)
        if (cam.camera_id == img.camera_id) return cam;
    throw DataError("dataset image references unknown camera \"" + img.camera_id + "\"");
}

PatchAnnotation Dataset::annotation_for(const SyntheticImage& img) const {
    PatchAnnotation ann;
    ann.image_id = img.id;
    ann.patches = img.scene.chart_quads;
    ann.inset = 0.15;
    ann.validate();
    return ann;
}

Dataset make_benchmark(const BenchmarkConfig& config) {
    if (config.n_images < 1) throw DataError("benchmark needs at least one image");
    if (config.n_cameras < 1 || config.n_cameras > 2)
        throw DataError("benchmark supports 1 or 2 cameras");
    if (!(config.cct_min <= config.cct_max)) throw DataError("bad CCT range");

    Dataset ds;
    ds.config = config;
    ds.cameras.push_back(default_camera_a());
    if (config.n_cameras == 2) ds.cameras.push_back(default_camera_b());

    const ChartGeometry chart = chart_geometry(config.width, config.height);
    const int half = (config.n_images + 1) / 2;

    for (int i = 0; i < config.n_images; ++i) {
        SplitMix64 rng(config.seed ^ static_cast<std::uint64_t>(i));

        SpectralScene scene;
        scene.width = config.width;
        scene.height = config.height;
        scene.illuminant_spd = planckian_spd(rng.uniform(config.cct_min, config.cct_max));
        scene.element_of.assign(static_cast<std::size_t>(config.width) * config.height, 0);

        // Background: a 4x3 grid of random smooth reflectances.
        const int cols = 4, rows = 3;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                auto e = static_cast<std::uint16_t>(scene.reflectances.size());
                scene.reflectances.push_back(smooth_random_reflectance(rng));
                fill_rect(scene.element_of, config.width, c * config.width / cols,
                          r * config.height / rows, (c + 1) * config.width / cols,
                          (r + 1) * config.height / rows, e);
            }

        // A deep-shadow strip. Real scenes bottom out near zero after black
        // subtraction; without it every pixel would sit on the background
        // reflectance floor and the pedestal heuristic could not tell a clean
        // render from one with the black level left in.
        {
            auto e = static_cast<std::uint16_t>(scene.reflectances.size());
            scene.reflectances.push_back(flat_reflectance(0.004));
            fill_rect(scene.element_of, config.width, config.width / 3, 0,
                      2 * config.width / 3, std::max(2, config.height / 24), e);
        }

        // Achromatic chart row on top of the background.
        for (int p = 0; p < 6; ++p) {
            auto e = static_cast<std::uint16_t>(scene.reflectances.size());
            scene.reflectances.push_back(flat_reflectance(kChartLevels[p]));
            int x0 = chart.x0 + p * (chart.pw + chart.gap);
            fill_rect(scene.element_of, config.width, x0, chart.y0, x0 + chart.pw,
                      chart.y0 + chart.ph, e);
            scene.chart_quads.push_back(
                rect_quad(x0, chart.y0, x0 + chart.pw, chart.y0 + chart.ph));
        }
        scene.illum_of_element.assign(scene.reflectances.size(), 0);
        scene.validate();

        SyntheticImage si;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "img_%04d", i + 1);
        si.id = idbuf;
        si.scene = std::move(scene);
        si.camera_id = ds.cameras[(config.n_cameras == 2 && i >= half) ? 1 : 0].camera_id;
        si.noise_seed = rng.next();
        ds.truth.insert(si.id,
                        observed_illuminant(si.scene.illuminant_spd, ds.camera_for(si)),
                        si.camera_id);
        ds.images.push_back(std::move(si));
    }
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& dir, int jobs) {
    std::filesystem::create_directories(dir);

    std::vector<RenderResult> rendered(ds.images.size());
    parallel_for(ds.images.size(), jobs, [&](std::size_t i) {
        const auto& si = ds.images[i];
        rendered[i] = render(si.scene, ds.camera_for(si), ds.config.inject_black,
                             ds.config.noise_sigma, si.noise_seed);
    });

    nlohmann::json manifest;
    nlohmann::json images = nlohmann::json::array();
    AnnotationSet annotations;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        const auto& si = ds.images[i];
        std::string filename = si.id + ".ppm";
        write_ppm16(rendered[i].image, dir / filename);
        write_sidecar(rendered[i].image, dir / filename);
        annotations.emplace(si.id, ds.annotation_for(si));
        images.push_back({{"id", si.id},
                          {"camera_id", si.camera_id},
                          {"image", filename},
                          {"sidecar", filename + ".meta.json"}});
    }
    write_annotations(annotations, dir / "annotations.json");
    ds.truth.save_csv(dir / "ground_truth.csv");

    manifest["images"] = images;
    manifest["annotations"] = "annotations.json";
    manifest["ground_truth"] = "ground_truth.csv";
    nlohmann::json cams = nlohmann::json::array();
    for (const auto& cam : ds.cameras) cams.push_back(camera_to_json(cam));
    manifest["cameras"] = cams;
    manifest["config"] = {{"n_images", ds.config.n_images},
                          {"n_cameras", ds.config.n_cameras},
                          {"cct_min", ds.config.cct_min},
                          {"cct_max", ds.config.cct_max},
                          {"seed", ds.config.seed},
                          {"width", ds.config.width},
                          {"height", ds.config.height},
                          {"inject_black", ds.config.inject_black},
                          {"noise_sigma", ds.config.noise_sigma}};
    std::ofstream out(dir / "manifest.json");
    if (!out) throw DataError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }
    DatasetManifest m;
    std::filesystem::path base = path.parent_path();
    try {
        for (const auto& cj : j.at("cameras")) m.cameras.push_back(camera_from_json(cj));
        for (const auto& ij : j.at("images"))
            m.images.push_back({ij.at("id").get<std::string>(),
                                ij.at("camera_id").get<std::string>(),
                                base / ij.at("image").get<std::string>()});
        m.annotations = base / j.at("annotations").get<std::string>();
        m.ground_truth = base / j.at("ground_truth").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest " + path.string() + " missing fields: " + e.what());
    }
    return m;
}

Spd spd_for_target(const Spd& base_spd, const CameraModel& cam, const Rgb& target) {
    // Solve G * w = target - observed(base) with G the Gram matrix of the
    // sensitivity curves, then add sum_c w_c * rho_c to the SPD.
    Rgb base = observed_illuminant_raw(base_spd, cam);
    double G[3][3];
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double acc = 0.0;
            for (int i = 0; i < kBands; ++i)
                acc += cam.sensitivities[a][i] * cam.sensitivities[b][i];
            G[a][b] = acc * kLambdaStep;
        }
    double rhs[3] = {target.r - base.r, target.g - base.g, target.b - base.b};

    // Gaussian elimination with partial pivoting on the 3x3 system.
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(G[piv[r]][col]) > std::abs(G[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        if (std::abs(G[piv[col]][col]) < 1e-12)
            throw DataError("camera sensitivities are degenerate; cannot target a direction");
        for (int r = col + 1; r < 3; ++r) {
            double f = G[piv[r]][col] / G[piv[col]][col];
            for (int c2 = col; c2 < 3; ++c2) G[piv[r]][c2] -= f * G[piv[col]][c2];
            rhs[piv[r]] -= f * rhs[piv[col]];
        }
    }
    double w[3];
    for (int col = 2; col >= 0; --col) {
        double acc = rhs[piv[col]];
        for (int c2 = col + 1; c2 < 3; ++c2) acc -= G[piv[col]][c2] * w[c2];
        w[col] = acc / G[piv[col]][col];
    }

    Spd out = base_spd;
    for (int i = 0; i < kBands; ++i) {
        for (int c = 0; c < 3; ++c) out[i] += w[c] * cam.sensitivities[c][i];
        out[i] = std::max(out[i], 0.0);
    }
    return out;
}

SpectralScene make_two_region_scene(int width, int height, const Spd& primary,
                                    const Spd& secondary, double wall_reflectance) {
    SpectralScene scene;
    scene.width = width;
    scene.height = height;
    scene.illuminant_spd = primary;
    scene.secondary_spd = secondary;
    scene.reflectances = {flat_reflectance(wall_reflectance), flat_reflectance(wall_reflectance)};
    scene.illum_of_element = {0, 1};
    scene.element_of.assign(static_cast<std::size_t>(width) * height, 0);
    fill_rect(scene.element_of, width, width / 2, 0, width, height, 1);
    scene.validate();
    return scene;
}

std::vector<Quad> two_region_quads(int width, int height) {
    return {rect_quad(1, 1, width / 2 - 1, height - 1),
            rect_quad(width / 2 + 1, 1, width - 1, height - 1)};
}

}  // namespace chromalint::synthetic
