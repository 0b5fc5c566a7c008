#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chromalint/estimators.hpp"
#include "chromalint/evaluation.hpp"
#include "chromalint/experiment.hpp"
#include "chromalint/groundtruth.hpp"
#include "chromalint/hygiene.hpp"
#include "chromalint/illuminant.hpp"
#include "chromalint/image.hpp"
#include "chromalint/synthetic.hpp"

namespace py = pybind11;
using namespace chromalint;

namespace {

py::array_t<double> image_to_array(const LinearImage& img) {
    py::array_t<double> arr({img.height, img.width, 3});
    std::copy(img.data.begin(), img.data.end(), arr.mutable_data());
    return arr;
}

LinearImage image_from_array(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                             std::array<double, 3> black_level,
                             std::array<double, 3> saturation_level, const std::string& camera_id,
                             bool black_subtracted) {
    if (arr.ndim() != 3 || arr.shape(2) != 3)
        throw DataError("expected an (h, w, 3) float array");
    LinearImage img;
    img.height = static_cast<int>(arr.shape(0));
    img.width = static_cast<int>(arr.shape(1));
    img.data.assign(arr.data(), arr.data() + arr.size());
    img.black_level = black_level;
    img.saturation_level = saturation_level;
    img.camera_id = camera_id;
    img.black_subtracted = black_subtracted;
    img.validate();
    return img;
}

Quad quad_from_list(const std::vector<std::array<double, 2>>& pts) {
    if (pts.size() != 4) throw DataError("a quad needs exactly 4 vertices");
    Quad q;
    for (int i = 0; i < 4; ++i) q.pts[i] = pts[i];
    return q;
}

}  // namespace

PYBIND11_MODULE(_chromalint, m) {
    m.doc() = "Color-constancy benchmark harness and dataset-hygiene linter";

    py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);

    py::class_<Illuminant>(m, "Illuminant")
        .def(py::init<double, double, double>(), py::arg("r"), py::arg("g"), py::arg("b"))
        .def_property_readonly("r", &Illuminant::r)
        .def_property_readonly("g", &Illuminant::g)
        .def_property_readonly("b", &Illuminant::b)
        .def_property_readonly("rgb",
                               [](const Illuminant& e) {
                                   return std::array<double, 3>{e.r(), e.g(), e.b()};
                               })
        .def("__repr__", [](const Illuminant& e) {
            return "Illuminant(" + format_double(e.r()) + ", " + format_double(e.g()) + ", " +
                   format_double(e.b()) + ")";
        });

    m.def(
        "angular_error",
        [](const Illuminant& a, const Illuminant& b) { return angular_error(a, b); },
        py::arg("a"), py::arg("b"), "Angle between two illuminants in degrees");
    m.def(
        "angular_error_rgb",
        [](std::array<double, 3> a, std::array<double, 3> b) {
            return angular_error(Rgb{a[0], a[1], a[2]}, Rgb{b[0], b[1], b[2]});
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "rb_chromaticity",
        [](const Illuminant& e) {
            RbPoint p = rb_chromaticity(e);
            return std::pair<double, double>(p.r, p.b);
        },
        py::arg("illuminant"));

    py::class_<LinearImage>(m, "LinearImage")
        .def_static("from_array", &image_from_array, py::arg("array"), py::arg("black_level"),
                    py::arg("saturation_level"), py::arg("camera_id") = "",
                    py::arg("black_subtracted") = true)
        .def("to_array", &image_to_array)
        .def_readonly("width", &LinearImage::width)
        .def_readonly("height", &LinearImage::height)
        .def_readonly("black_level", &LinearImage::black_level)
        .def_readonly("saturation_level", &LinearImage::saturation_level)
        .def_readonly("camera_id", &LinearImage::camera_id)
        .def_readonly("black_subtracted", &LinearImage::black_subtracted);

    m.def("read_ppm16", &read_ppm16, py::arg("path"));
    m.def("write_ppm16", &write_ppm16, py::arg("image"), py::arg("path"));
    m.def("write_sidecar", &write_sidecar, py::arg("image"), py::arg("path"));
    m.def("subtract_black", &subtract_black, py::arg("image"));
    m.def(
        "saturation_mask_flags",
        [](const LinearImage& img, double margin) {
            SaturationMask mask = saturation_mask(img, margin);
            py::array_t<bool> arr({mask.height, mask.width});
            for (py::ssize_t i = 0; i < arr.size(); ++i)
                arr.mutable_data()[i] = mask.flags[static_cast<std::size_t>(i)] != 0;
            return arr;
        },
        py::arg("image"), py::arg("margin") = kDefaultSaturationMargin,
        "Per-pixel clip flags as a boolean (h, w) array");

    py::class_<EstimatorSpec>(m, "EstimatorSpec")
        .def_static("parse", &EstimatorSpec::parse, py::arg("text"))
        .def("__str__", &EstimatorSpec::to_string)
        .def("__repr__", [](const EstimatorSpec& s) {
            return "EstimatorSpec('" + s.to_string() + "')";
        });
    m.def(
        "estimate",
        [](const LinearImage& img, const std::string& estimator, double mask_margin,
           bool allow_unsubtracted) {
            EstimatorSpec spec = EstimatorSpec::parse(estimator);
            SaturationMask mask = saturation_mask(img, mask_margin);
            return estimate(img, spec, &mask, allow_unsubtracted);
        },
        py::arg("image"), py::arg("estimator") = "gray-world",
        py::arg("mask_margin") = kDefaultSaturationMargin,
        py::arg("allow_unsubtracted") = false);

    py::class_<ErrorStats>(m, "ErrorStats")
        .def_readonly("mean", &ErrorStats::mean)
        .def_readonly("median", &ErrorStats::median)
        .def_readonly("trimean", &ErrorStats::trimean)
        .def_readonly("best25_mean", &ErrorStats::best25_mean)
        .def_readonly("worst25_mean", &ErrorStats::worst25_mean)
        .def_readonly("max", &ErrorStats::max);
    m.def("compute_stats", &compute_stats, py::arg("errors"));

    py::class_<GroundTruthTable>(m, "GroundTruthTable")
        .def(py::init<>())
        .def("insert", &GroundTruthTable::insert, py::arg("image_id"), py::arg("illuminant"),
             py::arg("camera_id"))
        .def("__len__", &GroundTruthTable::size)
        .def("__contains__", &GroundTruthTable::contains)
        .def("ids", &GroundTruthTable::ids)
        .def("illuminant",
             [](const GroundTruthTable& t, const std::string& id) { return t.at(id).illuminant; })
        .def("camera_id",
             [](const GroundTruthTable& t, const std::string& id) { return t.at(id).camera_id; })
        .def_static("load_csv", &GroundTruthTable::load_csv, py::arg("path"))
        .def("save_csv", &GroundTruthTable::save_csv, py::arg("path"));

    m.def(
        "extract_ground_truth",
        [](const LinearImage& img, const std::vector<std::vector<std::array<double, 2>>>& patches,
           double inset, double mask_margin, bool allow_unsubtracted) {
            PatchAnnotation ann;
            ann.image_id = "image";
            ann.inset = inset;
            for (const auto& p : patches) ann.patches.push_back(quad_from_list(p));
            SaturationMask mask = saturation_mask(img, mask_margin);
            return extract_ground_truth(img, ann, mask, allow_unsubtracted);
        },
        py::arg("image"), py::arg("patches"), py::arg("inset") = 0.15,
        py::arg("mask_margin") = kDefaultSaturationMargin, py::arg("allow_unsubtracted") = false,
        "Achromatic-patch ground truth; patches are lists of 4 (x, y) vertices");

    m.def(
        "diff_ground_truths",
        [](const GroundTruthTable& a, const GroundTruthTable& b) {
            GroundTruthDiff d = diff_ground_truths(a, b);
            py::dict out;
            out["per_image_angle"] = d.per_image_angle;
            out["median"] = d.stats.median;
            out["p75"] = d.p75;
            out["max"] = d.stats.max;
            return out;
        },
        py::arg("a"), py::arg("b"));

    // hygiene
    m.def(
        "make_folds",
        [](const std::vector<std::string>& ids, int k, const std::string& mode,
           std::uint64_t seed) {
            return hygiene::make_folds(ids, k, hygiene::shuffle_mode_from_string(mode), seed)
                .folds;
        },
        py::arg("ids"), py::arg("k") = 3, py::arg("mode") = "none", py::arg("seed") = 0);

    py::class_<hygiene::Finding>(m, "Finding")
        .def_readonly("check_id", &hygiene::Finding::check_id)
        .def_property_readonly(
            "severity", [](const hygiene::Finding& f) { return hygiene::to_string(f.severity); })
        .def_readonly("message", &hygiene::Finding::message)
        .def_readonly("evidence", &hygiene::Finding::evidence)
        .def_readonly("image_id", &hygiene::Finding::image_id)
        .def("__repr__", [](const hygiene::Finding& f) {
            return "[" + hygiene::to_string(f.severity) + "] " + f.check_id + ": " + f.message;
        });

    m.def("detect_unsubtracted_black", &hygiene::detect_unsubtracted_black, py::arg("image"),
          py::arg("threshold_fraction") = 0.01);
    m.def(
        "camera_split_findings",
        [](const GroundTruthTable& gt) { return hygiene::camera_split_analysis(gt).findings; },
        py::arg("gt"));
    m.def(
        "uniform_illumination_check",
        [](const LinearImage& img,
           const std::vector<std::pair<std::string, std::vector<std::array<double, 2>>>>& regions,
           double threshold_deg) {
            std::vector<std::pair<std::string, Quad>> quads;
            for (const auto& [label, pts] : regions) quads.emplace_back(label, quad_from_list(pts));
            return hygiene::uniform_illumination_check(img, quads, threshold_deg).findings;
        },
        py::arg("image"), py::arg("regions"),
        py::arg("threshold_deg") = hygiene::kDefaultUniformThresholdDeg);

    // synthetic
    m.def(
        "planckian_spd",
        [](double cct) {
            synthetic::Spd spd = synthetic::planckian_spd(cct);
            return std::vector<double>(spd.begin(), spd.end());
        },
        py::arg("cct_kelvin"), "31-sample SPD over 400-700 nm, unit maximum");
    m.def("spd_wavelengths", [] {
        std::vector<double> wl(synthetic::kBands);
        for (int i = 0; i < synthetic::kBands; ++i) wl[i] = synthetic::wavelength(i);
        return wl;
    });
    m.def(
        "write_benchmark",
        [](const std::string& dir, int n_images, int n_cameras, double cct_min, double cct_max,
           std::uint64_t seed, bool inject_black, double noise_sigma) {
            synthetic::BenchmarkConfig config;
            config.n_images = n_images;
            config.n_cameras = n_cameras;
            config.cct_min = cct_min;
            config.cct_max = cct_max;
            config.seed = seed;
            config.inject_black = inject_black;
            config.noise_sigma = noise_sigma;
            synthetic::write_dataset(synthetic::make_benchmark(config), dir);
        },
        py::arg("dir"), py::arg("n_images") = 10, py::arg("n_cameras") = 1,
        py::arg("cct_min") = 2500.0, py::arg("cct_max") = 7500.0, py::arg("seed") = 0,
        py::arg("inject_black") = false, py::arg("noise_sigma") = 0.0,
        "Render a synthetic benchmark tree (images, sidecars, annotations, ground truth)");

    m.def(
        "oracle_mismatch_medians",
        [](int n_images, std::uint64_t seed, double black_level) {
            synthetic::BenchmarkConfig config;
            config.n_images = n_images;
            config.seed = seed;
            auto res = oracle_mismatch_experiment(synthetic::make_benchmark(config), black_level);
            return std::pair<double, double>(res.right_run.stats.median,
                                             res.wrong_run.stats.median);
        },
        py::arg("n_images") = 20, py::arg("seed") = 0, py::arg("black_level") = 129.0,
        "(right_median, wrong_median) of the pipeline-mismatch demonstration");
}
