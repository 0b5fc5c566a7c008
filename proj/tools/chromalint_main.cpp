#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chromalint/estimators.hpp"
#include "chromalint/evaluation.hpp"
#include "chromalint/experiment.hpp"
#include "chromalint/groundtruth.hpp"
#include "chromalint/hygiene.hpp"
#include "chromalint/illuminant.hpp"
#include "chromalint/image.hpp"
#include "chromalint/report_json.hpp"
#include "chromalint/synthetic.hpp"

namespace fs = std::filesystem;
using namespace chromalint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitLint = 3;

struct ImageInput {
    std::string id;
    fs::path path;
};

// --images paths, or a simulate-style manifest.
std::vector<ImageInput> collect_images(const std::vector<std::string>& images,
                                       const std::string& manifest) {
    std::vector<ImageInput> out;
    if (!manifest.empty()) {
        auto m = synthetic::load_manifest(manifest);
        for (const auto& e : m.images) out.push_back({e.id, e.image});
    }
    for (const auto& p : images) out.push_back({fs::path(p).stem().string(), p});
    if (out.empty()) throw UsageError("no input images (use --images or --manifest)");
    return out;
}

// Ordered id list for fold construction; CSV map order would destroy the
// dataset's original image order, which is the whole point of mode "none".
std::vector<std::string> read_id_sequence(const fs::path& path) {
    std::vector<std::string> ids;
    if (path.extension() == ".json") {
        auto m = synthetic::load_manifest(path);
        for (const auto& e : m.images) ids.push_back(e.id);
    } else if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open: " + path.string());
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
            if (line.empty()) continue;
            ids.push_back(line.substr(0, line.find(',')));
        }
    } else {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open: " + path.string());
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
            if (!line.empty()) ids.push_back(line);
        }
    }
    if (ids.empty()) throw DataError("no image ids in " + path.string());
    return ids;
}

LinearImage load_for_pipeline(const fs::path& path, bool do_subtract, bool allow_unsubtracted) {
    LinearImage img = read_ppm16(path);
    if (do_subtract && !img.black_subtracted) img = subtract_black(img);
    if (!img.black_subtracted && !allow_unsubtracted)
        throw PipelineError("image " + path.string() +
                            " still carries its black level; pass --subtract-black, or "
                            "--unsafe-allow-unsubtracted to reproduce the wrong pipeline");
    return img;
}

void write_chroma_svg(const GroundTruthTable& gt, const fs::path& path) {
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    std::map<std::string, std::vector<RbPoint>> per_camera;
    double rmin = 1.0, rmax = 0.0, bmin = 1.0, bmax = 0.0;
    for (const auto& [id, rec] : gt.records()) {
        RbPoint p = rb_chromaticity(rec.illuminant);
        per_camera[rec.camera_id].push_back(p);
        rmin = std::min(rmin, p.r);
        rmax = std::max(rmax, p.r);
        bmin = std::min(bmin, p.b);
        bmax = std::max(bmax, p.b);
    }
    double pad_r = std::max(0.01, (rmax - rmin) * 0.08);
    double pad_b = std::max(0.01, (bmax - bmin) * 0.08);
    rmin -= pad_r;
    rmax += pad_r;
    bmin -= pad_b;
    bmax += pad_b;

    const double W = 640, H = 640, M = 60;
    auto X = [&](double r) { return M + (r - rmin) / (rmax - rmin) * (W - 2 * M); };
    auto Y = [&](double b) { return H - M - (b - bmin) / (bmax - bmin) * (H - 2 * M); };
    char buf[256];

    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 640\" "
           "font-family=\"monospace\" font-size=\"12\">\n";
    out << "<rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  M, M, W - 2 * M, H - 2 * M);
    out << buf;
    // Tick labels at the corners keep the plot self-describing without a full
    // axis renderer.
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\">r=%.3f</text>\n", M, H - M + 24,
                  rmin);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">r=%.3f</text>\n", W - M,
                  H - M + 24, rmax);
    out << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\">b=%.3f</text>\n", 4.0, H - M,
                  bmin);
    out << buf;
    std::snprintf(buf, sizeof(buf), "<text x=\"%.1f\" y=\"%.1f\">b=%.3f</text>\n", 4.0, M + 6,
                  bmax);
    out << buf;

    int ci = 0;
    double ly = M + 10;
    for (const auto& [cam, pts] : per_camera) {
        const char* color = kPalette[ci % 8];
        for (const auto& p : pts) {
            std::snprintf(buf, sizeof(buf),
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" "
                          "fill-opacity=\"0.7\"/>\n",
                          X(p.r), Y(p.b), color);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"4\" fill=\"%s\"/>"
                      "<text x=\"%.1f\" y=\"%.1f\">%s (%zu)</text>\n",
                      W - M - 150.0, ly, color, W - M - 140.0, ly + 4, cam.c_str(), pts.size());
        out << buf;
        ly += 18;
        ++ci;
    }
    out << "</svg>\n";
}

nlohmann::json make_config_echo(const std::string& subcommand,
                                std::initializer_list<std::pair<std::string, nlohmann::json>> kv) {
    nlohmann::json j;
    j["subcommand"] = subcommand;
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

// ---------------------------------------------------------------------------

struct CommonOpts {
    int jobs = 1;
    std::string format = "csv";
};

int cmd_subtract(const std::vector<std::string>& images, const std::string& manifest,
                 const std::string& out_dir, int jobs) {
    auto inputs = collect_images(images, manifest);
    fs::create_directories(out_dir);
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        LinearImage img = read_ppm16(inputs[i].path);
        LinearImage sub = subtract_black(img);
        fs::path dest = fs::path(out_dir) / inputs[i].path.filename();
        write_ppm16(sub, dest);
        write_sidecar(sub, dest);
    });
    std::cout << "subtracted " << inputs.size() << " image(s) into " << out_dir << "\n";
    return kExitOk;
}

int cmd_estimate(const std::vector<std::string>& images, const std::string& manifest,
                 const std::string& estimator_str, bool do_subtract, bool unsafe,
                 double mask_margin, const std::string& out, const CommonOpts& common) {
    EstimatorSpec spec;
    try {
        spec = EstimatorSpec::parse(estimator_str);
    } catch (const DataError& e) {
        throw UsageError(e.what());
    }
    auto inputs = collect_images(images, manifest);

    std::vector<std::pair<std::string, Illuminant>> results(inputs.size());
    parallel_for(inputs.size(), common.jobs, [&](std::size_t i) {
        LinearImage img = load_for_pipeline(inputs[i].path, do_subtract, unsafe);
        SaturationMask mask = saturation_mask(img, mask_margin);
        results[i] = {inputs[i].id, estimate(img, spec, &mask, unsafe)};
    });

    EstimateSet estimates;
    for (auto& [id, e] : results) {
        if (estimates.count(id)) throw DataError("duplicate image id \"" + id + "\"");
        estimates.emplace(id, e);
    }
    PipelineTag tag = unsafe ? PipelineTag::unsubtracted : PipelineTag::subtracted;

    if (tag == PipelineTag::unsubtracted)
        std::cerr << "WARNING: estimating on images WITHOUT black-level subtraction; results "
                     "are tagged pipeline=unsubtracted and are not comparable with correctly "
                     "processed runs\n";

    if (common.format == "json" || fs::path(out).extension() == ".json") {
        nlohmann::json j = estimates_to_json(estimates, tag);
        j["config"] = make_config_echo(
            "estimate", {{"estimator", spec.to_string()},
                         {"subtract_black", do_subtract},
                         {"unsafe_allow_unsubtracted", unsafe},
                         {"mask_margin", mask_margin}});
        write_json_file(j, out);
    } else {
        write_estimates_csv(estimates, out);
    }
    std::cout << "estimated " << estimates.size() << " image(s) with " << spec.to_string()
              << " [pipeline=" << to_string(tag) << "] -> " << out << "\n";
    return kExitOk;
}

int cmd_extract_gt(const std::vector<std::string>& images, const std::string& manifest,
                   const std::string& annotations_path, bool do_subtract, bool unsafe,
                   double mask_margin, const std::string& out, const CommonOpts& common) {
    auto inputs = collect_images(images, manifest);
    AnnotationSet annotations = read_annotations(annotations_path);

    struct Row {
        std::string id, camera;
        Illuminant e;
    };
    std::vector<Row> rows(inputs.size());
    parallel_for(inputs.size(), common.jobs, [&](std::size_t i) {
        auto it = annotations.find(inputs[i].id);
        if (it == annotations.end())
            throw DataError("no annotation for image \"" + inputs[i].id + "\"");
        LinearImage img = load_for_pipeline(inputs[i].path, do_subtract, unsafe);
        SaturationMask mask = saturation_mask(img, mask_margin);
        rows[i] = {inputs[i].id, img.camera_id,
                   extract_ground_truth(img, it->second, mask, unsafe)};
    });

    GroundTruthTable table;
    for (const auto& row : rows) table.insert(row.id, row.e, row.camera);
    table.save_csv(out);
    if (unsafe)
        std::cerr << "WARNING: ground truth extracted from UNSUBTRACTED images; this reproduces "
                     "the historical mistake and must not be used as a reference\n";
    std::cout << "extracted ground truth for " << table.size() << " image(s) -> " << out << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& estimates_path, const std::string& gt_path,
                 std::string estimator_label, std::string pipeline_flag, std::string gt_id,
                 const std::vector<std::string>& tabulate_runs, bool force_mixed,
                 const std::string& out) {
    if (!tabulate_runs.empty()) {
        std::vector<EvaluationRun> runs;
        for (const auto& p : tabulate_runs) runs.push_back(run_from_json(read_json_file(p)));
        std::string table = tabulate(runs, force_mixed);
        if (!out.empty()) {
            std::ofstream o(out);
            if (!o) throw DataError("cannot open for writing: " + out);
            o << table;
        }
        std::cout << table;
        return kExitOk;
    }

    if (estimates_path.empty() || gt_path.empty())
        throw UsageError("evaluate needs --estimates and --gt (or --tabulate)");
    if (out.empty()) throw UsageError("evaluate needs --out for the run report");

    EstimateSet estimates;
    PipelineTag tag = PipelineTag::subtracted;
    if (fs::path(estimates_path).extension() == ".json") {
        auto [est, t] = estimates_from_json(read_json_file(estimates_path));
        estimates = std::move(est);
        tag = t;
    } else {
        estimates = read_estimates_csv(estimates_path);
    }
    if (!pipeline_flag.empty()) tag = pipeline_tag_from_string(pipeline_flag);
    if (gt_id.empty()) gt_id = fs::path(gt_path).stem().string();
    if (estimator_label.empty()) estimator_label = fs::path(estimates_path).stem().string();

    GroundTruthTable gt = GroundTruthTable::load_csv(gt_path);
    EvaluationRun run = evaluate(estimates, gt, estimator_label, tag, gt_id);

    nlohmann::json j = run_to_json(run);
    j["config"] = make_config_echo("evaluate", {{"estimates", estimates_path},
                                                {"gt", gt_path},
                                                {"pipeline", to_string(tag)},
                                                {"ground_truth_id", gt_id}});
    write_json_file(j, out);

    if (tag == PipelineTag::unsubtracted)
        std::cerr << "WARNING: this run is tagged pipeline=unsubtracted (the wrong pipeline); "
                     "its errors must not be compared against subtracted-pipeline results\n";
    std::printf("%s vs %s [pipeline=%s]: mean %.3f  median %.3f  trimean %.3f  b25 %.3f  "
                "w25 %.3f  max %.3f deg (%zu images) -> %s\n",
                run.estimator.c_str(), run.ground_truth_id.c_str(),
                to_string(run.pipeline).c_str(), run.stats.mean, run.stats.median,
                run.stats.trimean, run.stats.best25_mean, run.stats.worst25_mean, run.stats.max,
                run.per_image_error.size(), out.c_str());
    return kExitOk;
}

int cmd_diff_gt(const std::string& a_path, const std::string& b_path, const std::string& out) {
    GroundTruthTable a = GroundTruthTable::load_csv(a_path);
    GroundTruthTable b = GroundTruthTable::load_csv(b_path);
    GroundTruthDiff diff = diff_ground_truths(a, b);
    nlohmann::json j = diff_to_json(diff);
    j["config"] = make_config_echo("diff-gt", {{"a", a_path}, {"b", b_path}});
    write_json_file(j, out);
    std::printf("ground-truth diff over %zu shared image(s): median %.4f  p75 %.4f  max %.4f deg "
                "-> %s\n",
                diff.per_image_angle.size(), diff.stats.median, diff.p75, diff.stats.max,
                out.c_str());
    return kExitOk;
}

int cmd_lint(const std::string& manifest, const std::vector<std::string>& images,
             const std::string& gt_path, const std::string& folds_path,
             const std::string& regions_path, const std::string& region_image,
             double pedestal_threshold, double centroid_threshold, double uniform_threshold,
             const std::string& fail_on, const std::string& out, const CommonOpts& common) {
    hygiene::HygieneReport report;

    std::vector<ImageInput> inputs;
    if (!manifest.empty() || !images.empty()) inputs = collect_images(images, manifest);

    if (!inputs.empty()) {
        std::vector<hygiene::Finding> per_image(inputs.size());
        parallel_for(inputs.size(), common.jobs, [&](std::size_t i) {
            LinearImage img = read_ppm16(inputs[i].path);
            hygiene::Finding f = hygiene::detect_unsubtracted_black(img, pedestal_threshold);
            f.image_id = inputs[i].id;
            per_image[i] = std::move(f);
        });
        report.merge(std::move(per_image));
    }

    std::string gt_file = gt_path;
    if (gt_file.empty() && !manifest.empty())
        gt_file = synthetic::load_manifest(manifest).ground_truth.string();

    GroundTruthTable gt;
    if (!gt_file.empty()) {
        gt = GroundTruthTable::load_csv(gt_file);
        std::set<std::string> cameras;
        for (const auto& [id, rec] : gt.records()) cameras.insert(rec.camera_id);
        if (cameras.size() >= 2) report.merge(hygiene::camera_split_analysis(gt).findings);
    }

    if (!folds_path.empty()) {
        if (gt_file.empty()) throw UsageError("--folds auditing needs --gt (or --manifest)");
        hygiene::FoldSpec spec = hygiene::load_folds(folds_path);
        report.merge(hygiene::audit_folds(spec, gt, centroid_threshold));
    }

    if (!regions_path.empty()) {
        if (region_image.empty()) throw UsageError("--regions needs --region-image");
        AnnotationSet regions = read_annotations(regions_path);
        LinearImage img = read_ppm16(region_image);
        for (const auto& [id, ann] : regions) {
            std::vector<std::pair<std::string, Quad>> quads;
            for (std::size_t q = 0; q < ann.patches.size(); ++q)
                quads.emplace_back(id + "/region" + std::to_string(q + 1), ann.patches[q]);
            auto res = hygiene::uniform_illumination_check(img, quads, uniform_threshold);
            for (auto& f : res.findings) f.image_id = id;
            report.merge(std::move(res.findings));
        }
    }

    nlohmann::json j;
    j["findings"] = findings_to_json(report.findings);
    j["config"] = make_config_echo("lint", {{"pedestal_threshold", pedestal_threshold},
                                            {"centroid_threshold", centroid_threshold},
                                            {"uniform_threshold", uniform_threshold},
                                            {"fail_on", fail_on}});
    write_json_file(j, out);

    int warns = 0, fails = 0;
    for (const auto& f : report.findings) {
        if (f.severity == hygiene::Severity::warn) ++warns;
        if (f.severity == hygiene::Severity::fail) ++fails;
        if (f.severity != hygiene::Severity::info)
            std::cout << "[" << hygiene::to_string(f.severity) << "] " << f.check_id
                      << (f.image_id.empty() ? "" : " (" + f.image_id + ")") << ": " << f.message
                      << "\n";
    }
    std::cout << report.findings.size() << " finding(s), " << warns << " warning(s), " << fails
              << " failure(s) -> " << out << "\n";

    auto threshold =
        fail_on == "warn" ? hygiene::Severity::warn : hygiene::Severity::fail;
    return report.has(threshold) ? kExitLint : kExitOk;
}

int cmd_folds(const std::string& ids_from, int k, const std::string& mode_str,
              std::uint64_t seed, const std::string& folds_file, const std::string& gt_path,
              double centroid_threshold, const std::string& out) {
    std::vector<std::string> ids = read_id_sequence(ids_from);
    hygiene::ShuffleMode mode = hygiene::shuffle_mode_from_string(mode_str);

    hygiene::FoldSpec spec;
    if (mode == hygiene::ShuffleMode::external) {
        if (folds_file.empty()) throw UsageError("mode external needs --folds-file");
        spec = hygiene::load_folds(folds_file);
        spec.source = folds_file;
        hygiene::validate_partition(spec, ids);
    } else {
        spec = hygiene::make_folds(ids, k, mode, seed);
    }

    nlohmann::json j;
    j["k"] = spec.k;
    j["mode"] = hygiene::to_string(spec.mode);
    j["seed"] = spec.seed;
    if (!spec.source.empty()) j["source"] = spec.source;
    j["folds"] = spec.folds;
    j["config"] = make_config_echo("folds", {{"ids_from", ids_from},
                                             {"k", k},
                                             {"mode", hygiene::to_string(spec.mode)},
                                             {"seed", spec.seed}});

    int exit_code = kExitOk;
    if (!gt_path.empty()) {
        GroundTruthTable gt = GroundTruthTable::load_csv(gt_path);
        auto findings = hygiene::audit_folds(spec, gt, centroid_threshold);
        j["findings"] = findings_to_json(findings);
        for (const auto& f : findings)
            if (f.severity != hygiene::Severity::info)
                std::cout << "[" << hygiene::to_string(f.severity) << "] " << f.check_id << ": "
                          << f.message << "\n";
    }
    write_json_file(j, out);
    std::cout << "wrote " << spec.k << " fold(s) over " << ids.size() << " id(s) -> " << out
              << "\n";
    return exit_code;
}

int cmd_simulate(int n, int cameras, double cct_min, double cct_max, std::uint64_t seed,
                 int width, int height, bool inject_black, double noise_sigma,
                 const std::string& out_dir, int jobs) {
    synthetic::BenchmarkConfig config;
    config.n_images = n;
    config.n_cameras = cameras;
    config.cct_min = cct_min;
    config.cct_max = cct_max;
    config.seed = seed;
    config.width = width;
    config.height = height;
    config.inject_black = inject_black;
    config.noise_sigma = noise_sigma;
    synthetic::Dataset ds = synthetic::make_benchmark(config);
    synthetic::write_dataset(ds, out_dir, jobs);
    std::cout << "simulated " << n << " image(s) (" << cameras << " camera(s), seed " << seed
              << (inject_black ? ", black level injected" : "") << ") -> " << out_dir << "\n";
    return kExitOk;
}

int cmd_oracle(int n, std::uint64_t seed, double cct_min, double cct_max,
               const std::string& black_levels_str, const std::string& out, int jobs) {
    std::vector<double> black_levels;
    std::stringstream ss(black_levels_str);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) black_levels.push_back(std::stod(tok));
    if (black_levels.empty()) throw UsageError("--black-levels needs at least one value");

    synthetic::BenchmarkConfig config;
    config.n_images = n;
    config.seed = seed;
    config.cct_min = cct_min;
    config.cct_max = cct_max;
    synthetic::Dataset ds = synthetic::make_benchmark(config);

    nlohmann::json levels = nlohmann::json::array();
    double prev_median = -1.0;
    bool monotone = true;
    for (double bl : black_levels) {
        OracleMismatchResult res = oracle_mismatch_experiment(ds, bl, jobs);
        if (res.wrong_run.stats.median < prev_median) monotone = false;
        prev_median = res.wrong_run.stats.median;
        nlohmann::json lj;
        lj["black_level"] = bl;
        lj["right_run"] = run_to_json(res.right_run);
        lj["wrong_run"] = run_to_json(res.wrong_run);
        lj["warnings"] = res.warnings;
        levels.push_back(lj);
        std::printf("black level %7.1f: right median %.4f deg, wrong median %.4f deg\n", bl,
                    res.right_run.stats.median, res.wrong_run.stats.median);
    }

    nlohmann::json j;
    j["levels"] = levels;
    j["wrong_median_monotone_nondecreasing"] = monotone;
    j["config"] = make_config_echo("oracle-experiment", {{"n", n},
                                                         {"seed", seed},
                                                         {"cct_min", cct_min},
                                                         {"cct_max", cct_max},
                                                         {"black_levels", black_levels}});
    write_json_file(j, out);
    std::cout << "oracle mismatch report -> " << out << "\n";
    return kExitOk;
}

int cmd_plot_chroma(const std::string& gt_path, const std::string& out_csv,
                    const std::string& out_svg) {
    GroundTruthTable gt = GroundTruthTable::load_csv(gt_path);
    {
        std::ofstream out(out_csv);
        if (!out) throw DataError("cannot open for writing: " + out_csv);
        out << "image_id,camera_id,r,b\n";
        for (const auto& [id, rec] : gt.records()) {
            RbPoint p = rb_chromaticity(rec.illuminant);
            out << id << "," << rec.camera_id << "," << format_double(p.r) << ","
                << format_double(p.b) << "\n";
        }
    }
    write_chroma_svg(gt, out_svg);
    std::cout << "rb scatter for " << gt.size() << " illuminant(s) -> " << out_csv << ", "
              << out_svg << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chromalint: color-constancy benchmark harness and dataset-hygiene linter"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "chromalint 0.1.0");

    CommonOpts common;
    app.add_option("--jobs,-j", common.jobs, "Worker threads for batch subcommands")
        ->capture_default_str();

    // subtract
    std::vector<std::string> images;
    std::string manifest, out_dir;
    auto* sub = app.add_subcommand("subtract", "Subtract the black level from raw images");
    sub->add_option("--images", images, "PPM images (with .meta.json sidecars)");
    sub->add_option("--manifest", manifest, "Dataset manifest JSON");
    sub->add_option("--out-dir", out_dir, "Output directory")->required();

    // estimate
    std::string estimator_str = "gray-world", est_out;
    bool do_subtract = false, unsafe = false;
    double mask_margin = kDefaultSaturationMargin;
    auto* est = app.add_subcommand("estimate", "Estimate scene illuminants");
    est->add_option("--images", images, "PPM images (with .meta.json sidecars)");
    est->add_option("--manifest", manifest, "Dataset manifest JSON");
    est->add_option("--estimator", estimator_str,
                    "gray-world | white-patch | shades-of-gray:p=6 | gray-edge:n=1,p=6,sigma=6")
        ->capture_default_str();
    auto* sb = est->add_flag("--subtract-black", do_subtract, "Subtract black level first");
    est->add_flag("--unsafe-allow-unsubtracted", unsafe,
                  "Estimate on unsubtracted images (reproduces the WRONG pipeline)")
        ->excludes(sb);
    est->add_option("--mask-margin", mask_margin, "Saturation clip margin")
        ->capture_default_str();
    est->add_option("--out", est_out, "Output estimates (.csv or .json)")->required();
    est->add_option("--format", common.format, "csv|json")->capture_default_str();

    // extract-gt
    std::string annotations_path, gt_out;
    auto* ext = app.add_subcommand("extract-gt", "Extract ground truth from chart patches");
    ext->add_option("--images", images, "PPM images");
    ext->add_option("--manifest", manifest, "Dataset manifest JSON");
    ext->add_option("--annotations", annotations_path, "Patch annotations JSON")->required();
    auto* sb2 = ext->add_flag("--subtract-black", do_subtract, "Subtract black level first");
    ext->add_flag("--unsafe-allow-unsubtracted", unsafe,
                  "Extract from unsubtracted images (reproduces the WRONG pipeline)")
        ->excludes(sb2);
    ext->add_option("--mask-margin", mask_margin, "Saturation clip margin");
    ext->add_option("--out", gt_out, "Output ground-truth CSV")->required();

    // evaluate
    std::string estimates_path, gt_path, estimator_label, pipeline_flag, gt_id, eval_out;
    std::vector<std::string> tabulate_runs;
    bool force_mixed = false;
    auto* ev = app.add_subcommand("evaluate", "Score estimates against a ground truth");
    ev->add_option("--estimates", estimates_path, "Estimates CSV or JSON");
    ev->add_option("--gt", gt_path, "Ground-truth CSV");
    ev->add_option("--estimator-label", estimator_label, "Label recorded in the run");
    ev->add_option("--pipeline", pipeline_flag, "subtracted|unsubtracted (tag override)");
    ev->add_option("--gt-id", gt_id, "Ground-truth version tag");
    ev->add_option("--tabulate", tabulate_runs, "Run JSONs to tabulate instead of evaluating");
    ev->add_flag("--force-mixed", force_mixed,
                 "Tabulate runs with different ground-truth versions anyway");
    ev->add_option("--out", eval_out, "Output run report JSON");

    // diff-gt
    std::string diff_a, diff_b, diff_out;
    auto* dg = app.add_subcommand("diff-gt", "Angular diff of two ground-truth tables");
    dg->add_option("--a", diff_a, "First ground-truth CSV")->required();
    dg->add_option("--b", diff_b, "Second ground-truth CSV")->required();
    dg->add_option("--out", diff_out, "Output diff JSON")->required();

    // lint
    std::string folds_path, regions_path, region_image, fail_on = "fail", lint_out;
    double pedestal_threshold = 0.01;
    double centroid_threshold = hygiene::kDefaultCentroidThreshold;
    double uniform_threshold = hygiene::kDefaultUniformThresholdDeg;
    auto* li = app.add_subcommand("lint", "Run dataset hygiene checks");
    li->add_option("--manifest", manifest, "Dataset manifest JSON");
    li->add_option("--images", images, "PPM images for the pedestal check");
    li->add_option("--gt", gt_path, "Ground-truth CSV for the camera-split check");
    li->add_option("--folds", folds_path, "Fold spec JSON to audit");
    li->add_option("--regions", regions_path, "Region annotations JSON (uniform illumination)");
    li->add_option("--region-image", region_image, "Image the regions refer to");
    li->add_option("--pedestal-threshold", pedestal_threshold,
                   "Pedestal warn threshold as a fraction of saturation")
        ->capture_default_str();
    li->add_option("--centroid-threshold", centroid_threshold,
                   "Fold rb-centroid warn threshold")
        ->capture_default_str();
    li->add_option("--uniform-threshold", uniform_threshold,
                   "Uniform-illumination warn threshold in degrees")
        ->capture_default_str();
    li->add_option("--fail-on", fail_on, "Exit nonzero at this severity: warn|fail")
        ->capture_default_str();
    li->add_option("--out", lint_out, "Output lint report JSON")->required();

    // folds
    std::string ids_from, mode_str = "none", folds_file, folds_out;
    int k = 3;
    std::uint64_t seed = 0;
    auto* fo = app.add_subcommand("folds", "Build or validate cross-validation folds");
    fo->add_option("--ids-from", ids_from, "Ordered ids: manifest.json, gt .csv, or id-per-line")
        ->required();
    fo->add_option("--k", k, "Fold count")->capture_default_str();
    fo->add_option("--mode", mode_str, "none|seeded|external")->capture_default_str();
    fo->add_option("--seed", seed, "Shuffle seed (mode seeded)");
    fo->add_option("--folds-file", folds_file, "Existing fold JSON (mode external)");
    fo->add_option("--gt", gt_path, "Ground-truth CSV: also audit the folds");
    fo->add_option("--centroid-threshold", centroid_threshold, "Fold centroid warn threshold");
    fo->add_option("--out", folds_out, "Output fold JSON")->required();

    // simulate
    int n = 10, cameras = 1, width = 64, height = 48;
    double cct_min = 2500.0, cct_max = 7500.0, noise_sigma = 0.0;
    bool inject_black = false;
    auto* si = app.add_subcommand("simulate", "Render a synthetic benchmark dataset");
    si->add_option("--n", n, "Number of images")->capture_default_str();
    si->add_option("--cameras", cameras, "1 or 2 virtual cameras")->capture_default_str();
    si->add_option("--cct-min", cct_min, "Planckian CCT range low")->capture_default_str();
    si->add_option("--cct-max", cct_max, "Planckian CCT range high")->capture_default_str();
    si->add_option("--seed", seed, "Generator seed");
    si->add_option("--width", width, "Image width")->capture_default_str();
    si->add_option("--height", height, "Image height")->capture_default_str();
    si->add_flag("--inject-black", inject_black, "Leave the black-level pedestal in the images");
    si->add_option("--noise-sigma", noise_sigma, "Additive Gaussian noise (counts)");
    si->add_option("--out-dir", out_dir, "Output directory")->required();

    // oracle-experiment
    std::string black_levels_str = "64,129,256,512", oracle_out;
    auto* oe = app.add_subcommand("oracle-experiment",
                                  "Reproduce the oracle pipeline-mismatch demonstration");
    oe->add_option("--n", n, "Synthetic images")->capture_default_str();
    oe->add_option("--seed", seed, "Generator seed");
    oe->add_option("--cct-min", cct_min, "Planckian CCT range low")->capture_default_str();
    oe->add_option("--cct-max", cct_max, "Planckian CCT range high")->capture_default_str();
    oe->add_option("--black-levels", black_levels_str, "Comma-separated pedestal grid")
        ->capture_default_str();
    oe->add_option("--out", oracle_out, "Output report JSON")->required();

    // plot-chroma
    std::string plot_csv, plot_svg;
    auto* pc = app.add_subcommand("plot-chroma", "rb-chromaticity scatter of a ground truth");
    pc->add_option("--gt", gt_path, "Ground-truth CSV")->required();
    pc->add_option("--out-csv", plot_csv, "Output CSV")->required();
    pc->add_option("--out-svg", plot_svg, "Output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sub->parsed()) return cmd_subtract(images, manifest, out_dir, common.jobs);
        if (est->parsed())
            return cmd_estimate(images, manifest, estimator_str, do_subtract, unsafe, mask_margin,
                                est_out, common);
        if (ext->parsed())
            return cmd_extract_gt(images, manifest, annotations_path, do_subtract, unsafe,
                                  mask_margin, gt_out, common);
        if (ev->parsed())
            return cmd_evaluate(estimates_path, gt_path, estimator_label, pipeline_flag, gt_id,
                                tabulate_runs, force_mixed, eval_out);
        if (dg->parsed()) return cmd_diff_gt(diff_a, diff_b, diff_out);
        if (li->parsed())
            return cmd_lint(manifest, images, gt_path, folds_path, regions_path, region_image,
                            pedestal_threshold, centroid_threshold, uniform_threshold, fail_on,
                            lint_out, common);
        if (fo->parsed())
            return cmd_folds(ids_from, k, mode_str, seed, folds_file, gt_path,
                             centroid_threshold, folds_out);
        if (si->parsed())
            return cmd_simulate(n, cameras, cct_min, cct_max, seed, width, height, inject_black,
                                noise_sigma, out_dir, common.jobs);
        if (oe->parsed())
            return cmd_oracle(n, seed, cct_min, cct_max, black_levels_str, oracle_out,
                              common.jobs);
        if (pc->parsed()) return cmd_plot_chroma(gt_path, plot_csv, plot_svg);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
