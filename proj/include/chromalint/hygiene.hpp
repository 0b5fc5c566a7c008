#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chromalint/evaluation.hpp"
#include "chromalint/groundtruth.hpp"
#include "chromalint/image.hpp"

namespace chromalint::hygiene {

enum class Severity { info, warn, fail };

std::string to_string(Severity s);

// Fixed check registry; every finding must cite one of these ids.
inline const std::vector<std::string>& check_registry() {
    static const std::vector<std::string> ids = {
        "black-pedestal",         // un-removed black level heuristic
        "pipeline-identical",     // same estimates across allegedly different pipelines
        "pipeline-affinity",      // which ground truth an estimate set really matches
        "camera-two-line",        // multi-sensor two-line signature in rb
        "fold-camera-isolation",  // a camera confined to a single fold
        "fold-centroid-spread",   // fold illuminant distributions drift apart
        "uniform-illumination",   // multiple illuminants in one scene
    };
    return ids;
}

struct Finding {
    std::string check_id;
    Severity severity = Severity::info;
    std::string message;
    std::map<std::string, double> evidence;
    std::string image_id;  // empty for dataset-level findings
};

struct HygieneReport {
    std::vector<Finding> findings;

    void add(Finding f);                         // validates check_id
    void merge(std::vector<Finding> findings);   // add + deterministic sort
    void sort();                                 // (check_id, image_id, message) order
    bool has(Severity at_least) const;
};

// ---- black level presence -------------------------------------------------

// Per-channel 0.1th percentile compared against the saturation level: a floor
// well above zero in every channel is consistent with an un-removed pedestal.
Finding detect_unsubtracted_black(const LinearImage& img, double threshold_fraction = 0.01);

// ---- pipeline forensics ----------------------------------------------------

// (1) Flags estimate sets that are angularly identical across allegedly
// different pipelines; (2) reports which ground truth set `a` scores better
// against, with the median-error gap.
std::vector<Finding> pipeline_forensics(const EstimateSet& a, const EstimateSet& b,
                                        const GroundTruthTable& gt_sub,
                                        const GroundTruthTable& gt_unsub);

// ---- multi-sensor analysis --------------------------------------------------

// Total-least-squares line in the rb plane: point on line, unit direction,
// RMS orthogonal residual.
struct LineFit {
    double px = 0.0, py = 0.0;
    double dx = 1.0, dy = 0.0;
    double rms = 0.0;
};

LineFit fit_line_tls(const std::vector<RbPoint>& points);
double distance_to_line(const LineFit& line, const RbPoint& p);

struct CameraGroup {
    std::string camera_id;
    std::vector<std::pair<std::string, RbPoint>> points;  // image_id, rb
    LineFit fit;
};

struct CameraPairSeparation {
    std::string camera_a, camera_b;
    double sep_ab = 0.0;  // mean distance from A's points to B's line
    double sep_ba = 0.0;
    double cross = 0.0;  // mean of the two
};

struct CameraSplitReport {
    std::vector<CameraGroup> groups;
    std::vector<CameraPairSeparation> pairs;
    std::vector<Finding> findings;
};

// Groups the table by camera_id, fits one rb line per camera and warns on the
// two-line signature: cross-separation above 3x the worst within-camera RMS
// residual. Every camera group needs at least 2 points.
CameraSplitReport camera_split_analysis(const GroundTruthTable& gt);

constexpr double kTwoLineRatio = 3.0;

// ---- folds -------------------------------------------------------------------

enum class ShuffleMode { none, seeded, external };

std::string to_string(ShuffleMode m);
ShuffleMode shuffle_mode_from_string(const std::string& s);

struct FoldSpec {
    int k = 3;
    ShuffleMode mode = ShuffleMode::none;
    std::uint64_t seed = 0;
    std::string source;  // external mode: where the folds came from
    std::vector<std::vector<std::string>> folds;
};

// none: contiguous splits in input order, earlier folds take the remainder.
// seeded: Fisher-Yates with SplitMix64(seed), then contiguous splits.
FoldSpec make_folds(const std::vector<std::string>& ids, int k, ShuffleMode mode,
                    std::uint64_t seed = 0);

// Throws unless the folds are disjoint and cover `ids` exactly.
void validate_partition(const FoldSpec& spec, const std::vector<std::string>& ids);

FoldSpec load_folds(const std::filesystem::path& path);
void save_folds(const FoldSpec& spec, const std::filesystem::path& path);

// Per-fold camera composition and rb centroid. Warns when a camera appears in
// only one fold or when fold centroids drift further apart than the threshold.
std::vector<Finding> audit_folds(const FoldSpec& spec, const GroundTruthTable& gt,
                                 double centroid_threshold = 0.02);

constexpr double kDefaultCentroidThreshold = 0.02;

// ---- uniform illumination ------------------------------------------------------

// Mean RGB per labeled region, full pairwise angular-distance matrix, one warn
// finding per pair above the threshold (default 1 degree).
struct RegionCheckResult {
    std::vector<std::string> labels;
    std::vector<Rgb> means;
    std::vector<std::vector<double>> pairwise_deg;
    std::vector<Finding> findings;
};

RegionCheckResult uniform_illumination_check(const LinearImage& img,
                                             const std::vector<std::pair<std::string, Quad>>& regions,
                                             double threshold_deg = 1.0,
                                             const SaturationMask* mask = nullptr);

constexpr double kDefaultUniformThresholdDeg = 1.0;

}  // namespace chromalint::hygiene
