#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chromalint/illuminant.hpp"

namespace chromalint {

// Angle between two illuminant directions in degrees; scale-invariant in both
// arguments, dot product clamped into [-1,1] before the arccos.
double angular_error(const Rgb& a, const Rgb& b);
double angular_error(const Illuminant& a, const Illuminant& b);

// The benchmark statistics block. Quartiles use linear interpolation at
// positions (n-1)*q; best/worst 25% are means of the lowest/highest
// ceil(n/4) values.
struct ErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double trimean = 0.0;
    double best25_mean = 0.0;
    double worst25_mean = 0.0;
    double max = 0.0;
};

ErrorStats compute_stats(std::vector<double> errors);

// Linear-interpolation quantile at position (n-1)*q of an ascending-sorted
// sequence.
double quantile_sorted(const std::vector<double>& sorted_values, double q);

using EstimateSet = std::map<std::string, Illuminant>;

// Which preprocessing produced a set of estimates. Runs carry this tag so the
// wrong and right methodologies can never be conflated silently.
enum class PipelineTag { subtracted, unsubtracted };

std::string to_string(PipelineTag tag);
PipelineTag pipeline_tag_from_string(const std::string& s);

struct EvaluationRun {
    std::string estimator;
    PipelineTag pipeline = PipelineTag::subtracted;
    std::string ground_truth_id;
    std::map<std::string, double> per_image_error;  // degrees
    ErrorStats stats;
};

class GroundTruthTable;

EvaluationRun evaluate(const EstimateSet& estimates, const GroundTruthTable& gt,
                       const std::string& estimator_label, PipelineTag pipeline,
                       const std::string& ground_truth_id);

// Plain-text comparison table over several runs. Refuses to mix ground-truth
// versions in one table unless forced.
std::string tabulate(const std::vector<EvaluationRun>& runs, bool force_mixed = false);

// Estimates CSV: header "image_id,R,G,B".
EstimateSet read_estimates_csv(const std::filesystem::path& path);
void write_estimates_csv(const EstimateSet& estimates, const std::filesystem::path& path);

}  // namespace chromalint
