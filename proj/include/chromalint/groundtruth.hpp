#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chromalint/evaluation.hpp"
#include "chromalint/illuminant.hpp"
#include "chromalint/image.hpp"

namespace chromalint {

// Annotated achromatic chart patches for one image, ordered brightest to
// darkest. `inset` shrinks each quad toward its centroid before sampling to
// stay clear of patch borders.
struct PatchAnnotation {
    std::string image_id;
    std::vector<Quad> patches;
    double inset = 0.15;

    void validate() const;
};

using AnnotationSet = std::map<std::string, PatchAnnotation>;

AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const AnnotationSet& annotations, const std::filesystem::path& path);

struct GroundTruthRecord {
    Illuminant illuminant;
    std::string camera_id;
};

class GroundTruthTable {
public:
    void insert(const std::string& image_id, const Illuminant& e, const std::string& camera_id);
    bool contains(const std::string& image_id) const { return records_.count(image_id) != 0; }
    const GroundTruthRecord& at(const std::string& image_id) const;
    const std::map<std::string, GroundTruthRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    std::vector<std::string> ids() const;

    // CSV with header "image_id,R,G,B,camera_id"; unnormalized triples are
    // accepted on read and normalized on load.
    static GroundTruthTable load_csv(const std::filesystem::path& path);
    void save_csv(const std::filesystem::path& path) const;

private:
    std::map<std::string, GroundTruthRecord> records_;
};

// Mean RGB per inset-shrunk patch, clipped patches discarded whole, surviving
// patch means averaged with equal weight and normalized. Requires a
// black-subtracted image unless the unsafe override is set.
Illuminant extract_ground_truth(const LinearImage& img, const PatchAnnotation& ann,
                                const SaturationMask& mask, bool allow_unsubtracted = false);

struct GroundTruthDiff {
    std::map<std::string, double> per_image_angle;  // degrees
    ErrorStats stats;
    double p75 = 0.0;  // 75th percentile of the per-image angles
};

GroundTruthDiff diff_ground_truths(const GroundTruthTable& a, const GroundTruthTable& b);

}  // namespace chromalint
