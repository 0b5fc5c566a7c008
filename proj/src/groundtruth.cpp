#include "chromalint/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace chromalint {

void PatchAnnotation::validate() const {
    if (image_id.empty()) throw DataError("annotation without image_id");
    if (patches.empty()) throw DataError("annotation for \"" + image_id + "\" has no patches");
    if (!(inset >= 0.0) || inset >= 0.5)
        throw DataError("annotation inset must be in [0, 0.5): " + image_id);
    for (const auto& q : patches)
        if (!q.is_convex())
            throw DataError("annotation patch for \"" + image_id + "\" is not convex");
}

AnnotationSet read_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotations file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed annotations " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw DataError("annotations must be a JSON list: " + path.string());

    AnnotationSet out;
    for (const auto& entry : j) {
        PatchAnnotation ann;
        ann.image_id = entry.value("image_id", std::string{});
        ann.inset = entry.value("inset", 0.15);
        if (!entry.contains("patches") || !entry["patches"].is_array())
            throw DataError("annotation for \"" + ann.image_id + "\" lacks patches: " +
                            path.string());
        for (const auto& pj : entry["patches"]) {
            if (!pj.is_array() || pj.size() != 4)
                throw DataError("patch must have 4 vertices: " + ann.image_id);
            Quad q;
            for (int i = 0; i < 4; ++i) {
                q.pts[i][0] = pj[i][0].get<double>();
                q.pts[i][1] = pj[i][1].get<double>();
            }
            ann.patches.push_back(q);
        }
        ann.validate();
        if (out.count(ann.image_id))
            throw DataError("duplicate annotation for \"" + ann.image_id + "\"");
        out.emplace(ann.image_id, std::move(ann));
    }
    return out;
}

void write_annotations(const AnnotationSet& annotations, const std::filesystem::path& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [id, ann] : annotations) {
        nlohmann::json e;
        e["image_id"] = id;
        e["inset"] = ann.inset;
        nlohmann::json patches = nlohmann::json::array();
        for (const auto& q : ann.patches) {
            nlohmann::json quad = nlohmann::json::array();
            for (const auto& p : q.pts) quad.push_back({p[0], p[1]});
            patches.push_back(quad);
        }
        e["patches"] = patches;
        j.push_back(e);
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

void GroundTruthTable::insert(const std::string& image_id, const Illuminant& e,
                              const std::string& camera_id) {
    if (records_.count(image_id))
        throw DataError("duplicate image id \"" + image_id + "\" in ground-truth table");
    records_.emplace(image_id, GroundTruthRecord{e, camera_id});
}

const GroundTruthRecord& GroundTruthTable::at(const std::string& image_id) const {
    auto it = records_.find(image_id);
    if (it == records_.end())
        throw DataError("image id \"" + image_id + "\" not in ground-truth table");
    return it->second;
}

std::vector<std::string> GroundTruthTable::ids() const {
    std::vector<std::string> out;
    out.reserve(records_.size());
    for (const auto& [id, rec] : records_) out.push_back(id);
    return out;
}

GroundTruthTable GroundTruthTable::load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ground-truth file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty ground-truth file: " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "image_id,R,G,B,camera_id")
        throw DataError("ground-truth CSV must start with header \"image_id,R,G,B,camera_id\": " +
                        path.string());
    GroundTruthTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, rs, gs, bs, cam;
        if (!std::getline(row, id, ',') || !std::getline(row, rs, ',') ||
            !std::getline(row, gs, ',') || !std::getline(row, bs, ',') || !std::getline(row, cam))
            throw DataError("bad ground-truth row at line " + std::to_string(lineno) + ": " +
                            path.string());
        try {
            table.insert(id, Illuminant(std::stod(rs), std::stod(gs), std::stod(bs)), cam);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("bad ground-truth row at line " + std::to_string(lineno) + " (" +
                            e.what() + "): " + path.string());
        }
    }
    if (table.size() == 0) throw DataError("ground-truth file has no rows: " + path.string());
    return table;
}

void GroundTruthTable::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "image_id,R,G,B,camera_id\n";
    for (const auto& [id, rec] : records_)
        out << id << "," << format_double(rec.illuminant.r()) << ","
            << format_double(rec.illuminant.g()) << "," << format_double(rec.illuminant.b()) << ","
            << rec.camera_id << "\n";
}

namespace {

// Equal-weight mean RGB over pixel centers inside the quad. Returns the count
// of sampled pixels; `clipped` reports whether any sample was flagged.
std::size_t patch_mean(const LinearImage& img, const Quad& quad, const SaturationMask& mask,
                       Rgb& mean_out, bool& clipped) {
    double xmin = quad.pts[0][0], xmax = xmin, ymin = quad.pts[0][1], ymax = ymin;
    for (const auto& p : quad.pts) {
        xmin = std::min(xmin, p[0]);
        xmax = std::max(xmax, p[0]);
        ymin = std::min(ymin, p[1]);
        ymax = std::max(ymax, p[1]);
    }
    int x0 = std::max(0, static_cast<int>(std::floor(xmin)));
    int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(xmax)));
    int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
    int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(ymax)));

    KahanSum sum[3];
    std::size_t count = 0;
    clipped = false;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            if (!quad.contains(x + 0.5, y + 0.5)) continue;
            if (mask.at(x, y)) clipped = true;
            for (int c = 0; c < 3; ++c) sum[c].add(img.at(x, y, c));
            ++count;
        }
    if (count > 0)
        mean_out = {sum[0].value() / static_cast<double>(count),
                    sum[1].value() / static_cast<double>(count),
                    sum[2].value() / static_cast<double>(count)};
    return count;
}

}  // namespace

Illuminant extract_ground_truth(const LinearImage& img, const PatchAnnotation& ann,
                                const SaturationMask& mask, bool allow_unsubtracted) {
    ann.validate();
    if (!img.black_subtracted && !allow_unsubtracted)
        throw PipelineError(
            "ground-truth extraction requires a black-subtracted image; subtract the black level "
            "first (the unsafe override exists only to demonstrate the wrong pipeline)");
    if (mask.width != img.width || mask.height != img.height)
        throw DataError("saturation mask dimensions do not match the image");

    KahanSum acc[3];
    std::size_t surviving = 0;
    for (const auto& patch : ann.patches) {
        if (!patch.within_bounds(img.width, img.height))
            throw DataError("annotation patch outside image bounds for \"" + ann.image_id + "\"");
        Rgb mean;
        bool clipped = false;
        std::size_t count = patch_mean(img, patch.shrunk(ann.inset), mask, mean, clipped);
        if (count == 0)
            throw DataError("annotation patch too small to sample for \"" + ann.image_id + "\"");
        if (clipped) continue;  // all-or-nothing discard of clipped patches
        for (int c = 0; c < 3; ++c) acc[c].add(mean[c]);
        ++surviving;
    }
    if (surviving == 0)
        throw DataError("no usable achromatic patch (all patches clipped) for \"" + ann.image_id +
                        "\"");
    double n = static_cast<double>(surviving);
    return Illuminant(acc[0].value() / n, acc[1].value() / n, acc[2].value() / n);
}

GroundTruthDiff diff_ground_truths(const GroundTruthTable& a, const GroundTruthTable& b) {
    GroundTruthDiff diff;
    for (const auto& [id, rec] : a.records()) {
        if (!b.contains(id)) continue;
        diff.per_image_angle[id] = angular_error(rec.illuminant, b.at(id).illuminant);
    }
    if (diff.per_image_angle.empty())
        throw DataError("ground-truth tables share no image ids");
    std::vector<double> angles;
    angles.reserve(diff.per_image_angle.size());
    for (const auto& [id, ang] : diff.per_image_angle) angles.push_back(ang);
    std::sort(angles.begin(), angles.end());
    diff.stats = compute_stats(angles);
    diff.p75 = quantile_sorted(angles, 0.75);
    return diff;
}

}  // namespace chromalint
