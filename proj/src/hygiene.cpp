#include "chromalint/hygiene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chromalint/rng.hpp"

namespace chromalint::hygiene {

namespace {

// Two-decimal formatting for human-facing messages; evidence keeps exact values.
std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string to_string(Severity s) {
    switch (s) {
        case Severity::info: return "info";
        case Severity::warn: return "warn";
        case Severity::fail: return "fail";
    }
    return "info";
}

void HygieneReport::add(Finding f) {
    const auto& reg = check_registry();
    if (std::find(reg.begin(), reg.end(), f.check_id) == reg.end())
        throw DataError("finding cites unknown check id \"" + f.check_id + "\"");
    findings.push_back(std::move(f));
}

void HygieneReport::merge(std::vector<Finding> more) {
    for (auto& f : more) add(std::move(f));
    sort();
}

void HygieneReport::sort() {
    std::stable_sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.check_id != b.check_id) return a.check_id < b.check_id;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.message < b.message;
    });
}

bool HygieneReport::has(Severity at_least) const {
    for (const auto& f : findings)
        if (static_cast<int>(f.severity) >= static_cast<int>(at_least)) return true;
    return false;
}

Finding detect_unsubtracted_black(const LinearImage& img, double threshold_fraction) {
    if (!(threshold_fraction > 0.0) || threshold_fraction >= 1.0)
        throw DataError("pedestal threshold fraction must be in (0,1)");

    Finding f;
    f.check_id = "black-pedestal";
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int c = 0; c < 3; ++c) {
        std::vector<double> chan(img.pixel_count());
        for (std::size_t p = 0; p < chan.size(); ++p) chan[p] = img.data[p * 3 + c];
        std::sort(chan.begin(), chan.end());
        double floor_c = quantile_sorted(chan, 0.001);  // 0.1th percentile
        double ratio = floor_c / img.saturation_level[c];
        const char* name = c == 0 ? "r" : (c == 1 ? "g" : "b");
        f.evidence[std::string("floor_") + name] = floor_c;
        f.evidence[std::string("floor_fraction_") + name] = ratio;
        min_ratio = std::min(min_ratio, ratio);
    }
    f.evidence["threshold_fraction"] = threshold_fraction;

    std::ostringstream msg;
    if (min_ratio > threshold_fraction) {
        f.severity = Severity::warn;
        msg << "darkest pixels sit at " << fmt2(min_ratio * 100.0)
            << "% of saturation in every channel; consistent with an un-removed black level"
            << (img.black_subtracted ? " (image claims to be subtracted)" : "");
    } else {
        f.severity = Severity::info;
        msg << "channel floors reach " << fmt2(min_ratio * 100.0)
            << "% of saturation; no pedestal signature";
    }
    f.message = msg.str();
    return f;
}

std::vector<Finding> pipeline_forensics(const EstimateSet& a, const EstimateSet& b,
                                        const GroundTruthTable& gt_sub,
                                        const GroundTruthTable& gt_unsub) {
    std::vector<std::string> shared;
    for (const auto& [id, e] : a)
        if (b.count(id)) shared.push_back(id);
    if (shared.empty()) throw DataError("estimate sets share no image ids");

    std::vector<Finding> out;

    std::size_t near_identical = 0;
    for (const auto& id : shared)
        if (angular_error(a.at(id), b.at(id)) < 0.01) ++near_identical;
    double frac = static_cast<double>(near_identical) / static_cast<double>(shared.size());
    {
        Finding f;
        f.check_id = "pipeline-identical";
        f.evidence["identical_fraction"] = frac;
        f.evidence["shared_images"] = static_cast<double>(shared.size());
        if (frac >= 0.99) {
            f.severity = Severity::fail;
            f.message = "estimate sets are angularly identical (<0.01 deg) for " +
                        fmt2(frac * 100.0) +
                        "% of images; the two pipelines produced the same estimates";
        } else {
            f.severity = Severity::info;
            f.message = "estimate sets agree within 0.01 deg on " + fmt2(frac * 100.0) +
                        "% of images";
        }
        out.push_back(std::move(f));
    }

    // Which ground truth does set `a` actually match?
    auto median_against = [&](const GroundTruthTable& gt) {
        std::vector<double> errs;
        for (const auto& [id, est] : a)
            if (gt.contains(id)) errs.push_back(angular_error(est, gt.at(id).illuminant));
        if (errs.empty()) throw DataError("estimate set shares no ids with a ground truth table");
        std::sort(errs.begin(), errs.end());
        return quantile_sorted(errs, 0.5);
    };
    double med_sub = median_against(gt_sub);
    double med_unsub = median_against(gt_unsub);
    {
        Finding f;
        f.check_id = "pipeline-affinity";
        f.evidence["median_vs_subtracted_gt"] = med_sub;
        f.evidence["median_vs_unsubtracted_gt"] = med_unsub;
        f.evidence["median_gap"] = std::abs(med_sub - med_unsub);
        if (med_unsub < med_sub) {
            f.severity = Severity::warn;
            f.message =
                "estimates score better against the unsubtracted-pipeline ground truth (median " +
                fmt2(med_unsub) + " vs " + fmt2(med_sub) +
                " deg); they were likely computed on images with the black level still present";
        } else {
            f.severity = Severity::info;
            f.message = "estimates score better against the subtracted-pipeline ground truth "
                        "(median " +
                        fmt2(med_sub) + " vs " + fmt2(med_unsub) + " deg)";
        }
        out.push_back(std::move(f));
    }
    return out;
}

LineFit fit_line_tls(const std::vector<RbPoint>& points) {
    if (points.size() < 2) throw DataError("line fit needs at least 2 points");
    double n = static_cast<double>(points.size());
    KahanSum sx, sy;
    for (const auto& p : points) {
        sx.add(p.r);
        sy.add(p.b);
    }
    double mx = sx.value() / n, my = sy.value() / n;
    KahanSum sxx, syy, sxy;
    for (const auto& p : points) {
        double dx = p.r - mx, dy = p.b - my;
        sxx.add(dx * dx);
        syy.add(dy * dy);
        sxy.add(dx * dy);
    }
    double a = sxx.value() / n, c = syy.value() / n, b = sxy.value() / n;

    // Principal axis of the 2x2 covariance; the orthogonal residual variance
    // is the smaller eigenvalue.
    double theta = 0.5 * std::atan2(2.0 * b, a - c);
    LineFit fit;
    fit.px = mx;
    fit.py = my;
    fit.dx = std::cos(theta);
    fit.dy = std::sin(theta);
    double half_tr = 0.5 * (a + c);
    double half_diff = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    double lambda_min = std::max(half_tr - half_diff, 0.0);
    fit.rms = std::sqrt(lambda_min);
    return fit;
}

double distance_to_line(const LineFit& line, const RbPoint& p) {
    double qx = p.r - line.px, qy = p.b - line.py;
    return std::abs(qx * line.dy - qy * line.dx);
}

CameraSplitReport camera_split_analysis(const GroundTruthTable& gt) {
    std::map<std::string, CameraGroup> groups;
    for (const auto& [id, rec] : gt.records()) {
        auto& g = groups[rec.camera_id];
        g.camera_id = rec.camera_id;
        g.points.emplace_back(id, rb_chromaticity(rec.illuminant));
    }

    CameraSplitReport report;
    for (auto& [cam, g] : groups) {
        if (g.points.size() < 2)
            throw DataError("camera group \"" + cam + "\" has fewer than 2 ground-truth points");
        std::vector<RbPoint> pts;
        pts.reserve(g.points.size());
        for (const auto& [id, p] : g.points) pts.push_back(p);
        g.fit = fit_line_tls(pts);
        report.groups.push_back(std::move(g));
    }

    for (std::size_t i = 0; i < report.groups.size(); ++i)
        for (std::size_t j = i + 1; j < report.groups.size(); ++j) {
            const auto& A = report.groups[i];
            const auto& B = report.groups[j];
            KahanSum dab, dba;
            for (const auto& [id, p] : A.points) dab.add(distance_to_line(B.fit, p));
            for (const auto& [id, p] : B.points) dba.add(distance_to_line(A.fit, p));
            CameraPairSeparation sep;
            sep.camera_a = A.camera_id;
            sep.camera_b = B.camera_id;
            sep.sep_ab = dab.value() / static_cast<double>(A.points.size());
            sep.sep_ba = dba.value() / static_cast<double>(B.points.size());
            sep.cross = 0.5 * (sep.sep_ab + sep.sep_ba);

            double worst_rms = std::max(A.fit.rms, B.fit.rms);
            Finding f;
            f.check_id = "camera-two-line";
            f.evidence["cross_separation"] = sep.cross;
            f.evidence["max_within_rms"] = worst_rms;
            f.evidence["ratio"] = worst_rms > 0.0 ? sep.cross / worst_rms
                                                  : std::numeric_limits<double>::infinity();
            if (sep.cross > kTwoLineRatio * worst_rms) {
                f.severity = Severity::warn;
                f.message = "ground truths of cameras \"" + A.camera_id + "\" and \"" +
                            B.camera_id + "\" form two distinct rb lines (separation " +
                            format_double(sep.cross) + " vs within-camera residual " +
                            format_double(worst_rms) +
                            "); treat evaluation on the combined set as inter-camera";
            } else {
                f.severity = Severity::info;
                f.message = "cameras \"" + A.camera_id + "\" and \"" + B.camera_id +
                            "\" share one rb line within residual";
            }
            report.findings.push_back(std::move(f));
            report.pairs.push_back(std::move(sep));
        }
    return report;
}

std::string to_string(ShuffleMode m) {
    switch (m) {
        case ShuffleMode::none: return "none";
        case ShuffleMode::seeded: return "seeded";
        case ShuffleMode::external: return "external";
    }
    return "none";
}

ShuffleMode shuffle_mode_from_string(const std::string& s) {
    if (s == "none") return ShuffleMode::none;
    if (s == "seeded") return ShuffleMode::seeded;
    if (s == "external") return ShuffleMode::external;
    throw DataError("unknown shuffle mode \"" + s + "\" (expected none|seeded|external)");
}

FoldSpec make_folds(const std::vector<std::string>& ids, int k, ShuffleMode mode,
                    std::uint64_t seed) {
    if (k < 2) throw DataError("fold count must be at least 2");
    if (static_cast<std::size_t>(k) > ids.size())
        throw DataError("fold count exceeds the number of ids");
    if (mode == ShuffleMode::external)
        throw DataError("external folds are loaded from a file, not generated");

    std::vector<std::string> order = ids;
    if (mode == ShuffleMode::seeded) fisher_yates_shuffle(order, seed);

    FoldSpec spec;
    spec.k = k;
    spec.mode = mode;
    spec.seed = mode == ShuffleMode::seeded ? seed : 0;
    std::size_t base = order.size() / k;
    std::size_t remainder = order.size() % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        std::size_t len = base + (static_cast<std::size_t>(f) < remainder ? 1 : 0);
        spec.folds.emplace_back(order.begin() + pos, order.begin() + pos + len);
        pos += len;
    }
    validate_partition(spec, ids);
    return spec;
}

void validate_partition(const FoldSpec& spec, const std::vector<std::string>& ids) {
    if (static_cast<int>(spec.folds.size()) != spec.k)
        throw DataError("fold spec has " + std::to_string(spec.folds.size()) + " folds, expected " +
                        std::to_string(spec.k));
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& fold : spec.folds)
        for (const auto& id : fold) {
            if (!seen.insert(id).second)
                throw DataError("id \"" + id + "\" appears in more than one fold");
            ++total;
        }
    std::set<std::string> expected(ids.begin(), ids.end());
    if (seen != expected || total != ids.size())
        throw DataError("folds do not cover the id set exactly");
}

FoldSpec load_folds(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open fold file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed fold file " + path.string() + ": " + e.what());
    }
    FoldSpec spec;
    try {
        spec.k = j.at("k").get<int>();
        spec.mode = shuffle_mode_from_string(j.at("mode").get<std::string>());
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.source = j.value("source", std::string{});
        for (const auto& fj : j.at("folds"))
            spec.folds.push_back(fj.get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("fold file " + path.string() + " missing fields: " + e.what());
    }
    // Internal consistency; cover is validated against the dataset by callers.
    std::set<std::string> seen;
    for (const auto& fold : spec.folds)
        for (const auto& id : fold)
            if (!seen.insert(id).second)
                throw DataError("id \"" + id + "\" appears in more than one fold: " +
                                path.string());
    if (static_cast<int>(spec.folds.size()) != spec.k)
        throw DataError("fold file k does not match the fold list: " + path.string());
    return spec;
}

void save_folds(const FoldSpec& spec, const std::filesystem::path& path) {
    nlohmann::json j;
    j["k"] = spec.k;
    j["mode"] = to_string(spec.mode);
    j["seed"] = spec.seed;
    if (!spec.source.empty()) j["source"] = spec.source;
    j["folds"] = spec.folds;
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<Finding> audit_folds(const FoldSpec& spec, const GroundTruthTable& gt,
                                 double centroid_threshold) {
    for (const auto& fold : spec.folds)
        for (const auto& id : fold)
            if (!gt.contains(id))
                throw DataError("fold id \"" + id + "\" is not in the ground-truth table");

    std::vector<Finding> out;

    // Camera composition per fold.
    std::map<std::string, std::set<int>> camera_folds;
    for (std::size_t f = 0; f < spec.folds.size(); ++f)
        for (const auto& id : spec.folds[f])
            camera_folds[gt.at(id).camera_id].insert(static_cast<int>(f));
    for (const auto& [cam, fold_set] : camera_folds) {
        if (fold_set.size() == 1 && camera_folds.size() > 1) {
            Finding f;
            f.check_id = "fold-camera-isolation";
            f.severity = Severity::warn;
            f.evidence["fold_index"] = static_cast<double>(*fold_set.begin() + 1);
            f.message = "camera \"" + cam + "\" present only in fold " +
                        std::to_string(*fold_set.begin() + 1) +
                        "; per-fold illuminant distributions will differ by construction";
            out.push_back(std::move(f));
        }
    }

    // rb centroid drift between folds.
    std::vector<RbPoint> centroids;
    for (const auto& fold : spec.folds) {
        KahanSum sr, sb;
        for (const auto& id : fold) {
            RbPoint p = rb_chromaticity(gt.at(id).illuminant);
            sr.add(p.r);
            sb.add(p.b);
        }
        double n = static_cast<double>(fold.size());
        centroids.push_back({sr.value() / n, sb.value() / n});
    }
    double max_dist = 0.0;
    int worst_a = 0, worst_b = 0;
    for (std::size_t i = 0; i < centroids.size(); ++i)
        for (std::size_t j = i + 1; j < centroids.size(); ++j) {
            double d = std::hypot(centroids[i].r - centroids[j].r,
                                  centroids[i].b - centroids[j].b);
            if (d > max_dist) {
                max_dist = d;
                worst_a = static_cast<int>(i);
                worst_b = static_cast<int>(j);
            }
        }
    {
        Finding f;
        f.check_id = "fold-centroid-spread";
        f.evidence["max_centroid_distance"] = max_dist;
        f.evidence["threshold"] = centroid_threshold;
        if (max_dist > centroid_threshold) {
            f.severity = Severity::warn;
            f.message = "rb centroids of folds " + std::to_string(worst_a + 1) + " and " +
                        std::to_string(worst_b + 1) + " are " + format_double(max_dist) +
                        " apart (threshold " + format_double(centroid_threshold) +
                        "); fold illuminant distributions differ";
        } else {
            f.severity = Severity::info;
            f.message = "fold rb centroids agree within " + format_double(max_dist);
        }
        out.push_back(std::move(f));
    }
    return out;
}

RegionCheckResult uniform_illumination_check(
    const LinearImage& img, const std::vector<std::pair<std::string, Quad>>& regions,
    double threshold_deg, const SaturationMask* mask) {
    if (regions.size() < 2) throw DataError("uniform-illumination check needs >= 2 regions");
    if (!img.black_subtracted)
        throw PipelineError("uniform-illumination check requires a black-subtracted image");

    SaturationMask local;
    if (!mask) {
        local = saturation_mask(img, kDefaultSaturationMargin);
        mask = &local;
    }

    RegionCheckResult result;
    for (const auto& [label, quad] : regions) {
        if (!quad.within_bounds(img.width, img.height))
            throw DataError("region \"" + label + "\" is outside the image");
        KahanSum sum[3];
        std::size_t count = 0;
        double xmin = quad.pts[0][0], xmax = xmin, ymin = quad.pts[0][1], ymax = ymin;
        for (const auto& p : quad.pts) {
            xmin = std::min(xmin, p[0]);
            xmax = std::max(xmax, p[0]);
            ymin = std::min(ymin, p[1]);
            ymax = std::max(ymax, p[1]);
        }
        for (int y = std::max(0, static_cast<int>(std::floor(ymin)));
             y <= std::min(img.height - 1, static_cast<int>(std::ceil(ymax))); ++y)
            for (int x = std::max(0, static_cast<int>(std::floor(xmin)));
                 x <= std::min(img.width - 1, static_cast<int>(std::ceil(xmax))); ++x) {
                if (!quad.contains(x + 0.5, y + 0.5)) continue;
                if (mask->at(x, y))
                    throw DataError("region \"" + label + "\" contains clipped pixels");
                for (int c = 0; c < 3; ++c) sum[c].add(img.at(x, y, c));
                ++count;
            }
        if (count == 0) throw DataError("region \"" + label + "\" samples no pixels");
        double n = static_cast<double>(count);
        result.labels.push_back(label);
        result.means.push_back({sum[0].value() / n, sum[1].value() / n, sum[2].value() / n});
    }

    std::size_t nr = result.labels.size();
    result.pairwise_deg.assign(nr, std::vector<double>(nr, 0.0));
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = i + 1; j < nr; ++j) {
            double ang = angular_error(result.means[i], result.means[j]);
            result.pairwise_deg[i][j] = ang;
            result.pairwise_deg[j][i] = ang;
            Finding f;
            f.check_id = "uniform-illumination";
            f.evidence["angle_deg"] = ang;
            f.evidence["threshold_deg"] = threshold_deg;
            if (ang > threshold_deg) {
                f.severity = Severity::warn;
                f.message = "regions \"" + result.labels[i] + "\" and \"" + result.labels[j] +
                            "\" differ by " + fmt2(ang) +
                            " deg; the uniform-illumination assumption is violated";
            } else {
                f.severity = Severity::info;
                f.message = "regions \"" + result.labels[i] + "\" and \"" + result.labels[j] +
                            "\" agree within " + fmt2(ang) + " deg";
            }
            result.findings.push_back(std::move(f));
        }
    return result;
}

}  // namespace chromalint::hygiene
