#include "chromalint/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "chromalint/groundtruth.hpp"

namespace chromalint {

double angular_error(const Rgb& a, const Rgb& b) {
    double na = norm(a);
    double nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0))
        throw DataError("angular error undefined for the zero vector");
    // arccos of the clamped normalized dot product, evaluated via the
    // half-angle form: acos loses ~1e-6 deg of resolution next to 0, which
    // would swamp the 1e-9 identity guarantee.
    Rgb ua = a * (1.0 / na);
    Rgb ub = b * (1.0 / nb);
    double diff = norm(ua - ub);
    double sum = norm(ua + ub);
    return 2.0 * std::atan2(diff, sum) * (180.0 / 3.14159265358979323846);
}

double angular_error(const Illuminant& a, const Illuminant& b) {
    return angular_error(a.rgb(), b.rgb());
}

double quantile_sorted(const std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty()) throw DataError("quantile of an empty sequence");
    double pos = q * static_cast<double>(sorted_values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

ErrorStats compute_stats(std::vector<double> errors) {
    if (errors.empty()) throw DataError("cannot compute statistics of an empty error set");
    std::sort(errors.begin(), errors.end());

    ErrorStats s;
    KahanSum total;
    for (double e : errors) total.add(e);
    double n = static_cast<double>(errors.size());
    s.mean = total.value() / n;

    double q1 = quantile_sorted(errors, 0.25);
    s.median = quantile_sorted(errors, 0.50);
    double q3 = quantile_sorted(errors, 0.75);
    s.trimean = (q1 + 2.0 * s.median + q3) / 4.0;

    std::size_t quarter = (errors.size() + 3) / 4;  // ceil(n/4)
    KahanSum best, worst;
    for (std::size_t i = 0; i < quarter; ++i) {
        best.add(errors[i]);
        worst.add(errors[errors.size() - 1 - i]);
    }
    s.best25_mean = best.value() / static_cast<double>(quarter);
    s.worst25_mean = worst.value() / static_cast<double>(quarter);
    s.max = errors.back();
    return s;
}

std::string to_string(PipelineTag tag) {
    return tag == PipelineTag::subtracted ? "subtracted" : "unsubtracted";
}

PipelineTag pipeline_tag_from_string(const std::string& s) {
    if (s == "subtracted") return PipelineTag::subtracted;
    if (s == "unsubtracted") return PipelineTag::unsubtracted;
    throw DataError("unknown pipeline tag \"" + s + "\" (expected subtracted|unsubtracted)");
}

EvaluationRun evaluate(const EstimateSet& estimates, const GroundTruthTable& gt,
                       const std::string& estimator_label, PipelineTag pipeline,
                       const std::string& ground_truth_id) {
    EvaluationRun run;
    run.estimator = estimator_label;
    run.pipeline = pipeline;
    run.ground_truth_id = ground_truth_id;
    for (const auto& [id, est] : estimates) {
        if (!gt.contains(id)) continue;
        run.per_image_error[id] = angular_error(est, gt.at(id).illuminant);
    }
    if (run.per_image_error.empty())
        throw DataError("no image ids shared between estimates and ground truth");
    std::vector<double> errs;
    errs.reserve(run.per_image_error.size());
    for (const auto& [id, e] : run.per_image_error) errs.push_back(e);
    run.stats = compute_stats(std::move(errs));
    return run;
}

std::string tabulate(const std::vector<EvaluationRun>& runs, bool force_mixed) {
    if (runs.empty()) throw DataError("no runs to tabulate");
    std::set<std::string> gt_ids;
    for (const auto& r : runs) gt_ids.insert(r.ground_truth_id);
    if (gt_ids.size() > 1 && !force_mixed) {
        std::string list;
        for (const auto& id : gt_ids) list += (list.empty() ? "" : ", ") + id;
        throw DataError("refusing to tabulate runs with mixed ground-truth versions (" + list +
                        "); errors against different ground truths are not comparable "
                        "(pass --force-mixed to override)");
    }

    std::ostringstream os;
    os << std::left << std::setw(34) << "estimator" << std::setw(14) << "pipeline" << std::setw(18)
       << "ground_truth" << std::right << std::setw(8) << "mean" << std::setw(8) << "med"
       << std::setw(8) << "tri" << std::setw(8) << "b25" << std::setw(8) << "w25" << std::setw(8)
       << "max" << "\n";
    os << std::setfill('-') << std::setw(34 + 14 + 18 + 6 * 8) << "" << std::setfill(' ') << "\n";
    for (const auto& r : runs) {
        os << std::left << std::setw(34) << r.estimator << std::setw(14) << to_string(r.pipeline)
           << std::setw(18) << r.ground_truth_id << std::right << std::fixed
           << std::setprecision(2) << std::setw(8) << r.stats.mean << std::setw(8)
           << r.stats.median << std::setw(8) << r.stats.trimean << std::setw(8)
           << r.stats.best25_mean << std::setw(8) << r.stats.worst25_mean << std::setw(8)
           << r.stats.max << "\n";
        os.unsetf(std::ios::fixed);
    }
    return os.str();
}

EstimateSet read_estimates_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open estimates file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty estimates file: " + path.string());
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "image_id,R,G,B")
        throw DataError("estimates CSV must start with header \"image_id,R,G,B\": " +
                        path.string());
    EstimateSet out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id, rs, gs, bs;
        if (!std::getline(row, id, ',') || !std::getline(row, rs, ',') ||
            !std::getline(row, gs, ',') || !std::getline(row, bs))
            throw DataError("bad estimates row at line " + std::to_string(lineno) + ": " +
                            path.string());
        if (out.count(id))
            throw DataError("duplicate image id \"" + id + "\" in " + path.string());
        try {
            out.emplace(id, Illuminant(std::stod(rs), std::stod(gs), std::stod(bs)));
        } catch (const std::exception& e) {
            throw DataError("bad estimates row at line " + std::to_string(lineno) + " (" +
                            e.what() + "): " + path.string());
        }
    }
    if (out.empty()) throw DataError("estimates file has no rows: " + path.string());
    return out;
}

void write_estimates_csv(const EstimateSet& estimates, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "image_id,R,G,B\n";
    for (const auto& [id, e] : estimates)
        out << id << "," << format_double(e.r()) << "," << format_double(e.g()) << ","
            << format_double(e.b()) << "\n";
}

}  // namespace chromalint
