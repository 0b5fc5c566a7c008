#include "chromalint/report_json.hpp"

#include <fstream>

namespace chromalint {

nlohmann::json stats_to_json(const ErrorStats& s) {
    return {{"mean", s.mean},           {"median", s.median},
            {"trimean", s.trimean},     {"best25_mean", s.best25_mean},
            {"worst25_mean", s.worst25_mean}, {"max", s.max}};
}

ErrorStats stats_from_json(const nlohmann::json& j) {
    ErrorStats s;
    s.mean = j.at("mean").get<double>();
    s.median = j.at("median").get<double>();
    s.trimean = j.at("trimean").get<double>();
    s.best25_mean = j.at("best25_mean").get<double>();
    s.worst25_mean = j.at("worst25_mean").get<double>();
    s.max = j.at("max").get<double>();
    return s;
}

nlohmann::json run_to_json(const EvaluationRun& run) {
    nlohmann::json j;
    j["estimator"] = run.estimator;
    j["pipeline"] = to_string(run.pipeline);
    j["ground_truth_id"] = run.ground_truth_id;
    j["per_image_error"] = run.per_image_error;
    j["stats"] = stats_to_json(run.stats);
    if (run.pipeline == PipelineTag::unsubtracted)
        j["methodology_warning"] =
            "estimates were computed on images WITHOUT black-level subtraction; these errors "
            "are not comparable with correctly-processed results";
    return j;
}

EvaluationRun run_from_json(const nlohmann::json& j) {
    EvaluationRun run;
    run.estimator = j.at("estimator").get<std::string>();
    run.pipeline = pipeline_tag_from_string(j.at("pipeline").get<std::string>());
    run.ground_truth_id = j.at("ground_truth_id").get<std::string>();
    run.per_image_error = j.at("per_image_error").get<std::map<std::string, double>>();
    run.stats = stats_from_json(j.at("stats"));
    return run;
}

nlohmann::json diff_to_json(const GroundTruthDiff& diff) {
    nlohmann::json j;
    j["per_image_angle"] = diff.per_image_angle;
    j["stats"] = stats_to_json(diff.stats);
    j["p75"] = diff.p75;
    return j;
}

nlohmann::json finding_to_json(const hygiene::Finding& f) {
    nlohmann::json j;
    j["check_id"] = f.check_id;
    j["severity"] = hygiene::to_string(f.severity);
    j["message"] = f.message;
    j["evidence"] = f.evidence;
    if (!f.image_id.empty()) j["image_id"] = f.image_id;
    return j;
}

nlohmann::json findings_to_json(const std::vector<hygiene::Finding>& findings) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : findings) arr.push_back(finding_to_json(f));
    return arr;
}

nlohmann::json estimates_to_json(const EstimateSet& estimates, PipelineTag pipeline) {
    nlohmann::json j;
    j["pipeline"] = to_string(pipeline);
    nlohmann::json rows = nlohmann::json::object();
    for (const auto& [id, e] : estimates) rows[id] = {e.r(), e.g(), e.b()};
    j["estimates"] = rows;
    if (pipeline == PipelineTag::unsubtracted)
        j["methodology_warning"] =
            "estimates were computed on images WITHOUT black-level subtraction";
    return j;
}

std::pair<EstimateSet, PipelineTag> estimates_from_json(const nlohmann::json& j) {
    EstimateSet out;
    PipelineTag tag = pipeline_tag_from_string(j.at("pipeline").get<std::string>());
    for (const auto& [id, v] : j.at("estimates").items())
        out.emplace(id, Illuminant(v[0].get<double>(), v[1].get<double>(), v[2].get<double>()));
    if (out.empty()) throw DataError("estimates JSON has no entries");
    return {std::move(out), tag};
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON " + path.string() + ": " + e.what());
    }
    return j;
}

}  // namespace chromalint
