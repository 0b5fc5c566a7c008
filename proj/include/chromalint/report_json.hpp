#pragma once

#include <filesystem>

#include <json.hpp>

#include "chromalint/evaluation.hpp"
#include "chromalint/groundtruth.hpp"
#include "chromalint/hygiene.hpp"

namespace chromalint {

nlohmann::json stats_to_json(const ErrorStats& s);
ErrorStats stats_from_json(const nlohmann::json& j);

nlohmann::json run_to_json(const EvaluationRun& run);
EvaluationRun run_from_json(const nlohmann::json& j);

nlohmann::json diff_to_json(const GroundTruthDiff& diff);

nlohmann::json finding_to_json(const hygiene::Finding& f);
nlohmann::json findings_to_json(const std::vector<hygiene::Finding>& findings);

// Estimates with provenance. Next to the bare CSV format this JSON carries the
// pipeline tag, so downstream evaluation cannot lose it.
nlohmann::json estimates_to_json(const EstimateSet& estimates, PipelineTag pipeline);
std::pair<EstimateSet, PipelineTag> estimates_from_json(const nlohmann::json& j);

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace chromalint
