#pragma once

#include "dannasep/blend.hpp"
#include "dannasep/bsseval.hpp"
#include "dannasep/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace dannasep {

// Weights file: {"models": [...], "sources": ["drums", "bass", "other",
// "vocals"], "weights": [[...], ...]} with one row per model.
nlohmann::json weights_to_json(const BlendWeights& weights);
BlendWeights weights_from_json(const nlohmann::json& j);
BlendWeights load_weights(const std::filesystem::path& path);
void save_weights(const BlendWeights& weights, const std::filesystem::path& path);

/// The weights file that ships with the tool (same values as
/// default_blend_weights()).
std::string default_weights_json();

/// {"sources": [...], "frames": {src: [dB | null, ...]}, "medians": {src: dB | null},
///  "overall_avg": dB | null, "config": {...}}; excluded frames are null.
nlohmann::json report_to_json(const SdrReport& report, const EvalConfig& cfg);

/// "Drums,Bass,Other,Vocals,Avg" header plus one row of medians.
std::string report_to_csv(const SdrReport& report);

/// Parses a pipeline description. Relative stem directories and weight
/// file paths are resolved against `base_dir`.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Parses a file as JSON, mapping I/O and syntax problems to IoFailure /
/// InvalidConfig.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Stable text form used for every JSON file we write.
std::string dump_json(const nlohmann::json& j);

}  // namespace dannasep
