#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "janglab/model.hpp"
#include "janglab/pipeline.hpp"

namespace jang_lab {

/// Everything a run needs, read from the config file.
struct RunConfig {
    janglab::ModelData model;
    janglab::PipelineOptions options;
    std::vector<janglab::Stage> stages;  ///< optional list from the file, in run order
    std::optional<std::string> output_dir;
};

/// Throws janglab::ValidationError naming the offending key. Unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Normalized form with every default filled in; feeding it back gives the same RunConfig.
nlohmann::json to_json(const RunConfig& cfg);

/// Stages that need spherically symmetric data (everything but alpha and mass).
bool needs_spherical(janglab::Stage stage);

}  // namespace jang_lab
