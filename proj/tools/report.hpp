#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "janglab/pipeline.hpp"
#include "run_config.hpp"

namespace jang_lab {

inline constexpr const char* kSchemaVersion = "1.0";

struct RunRecord {
    janglab::Stage stage;
    janglab::PipelineResult result;
};

/// Report with one block per stage that produced data. generated_at is omitted from the
/// caller's concern: pass the timestamp string (fixed under --fixed-clock).
nlohmann::json build_report(const RunConfig& cfg, const std::vector<RunRecord>& runs,
                            const std::string& generated_at);

/// Writes the CSV series of the last run that produced each block; returns the file names.
std::vector<std::string> write_series(const std::filesystem::path& dir, const RunConfig& cfg,
                                      const std::vector<RunRecord>& runs);

}  // namespace jang_lab
