#pragma once

// Runs one parsed config and writes its outputs plus manifest.json.

#include "lls/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace lls {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  bool strict = false;
};

struct RunOutcome {
  std::vector<std::filesystem::path> files;  // manifest last
  nlohmann::json summary;                    // also printed by the CLI
  /// Some optimizer run (or heatmap cell) stopped before converging.
  bool non_converged = false;
};

/// Outputs go to out_dir, created if missing. On any exception every file
/// this run wrote is removed before rethrowing.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          const RunOptions& options = {});

/// Human-readable summary of a finished output directory (reads manifest.json
/// and the primary result file).
std::string report(const std::filesystem::path& out_dir);

}  // namespace lls
