#pragma once

// JSON experiment configuration. The schema is described in README.md; every
// rejection is a ValidationError carrying the dotted path of the bad key.

#include "lls/baselines.hpp"
#include "lls/decay_fit.hpp"
#include "lls/qaoa.hpp"
#include "lls/sweep.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lls {

enum class Command { Optimize, Evaluate, Heatmap, Robustness, TotalProtocol, Trajectory, Baseline, Search, FitDecay };

const char* to_string(Command c);
Command parse_command(const std::string& s);

struct TrajectorySettings {
  std::vector<TripletPartner> partners{TripletPartner::T0};
  std::pair<int, int> pair{0, 1};
  std::optional<double> record_every_s;
  int steps_per_segment = 50;
};

struct ExperimentConfig {
  Command command = Command::Evaluate;
  std::string name;
  std::uint64_t seed = 1;
  int threads = 1;
  nlohmann::json raw;

  SpinSystem system;
  std::optional<QaoaProblem> problem;
  std::optional<OptimResult> schedule;  // gammas/betas/ctrl only
  OptimizerSettings optimizer;
  std::optional<SweepGrid> grid;
  std::optional<QaoaProblem> detect_problem;
  std::optional<OptimResult> detect_schedule;
  std::optional<BaselineSpec> baseline;
  PulseOptions pulses;
  std::optional<SearchGrid> search;
  Method search_method = Method::CL;
  bool keep_points = true;
  std::optional<DecaySeries> decay;
  DecayFitOptions decay_options;
  TrajectorySettings trajectory;
};

/// Relative paths inside the config resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical (sorted-key) dump.
std::uint64_t config_hash(const nlohmann::json& j);

}  // namespace lls
