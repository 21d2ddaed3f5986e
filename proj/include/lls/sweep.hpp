#pragma once

// Fidelity maps over the control plane (nu, Delta).
//
// reoptimize:     every cell runs the multi-start optimizer with (nu, Delta)
//                 fixed to the cell values
// fixed_schedule: durations held at a reference result; cells are deviations
//                 (eps_nu, eps_Delta) added to the reference controls

#include "lls/qaoa.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lls {

enum class SweepMode { Reoptimize, FixedSchedule };

const char* to_string(SweepMode m);
SweepMode parse_sweep_mode(const std::string& s);

struct GridAxis {
  double min = 0.0;
  double max = 1.0;
  int n_points = 2;

  /// Evenly spaced, both ends included.
  std::vector<double> values() const;
};

struct SweepGrid {
  GridAxis nu_axis{5.0, 100.0, 20};
  GridAxis delta_axis{-20.0, 20.0, 20};
  SweepMode mode = SweepMode::Reoptimize;
  std::optional<OptimResult> reference;
  /// fixed_schedule only: nu_axis holds fractions of the reference nu
  /// instead of Hz.
  bool nu_relative = false;

  void validate() const;
};

struct BestPoint {
  double nu = 0.0;
  double delta = 0.0;
  double fidelity = 0.0;
  int i = 0;  // nu index
  int j = 0;  // delta index
};

struct HeatmapResult {
  SweepGrid grid;
  /// fidelity(i, j): i over nu_axis, j over delta_axis.
  Eigen::MatrixXd fidelity;
  std::vector<std::vector<bool>> converged;
  BestPoint best_point;
  double wall_time = 0.0;
  double bound = 0.0;
  /// reoptimize only: the winning run per cell, row-major over (i, j).
  std::vector<OptimResult> cells;
};

/// Per-cell seeds are mix_seed(settings.seed, cell index), so the result does
/// not depend on `threads`. A cell whose optimizer throws a NumericalError is
/// recorded as fidelity 0, converged false.
HeatmapResult heatmap(const QaoaProblem& problem, const SweepGrid& grid, const OptimizerSettings& settings,
                      int threads = 1);

/// Controls per cell: (nu_ref + eps_nu or nu_ref * (1 + eps_nu), Delta_ref + eps_Delta).
HeatmapResult robustness_map(const QaoaProblem& problem, const SweepGrid& grid, int threads = 1);

/// M->S, then projection onto the -I1.I2 component (ideal storage filter), then
/// S->M scored against the detection target. The same deviation is applied to
/// both halves. Fidelity is normalized by the norm of the initial state, so
/// with no deviation it equals F_prep * F_detect.
HeatmapResult total_protocol_map(const QaoaProblem& prep, const OptimResult& prep_ref, const QaoaProblem& detect,
                                 const OptimResult& detect_ref, const SweepGrid& grid, int threads = 1);

/// Composed fidelity of the M->S->M protocol at the given deviation.
double total_protocol_fidelity(const QaoaProblem& prep, const OptimResult& prep_ref, const QaoaProblem& detect,
                               const OptimResult& detect_ref, double eps_nu, double eps_delta, bool nu_relative);

/// Columns nu_hz, delta_hz, fidelity, converged (eps_nu or eps_nu_rel and
/// eps_delta_hz for fixed-schedule maps); rows ordered nu-major.
std::string heatmap_csv(const HeatmapResult& r);
nlohmann::json heatmap_sidecar(const HeatmapResult& r);

}  // namespace lls
