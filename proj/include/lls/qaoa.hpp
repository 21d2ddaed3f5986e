#pragma once

// QAOA schedules: p layers of (H_A for gamma_i, then H_B for beta_i), with
// H_A = H_0 and H_B = H_0 - 2 pi nu I^x - 2 pi Delta I^z.

#include "lls/cobyla.hpp"
#include "lls/hamiltonian.hpp"
#include "lls/objective.hpp"
#include "lls/propagation.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lls {

enum class Direction { MToS, SToM, Custom };

const char* to_string(Direction d);
Direction parse_direction(const std::string& s);

struct DurationBounds {
  double min_s = 0.0;
  double max_s = 0.1;
};

/// Optional search over the RF amplitude and offset alongside the durations.
struct ControlSearch {
  bool enabled = false;
  double nu_min_hz = 0.0;
  double nu_max_hz = 200.0;
  double delta_min_hz = -50.0;
  double delta_max_hz = 50.0;
};

struct QaoaProblem {
  SpinSystem system;
  int layers = 2;
  ControlParams ctrl;
  DeviationState initial;
  TargetOperator target;
  CostConfig cost;
  DurationBounds bounds;
  Direction direction = Direction::MToS;
  ControlSearch control_search;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Stable hash of everything that defines the problem.
  std::uint64_t hash() const;
};

/// Two-spin magnetization-to-singlet problem from I^x (no initialization pulse).
QaoaProblem make_m2s_problem(const SpinSystem& system, int layers, ControlParams ctrl, double r = 0.4);

/// Two-spin singlet-to-antiphase problem from -I1.I2.
QaoaProblem make_s2m_problem(const SpinSystem& system, int layers, ControlParams ctrl, double r = 0.4);

/// True when the M->S initialization (pi/2)_y is needed: direction MToS and the
/// initial state is the thermal sum of I^z.
bool needs_initial_rotation(const QaoaProblem& problem);

PulseSchedule build_qaoa_schedule(const QaoaProblem& problem, const std::vector<double>& gammas,
                                  const std::vector<double>& betas);

struct Evaluation {
  double fidelity = 0.0;
  double total_time = 0.0;
  double cost = 0.0;
};

/// Precomputed eigendecompositions of H_A and H_B for one control setting;
/// evaluate() is the hot path of the optimizer.
class QaoaEvaluator {
 public:
  QaoaEvaluator(const QaoaProblem& problem, ControlParams ctrl);
  explicit QaoaEvaluator(const QaoaProblem& problem) : QaoaEvaluator(problem, problem.ctrl) {}

  Evaluation evaluate(const std::vector<double>& gammas, const std::vector<double>& betas) const;
  Matrix final_state(const std::vector<double>& gammas, const std::vector<double>& betas) const;

 private:
  int layers_;
  CostConfig cost_;
  Matrix start_;   // initial state after any initialization rotation
  Matrix target_;
  std::shared_ptr<const HermitianPropagator> pa_;
  std::shared_ptr<const HermitianPropagator> pb_;
};

Evaluation evaluate_schedule(const QaoaProblem& problem, const std::vector<double>& gammas,
                             const std::vector<double>& betas);

struct OptimizerSettings {
  int max_evals = 2000;
  double rhobeg = 5e-3;
  double rhoend = 1e-6;
  int n_starts = 8;
  std::uint64_t seed = 1;
  /// Random starts are drawn uniformly from [min_s, min(max_s, init_max_s)].
  /// Unset means 1/(8 max|J|), half the deterministic start value.
  std::optional<double> init_max_s;
  int threads = 1;

  void validate() const;
};

struct OptimResult {
  std::vector<double> gammas;  // s
  std::vector<double> betas;   // s
  ControlParams ctrl;
  double fidelity = 0.0;
  double total_time = 0.0;
  double cost = 0.0;
  int n_evals = 0;
  bool converged = false;
  CobylaStatus status = CobylaStatus::Converged;
  std::uint64_t seed = 0;
  int start_index = 0;
  double bound = 0.0;
};

/// Uniform double in [0, 1) from a 64-bit draw; platform independent.
double unit_uniform(std::uint64_t bits);

/// Multi-start COBYLA over the 2p durations (plus nu, Delta when enabled).
/// Start 0 is deterministic at gamma_i = beta_i = 1/(4 max|J|); the rest are
/// uniform random from a generator seeded by mix_seed(seed, start). The best
/// run by cost wins, ties broken by total time then start index.
OptimResult optimize(const QaoaProblem& problem, const OptimizerSettings& settings);

/// Every start's result, in start order.
std::vector<OptimResult> optimize_all_starts(const QaoaProblem& problem, const OptimizerSettings& settings);

OptimResult pick_best(const std::vector<OptimResult>& runs);

nlohmann::json to_json(const OptimResult& r, const QaoaProblem& problem);
/// Reads gammas_ms / betas_ms / nu_hz / delta_hz back; other fields as stored.
OptimResult optim_result_from_json(const nlohmann::json& j);

}  // namespace lls
