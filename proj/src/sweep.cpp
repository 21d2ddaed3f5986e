#include "lls/sweep.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"
#include "lls/io.hpp"
#include "lls/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace lls {

const char* to_string(SweepMode m) { return m == SweepMode::Reoptimize ? "reoptimize" : "fixed_schedule"; }

SweepMode parse_sweep_mode(const std::string& s) {
  if (s == "reoptimize") return SweepMode::Reoptimize;
  if (s == "fixed_schedule") return SweepMode::FixedSchedule;
  throw ValidationError("unknown sweep mode '" + s + "'", {"grid.mode"});
}

std::vector<double> GridAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(std::max(n_points, 0)));
  for (int k = 0; k < n_points; ++k) {
    v[static_cast<std::size_t>(k)] =
        k == n_points - 1 ? max : min + (max - min) * static_cast<double>(k) / static_cast<double>(n_points - 1);
  }
  return v;
}

void SweepGrid::validate() const {
  auto check = [](const GridAxis& a, const std::string& key) {
    if (a.n_points < 2) throw ValidationError("n_points must be >= 2", {key + ".n_points"});
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) throw ValidationError("axis bounds must be finite", {key});
    if (!(a.min <= a.max)) throw ValidationError("axis min must be <= max", {key + ".min"});
  };
  check(nu_axis, "grid.nu_axis");
  check(delta_axis, "grid.delta_axis");
  if (mode == SweepMode::FixedSchedule && !reference) {
    throw ValidationError("fixed_schedule needs a reference result", {"grid.reference"});
  }
}

namespace {

using Clock = std::chrono::steady_clock;

HeatmapResult empty_result(const SweepGrid& grid) {
  HeatmapResult r;
  r.grid = grid;
  const auto n = static_cast<Eigen::Index>(grid.nu_axis.n_points);
  const auto m = static_cast<Eigen::Index>(grid.delta_axis.n_points);
  r.fidelity = Eigen::MatrixXd::Zero(n, m);
  r.converged.assign(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(m), false));
  return r;
}

// Row-major argmax; the first maximum wins.
void fill_best(HeatmapResult& r) {
  const auto nu = r.grid.nu_axis.values();
  const auto de = r.grid.delta_axis.values();
  BestPoint b;
  b.fidelity = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < r.fidelity.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.fidelity.cols(); ++j) {
      if (r.fidelity(i, j) > b.fidelity) {
        b = {nu[static_cast<std::size_t>(i)], de[static_cast<std::size_t>(j)], r.fidelity(i, j), static_cast<int>(i),
             static_cast<int>(j)};
      }
    }
  }
  r.best_point = b;
}

ControlParams deviated(const ControlParams& ref, double eps_nu, double eps_delta, bool relative) {
  return {relative ? ref.nu_hz * (1.0 + eps_nu) : ref.nu_hz + eps_nu, ref.delta_offset_hz + eps_delta};
}

}  // namespace

HeatmapResult heatmap(const QaoaProblem& problem, const SweepGrid& grid, const OptimizerSettings& settings,
                      int threads) {
  grid.validate();
  if (grid.mode != SweepMode::Reoptimize) throw ValidationError("heatmap needs mode reoptimize", {"grid.mode"});
  problem.validate();
  settings.validate();
  const auto t0 = Clock::now();
  HeatmapResult r = empty_result(grid);
  const auto nu = grid.nu_axis.values();
  const auto de = grid.delta_axis.values();
  const std::size_t m = de.size();
  r.cells.resize(nu.size() * m);
  r.bound = unitary_bound(problem.initial.matrix(), problem.target.matrix.matrix());

  parallel_for(r.cells.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / m, j = idx % m;
    QaoaProblem p = problem;
    p.ctrl = {nu[i], de[j]};
    OptimizerSettings s = settings;
    s.seed = mix_seed(settings.seed, idx);
    s.threads = 1;
    OptimResult best;
    best.ctrl = p.ctrl;
    try {
      best = optimize(p, s);
    } catch (const NumericalError&) {
      best.converged = false;
      best.fidelity = 0.0;
    }
    r.fidelity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = best.fidelity;
    r.cells[idx] = best;
  });
  for (std::size_t idx = 0; idx < r.cells.size(); ++idx) r.converged[idx / m][idx % m] = r.cells[idx].converged;
  fill_best(r);
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

HeatmapResult robustness_map(const QaoaProblem& problem, const SweepGrid& grid, int threads) {
  grid.validate();
  if (grid.mode != SweepMode::FixedSchedule) {
    throw ValidationError("robustness_map needs mode fixed_schedule", {"grid.mode"});
  }
  problem.validate();
  const OptimResult& ref = *grid.reference;
  if (static_cast<int>(ref.gammas.size()) != problem.layers || static_cast<int>(ref.betas.size()) != problem.layers) {
    throw ValidationError("reference schedule does not match the layer count", {"grid.reference"});
  }
  const auto t0 = Clock::now();
  HeatmapResult r = empty_result(grid);
  r.bound = unitary_bound(problem.initial.matrix(), problem.target.matrix.matrix());
  const auto nu = grid.nu_axis.values();
  const auto de = grid.delta_axis.values();
  const std::size_t m = de.size();
  parallel_for(nu.size() * m, threads, [&](std::size_t idx) {
    const std::size_t i = idx / m, j = idx % m;
    const QaoaEvaluator ev(problem, deviated(ref.ctrl, nu[i], de[j], grid.nu_relative));
    r.fidelity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ev.evaluate(ref.gammas, ref.betas).fidelity;
  });
  for (auto& row : r.converged) row.assign(row.size(), true);
  fill_best(r);
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

double total_protocol_fidelity(const QaoaProblem& prep, const OptimResult& prep_ref, const QaoaProblem& detect,
                               const OptimResult& detect_ref, double eps_nu, double eps_delta, bool nu_relative) {
  const SpinOperators ops(prep.system.n_spins);
  const Matrix singlet = -scalar_product_operator(ops, 0, 1).matrix();
  const QaoaEvaluator pe(prep, deviated(prep_ref.ctrl, eps_nu, eps_delta, nu_relative));
  const Matrix after = pe.final_state(prep_ref.gammas, prep_ref.betas);
  const double c = (singlet.adjoint() * after).trace().real() / singlet.squaredNorm();
  if (c == 0.0) return 0.0;

  QaoaProblem d = detect;
  d.initial = DeviationState::trusted(c * singlet);
  const QaoaEvaluator de(d, deviated(detect_ref.ctrl, eps_nu, eps_delta, nu_relative));
  const Matrix out = de.final_state(detect_ref.gammas, detect_ref.betas);
  const Matrix& target = detect.target.matrix.matrix();
  const double norm0 = prep.initial.matrix().norm();
  if (norm0 <= 1e-12 || target.norm() <= 1e-12) throw UndefinedFidelityError("zero-norm operator in total protocol");
  return (out * target).trace().real() / (norm0 * target.norm());
}

HeatmapResult total_protocol_map(const QaoaProblem& prep, const OptimResult& prep_ref, const QaoaProblem& detect,
                                 const OptimResult& detect_ref, const SweepGrid& grid, int threads) {
  grid.validate();
  prep.validate();
  detect.validate();
  if (prep.system.n_spins != detect.system.n_spins) {
    throw ValidationError("preparation and detection systems differ", {"detect.system"});
  }
  const auto t0 = Clock::now();
  HeatmapResult r = empty_result(grid);
  const auto nu = grid.nu_axis.values();
  const auto de = grid.delta_axis.values();
  const std::size_t m = de.size();
  parallel_for(nu.size() * m, threads, [&](std::size_t idx) {
    const std::size_t i = idx / m, j = idx % m;
    r.fidelity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        total_protocol_fidelity(prep, prep_ref, detect, detect_ref, nu[i], de[j], grid.nu_relative);
  });
  for (auto& row : r.converged) row.assign(row.size(), true);
  r.bound = unitary_bound(prep.initial.matrix(), detect.target.matrix.matrix());
  fill_best(r);
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

namespace {

std::pair<std::string, std::string> axis_columns(const SweepGrid& g) {
  if (g.mode == SweepMode::Reoptimize) return {"nu_hz", "delta_hz"};
  return {g.nu_relative ? "eps_nu_rel" : "eps_nu_hz", "eps_delta_hz"};
}

nlohmann::json axis_json(const GridAxis& a) { return {{"min", a.min}, {"max", a.max}, {"n_points", a.n_points}}; }

}  // namespace

std::string heatmap_csv(const HeatmapResult& r) {
  const auto [cn, cd] = axis_columns(r.grid);
  CsvBuilder csv({cn, cd, "fidelity", "converged"});
  const auto nu = r.grid.nu_axis.values();
  const auto de = r.grid.delta_axis.values();
  for (std::size_t i = 0; i < nu.size(); ++i) {
    for (std::size_t j = 0; j < de.size(); ++j) {
      csv.cell(nu[i]).cell(de[j]).cell(r.fidelity(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      csv.cell(static_cast<bool>(r.converged[i][j]));
      csv.end_row();
    }
  }
  return csv.str();
}

nlohmann::json heatmap_sidecar(const HeatmapResult& r) {
  const auto [cn, cd] = axis_columns(r.grid);
  nlohmann::json j;
  j["mode"] = to_string(r.grid.mode);
  j["columns"] = {cn, cd, "fidelity", "converged"};
  j["nu_axis"] = axis_json(r.grid.nu_axis);
  j["delta_axis"] = axis_json(r.grid.delta_axis);
  j["nu_relative"] = r.grid.nu_relative;
  j["bound"] = r.bound;
  j["best_point"] = {{cn, r.best_point.nu}, {cd, r.best_point.delta}, {"fidelity", r.best_point.fidelity},
                     {"i", r.best_point.i}, {"j", r.best_point.j}};
  if (r.grid.reference) {
    j["reference"] = {{"nu_hz", r.grid.reference->ctrl.nu_hz}, {"delta_hz", r.grid.reference->ctrl.delta_offset_hz}};
  }
  j["wall_time_s"] = r.wall_time;
  return j;
}

}  // namespace lls
