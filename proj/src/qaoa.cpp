#include "lls/qaoa.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"
#include "lls/io.hpp"
#include "lls/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace lls {

const char* to_string(Direction d) {
  switch (d) {
    case Direction::MToS:
      return "M_to_S";
    case Direction::SToM:
      return "S_to_M";
    case Direction::Custom:
      return "custom";
  }
  return "?";
}

Direction parse_direction(const std::string& s) {
  if (s == "M_to_S") return Direction::MToS;
  if (s == "S_to_M") return Direction::SToM;
  if (s == "custom") return Direction::Custom;
  throw ValidationError("unknown direction '" + s + "'", {"problem.direction"});
}

void QaoaProblem::validate() const {
  system.validate();
  if (layers < 1) throw ValidationError("layers must be >= 1", {"problem.layers"});
  if (!(ctrl.nu_hz >= 0.0) || !std::isfinite(ctrl.nu_hz)) throw ValidationError("nu_hz must be >= 0", {"problem.nu_hz"});
  if (!std::isfinite(ctrl.delta_offset_hz)) throw ValidationError("delta_hz must be finite", {"problem.delta_hz"});
  cost.validate();
  if (!(bounds.min_s >= 0.0)) throw ValidationError("duration lower bound must be >= 0", {"problem.bounds.min_ms"});
  if (!(bounds.max_s >= bounds.min_s) || !std::isfinite(bounds.max_s)) {
    throw ValidationError("duration upper bound must be finite and >= lower bound", {"problem.bounds.max_ms"});
  }
  const int dim = 1 << system.n_spins;
  if (initial.dim() != dim) throw ValidationError("initial state dimension mismatch", {"problem.initial"});
  if (target.matrix.dim() != dim) throw ValidationError("target dimension mismatch", {"problem.target"});
  if (control_search.enabled) {
    if (!(control_search.nu_min_hz >= 0.0 && control_search.nu_max_hz >= control_search.nu_min_hz) ||
        !(control_search.delta_max_hz >= control_search.delta_min_hz)) {
      throw ValidationError("invalid control search ranges", {"problem.control_search"});
    }
  }
}

std::uint64_t QaoaProblem::hash() const {
  std::string s;
  auto put = [&](double v) {
    s += format_double(v);
    s += ';';
  };
  s += std::to_string(system.n_spins) + ';';
  for (double o : system.offsets_hz) put(o);
  for (Eigen::Index i = 0; i < system.j_couplings_hz.size(); ++i) put(system.j_couplings_hz.data()[i]);
  s += std::to_string(layers) + ';';
  put(ctrl.nu_hz);
  put(ctrl.delta_offset_hz);
  put(cost.r);
  put(cost.time_unit_scale);
  put(bounds.min_s);
  put(bounds.max_s);
  s += to_string(direction);
  s += ';';
  s += to_string(target.kind);
  s += ';';
  s += std::to_string(control_search.enabled);
  auto h = fnv1a64(s);
  h = fnv1a64(initial.matrix().data(), static_cast<std::size_t>(initial.matrix().size()) * sizeof(Complex), h);
  h = fnv1a64(target.matrix.matrix().data(), static_cast<std::size_t>(target.matrix.matrix().size()) * sizeof(Complex),
              h);
  return h;
}

QaoaProblem make_m2s_problem(const SpinSystem& system, int layers, ControlParams ctrl, double r) {
  QaoaProblem p;
  p.system = system;
  p.layers = layers;
  p.ctrl = ctrl;
  p.initial = thermal_and_initial_states(system).initial;
  p.target = build_target(TargetSpec{TargetKind::SingletOrder, {{0, 1}}, {}}, system);
  p.cost.r = r;
  p.direction = Direction::MToS;
  return p;
}

QaoaProblem make_s2m_problem(const SpinSystem& system, int layers, ControlParams ctrl, double r) {
  QaoaProblem p;
  p.system = system;
  p.layers = layers;
  p.ctrl = ctrl;
  auto singlet = build_target(TargetSpec{TargetKind::SingletOrder, {{0, 1}}, {}}, system);
  p.initial = DeviationState(singlet.matrix, "singlet_order");
  p.target = build_target(TargetSpec{TargetKind::AntiphaseMagnetization, {{0, 1}}, {}}, system);
  p.cost.r = r;
  p.direction = Direction::SToM;
  return p;
}

bool needs_initial_rotation(const QaoaProblem& problem) {
  if (problem.direction != Direction::MToS) return false;
  const SpinOperators ops(problem.system.n_spins);
  const Matrix& a = problem.initial.matrix();
  const Matrix& z = ops.total_z().matrix();
  if (a.norm() <= kZeroNormTolerance) return false;
  return fidelity(a, z) > 1.0 - 1e-12;
}

namespace {

void check_lengths(const QaoaProblem& problem, const std::vector<double>& gammas, const std::vector<double>& betas) {
  if (static_cast<int>(gammas.size()) != problem.layers || static_cast<int>(betas.size()) != problem.layers) {
    throw ValidationError("gammas and betas must each have " + std::to_string(problem.layers) + " entries",
                          {"gammas", "betas"});
  }
  for (double d : gammas)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("durations must be finite and >= 0", {"gammas"});
  for (double d : betas)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("durations must be finite and >= 0", {"betas"});
}

double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

PulseSchedule build_qaoa_schedule(const QaoaProblem& problem, const std::vector<double>& gammas,
                                  const std::vector<double>& betas) {
  check_lengths(problem, gammas, betas);
  const SpinOperators ops(problem.system.n_spins);
  auto ha = std::make_shared<const OperatorMatrix>(build_h0(problem.system, ops));
  auto hb = std::make_shared<const OperatorMatrix>(build_hb(*ha, ops, problem.ctrl));
  PulseSchedule s;
  if (needs_initial_rotation(problem)) s.add_rotation(Axis::Y, M_PI / 2.0, 0.0, "init_90y");
  for (int i = 0; i < problem.layers; ++i) {
    s.add_segment(ha, gammas[static_cast<std::size_t>(i)], "A" + std::to_string(i + 1));
    s.add_segment(hb, betas[static_cast<std::size_t>(i)], "B" + std::to_string(i + 1));
  }
  return s;
}

QaoaEvaluator::QaoaEvaluator(const QaoaProblem& problem, ControlParams ctrl)
    : layers_(problem.layers), cost_(problem.cost) {
  const SpinOperators ops(problem.system.n_spins);
  const OperatorMatrix ha = build_h0(problem.system, ops);
  const OperatorMatrix hb = build_hb(ha, ops, ctrl);
  pa_ = PropagatorCache::global().get(ha);
  pb_ = PropagatorCache::global().get(hb);
  start_ = problem.initial.matrix();
  if (needs_initial_rotation(problem)) {
    const Matrix u = rotation_unitary(problem.system.n_spins, Axis::Y, M_PI / 2.0);
    start_ = u * start_ * u.adjoint();
  }
  target_ = problem.target.matrix.matrix();
}

Matrix QaoaEvaluator::final_state(const std::vector<double>& gammas, const std::vector<double>& betas) const {
  Matrix rho = start_;
  for (int i = 0; i < layers_; ++i) {
    rho = pa_->apply(rho, gammas[static_cast<std::size_t>(i)]);
    rho = pb_->apply(rho, betas[static_cast<std::size_t>(i)]);
  }
  return rho;
}

Evaluation QaoaEvaluator::evaluate(const std::vector<double>& gammas, const std::vector<double>& betas) const {
  const Matrix rho = final_state(gammas, betas);
  Evaluation e;
  e.fidelity = fidelity(rho, target_);
  e.total_time = sum_of(gammas) + sum_of(betas);
  std::vector<double> all = gammas;
  all.insert(all.end(), betas.begin(), betas.end());
  e.cost = scalarized_cost(e.fidelity, all, cost_);
  return e;
}

Evaluation evaluate_schedule(const QaoaProblem& problem, const std::vector<double>& gammas,
                             const std::vector<double>& betas) {
  problem.validate();
  check_lengths(problem, gammas, betas);
  return QaoaEvaluator(problem).evaluate(gammas, betas);
}

void OptimizerSettings::validate() const {
  if (n_starts < 1) throw ValidationError("n_starts must be >= 1", {"optimizer.n_starts"});
  if (max_evals < 10) throw ValidationError("max_evals must be >= 10", {"optimizer.max_evals"});
  if (!(rhobeg > 0.0) || !(rhoend > 0.0) || rhoend > rhobeg) {
    throw ValidationError("need 0 < rhoend <= rhobeg", {"optimizer.rhobeg", "optimizer.rhoend"});
  }
  if (init_max_s && !(*init_max_s > 0.0)) throw ValidationError("init_max_ms must be > 0", {"optimizer.init_max_ms"});
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

namespace {

constexpr double kControlScale = 1e-3;  // optimizer variable = Hz * 1e-3

OptimResult run_start(const QaoaProblem& problem, const OptimizerSettings& settings, int start) {
  const auto p = static_cast<std::size_t>(problem.layers);
  const bool ctl = problem.control_search.enabled;
  const std::size_t n = 2 * p + (ctl ? 2 : 0);
  std::vector<double> lower(n, problem.bounds.min_s), upper(n, problem.bounds.max_s), x0(n);
  if (ctl) {
    lower[2 * p] = problem.control_search.nu_min_hz * kControlScale;
    upper[2 * p] = problem.control_search.nu_max_hz * kControlScale;
    lower[2 * p + 1] = problem.control_search.delta_min_hz * kControlScale;
    upper[2 * p + 1] = problem.control_search.delta_max_hz * kControlScale;
  }

  const double jmax = problem.system.max_coupling_hz();
  const double quarter = jmax > 0.0 ? 1.0 / (4.0 * jmax) : 0.25 * problem.bounds.max_s;
  const double init_hi =
      std::min(problem.bounds.max_s, settings.init_max_s ? *settings.init_max_s : 0.5 * quarter);
  const std::uint64_t seed = mix_seed(settings.seed, static_cast<std::uint64_t>(start));
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < 2 * p; ++i) {
    if (start == 0) {
      x0[i] = std::clamp(quarter, problem.bounds.min_s, problem.bounds.max_s);
    } else {
      x0[i] = problem.bounds.min_s + unit_uniform(rng()) * std::max(0.0, init_hi - problem.bounds.min_s);
    }
  }
  if (ctl) {
    for (std::size_t i = 2 * p; i < n; ++i) {
      x0[i] = start == 0 ? std::clamp(i == 2 * p ? problem.ctrl.nu_hz * kControlScale
                                                 : problem.ctrl.delta_offset_hz * kControlScale,
                                      lower[i], upper[i])
                         : lower[i] + unit_uniform(rng()) * (upper[i] - lower[i]);
    }
  }

  std::optional<QaoaEvaluator> fixed;
  if (!ctl) fixed.emplace(problem);
  std::vector<double> g(p), b(p);
  auto split = [&](const std::vector<double>& x) {
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p), g.begin());
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(p), x.begin() + static_cast<std::ptrdiff_t>(2 * p), b.begin());
  };
  auto objective = [&](const std::vector<double>& x) {
    split(x);
    if (!ctl) return fixed->evaluate(g, b).cost;
    ControlParams c{x[2 * p] / kControlScale, x[2 * p + 1] / kControlScale};
    return QaoaEvaluator(problem, c).evaluate(g, b).cost;
  };

  CobylaSettings cs{settings.rhobeg, settings.rhoend, settings.max_evals};
  const CobylaResult cr = cobyla_bounded(objective, x0, lower, upper, cs);

  OptimResult r;
  split(cr.x);
  r.gammas = g;
  r.betas = b;
  r.ctrl = ctl ? ControlParams{cr.x[2 * p] / kControlScale, cr.x[2 * p + 1] / kControlScale} : problem.ctrl;
  const Evaluation e = ctl ? QaoaEvaluator(problem, r.ctrl).evaluate(g, b) : fixed->evaluate(g, b);
  r.fidelity = e.fidelity;
  r.total_time = e.total_time;
  r.cost = e.cost;
  r.n_evals = cr.n_evals;
  r.status = cr.status;
  r.converged = cr.status == CobylaStatus::Converged;
  r.seed = seed;
  r.start_index = start;
  r.bound = unitary_bound(problem.initial.matrix(), problem.target.matrix.matrix());
  return r;
}

}  // namespace

std::vector<OptimResult> optimize_all_starts(const QaoaProblem& problem, const OptimizerSettings& settings) {
  problem.validate();
  settings.validate();
  std::vector<OptimResult> runs(static_cast<std::size_t>(settings.n_starts));
  parallel_for(runs.size(), settings.threads,
               [&](std::size_t i) { runs[i] = run_start(problem, settings, static_cast<int>(i)); });
  return runs;
}

OptimResult pick_best(const std::vector<OptimResult>& runs) {
  if (runs.empty()) throw ValidationError("no optimizer runs to choose from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const auto& a = runs[i];
    const auto& b = runs[best];
    if (a.cost < b.cost || (a.cost == b.cost && (a.total_time < b.total_time ||
                                                 (a.total_time == b.total_time && a.start_index < b.start_index)))) {
      best = i;
    }
  }
  return runs[best];
}

OptimResult optimize(const QaoaProblem& problem, const OptimizerSettings& settings) {
  return pick_best(optimize_all_starts(problem, settings));
}

nlohmann::json to_json(const OptimResult& r, const QaoaProblem& problem) {
  auto ms = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) out.push_back(x * 1e3);
    return out;
  };
  nlohmann::json j;
  j["problem_hash"] = to_hex(problem.hash());
  j["direction"] = to_string(problem.direction);
  j["layers"] = problem.layers;
  j["gammas_ms"] = ms(r.gammas);
  j["betas_ms"] = ms(r.betas);
  j["nu_hz"] = r.ctrl.nu_hz;
  j["delta_hz"] = r.ctrl.delta_offset_hz;
  j["fidelity"] = r.fidelity;
  j["bound"] = r.bound;
  j["total_time_ms"] = r.total_time * 1e3;
  j["cost"] = r.cost;
  j["n_evals"] = r.n_evals;
  j["converged"] = r.converged;
  j["status"] = to_string(r.status);
  j["seed"] = r.seed;
  j["start_index"] = r.start_index;
  return j;
}

OptimResult optim_result_from_json(const nlohmann::json& j) {
  OptimResult r;
  try {
    for (double v : j.at("gammas_ms").get<std::vector<double>>()) r.gammas.push_back(v * 1e-3);
    for (double v : j.at("betas_ms").get<std::vector<double>>()) r.betas.push_back(v * 1e-3);
    r.ctrl.nu_hz = j.at("nu_hz").get<double>();
    r.ctrl.delta_offset_hz = j.at("delta_hz").get<double>();
    r.fidelity = j.value("fidelity", 0.0);
    r.bound = j.value("bound", 0.0);
    r.total_time = j.value("total_time_ms", 0.0) * 1e-3;
    r.cost = j.value("cost", 0.0);
    r.n_evals = j.value("n_evals", 0);
    r.converged = j.value("converged", true);
    r.seed = j.value("seed", std::uint64_t{0});
    r.start_index = j.value("start_index", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad optimizer record: ") + e.what(), {"reference"});
  }
  if (r.gammas.size() != r.betas.size() || r.gammas.empty()) {
    throw ValidationError("reference needs equal-length non-empty gammas_ms and betas_ms", {"reference"});
  }
  return r;
}

}  // namespace lls
