#include "lls/config.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"
#include "lls/io.hpp"

#include <cmath>
#include <set>

namespace lls {

using nlohmann::json;

const char* to_string(Command c) {
  switch (c) {
    case Command::Optimize:
      return "optimize";
    case Command::Evaluate:
      return "evaluate";
    case Command::Heatmap:
      return "heatmap";
    case Command::Robustness:
      return "robustness";
    case Command::TotalProtocol:
      return "total_protocol";
    case Command::Trajectory:
      return "trajectory";
    case Command::Baseline:
      return "baseline";
    case Command::Search:
      return "search";
    case Command::FitDecay:
      return "fit-decay";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (Command c : {Command::Optimize, Command::Evaluate, Command::Heatmap, Command::Robustness, Command::TotalProtocol,
                    Command::Trajectory, Command::Baseline, Command::Search, Command::FitDecay}) {
    if (s == to_string(c)) return c;
  }
  throw ValidationError("unknown command '" + s + "'", {"command"});
}

namespace {

// Object view that remembers which keys were read, so leftovers can be
// reported as unknown in one error.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(label() + " must be an object", {label()});
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k) && !j_.at(k).is_null();
  }
  const json& at(const std::string& k) {
    if (!has(k)) throw ValidationError("missing required key " + key(k), {key(k)});
    return j_.at(k);
  }

  double num(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number()) throw ValidationError(key(k) + " must be a number", {key(k)});
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(key(k) + " must be finite", {key(k)});
    return d;
  }
  double num(const std::string& k, double def) { return has(k) ? num(k) : def; }

  long long integer(const std::string& k) {
    const json& v = at(k);
    if (!v.is_number_integer()) throw ValidationError(key(k) + " must be an integer", {key(k)});
    return v.get<long long>();
  }
  long long integer(const std::string& k, long long def) { return has(k) ? integer(k) : def; }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ValidationError(key(k) + " must be true or false", {key(k)});
    return v.get<bool>();
  }

  std::string str(const std::string& k) {
    const json& v = at(k);
    if (!v.is_string()) throw ValidationError(key(k) + " must be a string", {key(k)});
    return v.get<std::string>();
  }
  std::string str(const std::string& k, const std::string& def) { return has(k) ? str(k) : def; }

  std::vector<double> numbers(const std::string& k) {
    const json& v = at(k);
    if (!v.is_array()) throw ValidationError(key(k) + " must be an array of numbers", {key(k)});
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError(key(k) + " must be an array of numbers", {key(k)});
      out.push_back(e.get<double>());
      if (!std::isfinite(out.back())) throw ValidationError(key(k) + " must be finite", {key(k)});
    }
    return out;
  }

  Node child(const std::string& k) { return Node(at(k), key(k)); }

  void finish() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) unknown.push_back(key(k));
    }
    if (unknown.empty()) return;
    if (sink) {
      sink->insert(sink->end(), unknown.begin(), unknown.end());
      return;
    }
    throw ValidationError(unknown_message(unknown), unknown);
  }

  static std::string unknown_message(const std::vector<std::string>& unknown) {
    std::string msg = "unknown key(s):";
    for (const auto& u : unknown) msg += " " + u;
    return msg;
  }

  // While set, finish() collects unknown keys here instead of throwing.
  static thread_local std::vector<std::string>* sink;

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

thread_local std::vector<std::string>* Node::sink = nullptr;

// Rethrows library validation errors under the config key they came from.
template <class F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    if (e.keys().empty()) throw ValidationError(key + ": " + e.what(), {key});
    // Library keys are relative ("offsets_hz", "target.pairs"); anchor them.
    const std::string last = key.substr(key.rfind('.') + 1);
    std::vector<std::string> keys;
    for (const auto& k : e.keys()) {
      if (k.rfind(key, 0) == 0) {
        keys.push_back(k);
      } else if (k == last || k.rfind(last + ".", 0) == 0) {
        keys.push_back(key + k.substr(last.size()));
      } else {
        keys.push_back(key + "." + k);
      }
    }
    throw ValidationError(e.what(), keys);
  } catch (const DimensionError& e) {
    throw ValidationError(key + ": " + e.what(), {key});
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

SpinSystem parse_system(Node n) {
  SpinSystem s;
  if (n.has("delta_hz") || n.has("j_hz")) {
    s = SpinSystem::two_spin(n.num("delta_hz"), n.num("j_hz"));
  } else {
    const long long ns = n.integer("n_spins");
    if (ns < 1 || ns > kMaxSpins) {
      throw ValidationError("system.n_spins must be in [1, " + std::to_string(kMaxSpins) + "]", {"system.n_spins"});
    }
    s.n_spins = static_cast<int>(ns);
    s.offsets_hz = n.numbers("offsets_hz");
    const json& jj = n.at("j_couplings_hz");
    if (!jj.is_array() || jj.size() != static_cast<std::size_t>(ns)) {
      throw ValidationError("system.j_couplings_hz must be an n_spins x n_spins array", {"system.j_couplings_hz"});
    }
    s.j_couplings_hz = Eigen::MatrixXd::Zero(ns, ns);
    for (long long i = 0; i < ns; ++i) {
      const json& row = jj[static_cast<std::size_t>(i)];
      if (!row.is_array() || row.size() != static_cast<std::size_t>(ns)) {
        throw ValidationError("system.j_couplings_hz must be an n_spins x n_spins array", {"system.j_couplings_hz"});
      }
      for (long long k = 0; k < ns; ++k) {
        const json& v = row[static_cast<std::size_t>(k)];
        if (!v.is_number()) throw ValidationError("system.j_couplings_hz entries must be numbers", {"system.j_couplings_hz"});
        s.j_couplings_hz(i, k) = v.get<double>();
      }
    }
  }
  n.finish();
  keyed("system", [&] { s.validate(); });
  return s;
}

std::vector<std::pair<int, int>> parse_pairs(const json& v, const std::string& key) {
  std::vector<std::pair<int, int>> out;
  if (!v.is_array()) throw ValidationError(key + " must be a list of [i, j] pairs", {key});
  for (const auto& p : v) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      throw ValidationError(key + " must be a list of [i, j] pairs", {key});
    }
    out.emplace_back(p[0].get<int>(), p[1].get<int>());
  }
  return out;
}

TargetOperator parse_target(const json& v, const std::string& key, const SpinSystem& sys,
                            const std::filesystem::path& base) {
  TargetSpec spec;
  if (v.is_string()) {
    spec.kind = keyed(key, [&] { return parse_target_kind(v.get<std::string>()); });
  } else {
    Node n(v, key);
    spec.kind = keyed(n.key("kind"), [&] { return parse_target_kind(n.str("kind")); });
    if (n.has("pairs")) spec.pairs = parse_pairs(n.at("pairs"), n.key("pairs"));
    if (n.has("custom_path")) spec.custom_path = resolve(base, n.str("custom_path"));
    n.finish();
  }
  return keyed(key, [&] { return build_target(spec, sys); });
}

DeviationState parse_initial(const json& v, const std::string& key, const SpinSystem& sys,
                             const std::filesystem::path& base) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "sum_x") return thermal_and_initial_states(sys).initial;
    if (s == "thermal") return thermal_and_initial_states(sys).thermal;
    if (s == "singlet_order" || s == "antiphase") {
      return DeviationState(
          parse_target(json(s == "singlet_order" ? "singlet_order" : "antiphase_magnetization"), key, sys, base).matrix,
          s);
    }
    throw ValidationError(key + " must be sum_x, thermal, singlet_order, antiphase or {custom_path}", {key});
  }
  Node n(v, key);
  const auto path = resolve(base, n.str("custom_path"));
  n.finish();
  return keyed(key, [&] { return DeviationState(OperatorMatrix(load_complex_matrix_csv(path)), "custom"); });
}

QaoaProblem parse_problem(Node n, const SpinSystem& sys, const std::filesystem::path& base) {
  QaoaProblem p;
  p.system = sys;
  p.direction = keyed(n.key("direction"), [&] { return parse_direction(n.str("direction", "M_to_S")); });
  const long long layers = n.integer("layers", 2);
  if (layers < 1 || layers > 64) throw ValidationError("layers must be in [1, 64]", {n.key("layers")});
  p.layers = static_cast<int>(layers);
  p.ctrl.nu_hz = n.num("nu_hz", 100.0);
  p.ctrl.delta_offset_hz = n.num("delta_hz", 0.0);
  if (p.ctrl.nu_hz < 0.0) throw ValidationError("nu_hz must be >= 0", {n.key("nu_hz")});
  p.cost.r = n.num("r", 0.4);
  p.cost.time_unit_scale = n.num("time_unit_scale", 1.0);
  if (!(p.cost.r >= 0.0 && p.cost.r <= 1.0)) throw ValidationError("r must lie in [0, 1]", {n.key("r")});
  if (!(p.cost.time_unit_scale > 0.0)) throw ValidationError("time_unit_scale must be > 0", {n.key("time_unit_scale")});

  const bool s2m = p.direction == Direction::SToM;
  p.initial = parse_initial(n.has("initial") ? n.at("initial") : json(s2m ? "singlet_order" : "sum_x"),
                            n.key("initial"), sys, base);
  p.target = parse_target(n.has("target") ? n.at("target") : json(s2m ? "antiphase_magnetization" : "singlet_order"),
                          n.key("target"), sys, base);

  if (n.has("bounds")) {
    Node b = n.child("bounds");
    p.bounds.min_s = b.num("min_ms", 0.0) * 1e-3;
    p.bounds.max_s = b.num("max_ms", 100.0) * 1e-3;
    b.finish();
    if (p.bounds.min_s < 0.0) throw ValidationError("duration lower bound must be >= 0", {b.key("min_ms")});
    if (p.bounds.max_s < p.bounds.min_s) throw ValidationError("max_ms must be >= min_ms", {b.key("max_ms")});
  }
  if (n.has("control_search")) {
    Node c = n.child("control_search");
    auto& cs = p.control_search;
    cs.enabled = c.boolean("enabled", true);
    cs.nu_min_hz = c.num("nu_min_hz", cs.nu_min_hz);
    cs.nu_max_hz = c.num("nu_max_hz", cs.nu_max_hz);
    cs.delta_min_hz = c.num("delta_min_hz", cs.delta_min_hz);
    cs.delta_max_hz = c.num("delta_max_hz", cs.delta_max_hz);
    c.finish();
  }
  n.finish();
  p.validate();
  return p;
}

OptimResult parse_schedule(Node n, const QaoaProblem& problem) {
  OptimResult r;
  for (double g : n.numbers("gammas_ms")) r.gammas.push_back(g * 1e-3);
  for (double b : n.numbers("betas_ms")) r.betas.push_back(b * 1e-3);
  r.ctrl.nu_hz = n.num("nu_hz", problem.ctrl.nu_hz);
  r.ctrl.delta_offset_hz = n.num("delta_hz", problem.ctrl.delta_offset_hz);
  n.finish();
  const auto want = static_cast<std::size_t>(problem.layers);
  if (r.gammas.size() != want) throw ValidationError("gammas_ms needs one entry per layer", {n.key("gammas_ms")});
  if (r.betas.size() != want) throw ValidationError("betas_ms needs one entry per layer", {n.key("betas_ms")});
  for (double v : r.gammas) {
    if (v < 0.0) throw ValidationError("durations must be >= 0", {n.key("gammas_ms")});
  }
  for (double v : r.betas) {
    if (v < 0.0) throw ValidationError("durations must be >= 0", {n.key("betas_ms")});
  }
  if (r.ctrl.nu_hz < 0.0) throw ValidationError("nu_hz must be >= 0", {n.key("nu_hz")});
  r.converged = true;
  return r;
}

OptimizerSettings parse_optimizer(Node n) {
  OptimizerSettings s;
  s.max_evals = static_cast<int>(n.integer("max_evals", s.max_evals));
  s.rhobeg = n.num("rhobeg_ms", s.rhobeg * 1e3) * 1e-3;
  s.rhoend = n.num("rhoend_ms", s.rhoend * 1e3) * 1e-3;
  s.n_starts = static_cast<int>(n.integer("n_starts", s.n_starts));
  if (n.has("init_max_ms")) s.init_max_s = n.num("init_max_ms") * 1e-3;
  n.finish();
  s.validate();
  return s;
}

GridAxis parse_axis(Node n) {
  GridAxis a;
  a.min = n.num("min");
  a.max = n.num("max");
  const long long np = n.integer("n_points");
  if (np < 2 || np > 100000) throw ValidationError("n_points must be in [2, 100000]", {n.key("n_points")});
  a.n_points = static_cast<int>(np);
  n.finish();
  return a;
}

SweepGrid parse_grid(Node n, Command cmd) {
  SweepGrid g;
  g.mode = cmd == Command::Heatmap ? SweepMode::Reoptimize : SweepMode::FixedSchedule;
  if (n.has("mode")) {
    g.mode = keyed(n.key("mode"), [&] { return parse_sweep_mode(n.str("mode")); });
  }
  if (n.has("nu_axis")) g.nu_axis = parse_axis(n.child("nu_axis"));
  if (n.has("delta_axis")) g.delta_axis = parse_axis(n.child("delta_axis"));
  g.nu_relative = n.boolean("nu_relative", false);
  n.finish();
  if (g.nu_axis.min > g.nu_axis.max) throw ValidationError("min must be <= max", {n.key("nu_axis.min")});
  if (g.delta_axis.min > g.delta_axis.max) throw ValidationError("min must be <= max", {n.key("delta_axis.min")});
  return g;
}

BaselineSpec parse_baseline(Node n) {
  BaselineSpec b;
  b.method = keyed(n.key("method"), [&] { return parse_method(n.str("method")); });
  if (n.has("params")) {
    Node p = n.child("params");
    for (const auto& name : parameter_names(b.method)) {
      if (!p.has(name)) continue;
      if (name == "ramp") {
        const auto shape = keyed(p.key("ramp"), [&] { return parse_ramp_shape(p.str("ramp")); });
        b.params[name] = shape == RampShape::Linear ? 0.0 : 1.0;
      } else {
        b.params[name] = p.num(name);
      }
    }
    p.finish();
  }
  n.finish();
  return b;
}

PulseOptions parse_pulses(Node n) {
  PulseOptions o;
  o.finite_pulses = n.boolean("finite", o.finite_pulses);
  o.pulse_rf_hz = n.num("rf_hz", o.pulse_rf_hz);
  o.phase_alternation = n.boolean("phase_alternation", o.phase_alternation);
  n.finish();
  if (!(o.pulse_rf_hz > 0.0)) throw ValidationError("rf_hz must be > 0", {n.key("rf_hz")});
  return o;
}

SearchGrid parse_search(Node n, Method& method, bool& keep) {
  SearchGrid g;
  method = keyed(n.key("method"), [&] { return parse_method(n.str("method")); });
  const json& axes = n.at("axes");
  if (!axes.is_array() || axes.empty()) throw ValidationError("axes must be a non-empty list", {n.key("axes")});
  const auto names = parameter_names(method);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    Node a(axes[i], n.key("axes") + "[" + std::to_string(i) + "]");
    SearchAxis ax{a.str("name"), a.num("min"), a.num("max"), a.num("step")};
    a.finish();
    if (std::find(names.begin(), names.end(), ax.name) == names.end()) {
      throw ValidationError("unknown parameter '" + ax.name + "'", {a.key("name")});
    }
    if (!(ax.step > 0.0)) throw ValidationError("step must be > 0", {a.key("step")});
    if (ax.min > ax.max) throw ValidationError("min must be <= max", {a.key("min")});
    g.axes.push_back(ax);
  }
  g.fidelity_threshold = n.num("threshold", g.fidelity_threshold);
  if (n.has("fixed")) {
    Node f = n.child("fixed");
    for (const auto& name : names) {
      if (f.has(name)) g.fixed[name] = f.num(name);
    }
    f.finish();
  }
  keep = n.boolean("keep_points", true);
  n.finish();
  if (g.size() > 50'000'000) throw ValidationError("search grid too large", {n.key("axes")});
  return g;
}

DecaySeries parse_decay(Node n, DecayFitOptions& opts, const std::filesystem::path& base) {
  DecaySeries s;
  const std::string label = n.str("label", "");
  if (n.has("csv")) {
    const auto path = resolve(base, n.str("csv"));
    std::string text;
    try {
      text = read_text_file(path);
    } catch (const Error& e) {
      throw ValidationError(std::string("cannot read decay csv: ") + e.what(), {n.key("csv")});
    }
    s = keyed(n.key("csv"), [&] { return read_decay_csv(text, label); });
  } else {
    s.times = n.numbers("times_s");
    s.amplitudes = n.numbers("amplitudes");
    s.label = label;
  }
  opts.with_offset = n.boolean("with_offset", false);
  n.finish();
  keyed(n.key("times_s"), [&] { s.validate(); });
  return s;
}

TrajectorySettings parse_trajectory(Node n) {
  TrajectorySettings t;
  if (n.has("partners")) {
    t.partners.clear();
    const json& v = n.at("partners");
    if (!v.is_array()) throw ValidationError("partners must be a list", {n.key("partners")});
    for (const auto& p : v) {
      if (!p.is_string()) throw ValidationError("partners must be strings", {n.key("partners")});
      t.partners.push_back(keyed(n.key("partners"), [&] { return parse_triplet_partner(p.get<std::string>()); }));
    }
  }
  if (n.has("pair")) {
    const auto pairs = parse_pairs(json::array({n.at("pair")}), n.key("pair"));
    t.pair = pairs.front();
  }
  if (n.has("record_every_ms")) {
    const double v = n.num("record_every_ms");
    if (!(v > 0.0)) throw ValidationError("record_every_ms must be > 0", {n.key("record_every_ms")});
    t.record_every_s = v * 1e-3;
  }
  t.steps_per_segment = static_cast<int>(n.integer("steps_per_segment", 50));
  if (t.steps_per_segment < 1) throw ValidationError("steps_per_segment must be >= 1", {n.key("steps_per_segment")});
  n.finish();
  return t;
}

void require(bool ok, const std::string& key, Command c) {
  if (!ok) throw ValidationError(std::string("command ") + to_string(c) + " needs '" + key + "'", {key});
}

}  // namespace

static ExperimentConfig parse_config_impl(const json& j, const std::filesystem::path& base) {
  ExperimentConfig c;
  c.raw = j;
  Node n(j, "");
  c.command = parse_command(n.str("command"));
  c.name = n.str("name", "");
  n.str("notes", "");
  const long long seed = n.integer("seed", 1);
  if (seed < 0) throw ValidationError("seed must be >= 0", {"seed"});
  c.seed = static_cast<std::uint64_t>(seed);
  const long long threads = n.integer("threads", 1);
  if (threads < 0) throw ValidationError("threads must be >= 0", {"threads"});
  c.threads = static_cast<int>(threads);

  const Command cmd = c.command;
  const bool qaoa = cmd == Command::Optimize || cmd == Command::Evaluate || cmd == Command::Heatmap ||
                    cmd == Command::Robustness || cmd == Command::TotalProtocol || cmd == Command::Trajectory;
  const bool needs_system = qaoa || cmd == Command::Baseline || cmd == Command::Search;
  if (needs_system) {
    require(n.has("system"), "system", cmd);
    c.system = parse_system(n.child("system"));
  } else if (n.has("system")) {
    c.system = parse_system(n.child("system"));
  }

  if (qaoa) {
    require(n.has("problem"), "problem", cmd);
    c.problem = parse_problem(n.child("problem"), c.system, base);
  }
  if (n.has("schedule")) {
    require(c.problem.has_value(), "problem", cmd);
    c.schedule = parse_schedule(n.child("schedule"), *c.problem);
  }
  if (n.has("optimizer")) c.optimizer = parse_optimizer(n.child("optimizer"));
  c.optimizer.seed = c.seed;
  c.optimizer.threads = c.threads;
  if (n.has("grid")) c.grid = parse_grid(n.child("grid"), cmd);
  if (n.has("detection")) {
    require(c.problem.has_value(), "problem", cmd);
    Node d = n.child("detection");
    c.detect_problem = parse_problem(d.child("problem"), c.system, base);
    c.detect_schedule = parse_schedule(d.child("schedule"), *c.detect_problem);
    d.finish();
  }
  if (n.has("baseline")) c.baseline = parse_baseline(n.child("baseline"));
  if (n.has("pulses")) c.pulses = parse_pulses(n.child("pulses"));
  if (n.has("search")) c.search = parse_search(n.child("search"), c.search_method, c.keep_points);
  if (n.has("decay")) c.decay = parse_decay(n.child("decay"), c.decay_options, base);
  if (n.has("trajectory")) c.trajectory = parse_trajectory(n.child("trajectory"));
  n.finish();

  switch (cmd) {
    case Command::Evaluate:
    case Command::Trajectory:
      require(c.schedule.has_value(), "schedule", cmd);
      break;
    case Command::Heatmap:
      if (!c.grid) c.grid = SweepGrid{};
      if (c.grid->mode != SweepMode::Reoptimize) throw ValidationError("heatmap needs grid.mode reoptimize", {"grid.mode"});
      break;
    case Command::Robustness:
    case Command::TotalProtocol:
      require(c.schedule.has_value(), "schedule", cmd);
      require(c.grid.has_value(), "grid", cmd);
      if (cmd == Command::TotalProtocol) require(c.detect_problem.has_value(), "detection", cmd);
      c.grid->mode = SweepMode::FixedSchedule;
      c.grid->reference = c.schedule;
      break;
    case Command::Baseline:
      require(c.baseline.has_value(), "baseline", cmd);
      break;
    case Command::Search:
      require(c.search.has_value(), "search", cmd);
      break;
    case Command::FitDecay:
      require(c.decay.has_value(), "decay", cmd);
      break;
    case Command::Optimize:
      break;
  }
  if (c.grid) c.grid->validate();
  return c;
}

// Unknown keys anywhere in the tree are reported together, alongside the first
// other error if there is one.
ExperimentConfig parse_config(const json& j, const std::filesystem::path& base) {
  std::vector<std::string> unknown;
  Node::sink = &unknown;
  struct Reset {
    ~Reset() { Node::sink = nullptr; }
  } reset;
  try {
    ExperimentConfig c = parse_config_impl(j, base);
    if (!unknown.empty()) throw ValidationError(Node::unknown_message(unknown), unknown);
    return c;
  } catch (const ValidationError& e) {
    if (unknown.empty() || e.keys() == unknown) throw;
    std::vector<std::string> keys = unknown;
    keys.insert(keys.end(), e.keys().begin(), e.keys().end());
    throw ValidationError(Node::unknown_message(unknown) + "; " + e.what(), keys);
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ValidationError(std::string("cannot read config: ") + e.what(), {"config"});
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what(), {"config"});
  }
  return parse_config(j, path.parent_path());
}

std::uint64_t config_hash(const json& j) { return fnv1a64(j.dump()); }

}  // namespace lls
