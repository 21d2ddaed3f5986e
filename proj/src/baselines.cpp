#include "lls/baselines.hpp"

#include "lls/errors.hpp"
#include "lls/io.hpp"
#include "lls/objective.hpp"
#include "lls/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lls {

const char* to_string(Method m) {
  switch (m) {
    case Method::CL:
      return "CL";
    case Method::M2S:
      return "M2S";
    case Method::S2M:
      return "S2M";
    case Method::SLIC:
      return "SLIC";
    case Method::APSOC:
      return "APSOC";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "CL") return Method::CL;
  if (s == "M2S") return Method::M2S;
  if (s == "S2M") return Method::S2M;
  if (s == "SLIC") return Method::SLIC;
  if (s == "APSOC") return Method::APSOC;
  throw ValidationError("unknown method '" + s + "'", {"method"});
}

const char* to_string(RampShape r) { return r == RampShape::Linear ? "linear" : "cosine"; }

RampShape parse_ramp_shape(const std::string& s) {
  if (s == "linear") return RampShape::Linear;
  if (s == "cosine") return RampShape::Cosine;
  throw ValidationError("unknown ramp shape '" + s + "'", {"params.ramp"});
}

BaselineContext::BaselineContext(const SpinSystem& sys, PulseOptions opts)
    : system(sys), ops(sys.n_spins), h0(std::make_shared<const OperatorMatrix>(build_h0(sys, ops))), pulses(opts) {
  if (pulses.finite_pulses && !(pulses.pulse_rf_hz > 0.0)) {
    throw ValidationError("pulse_rf_hz must be > 0", {"pulses.pulse_rf_hz"});
  }
}

void BaselineContext::add_pulse(PulseSchedule& s, Axis axis, double angle, double phase,
                                const std::string& label) const {
  if (!pulses.finite_pulses) {
    s.add_rotation(axis, angle, phase, label);
    return;
  }
  double nx = 0.0, ny = 0.0;
  if (axis == Axis::X) {
    nx = std::cos(phase);
    ny = std::sin(phase);
  } else if (axis == Axis::Y) {
    nx = -std::sin(phase);
    ny = std::cos(phase);
  } else {
    throw ValidationError("finite pulses must be transverse");
  }
  if (angle < 0.0) {
    nx = -nx;
    ny = -ny;
  }
  const double w = kTwoPi * pulses.pulse_rf_hz;
  auto h = std::make_shared<const OperatorMatrix>(*h0 + w * (nx * ops.total_x() + ny * ops.total_y()));
  s.add_segment(std::move(h), std::abs(angle) / w, label);
}

namespace {

void check_delay(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(key) + " must be finite and >= 0", {key});
}

std::shared_ptr<const OperatorMatrix> lock_hamiltonian(const BaselineContext& ctx, double nu_hz, double delta_hz) {
  return std::make_shared<const OperatorMatrix>(build_hb(*ctx.h0, ctx.ops, ControlParams{nu_hz, delta_hz}));
}

void echo_train(const BaselineContext& ctx, PulseSchedule& s, double td, int n, const std::string& tag) {
  for (int k = 0; k < n; ++k) {
    const double phase = (ctx.pulses.phase_alternation && k % 2 == 1) ? M_PI : 0.0;
    s.add_segment(ctx.h0, td, tag + "_td");
    ctx.add_pulse(s, Axis::X, M_PI, phase, tag + "_180");
    s.add_segment(ctx.h0, td, tag + "_td");
  }
}

void check_echo(const EchoParams& p) {
  if (!(p.tau_d > 0.0) || !std::isfinite(p.tau_d)) throw ValidationError("tau_d must be > 0", {"params.tau_d"});
  if (p.n1 < 0) throw ValidationError("n1 must be >= 0", {"params.n1"});
  if (p.n2 < 0) throw ValidationError("n2 must be >= 0", {"params.n2"});
}

double ramp_value(RampShape shape, double s) {
  return shape == RampShape::Linear ? s : 0.5 * (1.0 - std::cos(M_PI * s));
}

}  // namespace

SequencePair build_cl(const BaselineContext& ctx, const ClParams& p) {
  check_delay(p.tau1, "params.tau1");
  check_delay(p.tau2, "params.tau2");
  check_delay(p.tau3, "params.tau3");
  check_delay(p.tau5, "params.tau5");
  SequencePair out;
  auto& prep = out.preparation;
  ctx.add_pulse(prep, Axis::X, M_PI / 2.0, 0.0, "90x");
  prep.add_segment(ctx.h0, p.tau1, "tau1");
  ctx.add_pulse(prep, Axis::X, M_PI, 0.0, "180x");
  prep.add_segment(ctx.h0, p.tau2, "tau2");
  ctx.add_pulse(prep, Axis::Y, M_PI / 2.0, 0.0, "90y");
  prep.add_segment(ctx.h0, p.tau3, "tau3");
  out.detection.add_segment(ctx.h0, p.tau5, "tau5");
  ctx.add_pulse(out.detection, Axis::Y, M_PI / 2.0, 0.0, "90y");
  return out;
}

PulseSchedule build_m2s(const BaselineContext& ctx, const EchoParams& p) {
  check_echo(p);
  PulseSchedule s;
  ctx.add_pulse(s, Axis::X, M_PI / 2.0, 0.0, "90x");
  echo_train(ctx, s, p.tau_d, p.n1, "n1");
  ctx.add_pulse(s, Axis::Y, M_PI / 2.0, 0.0, "90y");
  s.add_segment(ctx.h0, p.tau_d, "td");
  echo_train(ctx, s, p.tau_d, p.n2, "n2");
  return s;
}

PulseSchedule build_s2m(const BaselineContext& ctx, const EchoParams& p) {
  check_echo(p);
  PulseSchedule s;
  echo_train(ctx, s, p.tau_d, p.n2, "n2");
  s.add_segment(ctx.h0, p.tau_d, "td");
  ctx.add_pulse(s, Axis::Y, M_PI / 2.0, 0.0, "90y");
  echo_train(ctx, s, p.tau_d, p.n1, "n1");
  return s;
}

SequencePair build_slic(const BaselineContext& ctx, const SlicParams& p) {
  if (!(p.nu_hz >= 0.0) || !std::isfinite(p.nu_hz)) throw ValidationError("nu_hz must be >= 0", {"params.nu_hz"});
  check_delay(p.tau_p, "params.tau_p");
  SequencePair out;
  auto lock = lock_hamiltonian(ctx, p.nu_hz, 0.0);
  ctx.add_pulse(out.preparation, Axis::Y, M_PI / 2.0, 0.0, "90y");
  out.preparation.add_segment(lock, p.tau_p, "lock");
  out.detection.add_segment(lock, p.tau_p, "lock");
  return out;
}

SequencePair build_apsoc(const BaselineContext& ctx, const ApsocParams& p) {
  if (p.delta_hz == 0.0 || !std::isfinite(p.delta_hz)) {
    throw ValidationError("APSOC offset must be non-zero", {"params.delta_hz"});
  }
  if (p.n_steps < 10) throw ValidationError("APSOC needs n_steps >= 10", {"params.n_steps"});
  check_delay(p.tau, "params.tau");
  if (!(p.nu_max_hz >= 0.0)) throw ValidationError("nu_max_hz must be >= 0", {"params.nu_max_hz"});
  SequencePair out;
  const double dt = p.tau / p.n_steps;
  std::vector<std::shared_ptr<const OperatorMatrix>> steps;
  steps.reserve(static_cast<std::size_t>(p.n_steps));
  for (int k = 0; k < p.n_steps; ++k) {
    const double s = (k + 0.5) / p.n_steps;
    steps.push_back(lock_hamiltonian(ctx, p.nu_max_hz * ramp_value(p.ramp, s), p.delta_hz));
  }
  for (int k = 0; k < p.n_steps; ++k) out.preparation.add_segment(steps[static_cast<std::size_t>(k)], dt, "ramp");
  for (int k = p.n_steps - 1; k >= 0; --k) out.detection.add_segment(steps[static_cast<std::size_t>(k)], dt, "ramp");
  ctx.add_pulse(out.detection, Axis::Y, M_PI / 2.0, 0.0, "90y");
  return out;
}

std::vector<std::string> parameter_names(Method m) {
  switch (m) {
    case Method::CL:
      return {"tau1", "tau2", "tau3", "tau5"};
    case Method::M2S:
    case Method::S2M:
      return {"tau_d", "n1", "n2"};
    case Method::SLIC:
      return {"nu_hz", "tau_p"};
    case Method::APSOC:
      return {"delta_hz", "tau", "nu_max_hz", "ramp", "n_steps"};
  }
  return {};
}

namespace {

int as_count(double v, const char* key) {
  if (!std::isfinite(v) || v < 0.0 || std::floor(v) != v) {
    throw ValidationError(std::string(key) + " must be a non-negative integer", {key});
  }
  return static_cast<int>(v);
}

}  // namespace

SequencePair build_from_spec(const BaselineContext& ctx, const BaselineSpec& spec) {
  const auto names = parameter_names(spec.method);
  for (const auto& [k, v] : spec.params) {
    if (std::find(names.begin(), names.end(), k) == names.end()) {
      throw ValidationError("unknown parameter '" + k + "' for " + to_string(spec.method), {"params." + k});
    }
  }
  auto get = [&](const char* k, double def) {
    auto it = spec.params.find(k);
    return it == spec.params.end() ? def : it->second;
  };
  switch (spec.method) {
    case Method::CL: {
      ClParams d;
      return build_cl(ctx, {get("tau1", d.tau1), get("tau2", d.tau2), get("tau3", d.tau3), get("tau5", d.tau5)});
    }
    case Method::M2S:
    case Method::S2M: {
      EchoParams d;
      EchoParams p{get("tau_d", d.tau_d), as_count(get("n1", d.n1), "params.n1"), as_count(get("n2", d.n2), "params.n2")};
      SequencePair out;
      out.preparation = build_m2s(ctx, p);
      out.detection = build_s2m(ctx, p);
      if (spec.method == Method::S2M) std::swap(out.preparation, out.detection);
      return out;
    }
    case Method::SLIC: {
      SlicParams d;
      return build_slic(ctx, {get("nu_hz", d.nu_hz), get("tau_p", d.tau_p)});
    }
    case Method::APSOC: {
      ApsocParams d;
      ApsocParams p{get("delta_hz", d.delta_hz), get("tau", d.tau), get("nu_max_hz", d.nu_max_hz), d.ramp,
                    as_count(get("n_steps", d.n_steps), "params.n_steps")};
      const double ramp = get("ramp", 0.0);
      if (ramp != 0.0 && ramp != 1.0) throw ValidationError("ramp must be 0 (linear) or 1 (cosine)", {"params.ramp"});
      p.ramp = ramp == 0.0 ? RampShape::Linear : RampShape::Cosine;
      return build_apsoc(ctx, p);
    }
  }
  throw ValidationError("unknown method");
}

double transverse_fidelity(const SpinOperators& ops, const Matrix& state) {
  return std::hypot(fidelity(state, ops.total_x().matrix()), fidelity(state, ops.total_y().matrix()));
}

namespace {

double run_preparation(const BaselineContext& ctx, Method method, const PulseSchedule& prep) {
  const Matrix singlet = -scalar_product_operator(ctx.ops, 0, 1).matrix();
  if (method == Method::S2M) {
    auto run = run_schedule(DeviationState::trusted(singlet), prep);
    return transverse_fidelity(ctx.ops, run.final_state.matrix());
  }
  auto run = run_schedule(DeviationState::trusted(ctx.ops.total_z().matrix()), prep);
  return fidelity(run.final_state.matrix(), singlet);
}

}  // namespace

double preparation_fidelity(const BaselineContext& ctx, const BaselineSpec& spec) {
  return run_preparation(ctx, spec.method, build_from_spec(ctx, spec).preparation);
}

std::vector<double> SearchAxis::values() const {
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((max - min) / step + 1e-9));
  for (long long k = 0; k <= n; ++k) out.push_back(min + static_cast<double>(k) * step);
  return out;
}

void SearchGrid::validate() const {
  if (axes.empty()) throw ValidationError("search grid has no axes", {"grid.axes"});
  for (const auto& a : axes) {
    if (!(a.step > 0.0)) throw ValidationError("grid step must be > 0", {"grid." + a.name + ".step"});
    if (!(a.min <= a.max)) throw ValidationError("grid min must be <= max", {"grid." + a.name + ".min"});
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) {
      throw ValidationError("grid bounds must be finite", {"grid." + a.name});
    }
  }
}

std::size_t SearchGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.values().size();
  return n;
}

SearchResult brute_force_search(Method method, const SearchGrid& grid, const SpinSystem& system,
                                const PulseOptions& pulses, bool keep_points, int threads) {
  grid.validate();
  const auto names = parameter_names(method);
  for (const auto& a : grid.axes) {
    if (std::find(names.begin(), names.end(), a.name) == names.end()) {
      throw ValidationError("unknown search parameter '" + a.name + "'", {"grid." + a.name});
    }
  }
  const BaselineContext ctx(system, pulses);
  std::vector<std::vector<double>> axis_values;
  for (const auto& a : grid.axes) axis_values.push_back(a.values());
  const std::size_t total = grid.size();

  const SpinOperators& o = ctx.ops;
  const Matrix singlet = -scalar_product_operator(o, 0, 1).matrix();
  const double bound = method == Method::S2M ? unitary_bound(singlet, o.total_x().matrix())
                                             : unitary_bound(o.total_z().matrix(), singlet);

  // Workers reduce over contiguous chunks; chunks merge in index order.
  const std::size_t chunk = 4096;
  const std::size_t n_chunks = (total + chunk - 1) / chunk;
  struct Best {
    std::size_t pass_idx = std::numeric_limits<std::size_t>::max();
    SearchPoint pass;
    std::size_t any_idx = std::numeric_limits<std::size_t>::max();
    SearchPoint any;
  };
  std::vector<Best> bests(n_chunks);
  std::vector<SearchPoint> points(keep_points ? total : 0);

  parallel_for(n_chunks, threads, [&](std::size_t c) {
    Best b;
    BaselineSpec spec{method, grid.fixed};
    std::vector<std::size_t> idx(axis_values.size());
    for (std::size_t i = c * chunk; i < std::min(total, (c + 1) * chunk); ++i) {
      std::size_t rem = i;
      for (std::size_t a = axis_values.size(); a-- > 0;) {
        idx[a] = rem % axis_values[a].size();
        rem /= axis_values[a].size();
      }
      SearchPoint pt;
      for (std::size_t a = 0; a < axis_values.size(); ++a) {
        const double v = axis_values[a][idx[a]];
        pt.params.push_back(v);
        spec.params[grid.axes[a].name] = v;
      }
      const auto seq = build_from_spec(ctx, spec);
      pt.duration = seq.preparation.total_duration();
      pt.fidelity = run_preparation(ctx, method, seq.preparation);
      pt.normalized = pt.fidelity / bound;
      if (pt.normalized >= grid.fidelity_threshold &&
          (b.pass_idx == std::numeric_limits<std::size_t>::max() || pt.duration < b.pass.duration)) {
        b.pass_idx = i;
        b.pass = pt;
      }
      if (b.any_idx == std::numeric_limits<std::size_t>::max() || pt.fidelity > b.any.fidelity) {
        b.any_idx = i;
        b.any = pt;
      }
      if (keep_points) points[i] = std::move(pt);
    }
    bests[c] = std::move(b);
  });

  Best merged;
  for (auto& b : bests) {
    if (b.pass_idx != std::numeric_limits<std::size_t>::max() &&
        (merged.pass_idx == std::numeric_limits<std::size_t>::max() || b.pass.duration < merged.pass.duration)) {
      merged.pass_idx = b.pass_idx;
      merged.pass = b.pass;
    }
    if (merged.any_idx == std::numeric_limits<std::size_t>::max() || b.any.fidelity > merged.any.fidelity) {
      merged.any_idx = b.any_idx;
      merged.any = b.any;
    }
  }

  SearchResult res;
  res.met_threshold = merged.pass_idx != std::numeric_limits<std::size_t>::max();
  res.best_point = res.met_threshold ? merged.pass : merged.any;
  res.best.method = method;
  res.best.params = grid.fixed;
  for (std::size_t a = 0; a < grid.axes.size(); ++a) res.best.params[grid.axes[a].name] = res.best_point.params[a];
  res.points = std::move(points);
  return res;
}

std::string search_csv(const SearchGrid& grid, const std::vector<SearchPoint>& points) {
  std::vector<std::string> header;
  for (const auto& a : grid.axes) header.push_back(a.name);
  header.push_back("fidelity");
  header.push_back("duration");
  CsvBuilder csv(header);
  for (const auto& p : points) {
    for (double v : p.params) csv.cell(v);
    csv.cell(p.fidelity).cell(p.duration);
    csv.end_row();
  }
  return csv.str();
}

}  // namespace lls
