// Acceptance run: one line per criterion. Exit status is nonzero when a
// criterion fails that is not on the known-unattainable list.
#include "lls/baselines.hpp"
#include "lls/config.hpp"
#include "lls/decay_fit.hpp"
#include "lls/hashing.hpp"
#include "lls/qaoa.hpp"
#include "lls/sweep.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace lls;
namespace fs = std::filesystem;

namespace {

fs::path g_configs;
int g_unexpected = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// known: the criterion is expected to fail here; reported but not fatal
void run(const std::string& id, double limit_s, const std::function<Outcome()>& body, bool known = false) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dt > limit_s) {
    o.pass = false;
    o.detail += fmt(" [over the %.0f s limit]", limit_s);
  }
  const char* tag = o.pass ? "PASS" : (known ? "FAIL (known)" : "FAIL");
  std::printf("%-4s %-13s %8.2fs  %s\n", id.c_str(), tag, dt, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass && !known) ++g_unexpected;
}

const SpinSystem kModerate = SpinSystem::two_spin(35.8, 17.2);
const double kBound = std::sqrt(2.0 / 3.0);
const std::vector<double> kRefGammas = {14.069e-3, 6.810e-3}, kRefBetas = {3.452e-3, 0.025e-3};

Outcome c1() {
  const SpinOperators ops(2);
  const double b = unitary_bound(ops.total_z().matrix(), (-scalar_product_operator(ops, 0, 1)).matrix());
  return {std::abs(b - kBound) <= 1e-12, fmt("bound %.15f, error %.1e", b, std::abs(b - kBound))};
}

Outcome c2() {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  const double f = evaluate_schedule(p, kRefGammas, kRefBetas).fidelity;
  return {f >= 0.99 * kBound, fmt("F = %.4f = %.4f x bound", f, f / kBound)};
}

Outcome c3() {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  OptimizerSettings s;
  s.n_starts = 8;
  const OptimResult r = optimize(p, s);
  return {r.fidelity >= 0.80 && r.total_time <= 30e-3,
          fmt("F = %.4f, T = %.3f ms, %d evals in the winning start", r.fidelity, r.total_time * 1e3, r.n_evals)};
}

Outcome c4(const std::string& config, double nu0, double delta0) {
  const ExperimentConfig c = load_config(g_configs / config);
  const HeatmapResult r = heatmap(*c.problem, *c.grid, c.optimizer, c.threads);
  const auto nus = c.grid->nu_axis.values(), des = c.grid->delta_axis.values();
  const double dnu = nus[1] - nus[0], dde = des[1] - des[0];
  double best = -1, bn = 0, bd = 0;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    for (std::size_t j = 0; j < des.size(); ++j) {
      if (std::abs(nus[i] - nu0) > dnu + 1e-9 || std::abs(des[j] - delta0) > dde + 1e-9) continue;
      const double f = r.fidelity(static_cast<int>(i), static_cast<int>(j)) / r.bound;
      if (f > best) {
        best = f;
        bn = nus[i];
        bd = des[j];
      }
    }
  }
  return {best >= 0.95,
          fmt("near (%g, %g): best %.3f x bound at (%.1f, %.2f); map best %.3f at (%.1f, %.2f)", nu0, delta0, best, bn,
              bd, r.best_point.fidelity / r.bound, r.best_point.nu, r.best_point.delta)};
}

Outcome c5() {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  auto at = [&](double nu, double de) {
    QaoaProblem q = p;
    q.ctrl = {nu, de};
    return evaluate_schedule(q, kRefGammas, kRefBetas).fidelity;
  };
  const double f0 = at(100, 0);
  const double fd[2] = {at(100, -10), at(100, 10)};
  const double fn[2] = {at(90, 0), at(110, 0)};
  // frozen from the first run; the evaluator is deterministic to the last bit
  // on one platform, so 1e-9 only absorbs compiler differences
  const double golden[5] = {0.8152479681697713, 0.80374638393022391, 0.8037463839302238, 0.7848699485493652,
                            0.78272831439264146};
  const double got[5] = {f0, fd[0], fd[1], fn[0], fn[1]};
  double drift = 0;
  for (int k = 0; k < 5; ++k) drift = std::max(drift, std::abs(got[k] - golden[k]));
  // the same deviations through the sweep engine land on the same numbers
  SweepGrid g;
  g.mode = SweepMode::FixedSchedule;
  g.nu_axis = {-0.1, 0.1, 3};
  g.delta_axis = {-10, 10, 3};
  g.nu_relative = true;
  OptimResult ref;
  ref.gammas = kRefGammas;
  ref.betas = kRefBetas;
  ref.ctrl = {100, 0};
  g.reference = ref;
  const Eigen::MatrixXd m = robustness_map(p, g, 1).fidelity;
  const double map_gap = std::max({std::abs(m(1, 1) - f0), std::abs(m(1, 0) - fd[0]), std::abs(m(1, 2) - fd[1]),
                                   std::abs(m(0, 1) - fn[0]), std::abs(m(2, 1) - fn[1])});
  const bool ok = std::min(fd[0], fd[1]) >= 0.8 * f0 && std::min(fn[0], fn[1]) >= 0.7 * f0 && drift <= 1e-9 &&
                  map_gap <= 1e-12;
  return {ok, fmt("nominal %.4f; dDelta -/+10: %.4f %.4f; dnu -/+10%%: %.4f %.4f; golden drift %.1e, map gap %.1e",
                  f0, fd[0], fd[1], fn[0], fn[1], drift, map_gap)};
}

Outcome c6() {
  const BaselineContext ctx(kModerate);
  struct Row {
    Method m;
    std::map<std::string, double> params;
    double prep_ms, det_ms;
  };
  const Row rows[] = {
      {Method::CL, {}, 133.040, 6.310},
      {Method::SLIC, {}, 21.510, 21.500},
      {Method::M2S, {}, 63.005, 62.995},
      {Method::APSOC, {}, 160.000, 160.010},
  };
  bool ok = true;
  std::string d;
  for (const Row& r : rows) {
    const SequencePair s = build_from_spec(ctx, {r.m, r.params});
    const double a = s.preparation.total_duration() * 1e3, b = s.detection.total_duration() * 1e3;
    ok = ok && std::abs(a - r.prep_ms) <= 0.5 && std::abs(b - r.det_ms) <= 0.5;
    d += fmt("%s %.3f/%.3f ", to_string(r.m), a, b);
  }
  return {ok, d + "ms"};
}

Outcome c7() {
  const BaselineContext ctx(kModerate);
  const double f = preparation_fidelity(ctx, {Method::CL, {}});
  return {f >= 0.99 * kBound, fmt("F = %.4f = %.4f x bound at (43, 83, 7) ms", f, f / kBound)};
}

Outcome c8(const std::string& config, const std::vector<double>& want, const std::vector<double>& tol) {
  const ExperimentConfig c = load_config(g_configs / config);
  const SearchResult r = brute_force_search(c.search_method, *c.search, c.system, c.pulses, false, c.threads);
  bool ok = true;
  std::string got;
  for (std::size_t k = 0; k < want.size(); ++k) {
    const double v = r.best_point.params[k];
    ok = ok && std::abs(v - want[k]) <= tol[k] + 1e-9;
    got += fmt("%s%g", k ? ", " : "", v);
  }
  return {ok, fmt("best (%s) at %.4f x bound, threshold %s (%zu points)", got.c_str(), r.best_point.normalized,
                  r.met_threshold ? "met" : "not met", c.search->size())};
}

struct Worst {
  double trace = 0, purity = 0, herm = 0, excess = -1;
  void track(const Matrix& rho0, const Matrix& rho, const Matrix& target) {
    trace = std::max(trace, std::abs(rho.trace()));
    purity = std::max(purity, std::abs((rho * rho).trace().real() - (rho0 * rho0).trace().real()));
    herm = std::max(herm, oracle::max_abs(rho - rho.adjoint()));
    excess = std::max(excess, fidelity(rho, target) - unitary_bound(rho0, target));
  }
  bool ok() const { return trace <= 1e-10 && purity <= 1e-10 && herm <= 1e-10 && excess <= 1e-9; }
  std::string str() const {
    return fmt("trace %.1e, purity %.1e, hermiticity %.1e, bound excess %.1e", trace, purity, herm, excess);
  }
};

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Outcome c9() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const SpinSystem systems[] = {kModerate, SpinSystem::two_spin(10, 18), SpinSystem::two_spin(10, 54)};
  Worst w;
  double runner = 0;
  for (int k = 0; k < 1000; ++k) {
    const SpinSystem& sys = systems[k % 3];
    const int p = 1 + static_cast<int>(u(rng) * 4);
    const ControlParams ctrl{200 * u(rng), 40 * u(rng) - 20};
    const QaoaProblem prob = k % 2 ? make_m2s_problem(sys, p, ctrl) : make_s2m_problem(sys, p, ctrl);
    std::vector<double> g(static_cast<std::size_t>(p)), b(static_cast<std::size_t>(p));
    for (auto& x : g) x = 0.05 * u(rng);
    for (auto& x : b) x = 0.05 * u(rng);
    const Matrix rho = QaoaEvaluator(prob).final_state(g, b);
    w.track(prob.initial.matrix(), rho, prob.target.matrix.matrix());
    if (k % 50 == 0) {
      const ScheduleRun r = run_schedule(prob.initial, build_qaoa_schedule(prob, g, b));
      runner = std::max(runner, oracle::max_abs(r.final_state.matrix() - rho));
    }
  }

  double comp = 0;
  std::uniform_real_distribution<double> t(0.0, 0.05);
  for (int k = 0; k < 50; ++k) {
    const OperatorMatrix h(oracle::h0_two_spin(50 * t(rng), 100 * t(rng)) -
                           2 * M_PI * 1000 * t(rng) * oracle::total('x', 2));
    const HermitianPropagator pr(h);
    const double t1 = t(rng), t2 = t(rng);
    comp = std::max(comp, oracle::max_abs(pr.unitary(t2) * pr.unitary(t1) - pr.unitary(t1 + t2)));
  }

  const QaoaProblem p = make_m2s_problem(kModerate, 2, {58, 4});
  OptimizerSettings s;
  s.n_starts = 3;
  s.max_evals = 200;
  s.seed = 123;
  const OptimResult a = optimize(p, s), b = optimize(p, s);
  bool bitwise = same_bits(a.fidelity, b.fidelity) && same_bits(a.cost, b.cost);
  for (std::size_t k = 0; k < a.gammas.size(); ++k)
    bitwise = bitwise && same_bits(a.gammas[k], b.gammas[k]) && same_bits(a.betas[k], b.betas[k]);
  SweepGrid g;
  g.nu_axis = {40, 70, 3};
  g.delta_axis = {-4, 4, 3};
  s.n_starts = 1;
  s.max_evals = 100;
  bitwise = bitwise && heatmap_csv(heatmap(p, g, s, 1)) == heatmap_csv(heatmap(p, g, s, 2));

  const bool ok = w.ok() && runner <= 1e-10 && comp <= 1e-10 && bitwise;
  return {ok, w.str() + fmt("; runner %.1e, composition %.1e, reruns %s", runner, comp,
                            bitwise ? "identical" : "DIFFER")};
}

struct SixSpin {
  Worst w;
  double unitarity = 0;
  double fid[2] = {0, 0};
};

SixSpin six_spin_runs() {
  const ExperimentConfig c = load_config(g_configs / "six_spin_dq_placeholder.json");
  SixSpin out;
  struct Sched {
    double nu;
    std::vector<double> g, b;
  };
  const Sched runs[2] = {
      {1833.71, {0.325e-3, 64.867e-3, 83.491e-3}, {22.002e-3, 11.286e-3, 517.7018e-3}},
      {1933.02, {0.663e-3, 24.021e-3, 8.212e-3, 0.907e-3}, {32.936e-3, 0.8290e-3, 630.515e-3, 1.252e-3}},
  };
  for (int k = 0; k < 2; ++k) {
    QaoaProblem p = *c.problem;
    p.layers = static_cast<int>(runs[k].g.size());
    p.ctrl = {runs[k].nu, 0};
    const PulseSchedule s = build_qaoa_schedule(p, runs[k].g, runs[k].b);
    const ScheduleRun r = run_schedule(p.initial, s);
    const Matrix rho = r.final_state.matrix();
    out.w.track(p.initial.matrix(), rho, p.target.matrix.matrix());
    const Matrix u = schedule_unitary(s, 6);
    out.unitarity = std::max(out.unitarity, oracle::max_abs(u * u.adjoint() - Matrix::Identity(64, 64)));
    out.fid[k] = fidelity(rho, p.target.matrix.matrix());
  }
  return out;
}

Outcome c10a() {
  const SixSpin s = six_spin_runs();
  return {s.w.ok() && s.unitarity <= 1e-10,
          s.w.str() + fmt("; unitarity %.1e; 64-dim runs complete", s.unitarity)};
}

Outcome c10b() {
  const SixSpin s = six_spin_runs();
  const bool ok = std::abs(s.fid[0] - 0.1338) <= 0.02 && std::abs(s.fid[1] - 0.252) <= 0.02;
  return {ok, fmt("F = %.4f and %.4f vs 0.1338 and 0.252; system and LLS operator are placeholders", s.fid[0],
                  s.fid[1])};
}

Outcome c11() {
  auto series = [](double t) {
    DecaySeries s;
    for (int k = 0; k < 10; ++k) {
      s.times.push_back(60.0 * k / 9);
      s.amplitudes.push_back(std::exp(-s.times.back() / t));
    }
    return s;
  };
  const double exact = std::abs(fit_exponential_decay(series(39.4)).t_lls - 39.4);
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DecaySeries s = series(39.4);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.02);
    for (double& y : s.amplitudes) y *= 1.0 + n(rng);
    worst = std::max(worst, std::abs(fit_exponential_decay(s).t_lls - 39.4) / 39.4);
  }
  return {exact <= 1e-6 && worst <= 0.05,
          fmt("noiseless error %.1e s; worst relative error over 100 noisy seeds %.4f", exact, worst)};
}

}  // namespace

int main(int argc, char** argv) {
  g_configs = argc > 1 ? fs::path(argv[1]) : fs::path(LLS_CONFIG_DIR);
  std::printf("configs: %s\n", g_configs.string().c_str());

  run("1", 1, c1);
  run("2", 1, c2);
  run("3", 30, c3);
  run("4a", 600, [] { return c4("heatmap_moderate.json", 58, 4); });
  run("4b", 600, [] { return c4("heatmap_strong.json", 18, 1); });
  run("4c", 600, [] { return c4("heatmap_very_strong.json", 19, 1); }, true);
  run("5", 60, c5);
  run("6", 1, c6);
  run("7", 1, c7);
  run("8a", 300, [] { return c8("search_cl.json", {0.043, 0.083, 0.007}, {0.001, 0.001, 0.001}); }, true);
  run("8b", 300, [] { return c8("search_slic.json", {25.3, 0.0215}, {1.0, 0.001}); });
  run("9", 120, c9);
  run("10", 60, c10a);
  run("10c", 60, c10b, true);
  run("11", 10, c11);

  std::printf("%d unexpected failure(s)\n", g_unexpected);
  return g_unexpected == 0 ? 0 : 1;
}
