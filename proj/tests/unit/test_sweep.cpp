#include <doctest.h>

#include "lls/errors.hpp"
#include "lls/hashing.hpp"
#include "lls/sweep.hpp"
#include "oracle.hpp"

using namespace lls;

namespace {

const SpinSystem kModerate = SpinSystem::two_spin(35.8, 17.2);

OptimResult reference_m2s() {
  OptimResult r;
  r.gammas = {14.069e-3, 6.810e-3};
  r.betas = {3.452e-3, 0.025e-3};
  r.ctrl = {100, 0};
  return r;
}

OptimResult reference_s2m() {
  OptimResult r;
  r.gammas = {2.457e-3, 6.401e-3};
  r.betas = {6.255e-3, 2.420e-3};
  r.ctrl = {100, 0};
  return r;
}

SweepGrid fixed_grid(GridAxis nu, GridAxis de, bool relative) {
  SweepGrid g;
  g.mode = SweepMode::FixedSchedule;
  g.nu_axis = nu;
  g.delta_axis = de;
  g.nu_relative = relative;
  g.reference = reference_m2s();
  return g;
}

}  // namespace

TEST_CASE("grid axes") {
  const auto v = GridAxis{5, 100, 20}.values();
  REQUIRE(v.size() == 20);
  CHECK(v.front() == 5.0);
  CHECK(v.back() == 100.0);
  CHECK(v[1] == doctest::Approx(10.0));
  CHECK(GridAxis{-0.2, 0.2, 3}.values()[1] == 0.0);
  SweepGrid g;
  g.nu_axis.n_points = 1;
  CHECK_THROWS_AS(g.validate(), ValidationError);
  g = {};
  g.mode = SweepMode::FixedSchedule;
  CHECK_THROWS_AS(g.validate(), ValidationError);  // no reference
  CHECK(parse_sweep_mode("fixed_schedule") == SweepMode::FixedSchedule);
  CHECK_THROWS_AS(parse_sweep_mode("fixed"), ValidationError);
}

TEST_CASE("re-optimized heatmap on a 2x2 grid") {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {0, 0});
  SweepGrid g;
  g.nu_axis = {40, 60, 2};
  g.delta_axis = {0, 4, 2};
  OptimizerSettings s;
  s.n_starts = 2;
  s.max_evals = 300;
  s.seed = 9;
  const HeatmapResult r = heatmap(p, g, s, 1);
  REQUIRE(r.fidelity.rows() == 2);
  REQUIRE(r.fidelity.cols() == 2);
  REQUIRE(r.cells.size() == 4);

  // each cell is exactly an independent optimize() at that control point
  double best = -2;
  int bi = -1, bj = -1;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      QaoaProblem q = p;
      q.ctrl = {i == 0 ? 40.0 : 60.0, j == 0 ? 0.0 : 4.0};
      OptimizerSettings cs = s;
      cs.seed = mix_seed(s.seed, static_cast<std::uint64_t>(i * 2 + j));
      const OptimResult want = optimize(q, cs);
      CHECK(r.fidelity(i, j) == want.fidelity);
      CHECK(r.converged[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] == want.converged);
      CHECK(r.fidelity(i, j) <= r.bound + 1e-9);
      if (want.fidelity > best) {
        best = want.fidelity;
        bi = i;
        bj = j;
      }
    }
  }
  CHECK(r.best_point.i == bi);
  CHECK(r.best_point.j == bj);
  CHECK(r.best_point.fidelity == best);

  const HeatmapResult t = heatmap(p, g, s, 3);
  CHECK(t.fidelity == r.fidelity);
  CHECK(heatmap_csv(t) == heatmap_csv(r));
}

TEST_CASE("robustness map reference cell") {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  const SweepGrid g = fixed_grid({-0.2, 0.2, 5}, {-10, 10, 5}, true);
  const HeatmapResult r = robustness_map(p, g, 1);
  const double nominal = evaluate_schedule(p, reference_m2s().gammas, reference_m2s().betas).fidelity;
  CHECK(r.fidelity(2, 2) == nominal);

  // a deviated cell agrees with a direct evaluation at shifted controls
  QaoaProblem q = p;
  q.ctrl = {100 * (1 + 0.1), -5};
  CHECK(r.fidelity(3, 1) == doctest::Approx(evaluate_schedule(q, reference_m2s().gammas, reference_m2s().betas).fidelity)
                                .epsilon(1e-12));
  CHECK(robustness_map(p, g, 4).fidelity == r.fidelity);

  SweepGrid abs = fixed_grid({-10, 10, 3}, {-10, 10, 3}, false);
  const HeatmapResult ra = robustness_map(p, abs, 1);
  q.ctrl = {90, 10};
  CHECK(ra.fidelity(0, 2) == doctest::Approx(evaluate_schedule(q, reference_m2s().gammas, reference_m2s().betas).fidelity)
                                 .epsilon(1e-12));
  CHECK_THROWS_AS(robustness_map(make_m2s_problem(kModerate, 3, {100, 0}), g, 1), ValidationError);
}

TEST_CASE("robustness map is smooth") {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  const HeatmapResult r = robustness_map(p, fixed_grid({-10, 10, 21}, {-10, 10, 21}, false), 1);
  // 1 Hz steps on a 24 ms schedule: |dF| is bounded by 2 pi * 24 ms * |dH| ~ 0.3 in the worst case
  double worst = 0;
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) {
      if (i + 1 < 21) worst = std::max(worst, std::abs(r.fidelity(i + 1, j) - r.fidelity(i, j)));
      if (j + 1 < 21) worst = std::max(worst, std::abs(r.fidelity(i, j + 1) - r.fidelity(i, j)));
    }
  }
  CHECK(worst < 0.1);
}

TEST_CASE("total protocol factorizes at zero deviation") {
  const QaoaProblem prep = make_m2s_problem(kModerate, 2, {100, 0});
  const QaoaProblem det = make_s2m_problem(kModerate, 2, {100, 0});
  const double fp = evaluate_schedule(prep, reference_m2s().gammas, reference_m2s().betas).fidelity;
  const double fd = evaluate_schedule(det, reference_s2m().gammas, reference_s2m().betas).fidelity;
  const double total = total_protocol_fidelity(prep, reference_m2s(), det, reference_s2m(), 0.0, 0.0, true);
  CHECK(total == doctest::Approx(fp * fd).epsilon(1e-12));

  // oracle: filter the prepared state onto the singlet, then detect
  const oracle::M ha = oracle::h0_two_spin(35.8, 17.2);
  const oracle::M hb = ha - 2 * M_PI * 103.0 * oracle::total('x', 2) - 2 * M_PI * 2.0 * oracle::total('z', 2);
  auto run = [&](oracle::M rho, const OptimResult& s) {
    for (std::size_t k = 0; k < 2; ++k) rho = oracle::evolve(oracle::evolve(rho, ha, s.gammas[k]), hb, s.betas[k]);
    return rho;
  };
  const oracle::M so = -oracle::dot(0, 1, 2);
  const oracle::M after = run(oracle::total('x', 2), reference_m2s());
  const double c = (so * after).trace().real() / so.squaredNorm();
  const oracle::M out = run(c * so, reference_s2m());
  const oracle::M ap =
      oracle::spin_op('x', 0, 2) * oracle::spin_op('z', 1, 2) - oracle::spin_op('z', 0, 2) * oracle::spin_op('x', 1, 2);
  const double want = (out * ap).trace().real() / (oracle::total('x', 2).norm() * ap.norm());
  CHECK(total_protocol_fidelity(prep, reference_m2s(), det, reference_s2m(), 0.03, 2.0, true) ==
        doctest::Approx(want).epsilon(1e-10));

  SweepGrid g = fixed_grid({-0.1, 0.1, 3}, {-5, 5, 3}, true);
  const HeatmapResult m = total_protocol_map(prep, reference_m2s(), det, reference_s2m(), g, 2);
  CHECK(m.fidelity(1, 1) == total);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(m.fidelity(i, j)) <= 1.0);
}

TEST_CASE("heatmap CSV and sidecar") {
  const QaoaProblem p = make_m2s_problem(kModerate, 2, {100, 0});
  const HeatmapResult r = robustness_map(p, fixed_grid({-0.2, 0.2, 3}, {-10, 10, 2}, true), 1);
  const std::string csv = heatmap_csv(r);
  CHECK(csv.rfind("eps_nu_rel,eps_delta_hz,fidelity,converged\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);
  // nu-major: the second row keeps nu and moves delta
  const auto line2 = csv.substr(csv.find('\n') + 1);
  const auto line3 = line2.substr(line2.find('\n') + 1);
  CHECK(line2.substr(0, line2.find(',')) == line3.substr(0, line3.find(',')));

  const nlohmann::json j = heatmap_sidecar(r);
  for (const char* k : {"mode", "columns", "nu_axis", "delta_axis", "nu_relative", "bound", "best_point", "reference"})
    CHECK(j.contains(k));
  CHECK(j["mode"] == "fixed_schedule");
  CHECK(j["best_point"]["fidelity"].get<double>() == r.best_point.fidelity);
}
