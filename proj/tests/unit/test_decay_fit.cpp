#include <doctest.h>

#include "lls/decay_fit.hpp"
#include "lls/errors.hpp"

#include <cmath>
#include <random>

using namespace lls;

namespace {

DecaySeries synthetic(double a, double t, int n, double t_max, double offset = 0.0) {
  DecaySeries s;
  for (int k = 0; k < n; ++k) {
    const double x = t_max * k / (n - 1);
    s.times.push_back(x);
    s.amplitudes.push_back(a * std::exp(-x / t) + offset);
  }
  return s;
}

}  // namespace

TEST_CASE("noiseless exponential is recovered exactly") {
  const DecayFit f = fit_exponential_decay(synthetic(1.0, 39.4, 10, 60.0));
  CHECK(std::abs(f.t_lls - 39.4) <= 1e-6);
  CHECK(std::abs(f.amplitude0 - 1.0) <= 1e-9);
  CHECK(f.residual_rms <= 1e-10);
  CHECK(f.t_lls_stderr <= 1e-6);
  // negative amplitudes (inverted signal) fit just as well
  const DecayFit g = fit_exponential_decay(synthetic(-3.0, 12.0, 8, 40.0));
  CHECK(std::abs(g.t_lls - 12.0) <= 1e-6);
  CHECK(g.amplitude0 == doctest::Approx(-3.0));
}

TEST_CASE("amplitude scale invariance") {
  const DecaySeries base = synthetic(1.0, 39.4, 10, 60.0);
  DecaySeries noisy = base;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.02);
  for (double& y : noisy.amplitudes) y *= 1.0 + n(rng);
  const double t0 = fit_exponential_decay(noisy).t_lls;
  for (double c : {1e-6, 0.37, 5.0, 2e8}) {
    DecaySeries s = noisy;
    for (double& y : s.amplitudes) y *= c;
    const DecayFit f = fit_exponential_decay(s);
    CHECK(std::abs(f.t_lls - t0) <= 1e-12 * t0);
  }
}

TEST_CASE("2% multiplicative noise stays within 5% over 100 seeds") {
  const double truth = 39.4;
  std::vector<double> est, se;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DecaySeries s = synthetic(1.0, truth, 10, 60.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 0.02);
    for (double& y : s.amplitudes) y *= 1.0 + n(rng);
    const DecayFit f = fit_exponential_decay(s);
    CHECK(std::abs(f.t_lls - truth) <= 0.05 * truth);
    est.push_back(f.t_lls);
    se.push_back(f.t_lls_stderr);
  }
  // the reported standard error tracks the Monte-Carlo spread
  double mean = 0, var = 0, mse = 0;
  for (double v : est) mean += v / est.size();
  for (double v : est) var += (v - mean) * (v - mean) / (est.size() - 1);
  for (double v : se) mse += v / se.size();
  CHECK(mse > 0.5 * std::sqrt(var));
  CHECK(mse < 2.0 * std::sqrt(var));
}

TEST_CASE("offset term") {
  DecayFitOptions o;
  o.with_offset = true;
  const DecayFit f = fit_exponential_decay(synthetic(2.0, 15.0, 25, 90.0, 0.3), o);
  CHECK(f.t_lls == doctest::Approx(15.0).epsilon(1e-6));
  CHECK(f.offset == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(f.amplitude0 == doctest::Approx(2.0).epsilon(1e-6));
  // without the offset term the same data give a biased, longer lifetime
  CHECK(fit_exponential_decay(synthetic(2.0, 15.0, 25, 90.0, 0.3)).t_lls > 15.5);
}

TEST_CASE("degenerate input") {
  DecaySeries two;
  two.times = {0.0, 1.0};
  two.amplitudes = {1.0, 0.5};
  CHECK_THROWS_AS(fit_exponential_decay(two), ValidationError);

  DecaySeries flat = synthetic(1.0, 10.0, 6, 10.0);
  for (double& y : flat.amplitudes) y = 0.7;
  CHECK_THROWS_AS(fit_exponential_decay(flat), FitError);

  DecaySeries growth = synthetic(1.0, -10.0, 6, 10.0);
  CHECK_THROWS_AS(fit_exponential_decay(growth), FitError);

  DecaySeries unordered = synthetic(1.0, 10.0, 5, 10.0);
  std::swap(unordered.times[1], unordered.times[2]);
  CHECK_THROWS_AS(fit_exponential_decay(unordered), ValidationError);

  DecaySeries nan = synthetic(1.0, 10.0, 5, 10.0);
  nan.amplitudes[2] = std::nan("");
  CHECK_THROWS_AS(fit_exponential_decay(nan), ValidationError);

  DecayFitOptions o;
  o.with_offset = true;
  DecaySeries three = synthetic(1.0, 10.0, 3, 10.0);
  CHECK_THROWS_AS(fit_exponential_decay(three, o), FitError);  // n == k
}

TEST_CASE("deterministic") {
  DecaySeries s = synthetic(1.0, 20.0, 12, 60.0);
  s.amplitudes[3] *= 1.03;
  const DecayFit a = fit_exponential_decay(s), b = fit_exponential_decay(s);
  CHECK(a.t_lls == b.t_lls);
  CHECK(a.t_lls_stderr == b.t_lls_stderr);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("CSV round trip") {
  const DecaySeries s = read_decay_csv("time_s,amplitude\n0,1\n10,0.5\n20,0.25\n30,0.125\n", "x");
  REQUIRE(s.times.size() == 4);
  CHECK(s.label == "x");
  const DecayFit f = fit_exponential_decay(s);
  CHECK(f.t_lls == doctest::Approx(10.0 / std::log(2.0)).epsilon(1e-9));
  const std::string out = decay_fit_csv(s, f);
  CHECK(out.rfind("time_s,amplitude,model,residual\n", 0) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 5);
  CHECK_THROWS_AS(read_decay_csv("t,a\n0,1\n1,0.5\n2,0.2\n"), ValidationError);
  CHECK_THROWS_AS(read_decay_csv("time_s,amplitude\n0,1\n1,abc\n2,0.2\n"), ValidationError);
  CHECK_THROWS_AS(read_decay_csv("time_s,amplitude\n0,1\n1\n2,0.2\n"), ValidationError);
}
