#include <doctest.h>

#include "lls/errors.hpp"
#include "lls/objective.hpp"
#include "oracle.hpp"

#include <random>

using namespace lls;

TEST_CASE("fidelity basics") {
  const Matrix ix = oracle::total('x', 2);
  const Matrix iz = oracle::total('z', 2);
  CHECK(fidelity(ix, ix) == doctest::Approx(1.0));
  CHECK(fidelity(ix, Matrix(-ix)) == doctest::Approx(-1.0));
  CHECK(std::abs(fidelity(ix, iz)) <= 1e-15);
  CHECK(fidelity(Matrix(3.0 * ix), Matrix(0.2 * ix)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(fidelity(Matrix::Zero(4, 4), ix), UndefinedFidelityError);
  CHECK_THROWS_AS(fidelity(ix, Matrix(1e-13 * ix)), UndefinedFidelityError);
  CHECK_THROWS_AS(fidelity(ix, oracle::total('x', 3)), DimensionError);
}

TEST_CASE("fidelity matches direct trace formula and is symmetric") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 50; ++k) {
    const Matrix a = oracle::random_hermitian(4, rng);
    const Matrix b = oracle::random_hermitian(4, rng);
    const double want = (a * b).trace().real() / std::sqrt((a * a).trace().real() * (b * b).trace().real());
    CHECK(fidelity(a, b) == doctest::Approx(want).epsilon(1e-12));
    CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-12));
    CHECK(std::abs(fidelity(a, b)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("fidelity is invariant under a joint unitary") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    const Matrix a = oracle::random_hermitian(8, rng), b = oracle::random_hermitian(8, rng);
    const Matrix u = oracle::random_unitary(8, rng);
    CHECK(fidelity(Matrix(u * a * u.adjoint()), Matrix(u * b * u.adjoint())) ==
          doctest::Approx(fidelity(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("unitary bound") {
  const Matrix ix = oracle::total('x', 2);
  const Matrix iz = oracle::total('z', 2);
  const Matrix so = -oracle::dot(0, 1, 2);
  CHECK(unitary_bound(ix, so) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(unitary_bound(iz, so) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(unitary_bound(ix, iz) == doctest::Approx(1.0));
  CHECK(unitary_bound(so, ix) == doctest::Approx(unitary_bound(ix, so)));

  std::mt19937_64 rng(8);
  for (int k = 0; k < 30; ++k) {
    const Matrix a = oracle::random_hermitian(4, rng), b = oracle::random_hermitian(4, rng);
    const double bound = unitary_bound(a, b);
    CHECK(bound == doctest::Approx(oracle::sorted_spectrum_bound(a, b)).epsilon(1e-12));
    for (int j = 0; j < 20; ++j) {
      const Matrix u = oracle::random_unitary(4, rng);
      CHECK(fidelity(Matrix(u * a * u.adjoint()), b) <= bound + 1e-12);
    }
  }
}

TEST_CASE("scalarized cost") {
  CostConfig cfg;
  cfg.r = 0.4;
  CHECK(scalarized_cost(0.8, {1e-3, 2e-3}, cfg) == doctest::Approx(0.4 * 0.2 + 0.6 * 3e-3));
  cfg.time_unit_scale = 1e3;
  CHECK(scalarized_cost(0.8, {1e-3, 2e-3}, cfg) == doctest::Approx(0.4 * 0.2 + 0.6 * 3.0));
  cfg.r = 1.0;
  CHECK(scalarized_cost(0.5, {10.0}, cfg) == doctest::Approx(0.5));
  cfg.r = 0.0;
  CHECK(scalarized_cost(0.5, {}, cfg) == 0.0);
  CHECK_THROWS_AS(scalarized_cost(0.5, {-1e-3}, cfg), ValidationError);
  cfg.r = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.r = 0.5;
  cfg.time_unit_scale = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);

  // monotone: better fidelity or shorter time never costs more
  cfg = {};
  CHECK(scalarized_cost(0.9, {5e-3}, cfg) < scalarized_cost(0.8, {5e-3}, cfg));
  CHECK(scalarized_cost(0.9, {4e-3}, cfg) < scalarized_cost(0.9, {5e-3}, cfg));
}
