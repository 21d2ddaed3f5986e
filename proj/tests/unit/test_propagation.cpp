#include <doctest.h>

#include "lls/errors.hpp"
#include "lls/hamiltonian.hpp"
#include "lls/propagation.hpp"
#include "oracle.hpp"

#include <random>
#include <thread>

using namespace lls;

namespace {

std::shared_ptr<const OperatorMatrix> shared(const Matrix& m) { return std::make_shared<OperatorMatrix>(m); }

}  // namespace

TEST_CASE("propagator agrees with Pade exponential") {
  std::mt19937_64 rng(11);
  for (int dim : {2, 4, 8}) {
    for (int k = 0; k < 5; ++k) {
      const Matrix h = 50.0 * oracle::random_hermitian(dim, rng);
      const HermitianPropagator p{OperatorMatrix(h)};
      for (double t : {0.0, 1e-4, 3.7e-3, 0.05}) {
        CHECK(oracle::max_abs(p.unitary(t) - oracle::expm_i(h, t)) <= 1e-9);
      }
      const Matrix u = p.unitary(0.013);
      CHECK(oracle::max_abs(u * u.adjoint() - Matrix::Identity(dim, dim)) <= 1e-12);
      CHECK(oracle::max_abs(p.unitary(0.01) * p.unitary(0.02) - p.unitary(0.03)) <= 1e-11);
    }
  }
  Matrix nh = Matrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianPropagator{OperatorMatrix(nh)}, ValidationError);
}

TEST_CASE("free evolution under H0 matches oracle") {
  const Matrix h = oracle::h0_two_spin(35.8, 17.2);
  const DeviationState rho(OperatorMatrix(oracle::total('x', 2)));
  PropagatorCache cache;
  for (double t : {1e-3, 7.3e-3, 0.1}) {
    const DeviationState out = propagate(rho, OperatorMatrix(h), t, &cache);
    CHECK(oracle::max_abs(out.matrix() - oracle::evolve(rho.matrix(), h, t)) <= 1e-10);
    CHECK(out.matrix().norm() == doctest::Approx(rho.matrix().norm()).epsilon(1e-12));
  }
  CHECK(cache.size() == 1);
}

TEST_CASE("hard rotations") {
  const DeviationState iz(OperatorMatrix(oracle::total('z', 2)));
  const DeviationState y90 = apply_hard_rotation(iz, Axis::Y, M_PI / 2);
  CHECK(oracle::max_abs(y90.matrix() - oracle::total('x', 2)) <= 1e-12);
  const DeviationState x90 = apply_hard_rotation(iz, Axis::X, M_PI / 2);
  CHECK(oracle::max_abs(x90.matrix() + oracle::total('y', 2)) <= 1e-12);
  const DeviationState x180 = apply_hard_rotation(iz, Axis::X, M_PI);
  CHECK(oracle::max_abs(x180.matrix() + oracle::total('z', 2)) <= 1e-12);
  const Matrix ux = rotation_unitary(2, Axis::X, 0.7, M_PI / 2);
  const Matrix uy = rotation_unitary(2, Axis::Y, 0.7);
  CHECK(oracle::max_abs(ux - uy) <= 1e-12);
  CHECK(oracle::max_abs(rotation_unitary(3, Axis::Z, 1.1) - oracle::expm_i(oracle::total('z', 3), 1.1)) <= 1e-12);
  // singlet order is invariant under any global rotation
  const DeviationState so(OperatorMatrix(-oracle::dot(0, 1, 2)));
  CHECK(oracle::max_abs(apply_hard_rotation(so, Axis::X, 0.9, 0.3).matrix() - so.matrix()) <= 1e-12);
}

TEST_CASE("schedule run equals product of step unitaries") {
  const Matrix h0 = oracle::h0_two_spin(10, 18);
  const Matrix hb = h0 - 2 * M_PI * 40 * oracle::total('x', 2);
  PulseSchedule s;
  s.add_segment(shared(h0), 3e-3, "free").add_rotation(Axis::X, M_PI, 0.0, "180").add_segment(shared(hb), 5e-3);
  s.add_rotation(Axis::Y, M_PI / 2);
  CHECK(s.size() == 4);
  CHECK(s.segment_count() == 2);
  CHECK(s.total_duration() == doctest::Approx(8e-3));

  const oracle::M want = oracle::expm_i(oracle::total('y', 2), M_PI / 2) * oracle::expm_i(hb, 5e-3) *
                         oracle::expm_i(oracle::total('x', 2), M_PI) * oracle::expm_i(h0, 3e-3);
  CHECK(oracle::max_abs(schedule_unitary(s, 2) - want) <= 1e-10);

  const DeviationState rho(OperatorMatrix(oracle::total('z', 2)));
  const ScheduleRun run = run_schedule(rho, s);
  CHECK_FALSE(run.empty_schedule_warning);
  CHECK(run.snapshots.empty());
  CHECK(oracle::max_abs(run.final_state.matrix() - want * rho.matrix() * want.adjoint()) <= 1e-10);
}

TEST_CASE("recording") {
  const Matrix h0 = oracle::h0_two_spin(35.8, 17.2);
  PulseSchedule s;
  s.add_segment(shared(h0), 10e-3).add_segment(shared(h0 - 2 * M_PI * 30 * oracle::total('x', 2)), 4e-3);
  const DeviationState rho(OperatorMatrix(oracle::total('x', 2)));
  RecordOptions rec;
  rec.enabled = true;
  rec.steps_per_segment = 60;
  const ScheduleRun run = run_schedule(rho, s, rec);
  CHECK(run.snapshots.size() == 121);
  CHECK(run.snapshots.front().time == 0.0);
  CHECK(run.snapshots.back().time == doctest::Approx(14e-3));
  for (std::size_t k = 1; k < run.snapshots.size(); ++k) CHECK(run.snapshots[k].time >= run.snapshots[k - 1].time);
  CHECK(oracle::max_abs(run.snapshots.back().state - run_schedule(rho, s).final_state.matrix()) <= 1e-10);

  rec.record_every = 1e-4;
  CHECK(run_schedule(rho, s, rec).snapshots.size() == 141);
  rec.record_every = 0.0;
  CHECK_THROWS_AS(run_schedule(rho, s, rec), ValidationError);
}

TEST_CASE("empty schedule leaves the state and warns") {
  const DeviationState rho(OperatorMatrix(oracle::total('x', 2)));
  const ScheduleRun run = run_schedule(rho, PulseSchedule{});
  CHECK(run.empty_schedule_warning);
  CHECK(oracle::max_abs(run.final_state.matrix() - rho.matrix()) == 0.0);
  PulseSchedule zero;
  zero.add_segment(shared(oracle::h0_two_spin(1, 2)), 0.0);
  CHECK(oracle::max_abs(run_schedule(rho, zero).final_state.matrix() - rho.matrix()) == 0.0);
}

TEST_CASE("schedule validation") {
  PulseSchedule s;
  const auto h = shared(oracle::h0_two_spin(1, 2));
  CHECK_THROWS_AS(s.add_segment(h, -1e-3), ValidationError);
  CHECK_THROWS_AS(s.add_segment(h, std::nan("")), ValidationError);
  CHECK_THROWS_AS(s.add_segment(nullptr, 1e-3), ValidationError);
  Matrix nh = Matrix::Zero(4, 4);
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(s.add_segment(shared(nh), 1e-3), ValidationError);
  s.add_segment(h, 1e-3);
  const DeviationState three(OperatorMatrix(oracle::total('z', 3)));
  CHECK_THROWS_AS(run_schedule(three, s), DimensionError);
}

TEST_CASE("Bloch projection") {
  const auto basis = singlet_triplet_basis({0, 1}, 2);
  const Eigen::Vector3d s = bloch_project(Matrix(-oracle::dot(0, 1, 2)), basis, TripletPartner::T0);
  CHECK(s.x() == doctest::Approx(0.0));
  CHECK(s.z() == doctest::Approx(1.0));
  // |S0><T0| + h.c. is antiphase-like coherence: points along x
  const Matrix c = basis.s0 * basis.t0.adjoint() + basis.t0 * basis.s0.adjoint();
  const Eigen::Vector3d v = bloch_project(c, basis, TripletPartner::T0);
  CHECK(v.x() == doctest::Approx(2.0));
  CHECK(std::abs(v.y()) <= 1e-15);
  CHECK(std::abs(v.z()) <= 1e-15);
  // S0/T0 are invariant to pair reduction in a larger system
  const auto b3 = singlet_triplet_basis({0, 2}, 3);
  const Eigen::Vector3d w = bloch_project(Matrix(-oracle::dot(0, 2, 3)), b3, TripletPartner::T0);
  CHECK(w.z() > 0.0);
  CHECK(std::abs(w.x()) <= 1e-14);
}

TEST_CASE("trajectory vectors stay inside the sphere") {
  const Matrix h0 = oracle::h0_two_spin(35.8, 17.2);
  PulseSchedule s;
  s.add_segment(shared(h0), 6e-3).add_segment(shared(h0 - 2 * M_PI * 58 * oracle::total('x', 2)), 6e-3);
  const DeviationState rho(OperatorMatrix(oracle::total('x', 2)));
  RecordOptions rec;
  rec.enabled = true;
  const ScheduleRun run = run_schedule(rho, s, rec);
  const auto basis = singlet_triplet_basis({0, 1}, 2);
  const DeviationState target(OperatorMatrix(-oracle::dot(0, 1, 2)));
  const auto pts = make_trajectory(run.snapshots, basis, {TripletPartner::T0, TripletPartner::TPlus}, target);
  REQUIRE(pts.size() == run.snapshots.size());
  for (const auto& p : pts) {
    REQUIRE(p.bloch_vectors.size() == 2);
    for (const auto& [label, v] : p.bloch_vectors) CHECK(v.norm() <= 1.0 + 1e-12);
    CHECK(std::abs(p.fidelity_to_target) <= 1.0 + 1e-12);
  }
  CHECK(pts.back().fidelity_to_target == doctest::Approx(oracle::overlap(run.final_state.matrix(), target.matrix())));
  const std::string csv = trajectory_csv(pts);
  CHECK(csv.rfind("time_s,sphere_label,x,y,z,fidelity\n", 0) == 0);
  CHECK(csv.find("S0-Tplus") != std::string::npos);
}

TEST_CASE("cache is shared safely across threads") {
  PropagatorCache cache;
  std::mt19937_64 rng(5);
  std::vector<OperatorMatrix> hs;
  for (int k = 0; k < 8; ++k) hs.emplace_back(oracle::random_hermitian(4, rng));
  std::vector<Matrix> serial;
  for (const auto& h : hs) serial.push_back(HermitianPropagator(h).unitary(0.3));

  std::vector<std::thread> pool;
  std::vector<int> bad(4, 0);
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (int rep = 0; rep < 50; ++rep) {
        const std::size_t k = static_cast<std::size_t>((rep + t) % 8);
        if (oracle::max_abs(cache.get(hs[k])->unitary(0.3) - serial[k]) != 0.0) ++bad[static_cast<std::size_t>(t)];
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int b : bad) CHECK(b == 0);
  CHECK(cache.size() == 8);
  cache.clear();
  CHECK(cache.size() == 0);
}
