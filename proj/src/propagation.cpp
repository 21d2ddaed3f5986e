#include "lls/propagation.hpp"

#include "lls/errors.hpp"
#include "lls/io.hpp"
#include "lls/objective.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>

namespace lls {

HermitianPropagator::HermitianPropagator(const OperatorMatrix& h) {
  const double scale = std::max(1.0, max_abs(h));
  if (h.hermiticity_error() > kHermitianTolerance * scale) {
    throw ValidationError("Hamiltonian is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "eigendecomposition failed (dim %d, max|H| %.3e)", h.dim(), max_abs(h));
    throw NumericalError(buf);
  }
  evals_ = solver.eigenvalues();
  evecs_ = solver.eigenvectors();
  if (!evals_.allFinite()) throw NumericalError("non-finite eigenvalues in Hamiltonian");
}

Matrix HermitianPropagator::unitary(double t) const {
  Vector phases(evals_.size());
  for (Eigen::Index k = 0; k < evals_.size(); ++k) phases(k) = std::polar(1.0, -evals_(k) * t);
  return evecs_ * phases.asDiagonal() * evecs_.adjoint();
}

Matrix HermitianPropagator::apply(const Matrix& rho, double t) const {
  if (t == 0.0) return rho;
  const Matrix u = unitary(t);
  return u * rho * u.adjoint();
}

std::shared_ptr<const HermitianPropagator> PropagatorCache::get(const OperatorMatrix& h) {
  const auto key = h.fingerprint();
  {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  auto prop = std::make_shared<const HermitianPropagator>(h);
  std::unique_lock lock(mutex_);
  if (entries_.size() >= max_entries_) entries_.clear();
  return entries_.emplace(key, std::move(prop)).first->second;
}

std::size_t PropagatorCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void PropagatorCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

PropagatorCache& PropagatorCache::global() {
  static PropagatorCache cache;
  return cache;
}

namespace {

PropagatorCache& pick(PropagatorCache* cache) { return cache ? *cache : PropagatorCache::global(); }

void check_duration(double t) {
  if (!std::isfinite(t) || t < 0.0) throw ValidationError("segment duration must be finite and >= 0");
}

}  // namespace

DeviationState propagate(const DeviationState& state, const OperatorMatrix& h, double t, PropagatorCache* cache) {
  if (state.dim() != h.dim()) throw DimensionError("state and Hamiltonian dimensions differ");
  if (!std::isfinite(t)) throw ValidationError("propagation time must be finite");
  if (t == 0.0) return state;
  auto prop = pick(cache).get(h);
  return DeviationState::trusted(prop->apply(state.matrix(), t), state.label());
}

PulseSchedule& PulseSchedule::add_segment(std::shared_ptr<const OperatorMatrix> h, double duration,
                                          std::string label) {
  if (!h) throw ValidationError("segment without Hamiltonian");
  check_duration(duration);
  const double scale = std::max(1.0, max_abs(*h));
  if (h->hermiticity_error() > kHermitianTolerance * scale) throw ValidationError("segment Hamiltonian not Hermitian");
  steps_.emplace_back(PulseSegment{std::move(h), duration, std::move(label)});
  total_ += duration;
  return *this;
}

PulseSchedule& PulseSchedule::add_rotation(Axis axis, double angle, double phase, std::string label) {
  if (!std::isfinite(angle) || !std::isfinite(phase)) throw ValidationError("rotation angle must be finite");
  steps_.emplace_back(HardRotation{axis, angle, phase, std::move(label)});
  return *this;
}

PulseSchedule& PulseSchedule::append(const PulseSchedule& other) {
  for (const auto& s : other.steps_) steps_.push_back(s);
  total_ += other.total_;
  return *this;
}

std::size_t PulseSchedule::segment_count() const {
  std::size_t n = 0;
  for (const auto& s : steps_) n += std::holds_alternative<PulseSegment>(s) ? 1 : 0;
  return n;
}

Matrix rotation_unitary(int n_spins, Axis axis, double angle, double phase) {
  // Each spin rotates independently: exp(-i a n.I) = (cos(a/2) 1 - 2i sin(a/2) n.I_1) (x) ...
  double nx = 0.0, ny = 0.0, nz = 0.0;
  switch (axis) {
    case Axis::X:
      nx = std::cos(phase);
      ny = std::sin(phase);
      break;
    case Axis::Y:
      nx = -std::sin(phase);
      ny = std::cos(phase);
      break;
    case Axis::Z:
      nz = 1.0;
      break;
  }
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  Eigen::Matrix2cd r;
  r(0, 0) = Complex(c, -s * nz);
  r(0, 1) = Complex(-s * ny, -s * nx);
  r(1, 0) = Complex(s * ny, -s * nx);
  r(1, 1) = Complex(c, s * nz);
  Matrix u = Matrix::Identity(1, 1);
  for (int k = 0; k < n_spins; ++k) {
    Matrix next(u.rows() * 2, u.cols() * 2);
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      for (Eigen::Index j = 0; j < u.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = u(i, j) * r;
    u = std::move(next);
  }
  return u;
}

namespace {

int spins_of(int dim) {
  int n = 0;
  while ((1 << n) < dim) ++n;
  return n;
}

}  // namespace

DeviationState apply_hard_rotation(const DeviationState& state, Axis axis, double angle, double phase) {
  if (!std::isfinite(angle) || !std::isfinite(phase)) throw ValidationError("rotation angle must be finite");
  const Matrix u = rotation_unitary(spins_of(state.dim()), axis, angle, phase);
  return DeviationState::trusted(u * state.matrix() * u.adjoint(), state.label());
}

ScheduleRun run_schedule(const DeviationState& state, const PulseSchedule& schedule, const RecordOptions& rec,
                         PropagatorCache* cache) {
  ScheduleRun run{state, {}, schedule.empty()};
  if (schedule.empty()) {
    if (rec.enabled) run.snapshots.push_back({0.0, state.matrix()});
    return run;
  }
  auto& c = pick(cache);
  const int n_spins = spins_of(state.dim());
  Matrix rho = state.matrix();
  double time = 0.0;
  if (rec.enabled) run.snapshots.push_back({time, rho});

  for (const auto& step : schedule.steps()) {
    if (const auto* seg = std::get_if<PulseSegment>(&step)) {
      if (seg->hamiltonian->dim() != state.dim()) throw DimensionError("segment Hamiltonian dimension mismatch");
      if (seg->duration == 0.0) {
        if (rec.enabled) run.snapshots.push_back({time, rho});
        continue;
      }
      auto prop = c.get(*seg->hamiltonian);
      if (!rec.enabled) {
        rho = prop->apply(rho, seg->duration);
        time += seg->duration;
        continue;
      }
      int n_steps = std::max(1, rec.steps_per_segment);
      if (rec.record_every) {
        if (!(*rec.record_every > 0.0)) throw ValidationError("record_every must be > 0");
        n_steps = std::max(1, static_cast<int>(std::ceil(seg->duration / *rec.record_every - 1e-9)));
      }
      const double dt = seg->duration / n_steps;
      const Matrix u = prop->unitary(dt);
      const Matrix ud = u.adjoint();
      const double t0 = time;
      for (int k = 1; k <= n_steps; ++k) {
        rho = u * rho * ud;
        run.snapshots.push_back({t0 + dt * k, rho});
      }
      time = t0 + seg->duration;
    } else {
      const auto& rot = std::get<HardRotation>(step);
      const Matrix u = rotation_unitary(n_spins, rot.axis, rot.angle, rot.phase);
      rho = u * rho * u.adjoint();
      if (rec.enabled) run.snapshots.push_back({time, rho});
    }
  }
  if (!rho.allFinite()) throw NumericalError("non-finite state after schedule");
  run.final_state = DeviationState::trusted(std::move(rho), state.label());
  return run;
}

Matrix schedule_unitary(const PulseSchedule& schedule, int n_spins, PropagatorCache* cache) {
  auto& c = pick(cache);
  const int dim = 1 << n_spins;
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& step : schedule.steps()) {
    if (const auto* seg = std::get_if<PulseSegment>(&step)) {
      if (seg->hamiltonian->dim() != dim) throw DimensionError("segment Hamiltonian dimension mismatch");
      if (seg->duration == 0.0) continue;
      u = c.get(*seg->hamiltonian)->unitary(seg->duration) * u;
    } else {
      const auto& rot = std::get<HardRotation>(step);
      u = rotation_unitary(n_spins, rot.axis, rot.angle, rot.phase) * u;
    }
  }
  return u;
}

Eigen::Vector3d bloch_project(const Matrix& state, const SingletTripletBasis& basis, TripletPartner partner) {
  const int n = spins_of(static_cast<int>(state.rows()));
  if ((1 << n) != state.rows() || n != basis.n_spins) throw DimensionError("state does not match basis system size");
  const Matrix pair = reduce_to_pair(state, n, basis.spin_a, basis.spin_b);
  const Vector& s = basis.s0;
  const Vector& p = basis.partner(partner);
  const Complex r00 = s.dot(pair * s);
  const Complex r01 = s.dot(pair * p);
  const Complex r10 = p.dot(pair * s);
  const Complex r11 = p.dot(pair * p);
  return {2.0 * r01.real(), 2.0 * r10.imag(), (r00 - r11).real()};
}

Eigen::Vector3d bloch_project(const DeviationState& state, const SingletTripletBasis& basis, TripletPartner partner) {
  return bloch_project(state.matrix(), basis, partner);
}

std::vector<TrajectoryPoint> make_trajectory(const std::vector<StateSnapshot>& snapshots,
                                             const SingletTripletBasis& basis,
                                             const std::vector<TripletPartner>& partners,
                                             const DeviationState& target) {
  std::vector<TrajectoryPoint> out;
  out.reserve(snapshots.size());
  for (const auto& snap : snapshots) {
    TrajectoryPoint pt;
    pt.time = snap.time;
    Eigen::SelfAdjointEigenSolver<Matrix> es(snap.state, Eigen::EigenvaluesOnly);
    const double span = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
    for (auto partner : partners) {
      Eigen::Vector3d v = bloch_project(snap.state, basis, partner);
      if (span > 1e-15) v /= span;
      pt.bloch_vectors.emplace_back(std::string("S0-") + to_string(partner), v);
    }
    pt.fidelity_to_target = fidelity(snap.state, target.matrix());
    out.push_back(std::move(pt));
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& points) {
  CsvBuilder csv({"time_s", "sphere_label", "x", "y", "z", "fidelity"});
  for (const auto& pt : points) {
    for (const auto& [label, v] : pt.bloch_vectors) {
      csv.cell(pt.time).cell(label).cell(v.x()).cell(v.y()).cell(v.z()).cell(pt.fidelity_to_target);
      csv.end_row();
    }
  }
  return csv.str();
}

}  // namespace lls
