#pragma once

// Unitary propagation of deviation density matrices under piecewise-constant
// Hamiltonians (rad/s), schedule execution and singlet-triplet Bloch projection.

#include "lls/spin_algebra.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lls {

/// Eigendecomposition of a Hermitian H; U(t) = V diag(exp(-i lambda t)) V^dagger.
class HermitianPropagator {
 public:
  /// Throws ValidationError if h is not Hermitian, NumericalError if the
  /// eigensolver fails.
  explicit HermitianPropagator(const OperatorMatrix& h);

  Matrix unitary(double t) const;
  /// U rho U^dagger.
  Matrix apply(const Matrix& rho, double t) const;

  const Eigen::VectorXd& eigenvalues() const { return evals_; }
  int dim() const { return static_cast<int>(evals_.size()); }

 private:
  Eigen::VectorXd evals_;
  Matrix evecs_;
};

/// Thread-safe map from Hamiltonian fingerprint to its eigendecomposition.
/// Concurrent lookups share a read lock; inserts take the write lock.
class PropagatorCache {
 public:
  explicit PropagatorCache(std::size_t max_entries = 4096) : max_entries_(max_entries) {}

  std::shared_ptr<const HermitianPropagator> get(const OperatorMatrix& h);
  std::size_t size() const;
  void clear();

  /// Process-wide cache used when callers pass none.
  static PropagatorCache& global();

 private:
  std::size_t max_entries_;
  mutable std::shared_mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<const HermitianPropagator>> entries_;
};

/// exp(-i H t) rho exp(+i H t).
DeviationState propagate(const DeviationState& state, const OperatorMatrix& h, double t,
                         PropagatorCache* cache = nullptr);

struct PulseSegment {
  std::shared_ptr<const OperatorMatrix> hamiltonian;  // rad/s
  double duration = 0.0;                              // s
  std::string label;
};

/// Instantaneous global rotation exp(-i angle n.I). For X/Y axes the phase
/// rotates the axis in the transverse plane: X -> (cos p, sin p, 0),
/// Y -> (-sin p, cos p, 0). Phase is ignored for Z.
struct HardRotation {
  Axis axis = Axis::X;
  double angle = 0.0;  // rad
  double phase = 0.0;  // rad
  std::string label;
};

using ScheduleStep = std::variant<PulseSegment, HardRotation>;

class PulseSchedule {
 public:
  PulseSchedule() = default;

  /// Throws ValidationError on a negative or non-finite duration or a null or
  /// non-Hermitian Hamiltonian.
  PulseSchedule& add_segment(std::shared_ptr<const OperatorMatrix> h, double duration, std::string label = {});
  PulseSchedule& add_rotation(Axis axis, double angle, double phase = 0.0, std::string label = {});
  PulseSchedule& append(const PulseSchedule& other);

  const std::vector<ScheduleStep>& steps() const { return steps_; }
  bool empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }
  double total_duration() const { return total_; }
  std::size_t segment_count() const;

 private:
  std::vector<ScheduleStep> steps_;
  double total_ = 0.0;
};

/// Rotation unitary for the total spin operator of n spins.
Matrix rotation_unitary(int n_spins, Axis axis, double angle, double phase = 0.0);

DeviationState apply_hard_rotation(const DeviationState& state, Axis axis, double angle, double phase = 0.0);

struct RecordOptions {
  bool enabled = false;
  std::optional<double> record_every;  // s; overrides steps_per_segment
  int steps_per_segment = 50;
};

struct StateSnapshot {
  double time = 0.0;
  Matrix state;
};

struct ScheduleRun {
  DeviationState final_state;
  std::vector<StateSnapshot> snapshots;  // empty unless recording
  bool empty_schedule_warning = false;
};

ScheduleRun run_schedule(const DeviationState& state, const PulseSchedule& schedule, const RecordOptions& rec = {},
                         PropagatorCache* cache = nullptr);

/// Full propagator of the schedule (product of all step unitaries).
Matrix schedule_unitary(const PulseSchedule& schedule, int n_spins, PropagatorCache* cache = nullptr);

/// (2 Re r01, 2 Im r10, r00 - r11) of the state restricted to {|S0>, |partner>}.
/// States with more than two spins are first reduced to the basis pair.
Eigen::Vector3d bloch_project(const Matrix& state, const SingletTripletBasis& basis, TripletPartner partner);
Eigen::Vector3d bloch_project(const DeviationState& state, const SingletTripletBasis& basis, TripletPartner partner);

struct TrajectoryPoint {
  double time = 0.0;
  std::vector<std::pair<std::string, Eigen::Vector3d>> bloch_vectors;
  double fidelity_to_target = 0.0;
};

/// Converts recorded snapshots to trajectory points. Bloch vectors are divided
/// by the spectral span of the state so their length never exceeds 1.
std::vector<TrajectoryPoint> make_trajectory(const std::vector<StateSnapshot>& snapshots,
                                             const SingletTripletBasis& basis,
                                             const std::vector<TripletPartner>& partners,
                                             const DeviationState& target);

/// Columns time_s, sphere_label, x, y, z, fidelity.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& points);

}  // namespace lls
