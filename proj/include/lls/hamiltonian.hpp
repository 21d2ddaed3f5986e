#pragma once

// Rotating-frame Hamiltonians and target operators.
//
// Every Hamiltonian returned here is in angular-frequency units (rad/s). All
// inputs (offsets, couplings, RF amplitude and offset) are in Hz and are
// converted at this boundary.

#include "lls/spin_algebra.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace lls {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Chemical-shift offsets and scalar couplings of N spin-1/2 nuclei.
struct SpinSystem {
  int n_spins = 2;
  std::vector<double> offsets_hz;
  Eigen::MatrixXd j_couplings_hz;  // symmetric, zero diagonal

  /// Two-spin pair with shift difference delta: offsets (-delta/2, +delta/2),
  /// which reproduces the -pi delta (I1z - I2z) term.
  static SpinSystem two_spin(double delta_hz, double j_hz);

  /// Throws ValidationError on a broken invariant.
  void validate() const;

  /// Largest |J_ij|; zero for a single spin.
  double max_coupling_hz() const;
};

/// RF amplitude nu (>= 0) and RF frequency offset Delta, both Hz.
struct ControlParams {
  double nu_hz = 0.0;
  double delta_offset_hz = 0.0;
};

enum class TargetKind { SingletOrder, PairwiseSingletSum, AntiphaseMagnetization, Custom };

const char* to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& name);

/// What to build. Pairs are zero-based spin indices.
struct TargetSpec {
  TargetKind kind = TargetKind::SingletOrder;
  std::vector<std::pair<int, int>> pairs{{0, 1}};
  std::filesystem::path custom_path;  // Custom only
};

/// Hermitian traceless operator the optimizer drives the state towards.
struct TargetOperator {
  TargetKind kind = TargetKind::SingletOrder;
  OperatorMatrix matrix;
};

/// sum_i 2 pi offset_i I_i^z + sum_{i<j} 2 pi J_ij I_i . I_j
OperatorMatrix build_h0(const SpinSystem& system, const SpinOperators& ops);
OperatorMatrix build_h0(const SpinSystem& system);

/// H_B = H_0 - 2 pi nu I^x - 2 pi Delta I^z.
OperatorMatrix build_hb(const OperatorMatrix& h0, const SpinOperators& ops, const ControlParams& ctrl);
OperatorMatrix build_hb(const OperatorMatrix& h0, const ControlParams& ctrl);

/// Throws ValidationError for an invalid pair or a non-Hermitian / non-traceless
/// custom matrix.
TargetOperator build_target(const TargetSpec& spec, const SpinSystem& system);

struct ThermalAndInitial {
  DeviationState thermal;  // sum_i I_i^z
  DeviationState initial;  // sum_i I_i^x
};

ThermalAndInitial thermal_and_initial_states(const SpinSystem& system);

/// Dense complex matrix as CSV, one row per line, "re,im" pairs row-major.
Matrix load_complex_matrix_csv(const std::filesystem::path& path);
void save_complex_matrix_csv(const std::filesystem::path& path, const Matrix& m);

}  // namespace lls
