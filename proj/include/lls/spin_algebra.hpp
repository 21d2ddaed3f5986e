#pragma once

// Spin-1/2 operator algebra on the 2^N-dimensional product space.
//
// Basis convention, used everywhere in the library: |0> is spin-up (m = +1/2),
// |1> is spin-down, and the tensor order is spin 0 (x) spin 1 (x) ... so the
// computational index of a product ket has spin 0 in its most significant bit.
// Operators use the physics normalization I = sigma / 2.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lls {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxSpins = 10;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTracelessTolerance = 1e-12;

enum class Axis { X, Y, Z };

const char* to_string(Axis axis);

/// Dense complex square matrix over the spin Hilbert space.
///
/// Immutable once built. The Hermitian flag is computed at construction, so
/// it is always truthful. A 64-bit content fingerprint is computed at the same
/// time and is used as the identity key by the propagator cache.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;

  /// Throws DimensionError unless the matrix is square with power-of-two size.
  explicit OperatorMatrix(Matrix entries);

  static OperatorMatrix identity(int dim);
  static OperatorMatrix zero(int dim);

  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }
  bool hermitian() const noexcept { return hermitian_; }
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

  /// max |A - A^dagger| over entries.
  double hermiticity_error() const;
  Complex trace() const { return entries_.trace(); }
  double frobenius_norm() const { return entries_.norm(); }

  OperatorMatrix operator+(const OperatorMatrix& other) const;
  OperatorMatrix operator-(const OperatorMatrix& other) const;
  OperatorMatrix operator*(const OperatorMatrix& other) const;
  OperatorMatrix operator*(double scale) const;
  OperatorMatrix operator*(Complex scale) const;
  OperatorMatrix operator-() const;
  friend OperatorMatrix operator*(double scale, const OperatorMatrix& op) { return op * scale; }

  OperatorMatrix adjoint() const;

 private:
  Matrix entries_;
  bool hermitian_ = false;
  std::uint64_t fingerprint_ = 0;
};

/// A ^ B - B ^ A.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest absolute entry.
double max_abs(const Matrix& m);
double max_abs(const OperatorMatrix& m);

/// Traceless Hermitian deviation density matrix (identity background dropped).
class DeviationState {
 public:
  /// Throws ValidationError unless Hermitian and traceless to 1e-12 (relative
  /// to the operator scale for large matrices).
  DeviationState() = default;
  DeviationState(OperatorMatrix matrix, std::string label = {});

  /// Skips validation; for internal propagation results that are Hermitian and
  /// traceless by construction.
  static DeviationState trusted(Matrix m, std::string label = {});

  const OperatorMatrix& op() const noexcept { return matrix_; }
  const Matrix& matrix() const noexcept { return matrix_.matrix(); }
  const std::string& label() const noexcept { return label_; }
  int dim() const noexcept { return matrix_.dim(); }

 private:
  struct TrustedTag {};
  DeviationState(OperatorMatrix matrix, std::string label, TrustedTag);

  OperatorMatrix matrix_;
  std::string label_;
};

/// Single-spin and total angular-momentum operators for N spin-1/2 particles.
class SpinOperators {
 public:
  /// Throws DimensionError unless 1 <= n_spins <= kMaxSpins.
  explicit SpinOperators(int n_spins);

  int n_spins() const noexcept { return n_spins_; }
  int dim() const noexcept { return 1 << n_spins_; }

  /// Spin indices are zero-based.
  const OperatorMatrix& single(Axis axis, int spin) const;
  const OperatorMatrix& total(Axis axis) const;

  const OperatorMatrix& x(int spin) const { return single(Axis::X, spin); }
  const OperatorMatrix& y(int spin) const { return single(Axis::Y, spin); }
  const OperatorMatrix& z(int spin) const { return single(Axis::Z, spin); }
  const OperatorMatrix& total_x() const { return total(Axis::X); }
  const OperatorMatrix& total_y() const { return total(Axis::Y); }
  const OperatorMatrix& total_z() const { return total(Axis::Z); }

 private:
  int n_spins_;
  std::vector<OperatorMatrix> singles_;  // index 3 * spin + axis
  std::vector<OperatorMatrix> totals_;
};

SpinOperators build_spin_operators(int n_spins);

/// I_i . I_j for i != j. Throws ValidationError on an invalid pair.
OperatorMatrix scalar_product_operator(const SpinOperators& ops, int i, int j);

/// Singlet projector (1/4) 1 - I_i . I_j.
OperatorMatrix singlet_projector(const SpinOperators& ops, int i, int j);

enum class TripletPartner { T0, TPlus, TMinus };

const char* to_string(TripletPartner partner);
/// Accepts "T0", "Tplus"/"T+", "Tminus"/"T-". Throws ValidationError otherwise.
TripletPartner parse_triplet_partner(const std::string& label);

/// Singlet-triplet kets of a spin pair, as 4-component vectors over the pair
/// subspace |00>, |01>, |10>, |11> (first index = lower spin index).
struct SingletTripletBasis {
  int spin_a = 0;
  int spin_b = 1;
  int n_spins = 2;
  Vector s0;
  Vector t0;
  Vector tplus;
  Vector tminus;

  const Vector& partner(TripletPartner p) const;
};

/// Throws ValidationError if the pair is not two distinct valid spin indices.
SingletTripletBasis singlet_triplet_basis(std::pair<int, int> pair, int n_spins);

/// Partial trace of a full-space operator over every spin except (a, b),
/// returned as a 4x4 matrix in the pair basis with spin a as the high bit.
/// For n_spins == 2 and (a, b) == (0, 1) this is the identity map.
Matrix reduce_to_pair(const Matrix& state, int n_spins, int spin_a, int spin_b);

}  // namespace lls
