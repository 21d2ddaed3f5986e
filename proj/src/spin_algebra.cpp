#include "lls/spin_algebra.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace lls {

namespace {

bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint64_t fingerprint_of(const Matrix& m) {
  const std::int64_t dim = m.rows();
  std::uint64_t h = fnv1a64(&dim, sizeof dim);
  return fnv1a64(m.data(), static_cast<std::size_t>(m.size()) * sizeof(Complex), h);
}

Matrix pauli_half(Axis axis) {
  Matrix m = Matrix::Zero(2, 2);
  switch (axis) {
    case Axis::X:
      m(0, 1) = 0.5;
      m(1, 0) = 0.5;
      break;
    case Axis::Y:
      m(0, 1) = Complex(0.0, -0.5);
      m(1, 0) = Complex(0.0, 0.5);
      break;
    case Axis::Z:
      m(0, 0) = 0.5;
      m(1, 1) = -0.5;
      break;
  }
  return m;
}

Matrix embed(const Matrix& local, int spin, int n_spins) {
  Matrix result = Matrix::Identity(1, 1);
  for (int k = 0; k < n_spins; ++k) {
    const Matrix factor = (k == spin) ? local : Matrix::Identity(2, 2);
    Matrix next(result.rows() * 2, result.cols() * 2);
    for (Eigen::Index r = 0; r < result.rows(); ++r)
      for (Eigen::Index c = 0; c < result.cols(); ++c)
        next.block(2 * r, 2 * c, 2, 2) = result(r, c) * factor;
    result = std::move(next);
  }
  return result;
}

void check_pair(int i, int j, int n_spins) {
  if (i == j || i < 0 || j < 0 || i >= n_spins || j >= n_spins) {
    throw ValidationError("invalid spin pair (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") for " + std::to_string(n_spins) + " spins");
  }
}

}  // namespace

const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::X:
      return "x";
    case Axis::Y:
      return "y";
    case Axis::Z:
      return "z";
  }
  return "?";
}

OperatorMatrix::OperatorMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || !is_power_of_two(entries_.rows())) {
    throw DimensionError("operator must be square with power-of-two dimension, got " +
                         std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
  }
  hermitian_ = hermiticity_error() <= kHermitianTolerance;
  fingerprint_ = fingerprint_of(entries_);
}

OperatorMatrix OperatorMatrix::identity(int dim) { return OperatorMatrix(Matrix::Identity(dim, dim)); }

OperatorMatrix OperatorMatrix::zero(int dim) { return OperatorMatrix(Matrix::Zero(dim, dim)); }

double OperatorMatrix::hermiticity_error() const { return max_abs(entries_ - entries_.adjoint()); }

OperatorMatrix OperatorMatrix::operator+(const OperatorMatrix& other) const {
  if (dim() != other.dim()) throw DimensionError("operator dimension mismatch in sum");
  return OperatorMatrix(entries_ + other.entries_);
}

OperatorMatrix OperatorMatrix::operator-(const OperatorMatrix& other) const {
  if (dim() != other.dim()) throw DimensionError("operator dimension mismatch in difference");
  return OperatorMatrix(entries_ - other.entries_);
}

OperatorMatrix OperatorMatrix::operator*(const OperatorMatrix& other) const {
  if (dim() != other.dim()) throw DimensionError("operator dimension mismatch in product");
  return OperatorMatrix(entries_ * other.entries_);
}

OperatorMatrix OperatorMatrix::operator*(double scale) const { return OperatorMatrix(entries_ * scale); }

OperatorMatrix OperatorMatrix::operator*(Complex scale) const { return OperatorMatrix(entries_ * scale); }

OperatorMatrix OperatorMatrix::operator-() const { return OperatorMatrix(-entries_); }

OperatorMatrix OperatorMatrix::adjoint() const { return OperatorMatrix(entries_.adjoint()); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("operator dimension mismatch in commutator");
  return OperatorMatrix(a.matrix() * b.matrix() - b.matrix() * a.matrix());
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double max_abs(const OperatorMatrix& m) { return max_abs(m.matrix()); }

// DeviationState

DeviationState::DeviationState(OperatorMatrix matrix, std::string label)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  const double scale = std::max(1.0, max_abs(matrix_));
  if (matrix_.hermiticity_error() > kHermitianTolerance * scale) {
    throw ValidationError("deviation state '" + label_ + "' is not Hermitian");
  }
  if (std::abs(matrix_.trace()) > kTracelessTolerance * scale * matrix_.dim()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", std::abs(matrix_.trace()));
    throw ValidationError("deviation state '" + label_ + "' is not traceless (|Tr| = " + buf + ")");
  }
}

DeviationState::DeviationState(OperatorMatrix matrix, std::string label, TrustedTag)
    : matrix_(std::move(matrix)), label_(std::move(label)) {}

DeviationState DeviationState::trusted(Matrix m, std::string label) {
  return DeviationState(OperatorMatrix(std::move(m)), std::move(label), TrustedTag{});
}

// SpinOperators

SpinOperators::SpinOperators(int n_spins) : n_spins_(n_spins) {
  if (n_spins < 1 || n_spins > kMaxSpins) {
    throw DimensionError("n_spins must be in [1, " + std::to_string(kMaxSpins) + "], got " +
                         std::to_string(n_spins));
  }
  const int d = 1 << n_spins;
  singles_.reserve(3 * static_cast<std::size_t>(n_spins));
  Matrix tx = Matrix::Zero(d, d);
  Matrix ty = Matrix::Zero(d, d);
  Matrix tz = Matrix::Zero(d, d);
  for (int i = 0; i < n_spins; ++i) {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
      Matrix m = embed(pauli_half(a), i, n_spins);
      (a == Axis::X ? tx : a == Axis::Y ? ty : tz) += m;
      singles_.emplace_back(std::move(m));
    }
  }
  totals_.emplace_back(std::move(tx));
  totals_.emplace_back(std::move(ty));
  totals_.emplace_back(std::move(tz));
}

const OperatorMatrix& SpinOperators::single(Axis axis, int spin) const {
  if (spin < 0 || spin >= n_spins_) {
    throw ValidationError("spin index " + std::to_string(spin) + " out of range");
  }
  return singles_[3 * static_cast<std::size_t>(spin) + static_cast<std::size_t>(axis)];
}

const OperatorMatrix& SpinOperators::total(Axis axis) const { return totals_[static_cast<std::size_t>(axis)]; }

SpinOperators build_spin_operators(int n_spins) { return SpinOperators(n_spins); }

OperatorMatrix scalar_product_operator(const SpinOperators& ops, int i, int j) {
  check_pair(i, j, ops.n_spins());
  Matrix m = ops.x(i).matrix() * ops.x(j).matrix() + ops.y(i).matrix() * ops.y(j).matrix() +
             ops.z(i).matrix() * ops.z(j).matrix();
  return OperatorMatrix(std::move(m));
}

OperatorMatrix singlet_projector(const SpinOperators& ops, int i, int j) {
  return OperatorMatrix::identity(ops.dim()) * 0.25 - scalar_product_operator(ops, i, j);
}

const char* to_string(TripletPartner partner) {
  switch (partner) {
    case TripletPartner::T0:
      return "T0";
    case TripletPartner::TPlus:
      return "Tplus";
    case TripletPartner::TMinus:
      return "Tminus";
  }
  return "?";
}

TripletPartner parse_triplet_partner(const std::string& label) {
  if (label == "T0") return TripletPartner::T0;
  if (label == "Tplus" || label == "T+") return TripletPartner::TPlus;
  if (label == "Tminus" || label == "T-") return TripletPartner::TMinus;
  throw ValidationError("unknown triplet partner '" + label + "' (expected T0, Tplus, Tminus)");
}

const Vector& SingletTripletBasis::partner(TripletPartner p) const {
  switch (p) {
    case TripletPartner::T0:
      return t0;
    case TripletPartner::TPlus:
      return tplus;
    case TripletPartner::TMinus:
      return tminus;
  }
  return t0;
}

SingletTripletBasis singlet_triplet_basis(std::pair<int, int> pair, int n_spins) {
  if (n_spins < 2 || n_spins > kMaxSpins) {
    throw DimensionError("singlet-triplet basis needs 2..10 spins");
  }
  check_pair(pair.first, pair.second, n_spins);
  const double r = 1.0 / std::sqrt(2.0);
  SingletTripletBasis basis;
  basis.spin_a = pair.first;
  basis.spin_b = pair.second;
  basis.n_spins = n_spins;
  basis.s0 = Vector::Zero(4);
  basis.t0 = Vector::Zero(4);
  basis.tplus = Vector::Zero(4);
  basis.tminus = Vector::Zero(4);
  // |01> is index 1, |10> is index 2.
  basis.s0(1) = r;
  basis.s0(2) = -r;
  basis.t0(1) = r;
  basis.t0(2) = r;
  basis.tplus(0) = 1.0;
  basis.tminus(3) = 1.0;
  return basis;
}

Matrix reduce_to_pair(const Matrix& state, int n_spins, int spin_a, int spin_b) {
  check_pair(spin_a, spin_b, n_spins);
  const Eigen::Index dim = Eigen::Index{1} << n_spins;
  if (state.rows() != dim || state.cols() != dim) {
    throw DimensionError("state dimension does not match n_spins");
  }
  if (n_spins == 2 && spin_a == 0 && spin_b == 1) return state;

  const int shift_a = n_spins - 1 - spin_a;
  const int shift_b = n_spins - 1 - spin_b;
  auto pair_index = [&](Eigen::Index k) {
    return static_cast<int>(((k >> shift_a) & 1) << 1 | ((k >> shift_b) & 1));
  };
  const Eigen::Index pair_mask = (Eigen::Index{1} << shift_a) | (Eigen::Index{1} << shift_b);

  Matrix reduced = Matrix::Zero(4, 4);
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      // Environment bits must match for the partial trace.
      if ((row & ~pair_mask) != (col & ~pair_mask)) continue;
      reduced(pair_index(row), pair_index(col)) += state(row, col);
    }
  }
  return reduced;
}

}  // namespace lls
