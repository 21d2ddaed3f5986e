#include "lls/objective.hpp"

#include "lls/errors.hpp"

#include <algorithm>
#include <cmath>

namespace lls {

namespace {

double trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b.transpose()).sum().real(); }

}  // namespace

double fidelity(const Matrix& rho_f, const Matrix& rho_t) {
  if (rho_f.rows() != rho_t.rows() || rho_f.cols() != rho_t.cols()) {
    throw DimensionError("fidelity operands have different dimensions");
  }
  const double nf = rho_f.norm();
  const double nt = rho_t.norm();
  if (nf <= kZeroNormTolerance || nt <= kZeroNormTolerance) {
    throw UndefinedFidelityError("fidelity undefined for a zero-norm state");
  }
  // For Hermitian operands Tr(A^2) = ||A||_F^2.
  return trace_product(rho_f, rho_t) / (nf * nt);
}

double fidelity(const DeviationState& rho_f, const DeviationState& rho_t) {
  return fidelity(rho_f.matrix(), rho_t.matrix());
}

void CostConfig::validate() const {
  if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("cost weight r must lie in [0, 1]", {"cost.r"});
  if (!(time_unit_scale > 0.0) || !std::isfinite(time_unit_scale)) {
    throw ValidationError("time_unit_scale must be > 0", {"cost.time_unit_scale"});
  }
}

double scalarized_cost(double fidelity, const std::vector<double>& durations_s, const CostConfig& cfg) {
  double total = 0.0;
  for (double d : durations_s) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("durations must be finite and >= 0");
    total += d;
  }
  return cfg.r * (1.0 - fidelity) + (1.0 - cfg.r) * cfg.time_unit_scale * total;
}

double unitary_bound(const Matrix& rho_i, const Matrix& rho_t) {
  if (rho_i.rows() != rho_t.rows()) throw DimensionError("unitary_bound operands have different dimensions");
  Eigen::SelfAdjointEigenSolver<Matrix> ei(rho_i, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> et(rho_t, Eigen::EigenvaluesOnly);
  if (ei.info() != Eigen::Success || et.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  // Eigen returns ascending order for both, so the pairing already matches.
  const Eigen::VectorXd& a = ei.eigenvalues();
  const Eigen::VectorXd& b = et.eigenvalues();
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= kZeroNormTolerance || nb <= kZeroNormTolerance) {
    throw UndefinedFidelityError("unitary bound undefined for a zero-norm state");
  }
  return a.dot(b) / (na * nb);
}

double unitary_bound(const DeviationState& rho_i, const DeviationState& rho_t) {
  return unitary_bound(rho_i.matrix(), rho_t.matrix());
}

}  // namespace lls
