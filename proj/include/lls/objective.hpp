#pragma once

#include "lls/spin_algebra.hpp"

#include <vector>

namespace lls {

inline constexpr double kZeroNormTolerance = 1e-12;

/// Re Tr(rho_f rho_t) / sqrt(Tr rho_t^2 Tr rho_f^2). Throws
/// UndefinedFidelityError when either Frobenius norm is <= 1e-12.
double fidelity(const Matrix& rho_f, const Matrix& rho_t);
double fidelity(const DeviationState& rho_f, const DeviationState& rho_t);

/// Weight r and the seconds-to-cost multiplier for the time penalty.
struct CostConfig {
  double r = 0.4;
  double time_unit_scale = 1.0;

  void validate() const;
};

/// r (1 - F) + (1 - r) * time_unit_scale * sum(durations). Durations in
/// seconds; a negative one throws ValidationError.
double scalarized_cost(double fidelity, const std::vector<double>& durations_s, const CostConfig& cfg);

/// Best fidelity any unitary can reach from rho_i to rho_t: dot product of the
/// descending-sorted spectra over the norms.
double unitary_bound(const Matrix& rho_i, const Matrix& rho_t);
double unitary_bound(const DeviationState& rho_i, const DeviationState& rho_t);

}  // namespace lls
