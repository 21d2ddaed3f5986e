#pragma once

// Powell's COBYLA: derivative-free minimization with linear approximations of
// objective and inequality constraints over a simplex of n + 1 points.

#include <functional>
#include <vector>

namespace lls {

enum class CobylaStatus { Converged, MaxEvalsReached, RoundingErrors };

const char* to_string(CobylaStatus s);

struct CobylaSettings {
  double rhobeg = 5e-3;
  double rhoend = 1e-6;
  int max_evals = 2000;
};

struct CobylaResult {
  std::vector<double> x;
  double f = 0.0;
  double max_violation = 0.0;
  int n_evals = 0;
  CobylaStatus status = CobylaStatus::Converged;
};

/// Returns f(x) and fills con (size m); feasible means con[k] >= 0 for all k.
using CobylaFunction = std::function<double(const std::vector<double>& x, std::vector<double>& con)>;

/// Raw algorithm. x0 is the starting point.
CobylaResult cobyla(int n, int m, const CobylaFunction& fn, std::vector<double> x0, const CobylaSettings& settings);

/// Box-constrained wrapper: the bounds become 2n linear constraints and f is
/// always evaluated at the point clipped into the box. The result is the best
/// clipped point seen (first one on ties).
CobylaResult cobyla_bounded(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                            const std::vector<double>& lower, const std::vector<double>& upper,
                            const CobylaSettings& settings);

}  // namespace lls
