#pragma once

// Exponential decay fits A exp(-t / T) (+ C when the offset is enabled).

#include <string>
#include <vector>

namespace lls {

struct DecaySeries {
  std::vector<double> times;       // s
  std::vector<double> amplitudes;  // arbitrary units
  std::string label;

  /// Throws ValidationError: equal lengths >= 3, strictly increasing finite
  /// times, finite amplitudes.
  void validate() const;
};

struct DecayFitOptions {
  bool with_offset = false;
  int max_iterations = 200;
  double tolerance = 1e-15;
};

struct DecayFit {
  double t_lls = 0.0;  // s
  double t_lls_stderr = 0.0;
  double amplitude0 = 0.0;
  double amplitude0_stderr = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
};

/// Log-linear start, then Levenberg-damped Gauss-Newton. Standard errors from
/// s^2 (J^T J)^-1 with s^2 = SSR / (n - k). Throws FitError on flat or
/// non-decaying data.
DecayFit fit_exponential_decay(const DecaySeries& series, const DecayFitOptions& opts = {});

DecaySeries read_decay_csv(const std::string& text, const std::string& label = {});
std::string decay_fit_csv(const DecaySeries& series, const DecayFit& fit);

}  // namespace lls
