#include "lls/decay_fit.hpp"

#include "lls/errors.hpp"
#include "lls/io.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace lls {

void DecaySeries::validate() const {
  if (times.size() != amplitudes.size()) throw ValidationError("times and amplitudes differ in length", {"times"});
  if (times.size() < 3) throw ValidationError("a decay series needs at least 3 points", {"times"});
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ValidationError("non-finite time", {"times"});
    if (!std::isfinite(amplitudes[i])) throw ValidationError("non-finite amplitude", {"amplitudes"});
    if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("times must be strictly increasing", {"times"});
  }
}

namespace {

struct Model {
  bool offset;
  const Eigen::VectorXd& t;
  const Eigen::VectorXd& y;

  // params: A, k (= 1/T), C
  Eigen::VectorXd residual(const Eigen::VectorXd& p) const {
    Eigen::VectorXd r(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) r(i) = y(i) - value(p, t(i));
    return r;
  }
  double value(const Eigen::VectorXd& p, double ti) const { return p(0) * std::exp(-p(1) * ti) + (offset ? p(2) : 0.0); }
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p) const {
    Eigen::MatrixXd j(t.size(), p.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double e = std::exp(-p(1) * t(i));
      j(i, 0) = e;
      j(i, 1) = -p(0) * t(i) * e;
      if (offset) j(i, 2) = 1.0;
    }
    return j;
  }
};

}  // namespace

DecayFit fit_exponential_decay(const DecaySeries& series, const DecayFitOptions& opts) {
  series.validate();
  const auto n = static_cast<Eigen::Index>(series.times.size());
  const Eigen::Index k = opts.with_offset ? 3 : 2;
  if (n <= k) throw FitError("need more points than fit parameters");

  Eigen::VectorXd t(n), y(n);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = series.times[static_cast<std::size_t>(i)];
    y(i) = series.amplitudes[static_cast<std::size_t>(i)];
    scale = std::max(scale, std::abs(y(i)));
  }
  if (y.maxCoeff() - y.minCoeff() <= 1e-14 * std::max(scale, 1e-300)) {
    throw FitError("amplitudes are constant; nothing to fit");
  }
  y /= scale;

  // Log-linear start from the points sharing the sign of the first amplitude.
  const double sign = y(0) < 0.0 ? -1.0 : 1.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sign * y(i) <= 0.0) continue;
    const double ly = std::log(sign * y(i));
    sx += t(i);
    sy += ly;
    sxx += t(i) * t(i);
    sxy += t(i) * ly;
    ++m;
  }
  if (m < 2) throw FitError("fewer than two same-sign amplitudes; cannot initialize");
  const double den = m * sxx - sx * sx;
  double slope = den > 0.0 ? (m * sxy - sx * sy) / den : 0.0;
  const double span = t(n - 1) - t(0);
  if (!(slope < 0.0)) slope = -1.0 / span;
  const double intercept = (sy - slope * sx) / m;

  Eigen::VectorXd p(k);
  p(0) = sign * std::exp(intercept);
  p(1) = -slope;
  if (opts.with_offset) p(2) = 0.0;

  const Model model{opts.with_offset, t, y};
  Eigen::VectorXd r = model.residual(p);
  double ssr = r.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::MatrixXd j = model.jacobian(p);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    bool improved = false;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal();
      step = a.ldlt().solve(g);
      const Eigen::VectorXd cand = p + step;
      const Eigen::VectorXd rc = model.residual(cand);
      const double sc = rc.squaredNorm();
      if (std::isfinite(sc) && sc <= ssr) {
        p = cand;
        r = rc;
        ssr = sc;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
    if (step.norm() <= opts.tolerance * (p.norm() + opts.tolerance) || ssr == 0.0) {
      ++it;
      break;
    }
  }

  if (!(p(1) > 0.0) || !std::isfinite(p(1))) throw FitError("data do not decay (fitted rate <= 0)");

  DecayFit fit;
  fit.iterations = it;
  fit.t_lls = 1.0 / p(1);
  fit.amplitude0 = p(0) * scale;
  fit.offset = opts.with_offset ? p(2) * scale : 0.0;
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n)) * scale;
  const Eigen::MatrixXd j = model.jacobian(p);
  const Eigen::MatrixXd jtj = j.transpose() * j;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (!lu.isInvertible()) throw FitError("singular normal matrix; parameters not identifiable");
  const Eigen::MatrixXd cov = (ssr / static_cast<double>(n - k)) * lu.inverse();
  fit.t_lls_stderr = std::sqrt(std::max(cov(1, 1), 0.0)) / (p(1) * p(1));
  fit.amplitude0_stderr = std::sqrt(std::max(cov(0, 0), 0.0)) * scale;
  return fit;
}

DecaySeries read_decay_csv(const std::string& text, const std::string& label) {
  DecaySeries s;
  s.label = label;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != "time_s,amplitude") {
        throw ValidationError("decay CSV header must be 'time_s,amplitude'", {"time_s", "amplitude"});
      }
      continue;
    }
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ValidationError("row " + std::to_string(row) + " needs two columns", {"amplitude"});
    try {
      std::size_t used = 0;
      const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
      s.times.push_back(std::stod(a, &used));
      if (used != a.size()) throw std::invalid_argument(a);
      s.amplitudes.push_back(std::stod(b, &used));
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw ValidationError("row " + std::to_string(row) + " is not numeric", {"time_s", "amplitude"});
    }
  }
  if (header) throw ValidationError("empty decay CSV", {"time_s"});
  return s;
}

std::string decay_fit_csv(const DecaySeries& series, const DecayFit& fit) {
  CsvBuilder csv({"time_s", "amplitude", "model", "residual"});
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double model = fit.amplitude0 * std::exp(-series.times[i] / fit.t_lls) + fit.offset;
    csv.cell(series.times[i]).cell(series.amplitudes[i]).cell(model).cell(series.amplitudes[i] - model);
    csv.end_row();
  }
  return csv.str();
}

}  // namespace lls
