#include "lls/hamiltonian.hpp"

#include "lls/errors.hpp"
#include "lls/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lls {

SpinSystem SpinSystem::two_spin(double delta_hz, double j_hz) {
  SpinSystem s;
  s.n_spins = 2;
  s.offsets_hz = {-delta_hz / 2.0, delta_hz / 2.0};
  s.j_couplings_hz = Eigen::MatrixXd::Zero(2, 2);
  s.j_couplings_hz(0, 1) = j_hz;
  s.j_couplings_hz(1, 0) = j_hz;
  return s;
}

void SpinSystem::validate() const {
  if (n_spins < 1 || n_spins > kMaxSpins) {
    throw ValidationError("n_spins out of range: " + std::to_string(n_spins), {"n_spins"});
  }
  if (static_cast<int>(offsets_hz.size()) != n_spins) {
    throw ValidationError("offsets_hz must have n_spins entries", {"offsets_hz"});
  }
  if (j_couplings_hz.rows() != n_spins || j_couplings_hz.cols() != n_spins) {
    throw ValidationError("j_couplings_hz must be n_spins x n_spins", {"j_couplings_hz"});
  }
  for (int i = 0; i < n_spins; ++i) {
    if (!std::isfinite(offsets_hz[static_cast<std::size_t>(i)])) {
      throw ValidationError("offsets_hz contains a non-finite value", {"offsets_hz"});
    }
    if (j_couplings_hz(i, i) != 0.0) {
      throw ValidationError("j_couplings_hz diagonal must be exactly zero", {"j_couplings_hz"});
    }
    for (int j = 0; j < n_spins; ++j) {
      if (!std::isfinite(j_couplings_hz(i, j)) || j_couplings_hz(i, j) != j_couplings_hz(j, i)) {
        throw ValidationError("j_couplings_hz must be finite and symmetric", {"j_couplings_hz"});
      }
    }
  }
}

double SpinSystem::max_coupling_hz() const {
  return j_couplings_hz.size() == 0 ? 0.0 : j_couplings_hz.cwiseAbs().maxCoeff();
}

const char* to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::SingletOrder:
      return "singlet_order";
    case TargetKind::PairwiseSingletSum:
      return "pairwise_singlet_sum";
    case TargetKind::AntiphaseMagnetization:
      return "antiphase_magnetization";
    case TargetKind::Custom:
      return "custom";
  }
  return "?";
}

TargetKind parse_target_kind(const std::string& name) {
  if (name == "singlet_order") return TargetKind::SingletOrder;
  if (name == "pairwise_singlet_sum") return TargetKind::PairwiseSingletSum;
  if (name == "antiphase_magnetization") return TargetKind::AntiphaseMagnetization;
  if (name == "custom") return TargetKind::Custom;
  throw ValidationError("unknown target kind '" + name + "'", {"target.kind"});
}

OperatorMatrix build_h0(const SpinSystem& system, const SpinOperators& ops) {
  system.validate();
  if (ops.n_spins() != system.n_spins) throw DimensionError("spin operators do not match system size");
  Matrix h = Matrix::Zero(ops.dim(), ops.dim());
  for (int i = 0; i < system.n_spins; ++i) {
    h += kTwoPi * system.offsets_hz[static_cast<std::size_t>(i)] * ops.z(i).matrix();
  }
  for (int i = 0; i < system.n_spins; ++i) {
    for (int j = i + 1; j < system.n_spins; ++j) {
      const double jij = system.j_couplings_hz(i, j);
      if (jij == 0.0) continue;
      h += kTwoPi * jij * scalar_product_operator(ops, i, j).matrix();
    }
  }
  return OperatorMatrix(std::move(h));
}

OperatorMatrix build_h0(const SpinSystem& system) { return build_h0(system, SpinOperators(system.n_spins)); }

OperatorMatrix build_hb(const OperatorMatrix& h0, const SpinOperators& ops, const ControlParams& ctrl) {
  if (h0.dim() != ops.dim()) throw DimensionError("H0 dimension does not match spin operators");
  if (!(ctrl.nu_hz >= 0.0) || !std::isfinite(ctrl.nu_hz) || !std::isfinite(ctrl.delta_offset_hz)) {
    throw ValidationError("RF amplitude must be finite and >= 0", {"nu_hz"});
  }
  Matrix h = h0.matrix() - kTwoPi * ctrl.nu_hz * ops.total_x().matrix() -
             kTwoPi * ctrl.delta_offset_hz * ops.total_z().matrix();
  return OperatorMatrix(std::move(h));
}

OperatorMatrix build_hb(const OperatorMatrix& h0, const ControlParams& ctrl) {
  const int n = static_cast<int>(std::lround(std::log2(h0.dim())));
  return build_hb(h0, SpinOperators(n), ctrl);
}

TargetOperator build_target(const TargetSpec& spec, const SpinSystem& system) {
  const SpinOperators ops(system.n_spins);
  TargetOperator target;
  target.kind = spec.kind;
  switch (spec.kind) {
    case TargetKind::SingletOrder: {
      if (spec.pairs.size() != 1) throw ValidationError("singlet_order needs exactly one pair", {"target.pairs"});
      const auto [a, b] = spec.pairs.front();
      target.matrix = -scalar_product_operator(ops, a, b);
      break;
    }
    case TargetKind::PairwiseSingletSum: {
      if (spec.pairs.empty()) throw ValidationError("pairwise_singlet_sum needs pairs", {"target.pairs"});
      OperatorMatrix sum = OperatorMatrix::zero(ops.dim());
      for (const auto& [a, b] : spec.pairs) sum = sum - scalar_product_operator(ops, a, b);
      target.matrix = std::move(sum);
      break;
    }
    case TargetKind::AntiphaseMagnetization: {
      if (spec.pairs.size() != 1) {
        throw ValidationError("antiphase_magnetization needs exactly one pair", {"target.pairs"});
      }
      const auto [a, b] = spec.pairs.front();
      if (a == b || a < 0 || b < 0 || a >= system.n_spins || b >= system.n_spins) {
        throw ValidationError("invalid spin pair for antiphase target", {"target.pairs"});
      }
      target.matrix = ops.x(a) * ops.z(b) - ops.z(a) * ops.x(b);
      break;
    }
    case TargetKind::Custom: {
      OperatorMatrix m(load_complex_matrix_csv(spec.custom_path));
      if (m.dim() != ops.dim()) {
        throw ValidationError("custom target dimension " + std::to_string(m.dim()) + " does not match system " +
                                  std::to_string(ops.dim()),
                              {"target.custom_path"});
      }
      target.matrix = std::move(m);
      break;
    }
  }
  // Runs the Hermitian / traceless checks; throws ValidationError.
  try {
    DeviationState check(target.matrix, to_string(spec.kind));
  } catch (const ValidationError& e) {
    throw ValidationError(e.what(), {"target"});
  }
  return target;
}

ThermalAndInitial thermal_and_initial_states(const SpinSystem& system) {
  system.validate();
  const SpinOperators ops(system.n_spins);
  return ThermalAndInitial{DeviationState(ops.total_z(), "thermal"), DeviationState(ops.total_x(), "initial")};
}

Matrix load_complex_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open matrix file " + path.string(), {"target.custom_path"});
  std::vector<std::vector<Complex>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ValidationError("non-numeric entry '" + cell + "' in " + path.string(), {"target.custom_path"});
      }
    }
    if (values.size() % 2 != 0) {
      throw ValidationError("odd number of values in a row of " + path.string(), {"target.custom_path"});
    }
    std::vector<Complex> row;
    for (std::size_t k = 0; k < values.size(); k += 2) row.emplace_back(values[k], values[k + 1]);
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n) {
      throw ValidationError("matrix in " + path.string() + " is not square", {"target.custom_path"});
    }
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return m;
}

void save_complex_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(m(r, c).real()) << ',' << format_double(m(r, c).imag());
    }
    out << '\n';
  }
}

}  // namespace lls
