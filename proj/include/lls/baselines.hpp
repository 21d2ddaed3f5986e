#pragma once

// Benchmark singlet-order sequences built as PulseSchedules.
//
//   CL    prep   (90)x - t1 - (180)x - t2 - (90)y - t3        detect  t5 - (90)y
//   M2S          (90)x - [td - (180) - td]^n1 - (90)y - td - [td - (180) - td]^n2
//   S2M          [td - (180) - td]^n2 - td - (90)y - [td - (180) - td]^n1
//   SLIC  prep   (90)y - lock(nu, tp)                          detect  lock(nu, tp)
//   APSOC prep   ramp 0 -> nu_max at offset Delta              detect  ramp nu_max -> 0 - (90)y
//
// The 180-degree pulses of an echo train alternate x, -x unless disabled.
// Free evolution is under H_0; locks and ramps add -2 pi nu I^x - 2 pi Delta I^z.

#include "lls/hamiltonian.hpp"
#include "lls/propagation.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lls {

enum class Method { CL, M2S, S2M, SLIC, APSOC };

const char* to_string(Method m);
Method parse_method(const std::string& s);

enum class RampShape { Linear, Cosine };

const char* to_string(RampShape r);
RampShape parse_ramp_shape(const std::string& s);

struct PulseOptions {
  /// false: instantaneous ideal rotations. true: rectangular pulses at
  /// pulse_rf_hz with H_0 active during the pulse.
  bool finite_pulses = false;
  double pulse_rf_hz = 25000.0;
  bool phase_alternation = true;
};

/// Shared pieces every builder needs; build once per system.
struct BaselineContext {
  SpinSystem system;
  SpinOperators ops;
  std::shared_ptr<const OperatorMatrix> h0;
  PulseOptions pulses;

  explicit BaselineContext(const SpinSystem& sys, PulseOptions opts = {});

  /// Appends an ideal rotation or a finite pulse depending on the options.
  void add_pulse(PulseSchedule& s, Axis axis, double angle, double phase, const std::string& label) const;
};

struct SequencePair {
  PulseSchedule preparation;
  PulseSchedule detection;
};

struct ClParams {
  double tau1 = 0.043, tau2 = 0.083, tau3 = 0.007, tau5 = 0.0063;
};

struct EchoParams {
  double tau_d = 0.012589;
  int n1 = 1, n2 = 1;
};

struct SlicParams {
  double nu_hz = 25.3;
  double tau_p = 0.0215;
};

struct ApsocParams {
  double delta_hz = 20.0;
  double tau = 0.16;
  double nu_max_hz = 281.0;
  RampShape ramp = RampShape::Linear;
  int n_steps = 200;
};

SequencePair build_cl(const BaselineContext& ctx, const ClParams& p);
PulseSchedule build_m2s(const BaselineContext& ctx, const EchoParams& p);
PulseSchedule build_s2m(const BaselineContext& ctx, const EchoParams& p);
SequencePair build_slic(const BaselineContext& ctx, const SlicParams& p);
SequencePair build_apsoc(const BaselineContext& ctx, const ApsocParams& p);

/// Method plus named parameters (delays in s, amplitudes in Hz).
struct BaselineSpec {
  Method method = Method::CL;
  std::map<std::string, double> params;
};

/// Parameter names each method accepts, in search (lexicographic) order.
std::vector<std::string> parameter_names(Method m);

/// Preparation and detection schedules. For M2S the detection half is the S2M
/// schedule and for S2M the halves are swapped.
/// Throws ValidationError for unknown or invalid parameters.
SequencePair build_from_spec(const BaselineContext& ctx, const BaselineSpec& spec);

/// Fidelity to in-phase transverse magnetization in any in-plane direction,
/// hypot(F(rho, I^x), F(rho, I^y)).
double transverse_fidelity(const SpinOperators& ops, const Matrix& state);

/// Preparation fidelity: thermal sum of I^z through the preparation schedule
/// against -I1.I2 of the first pair. For S2M the schedule runs from -I1.I2 and
/// is scored with transverse_fidelity.
double preparation_fidelity(const BaselineContext& ctx, const BaselineSpec& spec);

struct SearchAxis {
  std::string name;
  double min = 0.0, max = 0.0, step = 1.0;

  std::vector<double> values() const;
};

struct SearchGrid {
  std::vector<SearchAxis> axes;  // first axis varies slowest
  /// Compared with fidelity / unitary bound.
  double fidelity_threshold = 0.99;
  /// Fixed parameters not being searched (e.g. tau5 for CL).
  std::map<std::string, double> fixed;

  void validate() const;
  std::size_t size() const;
};

struct SearchPoint {
  std::vector<double> params;
  double fidelity = 0.0;
  double normalized = 0.0;  // fidelity / bound
  double duration = 0.0;    // preparation schedule total, s
};

struct SearchResult {
  BaselineSpec best;
  SearchPoint best_point;
  bool met_threshold = false;
  std::vector<SearchPoint> points;  // only when requested
};

/// Exhaustive scan. Among points with normalized fidelity >= threshold the
/// shortest preparation wins, ties to the earliest grid point; with no such
/// point, the highest fidelity wins (ties to the earliest). The result does
/// not depend on the thread count.
SearchResult brute_force_search(Method method, const SearchGrid& grid, const SpinSystem& system,
                                const PulseOptions& pulses = {}, bool keep_points = false, int threads = 1);

/// Columns: parameter names..., fidelity, duration.
std::string search_csv(const SearchGrid& grid, const std::vector<SearchPoint>& points);

}  // namespace lls
