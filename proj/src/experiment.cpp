#include "lls/experiment.hpp"

#include "lls/errors.hpp"
#include "lls/hashing.hpp"
#include "lls/io.hpp"

#include <chrono>
#include <sstream>

namespace lls {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> to_ms(const std::vector<double>& s) {
  std::vector<double> out;
  for (double v : s) out.push_back(v * 1e3);
  return out;
}

class Writer {
 public:
  explicit Writer(OutputSet& out) : out_(out) {}

  void text(const std::string& name, const std::string& content) {
    const auto path = out_.add(name);
    write_text_file(path, content);
    hashes_[name] = to_hex(fnv1a64(content));
  }
  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  OutputSet& out_;
  std::map<std::string, std::string> hashes_;
};

QaoaProblem with_ctrl(QaoaProblem p, const ControlParams& c) {
  p.ctrl = c;
  return p;
}

json run_optimize(const ExperimentConfig& c, Writer& w, bool& non_conv) {
  const auto runs = optimize_all_starts(*c.problem, c.optimizer);
  const OptimResult best = pick_best(runs);
  CsvBuilder csv({"start_index", "seed", "fidelity", "total_time_ms", "cost", "n_evals", "status"});
  for (const auto& r : runs) {
    csv.cell(r.start_index).cell(to_hex(r.seed)).cell(r.fidelity).cell(r.total_time * 1e3).cell(r.cost);
    csv.cell(r.n_evals).cell(to_string(r.status));
    csv.end_row();
  }
  w.text("starts.csv", csv.str());
  const json j = to_json(best, *c.problem);
  w.text("result.json", dump(j));
  non_conv = !best.converged;
  return j;
}

json evaluation_json(const QaoaProblem& p, const OptimResult& s) {
  const QaoaProblem q = with_ctrl(p, s.ctrl);
  const Evaluation e = evaluate_schedule(q, s.gammas, s.betas);
  const double bound = unitary_bound(p.initial.matrix(), p.target.matrix.matrix());
  return {{"problem_hash", to_hex(q.hash())},
          {"direction", to_string(p.direction)},
          {"gammas_ms", to_ms(s.gammas)},
          {"betas_ms", to_ms(s.betas)},
          {"nu_hz", s.ctrl.nu_hz},
          {"delta_hz", s.ctrl.delta_offset_hz},
          {"fidelity", e.fidelity},
          {"bound", bound},
          {"fidelity_over_bound", e.fidelity / bound},
          {"total_time_ms", e.total_time * 1e3},
          {"cost", e.cost}};
}

json run_heatmap(const ExperimentConfig& c, Writer& w, bool& non_conv) {
  const HeatmapResult r = heatmap(*c.problem, *c.grid, c.optimizer, c.threads);
  w.text("heatmap.csv", heatmap_csv(r));
  CsvBuilder cells({"nu_hz", "delta_hz", "fidelity", "total_time_ms", "cost", "converged", "gammas_ms", "betas_ms"});
  for (const auto& cell : r.cells) {
    auto join = [](const std::vector<double>& v) {
      std::string s;
      for (double x : v) s += (s.empty() ? "" : " ") + format_double(x * 1e3);
      return s;
    };
    cells.cell(cell.ctrl.nu_hz).cell(cell.ctrl.delta_offset_hz).cell(cell.fidelity).cell(cell.total_time * 1e3);
    cells.cell(cell.cost).cell(cell.converged).cell(join(cell.gammas)).cell(join(cell.betas));
    cells.end_row();
    non_conv = non_conv || !cell.converged;
  }
  w.text("heatmap_cells.csv", cells.str());
  json side = heatmap_sidecar(r);
  side.erase("wall_time_s");
  w.text("heatmap.json", dump(side));
  return side;
}

json run_fixed_map(const ExperimentConfig& c, Writer& w, bool total) {
  const HeatmapResult r = total ? total_protocol_map(*c.problem, *c.schedule, *c.detect_problem, *c.detect_schedule,
                                                     *c.grid, c.threads)
                                : robustness_map(*c.problem, *c.grid, c.threads);
  const std::string stem = total ? "total_protocol" : "robustness";
  w.text(stem + ".csv", heatmap_csv(r));
  json side = heatmap_sidecar(r);
  side.erase("wall_time_s");
  if (total) {
    side["zero_deviation_fidelity"] = total_protocol_fidelity(*c.problem, *c.schedule, *c.detect_problem,
                                                              *c.detect_schedule, 0.0, 0.0, c.grid->nu_relative);
  } else {
    side["reference_fidelity"] = evaluation_json(*c.problem, *c.schedule)["fidelity"];
  }
  w.text(stem + ".json", dump(side));
  return side;
}

json run_trajectory(const ExperimentConfig& c, Writer& w) {
  const QaoaProblem p = with_ctrl(*c.problem, c.schedule->ctrl);
  const PulseSchedule sched = build_qaoa_schedule(p, c.schedule->gammas, c.schedule->betas);
  RecordOptions rec;
  rec.enabled = true;
  rec.record_every = c.trajectory.record_every_s;
  rec.steps_per_segment = c.trajectory.steps_per_segment;
  const ScheduleRun run = run_schedule(p.initial, sched, rec);
  const auto basis = singlet_triplet_basis(c.trajectory.pair, p.system.n_spins);
  const DeviationState target(p.target.matrix, "target");
  const auto points = make_trajectory(run.snapshots, basis, c.trajectory.partners, target);
  w.text("trajectory.csv", trajectory_csv(points));
  json j = evaluation_json(*c.problem, *c.schedule);
  j["n_points"] = points.size();
  j["final_fidelity_simulated"] = fidelity(run.final_state, target);
  w.text("trajectory.json", dump(j));
  return j;
}

json baseline_json(const BaselineContext& ctx, const BaselineSpec& spec) {
  const SequencePair seq = build_from_spec(ctx, spec);
  const double f = preparation_fidelity(ctx, spec);
  const SpinOperators& o = ctx.ops;
  const Matrix singlet = -scalar_product_operator(o, 0, 1).matrix();
  const double bound = spec.method == Method::S2M ? unitary_bound(singlet, o.total_x().matrix())
                                                  : unitary_bound(o.total_z().matrix(), singlet);
  json params = json::object();
  for (const auto& [k, v] : spec.params) params[k] = v;
  return {{"method", to_string(spec.method)},
          {"params", params},
          {"finite_pulses", ctx.pulses.finite_pulses},
          {"preparation_ms", seq.preparation.total_duration() * 1e3},
          {"detection_ms", seq.detection.total_duration() * 1e3},
          {"fidelity", f},
          {"bound", bound},
          {"fidelity_over_bound", f / bound}};
}

json run_baseline(const ExperimentConfig& c, Writer& w) {
  const BaselineContext ctx(c.system, c.pulses);
  const json j = baseline_json(ctx, *c.baseline);
  w.text("baseline.json", dump(j));
  return j;
}

json run_search(const ExperimentConfig& c, Writer& w) {
  const SearchResult r = brute_force_search(c.search_method, *c.search, c.system, c.pulses, c.keep_points, c.threads);
  if (c.keep_points) w.text("search.csv", search_csv(*c.search, r.points));
  json j = baseline_json(BaselineContext(c.system, c.pulses), r.best);
  j["met_threshold"] = r.met_threshold;
  j["threshold"] = c.search->fidelity_threshold;
  j["grid_points"] = c.search->size();
  w.text("search_best.json", dump(j));
  return j;
}

json run_fit(const ExperimentConfig& c, Writer& w) {
  const DecayFit f = fit_exponential_decay(*c.decay, c.decay_options);
  w.text("decay_fit.csv", decay_fit_csv(*c.decay, f));
  const json j = {{"label", c.decay->label},
                  {"t_lls_s", f.t_lls},
                  {"t_lls_stderr_s", f.t_lls_stderr},
                  {"amplitude0", f.amplitude0},
                  {"amplitude0_stderr", f.amplitude0_stderr},
                  {"offset", f.offset},
                  {"with_offset", c.decay_options.with_offset},
                  {"residual_rms", f.residual_rms},
                  {"iterations", f.iterations}};
  w.text("decay_fit.json", dump(j));
  return j;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir, const RunOptions& options) {
  std::filesystem::create_directories(out_dir);
  OutputSet out(out_dir);
  Writer w(out);
  RunOutcome outcome;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    json summary;
    switch (c.command) {
      case Command::Optimize:
        summary = run_optimize(c, w, outcome.non_converged);
        break;
      case Command::Evaluate:
        summary = evaluation_json(*c.problem, *c.schedule);
        w.text("evaluation.json", dump(summary));
        break;
      case Command::Heatmap:
        summary = run_heatmap(c, w, outcome.non_converged);
        break;
      case Command::Robustness:
        summary = run_fixed_map(c, w, false);
        break;
      case Command::TotalProtocol:
        summary = run_fixed_map(c, w, true);
        break;
      case Command::Trajectory:
        summary = run_trajectory(c, w);
        break;
      case Command::Baseline:
        summary = run_baseline(c, w);
        break;
      case Command::Search:
        summary = run_search(c, w);
        break;
      case Command::FitDecay:
        summary = run_fit(c, w);
        break;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json outputs = json::array();
    for (const auto& [name, hash] : w.hashes()) outputs.push_back({{"file", name}, {"fnv1a64", hash}});
    const json manifest = {{"tool", "lls"},
                           {"version", kVersion},
                           {"command", to_string(c.command)},
                           {"name", c.name},
                           {"config_hash", to_hex(config_hash(c.raw))},
                           {"config", c.raw},
                           {"seed", c.seed},
                           {"threads", c.threads},
                           {"strict", options.strict},
                           {"non_converged", outcome.non_converged},
                           {"wall_time_s", wall},
                           {"outputs", outputs}};
    w.text("manifest.json", dump(manifest));
    outcome.summary = summary;
    outcome.files = out.files();
  } catch (...) {
    out.remove_all();
    throw;
  }
  return outcome;
}

std::string report(const std::filesystem::path& out_dir) {
  const auto mpath = out_dir / "manifest.json";
  if (!std::filesystem::exists(mpath)) throw ValidationError("no manifest.json in " + out_dir.string(), {"out_dir"});
  json m;
  try {
    m = json::parse(read_text_file(mpath));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("manifest.json is not valid JSON: ") + e.what(), {"manifest"});
  }
  std::ostringstream os;
  os << "command      " << m.value("command", "?") << "\n";
  os << "name         " << m.value("name", "") << "\n";
  os << "version      " << m.value("version", "?") << "\n";
  os << "config hash  " << m.value("config_hash", "?") << "\n";
  os << "seed         " << m.value("seed", 0ULL) << "\n";
  os << "wall time    " << m.value("wall_time_s", 0.0) << " s\n";
  for (const auto& o : m.value("outputs", json::array())) {
    const std::string file = o.value("file", "");
    os << "output       " << file << "  " << o.value("fnv1a64", "") << "\n";
    if (file.size() > 5 && file.substr(file.size() - 5) == ".json") {
      const auto p = out_dir / file;
      if (std::filesystem::exists(p)) {
        const json j = json::parse(read_text_file(p), nullptr, false);
        if (!j.is_discarded()) {
          for (const char* k : {"fidelity", "fidelity_over_bound", "total_time_ms", "cost", "t_lls_s", "t_lls_stderr_s",
                                "met_threshold", "preparation_ms", "detection_ms"}) {
            if (j.contains(k)) os << "  " << k << " = " << j.at(k).dump() << "\n";
          }
          if (j.contains("best_point")) os << "  best_point = " << j.at("best_point").dump() << "\n";
        }
      }
    }
  }
  return os.str();
}

}  // namespace lls
