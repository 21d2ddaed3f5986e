// lls: command-line front end.
//
//   lls <verb> --config FILE [--out-dir DIR] [--seed N] [--threads N] [--strict]
//   lls fit-decay --csv FILE [--out-dir DIR]
//   lls report --out-dir DIR
//
// Exit codes: 0 ok, 2 validation, 3 numerical, 4 non-convergence (--strict).

#include "lls/config.hpp"
#include "lls/errors.hpp"
#include "lls/experiment.hpp"
#include "lls/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNonConverged = 4;

struct Args {
  std::string config;
  std::string out_dir = "out";
  std::optional<long long> seed;
  std::optional<int> threads;
  bool strict = false;
  std::string csv;
};

int run_verb(const std::string& verb, const Args& a) {
  nlohmann::json j;
  std::filesystem::path base;
  if (!a.config.empty()) {
    std::string text;
    try {
      text = lls::read_text_file(a.config);
    } catch (const lls::Error& e) {
      throw lls::ValidationError(std::string("cannot read config: ") + e.what(), {"config"});
    }
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw lls::ValidationError(std::string("config is not valid JSON: ") + e.what(), {"config"});
    }
    base = std::filesystem::path(a.config).parent_path();
  } else if (verb == "fit-decay" && !a.csv.empty()) {
    j = {{"decay", {{"csv", std::filesystem::absolute(a.csv).string()}}}};
  } else {
    throw lls::ValidationError("--config is required", {"config"});
  }
  if (!j.is_object()) throw lls::ValidationError("config must be a JSON object", {"config"});

  const std::string want = verb == "robustness" && j.value("command", "") == "total_protocol" ? "total_protocol" : verb;
  if (j.contains("command") && j["command"] != want) {
    throw lls::ValidationError("config command '" + j["command"].dump() + "' does not match verb '" + verb + "'",
                               {"command"});
  }
  j["command"] = want;
  if (a.seed) j["seed"] = *a.seed;
  if (a.threads) j["threads"] = *a.threads;

  const lls::ExperimentConfig cfg = lls::parse_config(j, base);
  const lls::RunOutcome out = lls::run_experiment(cfg, a.out_dir, {a.strict});
  std::cout << out.summary.dump(2) << "\n";
  for (const auto& f : out.files) std::cerr << "wrote " << f.string() << "\n";
  if (a.strict && out.non_converged) {
    std::cerr << "error: optimizer did not converge (--strict)\n";
    return kExitNonConverged;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-lived state preparation: QAOA schedules, baselines, sweeps and decay fits"};
  app.require_subcommand(1);
  Args a;

  const std::vector<std::pair<std::string, std::string>> verbs = {
      {"optimize", "multi-start optimization of a QAOA schedule"},
      {"evaluate", "fidelity of a given schedule"},
      {"heatmap", "per-cell re-optimized fidelity map over (nu, Delta)"},
      {"robustness", "fixed-schedule map over control deviations (also total_protocol configs)"},
      {"trajectory", "singlet-triplet Bloch trajectory of a schedule"},
      {"baseline", "build and score a benchmark sequence"},
      {"search", "brute-force parameter search for a benchmark sequence"},
      {"fit-decay", "exponential decay fit of a storage series"},
  };
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", a.config, "JSON config file");
    sub->add_option("--out-dir", a.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", a.seed, "override the config seed");
    sub->add_option("--threads", a.threads, "worker threads (0 = all cores)");
    sub->add_flag("--strict", a.strict, "exit 4 when an optimizer run does not converge");
    if (name == "fit-decay") sub->add_option("--csv", a.csv, "time_s,amplitude CSV (instead of --config)");
  }
  auto* rep = app.add_subcommand("report", "summarize an output directory");
  rep->add_option("--out-dir", a.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "report") {
      std::cout << lls::report(a.out_dir);
      return 0;
    }
    return run_verb(verb, a);
  } catch (const lls::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    for (const auto& k : e.keys()) std::cerr << "  key: " << k << "\n";
    return kExitValidation;
  } catch (const lls::DimensionError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const lls::FitError& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const lls::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
