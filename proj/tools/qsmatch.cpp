#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsmatch/harness.hpp"
#include "qsmatch/selfcheck.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qsmatch;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown key \"" + item.key() + "\" in " + context);
    }
  }
}

std::vector<Algorithm> parse_algorithms(const std::vector<std::string>& names) {
  std::vector<Algorithm> algorithms;
  for (const std::string& name : names) {
    const auto a = algorithm_from_name(name);
    if (!a) throw std::invalid_argument("unknown algorithm \"" + name + "\"");
    algorithms.push_back(*a);
  }
  if (algorithms.empty()) throw std::invalid_argument("algorithm list is empty");
  return algorithms;
}

MatchConfig match_config_from_json(const json& j) {
  reject_unknown_keys(j, {"allow_relocation", "strict_all", "max_passes"}, "matching");
  MatchConfig cfg;
  cfg.allow_relocation = j.value("allow_relocation", cfg.allow_relocation);
  cfg.strict_all = j.value("strict_all", cfg.strict_all);
  cfg.max_passes = j.value("max_passes", cfg.max_passes);
  return cfg;
}

// One JSON document configures the scenario(s), the sweep shape and the
// matching rules; every field has a default that reproduces the standard
// desk-scale setup.
SweepSpec load_spec(const std::string& config_path) {
  SweepSpec spec;
  if (config_path.empty()) return spec;

  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot read config file " + config_path);
  json doc = json::parse(in);
  reject_unknown_keys(doc, {"scenario", "scenarios", "sweep", "matching"}, "config");
  if (doc.contains("scenario") && doc.contains("scenarios")) {
    throw std::invalid_argument("config sets both \"scenario\" and \"scenarios\"");
  }

  if (doc.contains("scenario")) {
    spec.scenarios = {ScenarioSpec{"default", ScenarioParams::from_json(doc["scenario"])}};
  } else if (doc.contains("scenarios")) {
    spec.scenarios.clear();
    for (const json& entry : doc["scenarios"]) {
      reject_unknown_keys(entry, {"id", "params"}, "scenarios entry");
      ScenarioSpec s;
      s.id = entry.value("id", std::string("default"));
      if (entry.contains("params")) s.params = ScenarioParams::from_json(entry["params"]);
      spec.scenarios.push_back(std::move(s));
    }
    if (spec.scenarios.empty()) throw std::invalid_argument("\"scenarios\" is empty");
  }

  if (doc.contains("sweep")) {
    const json& sw = doc["sweep"];
    reject_unknown_keys(sw,
                        {"r_values", "trials", "algorithms", "optimal_rcap",
                         "optimal_budget_secs", "objective", "record_runtime", "parallelism"},
                        "sweep");
    spec.r_values = sw.value("r_values", spec.r_values);
    spec.trials = sw.value("trials", spec.trials);
    if (sw.contains("algorithms")) {
      spec.algorithms = parse_algorithms(sw["algorithms"].get<std::vector<std::string>>());
    }
    spec.options.optimal_rcap = sw.value("optimal_rcap", spec.options.optimal_rcap);
    spec.options.optimal_budget_secs =
        sw.value("optimal_budget_secs", spec.options.optimal_budget_secs);
    if (sw.contains("objective")) {
      const std::string mode = sw["objective"].get<std::string>();
      if (mode == "fidelity") {
        spec.options.objective = ObjectiveMode::FidelitySum;
      } else if (mode == "count") {
        spec.options.objective = ObjectiveMode::CountThenFidelity;
      } else {
        throw std::invalid_argument("objective must be \"fidelity\" or \"count\"");
      }
    }
    spec.options.record_runtime = sw.value("record_runtime", spec.options.record_runtime);
    spec.parallelism = sw.value("parallelism", spec.parallelism);
  }

  if (doc.contains("matching")) {
    spec.options.match = match_config_from_json(doc["matching"]);
  }
  return spec;
}

json spec_to_json(const SweepSpec& spec) {
  json scenarios = json::array();
  for (const ScenarioSpec& s : spec.scenarios) {
    scenarios.push_back({{"id", s.id}, {"params", s.params.to_json()}});
  }
  json algorithms = json::array();
  for (Algorithm a : spec.algorithms) algorithms.push_back(std::string(algorithm_name(a)));
  return json{{"scenarios", scenarios},
              {"sweep",
               {{"r_values", spec.r_values},
                {"trials", spec.trials},
                {"algorithms", algorithms},
                {"optimal_rcap", spec.options.optimal_rcap},
                {"optimal_budget_secs", spec.options.optimal_budget_secs},
                {"objective",
                 spec.options.objective == ObjectiveMode::FidelitySum ? "fidelity" : "count"},
                {"record_runtime", spec.options.record_runtime},
                {"parallelism", spec.parallelism}}},
              {"matching",
               {{"allow_relocation", spec.options.match.allow_relocation},
                {"strict_all", spec.options.match.strict_all},
                {"max_passes", spec.options.match.max_passes}}}};
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void print_aggregate(const std::vector<AggregateRow>& rows) {
  std::printf("%-12s %4s %-8s %12s %12s %14s %12s %8s\n", "scenario", "R", "algorithm",
              "mean_served", "se_served", "mean_fidelity", "se_fidelity", "trials");
  for (const AggregateRow& r : rows) {
    std::printf("%-12s %4d %-8s %12.4f %12.4f %14.4f %12.4f %8d\n", r.scenario.c_str(),
                r.num_requests, r.algorithm.c_str(), r.mean_served, r.se_served,
                r.mean_fidelity, r.se_fidelity, r.n_trials);
  }
}

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> algorithms;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int seeds = 0;
  std::vector<int> r_values;
  int optimal_rcap = -1;
  double optimal_budget = -1.0;
  bool relocation = true;
  bool relocation_set = false;
  bool strict_all = false;
  bool strict_all_set = false;
  int parallelism = 0;
};

void apply_overrides(SweepSpec& spec, const CommonFlags& f) {
  if (f.seed_set) {
    for (ScenarioSpec& s : spec.scenarios) s.params.seed = f.seed;
  }
  if (f.seeds > 0) spec.trials = f.seeds;
  if (!f.r_values.empty()) spec.r_values = f.r_values;
  if (!f.algorithms.empty()) spec.algorithms = parse_algorithms(f.algorithms);
  if (f.optimal_rcap >= 0) spec.options.optimal_rcap = f.optimal_rcap;
  if (f.optimal_budget >= 0) spec.options.optimal_budget_secs = f.optimal_budget;
  if (f.relocation_set) spec.options.match.allow_relocation = f.relocation;
  if (f.strict_all_set) spec.options.match.strict_all = f.strict_all;
  if (f.parallelism > 0) spec.parallelism = f.parallelism;
}

int cmd_sweep(const CommonFlags& flags, const std::string& out_dir, const std::string& format,
              bool timing) {
  SweepSpec spec = load_spec(flags.config_path);
  apply_overrides(spec, flags);
  spec.options.record_runtime = timing;

  const SweepResult result = run_sweep(spec);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  if (format == "csv") {
    const std::string raw = raw_csv(result.raw);
    const std::string agg = aggregate_csv(result.aggregate);
    write_file(dir / "raw.csv", raw);
    write_file(dir / "aggregate.csv", agg);
    // Emitted files must round-trip: re-reading the raw table and
    // re-aggregating has to reproduce the aggregate file exactly.
    const auto reread = parse_raw_csv(raw);
    if (aggregate_csv(aggregate_metrics(reread)) != agg) {
      std::cerr << "round-trip verification failed for " << (dir / "raw.csv").string() << "\n";
      return 1;
    }
  } else {
    write_file(dir / "raw.json", raw_json(result.raw).dump(2) + "\n");
    write_file(dir / "aggregate.json", aggregate_json(result.aggregate).dump(2) + "\n");
  }
  write_file(dir / "meta.json", spec_to_json(spec).dump(2) + "\n");

  print_aggregate(result.aggregate);
  std::printf("wrote %zu raw rows to %s\n", result.raw.size(), dir.string().c_str());
  return 0;
}

int cmd_trial(const CommonFlags& flags, int r_count) {
  SweepSpec spec = load_spec(flags.config_path);
  apply_overrides(spec, flags);
  const ScenarioSpec& scenario = spec.scenarios.front();
  const std::uint64_t seed =
      flags.seed_set ? flags.seed : trial_seed_for(scenario, r_count, 0);

  const auto rows = run_trial(scenario, r_count, seed, spec.algorithms, spec.options);
  std::printf("%-20s %-8s %8s %14s %6s %12s %8s\n", "seed", "algorithm", "served",
              "total_fidelity", "swaps", "runtime_ms", "proven");
  for (const TrialMetrics& row : rows) {
    std::printf("%-20llu %-8s %8.3f %14.6f %6d %12.3f %8s\n",
                static_cast<unsigned long long>(row.seed), row.algorithm.c_str(),
                row.served_fraction, row.total_fidelity, row.swap_count, row.runtime_ms,
                std::string(proven_name(row.proven)).c_str());
  }
  return 0;
}

int report_suites(const std::vector<selfcheck::SuiteResult>& suites) {
  bool all_passed = true;
  for (const auto& suite : suites) {
    std::printf("[%s] %-28s (%d checks)%s%s\n", suite.passed ? "PASS" : "FAIL",
                suite.name.c_str(), suite.checks, suite.failure.empty() ? "" : " ",
                suite.failure.c_str());
    all_passed = all_passed && suite.passed;
  }
  return all_passed ? 0 : 1;
}

int cmd_verify(const CommonFlags& flags, int trials) {
  SweepSpec spec = load_spec(flags.config_path);
  apply_overrides(spec, flags);
  const std::uint64_t seed = flags.seed_set ? flags.seed : 20240811;
  const ScenarioParams& params = spec.scenarios.front().params;

  std::vector<selfcheck::SuiteResult> suites;
  suites.push_back(selfcheck::check_fidelity_identities(1000 * trials, derive_seed(seed, 1)));
  suites.push_back(selfcheck::check_p1_bruteforce(50 * trials, derive_seed(seed, 2)));
  suites.push_back(selfcheck::check_optimal_bruteforce(15 * trials, derive_seed(seed, 3)));
  const std::vector<int> r_values = {8, 16};
  suites.push_back(selfcheck::check_rqsa_stability(trials, r_values, derive_seed(seed, 4),
                                                   spec.options.match, params));
  return report_suites(suites);
}

int cmd_stability_check(const CommonFlags& flags, int trials) {
  SweepSpec spec = load_spec(flags.config_path);
  apply_overrides(spec, flags);
  const std::uint64_t seed = flags.seed_set ? flags.seed : 20240811;
  const std::vector<int> r_values =
      flags.r_values.empty() ? std::vector<int>{10, 20, 40} : flags.r_values;
  std::vector<selfcheck::SuiteResult> suites;
  suites.push_back(selfcheck::check_rqsa_stability(trials, r_values, seed, spec.options.match,
                                                   spec.scenarios.front().params));
  return report_suites(suites);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Request-to-switch association simulator for entanglement networks"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string out_dir = "out";
  std::string format = "csv";
  bool timing = true;
  int r_count = 10;
  int trials = 10;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON configuration file");
    cmd->add_option("--seed", flags.seed, "master seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--algorithms", flags.algorithms,
                    "algorithms to run (optimal,rqsa,greedy,random)")
        ->delimiter(',');
    cmd->add_option("--optimal-rcap", flags.optimal_rcap,
                    "largest R the optimal baseline runs at");
    cmd->add_option("--optimal-budget-secs", flags.optimal_budget,
                    "time budget per optimal solve");
    cmd->add_option("--allow-relocation", flags.relocation,
                    "enable relocation moves in the swap phase (true/false)")
        ->each([&](const std::string&) { flags.relocation_set = true; });
    cmd->add_option("--strict-all", flags.strict_all,
                    "require strict preference from every participant (true/false)")
        ->each([&](const std::string&) { flags.strict_all_set = true; });
  };

  CLI::App* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep and write tables");
  add_common(sweep);
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seeds", flags.seeds, "number of trials per (scenario, R) cell");
  sweep->add_option("--r-values", flags.r_values, "request counts to sweep")->delimiter(',');
  sweep->add_option("--parallelism", flags.parallelism, "worker threads");
  sweep->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sweep->add_flag("--timing,!--no-timing", timing,
                  "record wall-clock runtimes (disable for byte-identical reruns)");

  CLI::App* trial = app.add_subcommand("trial", "run one trial and print per-algorithm rows");
  add_common(trial);
  trial->add_option("--r", r_count, "number of requests");

  CLI::App* verify = app.add_subcommand("verify", "run the verification suites");
  add_common(verify);
  verify->add_option("--trials", trials, "scale factor for suite sizes");

  CLI::App* stability =
      app.add_subcommand("stability-check", "check swap stability of converged runs");
  add_common(stability);
  stability->add_option("--trials", trials, "trials per R value");
  stability->add_option("--r-values", flags.r_values, "request counts")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cmd_sweep(flags, out_dir, format, timing);
    if (trial->parsed()) return cmd_trial(flags, r_count);
    if (verify->parsed()) return cmd_verify(flags, trials);
    if (stability->parsed()) return cmd_stability_check(flags, trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
