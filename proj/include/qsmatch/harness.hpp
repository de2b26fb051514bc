#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qsmatch/baselines.hpp"
#include "qsmatch/model.hpp"

namespace qsmatch {

enum class Algorithm { Optimal, Rqsa, Greedy, Random };

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

// Whether the "optimal" row is a proven optimum. Non-optimal algorithms
// carry NotApplicable; rows above the optimal R cap are Skipped and take
// no part in aggregation.
enum class ProvenState { Yes, No, NotApplicable, Skipped };

std::string_view proven_name(ProvenState p);
std::optional<ProvenState> proven_from_name(std::string_view name);

// One algorithm's result on one sampled instance. `seed` is the derived
// trial seed and replays the instance exactly (`qsmatch trial --seed`).
struct TrialMetrics {
  std::uint64_t seed = 0;
  std::string scenario;
  int num_tx = 0;
  int num_rx = 0;
  int num_qs = 0;
  int num_requests = 0;
  std::string algorithm;
  double served_fraction = 0.0;  // 1.0 by convention when num_requests == 0
  double total_fidelity = 0.0;
  int swap_count = 0;  // RQSA only; 0 elsewhere
  double runtime_ms = 0.0;
  ProvenState proven = ProvenState::NotApplicable;
  std::uint64_t fingerprint = 0;  // hash of the sampled instance
};

struct ScenarioSpec {
  std::string id = "default";
  ScenarioParams params;
};

struct TrialOptions {
  MatchConfig match;
  int optimal_rcap = 16;
  double optimal_budget_secs = 60.0;
  ObjectiveMode objective = ObjectiveMode::FidelitySum;
  // Wall-clock timing is inherently non-reproducible; disable it when
  // byte-identical output matters more than the runtime column.
  bool record_runtime = true;
};

struct SweepSpec {
  std::vector<ScenarioSpec> scenarios = {ScenarioSpec{}};
  std::vector<int> r_values = {0, 5, 10, 15, 20, 25, 30, 35, 40};
  int trials = 100;
  std::vector<Algorithm> algorithms = {Algorithm::Optimal, Algorithm::Rqsa, Algorithm::Greedy,
                                       Algorithm::Random};
  TrialOptions options;
  int parallelism = 1;
};

struct AggregateRow {
  std::string scenario;
  int num_requests = 0;
  std::string algorithm;
  double mean_served = 0.0;
  double se_served = 0.0;
  double mean_fidelity = 0.0;
  double se_fidelity = 0.0;
  int n_trials = 0;
};

struct SweepResult {
  std::vector<TrialMetrics> raw;  // canonical (scenario, R, seed, algorithm) order
  std::vector<AggregateRow> aggregate;
};

// Independent stream seed for one (scenario, request count, trial) cell.
std::uint64_t trial_seed_for(const ScenarioSpec& scenario, int r_count, int trial_index);

// Hash of one sampled instance; identical for every algorithm row of a
// trial, which is how tests verify the algorithms consumed the same input.
std::uint64_t instance_fingerprint(const Topology& topology, const SlotState& slot,
                                   std::span<const Request> requests);

// Sample the instance for (scenario, R, seed) and run each algorithm on
// it. One metrics row per algorithm, in the order given.
std::vector<TrialMetrics> run_trial(const ScenarioSpec& scenario, int r_count,
                                    std::uint64_t trial_seed,
                                    std::span<const Algorithm> algorithms,
                                    const TrialOptions& options);

// Cartesian product of scenarios x r_values x trials, optionally across
// worker threads. Raw rows come back in canonical order regardless of the
// parallelism degree, so equal seeds give byte-identical tables.
SweepResult run_sweep(const SweepSpec& spec);

// Means and standard errors per (scenario, R, algorithm); skipped rows are
// excluded.
std::vector<AggregateRow> aggregate_metrics(std::span<const TrialMetrics> raw);

// The three-network scaling study: K>M, K=M and K<M at three switches,
// derived from base.scenarios[0]. The exact node counts are a configurable
// convention, not a measured property of any hardware.
std::vector<ScenarioSpec> scalability_scenarios(const ScenarioParams& base);
SweepResult scalability_suite(SweepSpec spec);

// Serialization. CSV headers:
//   raw: seed,scenario,K,M,Q,R,algorithm,served_fraction,total_fidelity,
//        swap_count,runtime_ms,optimal_proven,instance_fingerprint
//   aggregate: scenario,R,algorithm,mean_served,se_served,mean_fidelity,
//              se_fidelity,n_trials
// Doubles use shortest round-trip formatting; parsing recovers the exact
// bit pattern.
std::string raw_csv(std::span<const TrialMetrics> rows);
std::string aggregate_csv(std::span<const AggregateRow> rows);
std::vector<TrialMetrics> parse_raw_csv(const std::string& text);
nlohmann::json raw_json(std::span<const TrialMetrics> rows);
nlohmann::json aggregate_json(std::span<const AggregateRow> rows);

std::string format_double(double v);

}  // namespace qsmatch
