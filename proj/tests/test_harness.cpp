#include "qsmatch/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace qsmatch {
namespace {

SweepSpec small_spec() {
  SweepSpec spec;
  spec.scenarios = {ScenarioSpec{}};
  spec.r_values = {0, 6};
  spec.trials = 3;
  spec.algorithms = {Algorithm::Optimal, Algorithm::Rqsa, Algorithm::Greedy, Algorithm::Random};
  spec.options.record_runtime = false;
  return spec;
}

TEST(Harness, AlgorithmNamesRoundTrip) {
  for (Algorithm a : {Algorithm::Optimal, Algorithm::Rqsa, Algorithm::Greedy, Algorithm::Random}) {
    EXPECT_EQ(algorithm_from_name(algorithm_name(a)), a);
  }
  EXPECT_FALSE(algorithm_from_name("simulated-annealing").has_value());
}

TEST(Harness, TrialAtZeroRequests) {
  const ScenarioSpec scenario;
  TrialOptions options;
  options.record_runtime = false;
  const std::vector<Algorithm> algorithms = {Algorithm::Optimal, Algorithm::Rqsa,
                                             Algorithm::Greedy, Algorithm::Random};
  const auto rows = run_trial(scenario, 0, 123, algorithms, options);
  ASSERT_EQ(rows.size(), 4u);
  for (const TrialMetrics& row : rows) {
    EXPECT_DOUBLE_EQ(row.total_fidelity, 0.0);
    EXPECT_DOUBLE_EQ(row.served_fraction, 1.0);  // vacuously served
  }
}

TEST(Harness, TrialRowsShareTheInstanceFingerprint) {
  const ScenarioSpec scenario;
  TrialOptions options;
  options.record_runtime = false;
  const std::vector<Algorithm> algorithms = {Algorithm::Rqsa, Algorithm::Greedy,
                                             Algorithm::Random};
  const auto rows = run_trial(scenario, 12, 5150, algorithms, options);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].fingerprint, rows[1].fingerprint);
  EXPECT_EQ(rows[1].fingerprint, rows[2].fingerprint);
  EXPECT_NE(rows[0].fingerprint, 0u);
}

TEST(Harness, TrialIsReproducible) {
  const ScenarioSpec scenario;
  TrialOptions options;
  options.record_runtime = false;
  const std::vector<Algorithm> algorithms = {Algorithm::Rqsa, Algorithm::Greedy};
  const auto a = run_trial(scenario, 15, 777, algorithms, options);
  const auto b = run_trial(scenario, 15, 777, algorithms, options);
  EXPECT_EQ(raw_csv(a), raw_csv(b));
}

TEST(Harness, OptimalSkippedAboveRCap) {
  const ScenarioSpec scenario;
  TrialOptions options;
  options.record_runtime = false;
  options.optimal_rcap = 10;
  const std::vector<Algorithm> algorithms = {Algorithm::Optimal, Algorithm::Greedy};
  const auto rows = run_trial(scenario, 12, 99, algorithms, options);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].algorithm, "optimal");
  EXPECT_EQ(rows[0].proven, ProvenState::Skipped);
  EXPECT_DOUBLE_EQ(rows[0].total_fidelity, 0.0);
  EXPECT_EQ(rows[1].proven, ProvenState::NotApplicable);
}

TEST(Harness, ServedFractionTimesRIsIntegral) {
  const ScenarioSpec scenario;
  TrialOptions options;
  options.record_runtime = false;
  const std::vector<Algorithm> algorithms = {Algorithm::Rqsa};
  for (int r : {5, 17, 30}) {
    const auto rows = run_trial(scenario, r, 31337, algorithms, options);
    const double count = rows[0].served_fraction * r;
    EXPECT_NEAR(count, std::round(count), 1e-9);
    EXPECT_GE(rows[0].total_fidelity, 0.5 * std::round(count) - 1e-9);
    EXPECT_LE(rows[0].total_fidelity, std::round(count) + 1e-9);
  }
}

TEST(Harness, SweepRowCountAndCanonicalOrder) {
  const SweepSpec spec = small_spec();
  const SweepResult result = run_sweep(spec);
  ASSERT_EQ(result.raw.size(), 2u * 3u * 4u);
  for (size_t i = 1; i < result.raw.size(); ++i) {
    const TrialMetrics& a = result.raw[i - 1];
    const TrialMetrics& b = result.raw[i];
    EXPECT_LE(std::tie(a.scenario, a.num_requests, a.seed, a.algorithm),
              std::tie(b.scenario, b.num_requests, b.seed, b.algorithm));
  }
}

TEST(Harness, SweepIdenticalAcrossParallelism) {
  SweepSpec spec = small_spec();
  spec.parallelism = 1;
  const std::string serial = raw_csv(run_sweep(spec).raw);
  spec.parallelism = 4;
  const std::string parallel = raw_csv(run_sweep(spec).raw);
  spec.parallelism = 4;
  const std::string again = raw_csv(run_sweep(spec).raw);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(parallel, again);
}

TEST(Harness, AggregationMatchesRecomputation) {
  const SweepResult result = run_sweep(small_spec());
  // Means recomputed from raw rows agree with the aggregate table.
  for (const AggregateRow& agg : result.aggregate) {
    double sum = 0.0;
    double min_v = 1e300, max_v = -1e300;
    int n = 0;
    for (const TrialMetrics& row : result.raw) {
      if (row.scenario != agg.scenario || row.num_requests != agg.num_requests ||
          row.algorithm != agg.algorithm || row.proven == ProvenState::Skipped) {
        continue;
      }
      sum += row.served_fraction;
      min_v = std::min(min_v, row.served_fraction);
      max_v = std::max(max_v, row.served_fraction);
      ++n;
    }
    ASSERT_EQ(n, agg.n_trials);
    EXPECT_NEAR(agg.mean_served, sum / n, 1e-12);
    EXPECT_GE(agg.mean_served, min_v - 1e-12);
    EXPECT_LE(agg.mean_served, max_v + 1e-12);
  }
}

TEST(Harness, RawCsvRoundTrip) {
  const SweepResult result = run_sweep(small_spec());
  const std::string text = raw_csv(result.raw);
  const auto parsed = parse_raw_csv(text);
  ASSERT_EQ(parsed.size(), result.raw.size());
  EXPECT_EQ(raw_csv(parsed), text);
  // Aggregating the reread rows reproduces the aggregate table exactly.
  EXPECT_EQ(aggregate_csv(aggregate_metrics(parsed)), aggregate_csv(result.aggregate));
}

TEST(Harness, CsvHeadersAreStable) {
  const std::string raw = raw_csv({});
  EXPECT_EQ(raw,
            "seed,scenario,K,M,Q,R,algorithm,served_fraction,total_fidelity,swap_count,"
            "runtime_ms,optimal_proven,instance_fingerprint\n");
  EXPECT_EQ(aggregate_csv({}),
            "scenario,R,algorithm,mean_served,se_served,mean_fidelity,se_fidelity,n_trials\n");
}

TEST(Harness, JsonMirrorsCsvContent) {
  const SweepResult result = run_sweep(small_spec());
  const nlohmann::json arr = raw_json(result.raw);
  ASSERT_EQ(arr.size(), result.raw.size());
  EXPECT_EQ(arr[0]["scenario"], result.raw[0].scenario);
  EXPECT_EQ(arr[0]["R"].get<int>(), result.raw[0].num_requests);
  EXPECT_EQ(arr[0]["seed"].get<std::uint64_t>(), result.raw[0].seed);
  const nlohmann::json agg = aggregate_json(result.aggregate);
  ASSERT_EQ(agg.size(), result.aggregate.size());
}

TEST(Harness, ScalabilityScenarios) {
  const auto scenarios = scalability_scenarios(ScenarioParams{});
  ASSERT_EQ(scenarios.size(), 3u);
  EXPECT_EQ(scenarios[0].id, "K3_M5_Q3");
  EXPECT_EQ(scenarios[1].id, "K5_M5_Q3");
  EXPECT_EQ(scenarios[2].id, "K5_M3_Q3");
  for (const ScenarioSpec& s : scenarios) EXPECT_EQ(s.params.num_qs, 3);
  EXPECT_EQ(scenarios[0].params.num_tx, 3);
  EXPECT_EQ(scenarios[2].params.num_rx, 3);

  SweepSpec spec;
  spec.r_values = {4};
  spec.trials = 2;
  spec.algorithms = {Algorithm::Greedy};
  spec.options.record_runtime = false;
  const SweepResult result = scalability_suite(spec);
  std::set<std::string> ids;
  for (const TrialMetrics& row : result.raw) ids.insert(row.scenario);
  EXPECT_EQ(ids.size(), 3u);
}

TEST(Harness, FormatDoubleRoundTrips) {
  for (double v : {0.0, 1.0, 0.1, 0.726666666667, 1e-17, 123456.789, 3.678794411714}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::stod(s), v);
  }
}

}  // namespace
}  // namespace qsmatch
