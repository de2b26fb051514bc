#include "qsmatch/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace qsmatch {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTopologySalt = 1;
constexpr std::uint64_t kSlotSalt = 2;
constexpr std::uint64_t kRequestSalt = 3;
constexpr std::uint64_t kRandomAlgoSalt = 4;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Hasher {
 public:
  void add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xff;
      h_ *= 0x100000001b3ULL;
    }
  }
  void add_int(int v) { add_u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  void add_double(double v) { add_u64(std::bit_cast<std::uint64_t>(v)); }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view s, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " field: " + std::string(s));
  }
  return value;
}

std::uint64_t parse_hex64(std::string_view s, const char* what) {
  std::uint64_t value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, 16);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " field: " + std::string(s));
  }
  return value;
}

bool row_before(const TrialMetrics& a, const TrialMetrics& b) {
  return std::tie(a.scenario, a.num_requests, a.seed, a.algorithm) <
         std::tie(b.scenario, b.num_requests, b.seed, b.algorithm);
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Optimal:
      return "optimal";
    case Algorithm::Rqsa:
      return "rqsa";
    case Algorithm::Greedy:
      return "greedy";
    case Algorithm::Random:
      return "random";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  for (Algorithm a : {Algorithm::Optimal, Algorithm::Rqsa, Algorithm::Greedy, Algorithm::Random}) {
    if (name == algorithm_name(a)) return a;
  }
  return std::nullopt;
}

std::string_view proven_name(ProvenState p) {
  switch (p) {
    case ProvenState::Yes:
      return "true";
    case ProvenState::No:
      return "false";
    case ProvenState::NotApplicable:
      return "na";
    case ProvenState::Skipped:
      return "skipped";
  }
  return "?";
}

std::optional<ProvenState> proven_from_name(std::string_view name) {
  for (ProvenState p : {ProvenState::Yes, ProvenState::No, ProvenState::NotApplicable,
                        ProvenState::Skipped}) {
    if (name == proven_name(p)) return p;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t trial_seed_for(const ScenarioSpec& scenario, int r_count, int trial_index) {
  std::uint64_t s = derive_seed(scenario.params.seed, fnv1a64(scenario.id));
  s = derive_seed(s, static_cast<std::uint64_t>(r_count));
  return derive_seed(s, static_cast<std::uint64_t>(trial_index));
}

std::uint64_t instance_fingerprint(const Topology& topology, const SlotState& slot,
                                   std::span<const Request> requests) {
  Hasher h;
  h.add_int(topology.num_tx);
  h.add_int(topology.num_rx);
  h.add_int(topology.num_qs);
  h.add_int(topology.attempts);
  h.add_double(topology.attenuation_km);
  for (double d : topology.tx_distance_km.flat()) h.add_double(d);
  for (double d : topology.rx_distance_km.flat()) h.add_double(d);
  for (int c : slot.tx_count.flat()) h.add_int(c);
  for (double f : slot.tx_fidelity.flat()) h.add_double(f);
  for (int c : slot.rx_count.flat()) h.add_int(c);
  for (double f : slot.rx_fidelity.flat()) h.add_double(f);
  for (const Request& r : requests) {
    h.add_int(r.id);
    h.add_int(r.tx);
    h.add_int(r.rx);
    h.add_double(r.min_fidelity);
  }
  return h.digest();
}

std::vector<TrialMetrics> run_trial(const ScenarioSpec& scenario, int r_count,
                                    std::uint64_t trial_seed,
                                    std::span<const Algorithm> algorithms,
                                    const TrialOptions& options) {
  const ScenarioParams& params = scenario.params;
  Rng topo_rng(derive_seed(trial_seed, kTopologySalt));
  const Topology topology = sample_topology(params, topo_rng);
  Rng slot_rng(derive_seed(trial_seed, kSlotSalt));
  const SlotState slot = sample_slot(topology, params, slot_rng);
  Rng req_rng(derive_seed(trial_seed, kRequestSalt));
  const std::vector<Request> requests = sample_requests(r_count, topology, params, req_rng);
  const std::uint64_t fingerprint = instance_fingerprint(topology, slot, requests);

  std::vector<TrialMetrics> rows;
  rows.reserve(algorithms.size());
  for (Algorithm algo : algorithms) {
    TrialMetrics row;
    row.seed = trial_seed;
    row.scenario = scenario.id;
    row.num_tx = params.num_tx;
    row.num_rx = params.num_rx;
    row.num_qs = params.num_qs;
    row.num_requests = r_count;
    row.algorithm = algorithm_name(algo);
    row.fingerprint = fingerprint;

    if (algo == Algorithm::Optimal && r_count > options.optimal_rcap) {
      row.proven = ProvenState::Skipped;
      rows.push_back(std::move(row));
      continue;
    }

    const auto start = Clock::now();
    Solution solution;
    switch (algo) {
      case Algorithm::Optimal: {
        OptimalSettings settings;
        settings.time_budget_secs = options.optimal_budget_secs;
        settings.objective = options.objective;
        solution = solve_optimal(requests, slot, settings);
        row.proven = solution.optimal_flag ? ProvenState::Yes : ProvenState::No;
        break;
      }
      case Algorithm::Rqsa: {
        RqsaSolution r = solve_rqsa(requests, slot, options.match);
        solution = std::move(r.solution);
        row.swap_count = static_cast<int>(r.swaps.size());
        break;
      }
      case Algorithm::Greedy:
        solution = solve_greedy(requests, slot);
        break;
      case Algorithm::Random: {
        Rng rng(derive_seed(trial_seed, kRandomAlgoSalt));
        solution = solve_random(requests, slot, rng);
        break;
      }
    }
    if (options.record_runtime) row.runtime_ms = elapsed_ms(start);
    row.total_fidelity = solution.total_utility;
    row.served_fraction =
        r_count == 0 ? 1.0 : static_cast<double>(solution.served_count) / r_count;
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("trial count must be >= 1");
  for (const ScenarioSpec& s : spec.scenarios) {
    if (s.id.empty() || s.id.find(',') != std::string::npos) {
      throw std::invalid_argument("scenario id must be non-empty and comma-free");
    }
    s.params.validate();
  }
  for (int r : spec.r_values) {
    if (r < 0) throw std::invalid_argument("request counts must be >= 0");
  }

  struct Task {
    const ScenarioSpec* scenario;
    int r_count;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const ScenarioSpec& s : spec.scenarios) {
    for (int r : spec.r_values) {
      for (int t = 0; t < spec.trials; ++t) {
        tasks.push_back({&s, r, trial_seed_for(s, r, t)});
      }
    }
  }

  std::vector<std::vector<TrialMetrics>> results(tasks.size());
  const int workers = std::max(1, spec.parallelism);
  std::atomic<size_t> next{0};
  auto work = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      results[i] = run_trial(*tasks[i].scenario, tasks[i].r_count, tasks[i].seed,
                             spec.algorithms, spec.options);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  SweepResult out;
  for (std::vector<TrialMetrics>& rows : results) {
    out.raw.insert(out.raw.end(), std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.end()));
  }
  std::sort(out.raw.begin(), out.raw.end(), row_before);
  out.aggregate = aggregate_metrics(out.raw);
  return out;
}

std::vector<AggregateRow> aggregate_metrics(std::span<const TrialMetrics> raw) {
  struct Acc {
    std::vector<double> served;
    std::vector<double> fidelity;
  };
  std::map<std::tuple<std::string, int, std::string>, Acc> groups;
  for (const TrialMetrics& row : raw) {
    if (row.proven == ProvenState::Skipped) continue;
    Acc& acc = groups[{row.scenario, row.num_requests, row.algorithm}];
    acc.served.push_back(row.served_fraction);
    acc.fidelity.push_back(row.total_fidelity);
  }

  auto mean_of = [](const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
  };
  auto se_of = [&](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
  };

  std::vector<AggregateRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    AggregateRow row;
    row.scenario = std::get<0>(key);
    row.num_requests = std::get<1>(key);
    row.algorithm = std::get<2>(key);
    row.n_trials = static_cast<int>(acc.served.size());
    row.mean_served = mean_of(acc.served);
    row.se_served = se_of(acc.served, row.mean_served);
    row.mean_fidelity = mean_of(acc.fidelity);
    row.se_fidelity = se_of(acc.fidelity, row.mean_fidelity);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScenarioSpec> scalability_scenarios(const ScenarioParams& base) {
  struct Shape {
    int num_tx;
    int num_rx;
  };
  static constexpr Shape kShapes[] = {{3, 5}, {5, 5}, {5, 3}};
  std::vector<ScenarioSpec> scenarios;
  int index = 0;
  for (const Shape& shape : kShapes) {
    ScenarioSpec s;
    s.params = base;
    s.params.num_tx = shape.num_tx;
    s.params.num_rx = shape.num_rx;
    s.params.num_qs = 3;
    s.params.seed = derive_seed(base.seed, static_cast<std::uint64_t>(index++));
    s.id = "K" + std::to_string(shape.num_tx) + "_M" + std::to_string(shape.num_rx) + "_Q3";
    scenarios.push_back(std::move(s));
  }
  return scenarios;
}

SweepResult scalability_suite(SweepSpec spec) {
  if (spec.scenarios.empty()) throw std::invalid_argument("base scenario required");
  spec.scenarios = scalability_scenarios(spec.scenarios.front().params);
  return run_sweep(spec);
}

std::string raw_csv(std::span<const TrialMetrics> rows) {
  std::ostringstream out;
  out << "seed,scenario,K,M,Q,R,algorithm,served_fraction,total_fidelity,swap_count,"
         "runtime_ms,optimal_proven,instance_fingerprint\n";
  for (const TrialMetrics& r : rows) {
    out << r.seed << ',' << r.scenario << ',' << r.num_tx << ',' << r.num_rx << ',' << r.num_qs
        << ',' << r.num_requests << ',' << r.algorithm << ',' << format_double(r.served_fraction)
        << ',' << format_double(r.total_fidelity) << ',' << r.swap_count << ','
        << format_double(r.runtime_ms) << ',' << proven_name(r.proven) << ','
        << hex16(r.fingerprint) << '\n';
  }
  return out.str();
}

std::string aggregate_csv(std::span<const AggregateRow> rows) {
  std::ostringstream out;
  out << "scenario,R,algorithm,mean_served,se_served,mean_fidelity,se_fidelity,n_trials\n";
  for (const AggregateRow& r : rows) {
    out << r.scenario << ',' << r.num_requests << ',' << r.algorithm << ','
        << format_double(r.mean_served) << ',' << format_double(r.se_served) << ','
        << format_double(r.mean_fidelity) << ',' << format_double(r.se_fidelity) << ','
        << r.n_trials << '\n';
  }
  return out.str();
}

std::vector<TrialMetrics> parse_raw_csv(const std::string& text) {
  std::vector<TrialMetrics> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 13) throw std::invalid_argument("raw CSV row needs 13 fields");
    TrialMetrics r;
    r.seed = parse_number<std::uint64_t>(fields[0], "seed");
    r.scenario = std::string(fields[1]);
    r.num_tx = parse_number<int>(fields[2], "K");
    r.num_rx = parse_number<int>(fields[3], "M");
    r.num_qs = parse_number<int>(fields[4], "Q");
    r.num_requests = parse_number<int>(fields[5], "R");
    r.algorithm = std::string(fields[6]);
    r.served_fraction = parse_number<double>(fields[7], "served_fraction");
    r.total_fidelity = parse_number<double>(fields[8], "total_fidelity");
    r.swap_count = parse_number<int>(fields[9], "swap_count");
    r.runtime_ms = parse_number<double>(fields[10], "runtime_ms");
    const auto proven = proven_from_name(fields[11]);
    if (!proven) throw std::invalid_argument("bad optimal_proven field");
    r.proven = *proven;
    r.fingerprint = parse_hex64(fields[12], "instance_fingerprint");
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json raw_json(std::span<const TrialMetrics> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrialMetrics& r : rows) {
    arr.push_back({{"seed", r.seed},
                   {"scenario", r.scenario},
                   {"K", r.num_tx},
                   {"M", r.num_rx},
                   {"Q", r.num_qs},
                   {"R", r.num_requests},
                   {"algorithm", r.algorithm},
                   {"served_fraction", r.served_fraction},
                   {"total_fidelity", r.total_fidelity},
                   {"swap_count", r.swap_count},
                   {"runtime_ms", r.runtime_ms},
                   {"optimal_proven", std::string(proven_name(r.proven))},
                   {"instance_fingerprint", hex16(r.fingerprint)}});
  }
  return arr;
}

nlohmann::json aggregate_json(std::span<const AggregateRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AggregateRow& r : rows) {
    arr.push_back({{"scenario", r.scenario},
                   {"R", r.num_requests},
                   {"algorithm", r.algorithm},
                   {"mean_served", r.mean_served},
                   {"se_served", r.se_served},
                   {"mean_fidelity", r.mean_fidelity},
                   {"se_fidelity", r.se_fidelity},
                   {"n_trials", r.n_trials}});
  }
  return arr;
}

}  // namespace qsmatch
