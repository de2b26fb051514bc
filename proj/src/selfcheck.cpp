#include "qsmatch/selfcheck.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "qsmatch/bruteforce.hpp"
#include "qsmatch/fidelity.hpp"
#include "qsmatch/scheduler.hpp"

namespace qsmatch::selfcheck {

namespace {

constexpr double kTol = 1e-9;

std::string describe(const SmallInstance& inst, int index) {
  std::ostringstream out;
  out << "instance " << index << ": Q=" << inst.slot.num_qs() << " K=" << inst.slot.num_tx()
      << " M=" << inst.slot.num_rx() << " R=" << inst.requests.size();
  return out.str();
}

}  // namespace

SmallInstance random_small_instance(Rng& rng, const InstanceLimits& limits) {
  const int num_tx = 1 + rng.uniform_int(limits.max_tx);
  const int num_rx = 1 + rng.uniform_int(limits.max_rx);
  const int num_qs = 1 + rng.uniform_int(limits.max_qs);
  const int num_requests = 1 + rng.uniform_int(limits.max_requests);

  SmallInstance inst;
  inst.slot.tx_count = Grid<int>(num_tx, num_qs);
  inst.slot.tx_fidelity = Grid<double>(num_tx, num_qs);
  inst.slot.rx_count = Grid<int>(num_qs, num_rx);
  inst.slot.rx_fidelity = Grid<double>(num_qs, num_rx);
  for (int k = 0; k < num_tx; ++k) {
    for (int q = 0; q < num_qs; ++q) {
      inst.slot.tx_count.at(k, q) = rng.uniform_int(limits.max_budget + 1);
      inst.slot.tx_fidelity.at(k, q) = rng.uniform(0.4, 0.99);
    }
  }
  for (int q = 0; q < num_qs; ++q) {
    for (int m = 0; m < num_rx; ++m) {
      inst.slot.rx_count.at(q, m) = rng.uniform_int(limits.max_budget + 1);
      inst.slot.rx_fidelity.at(q, m) = rng.uniform(0.4, 0.99);
    }
  }

  const bool shared_floor = rng.bernoulli(0.5);
  std::map<std::pair<int, int>, double> pair_floor;
  for (int l = 0; l < num_requests; ++l) {
    Request r;
    r.id = l;
    r.tx = rng.uniform_int(num_tx);
    r.rx = rng.uniform_int(num_rx);
    if (shared_floor) {
      auto [it, inserted] = pair_floor.try_emplace({r.tx, r.rx}, 0.0);
      if (inserted) it->second = rng.uniform(0.45, 0.95);
      r.min_fidelity = it->second;
    } else {
      r.min_fidelity = rng.uniform(0.45, 0.95);
    }
    inst.requests.push_back(r);
  }
  return inst;
}

SuiteResult check_fidelity_identities(int samples, std::uint64_t seed,
                                      std::function<double(double)> distill) {
  SuiteResult result;
  result.name = "fidelity-identities";
  if (!distill) distill = [](double f) { return distill_fidelity(Fidelity(f)).value(); };
  Rng rng(seed);

  auto fail = [&](const std::string& what, double a, double b) {
    result.passed = false;
    std::ostringstream out;
    out << what << " at f1=" << a << " f2=" << b;
    result.failure = out.str();
  };

  for (int i = 0; i < samples && result.passed; ++i) {
    const double a = rng.uniform(0.25, 1.0);
    const double b = rng.uniform(0.25, 1.0);
    ++result.checks;

    const double sab = swap_fidelity(Fidelity(a), Fidelity(b)).value();
    const double sba = swap_fidelity(Fidelity(b), Fidelity(a)).value();
    if (std::abs(sab - sba) > kTol) {
      fail("swap symmetry broken", a, b);
      break;
    }
    if (sab < 0.25 || sab > 1.0) {
      fail("swap closure broken", a, b);
      break;
    }
    if (std::abs(swap_fidelity(Fidelity(a), Fidelity(1.0)).value() - a) > kTol) {
      fail("swap identity broken", a, 1.0);
      break;
    }
    // Monotone in each argument.
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double c = rng.uniform(0.25, 1.0);
    if (swap_fidelity(Fidelity(lo), Fidelity(c)).value() >
        swap_fidelity(Fidelity(hi), Fidelity(c)).value()) {
      fail("swap monotonicity broken", lo, hi);
      break;
    }

    const double d = distill(a);
    if (d < 0.25 || d > 1.0) {
      fail("distill closure broken", a, d);
      break;
    }
    // Fixed points only at 0.25, 0.5 and 1; strict improvement above 0.5.
    const bool near_fixed =
        std::abs(a - 0.25) < 1e-2 || std::abs(a - 0.5) < 1e-2 || std::abs(a - 1.0) < 1e-2;
    if (!near_fixed && std::abs(d - a) <= kTol) {
      fail("unexpected distillation fixed point", a, d);
      break;
    }
    if (a > 0.5 + 1e-6 && a < 1.0 - 1e-6 && d <= a) {
      fail("distillation does not improve", a, d);
      break;
    }

    // Action ordering when both sides are in the improvement region.
    const double ftx = rng.uniform(0.5 + 1e-6, 1.0 - 1e-6);
    const double frx = rng.uniform(0.5 + 1e-6, 1.0 - 1e-6);
    const Fidelity tx(ftx), rx(frx);
    const double direct = e2e_fidelity(tx, rx, Action{ActionKind::DirectSwap}).value();
    const double tx_only = e2e_fidelity(tx, rx, Action{ActionKind::TxDistillSwap}).value();
    const double rx_only = e2e_fidelity(tx, rx, Action{ActionKind::RxDistillSwap}).value();
    const double both = e2e_fidelity(tx, rx, Action{ActionKind::BothDistillSwap}).value();
    if (!(both >= tx_only - kTol && both >= rx_only - kTol && tx_only >= direct - kTol &&
          rx_only >= direct - kTol)) {
      fail("action fidelity ordering broken", ftx, frx);
      break;
    }
  }

  for (double x : {0.25, 0.5, 1.0}) {
    ++result.checks;
    if (result.passed && std::abs(distill(x) - x) > kTol) {
      result.passed = false;
      result.failure = "distillation fixed point broken at f=" + std::to_string(x);
    }
  }
  return result;
}

SuiteResult check_p1_bruteforce(int instances, std::uint64_t seed) {
  SuiteResult result;
  result.name = "p1-oracle-equivalence";
  InstanceLimits limits;  // <= 4 requests, budgets <= 4, one switch
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const SmallInstance inst = random_small_instance(rng, limits);
    ++result.checks;
    const ActionPlan plan = solve_p1(0, inst.requests, inst.slot);
    const double expected = bruteforce::best_p1_utility(0, inst.requests, inst.slot);
    if (plan.utility != expected || !plan_is_feasible(0, plan, inst.requests, inst.slot)) {
      result.passed = false;
      std::ostringstream out;
      out << describe(inst, i) << " solver=" << plan.utility << " enumeration=" << expected;
      result.failure = out.str();
      break;
    }
  }
  return result;
}

SuiteResult check_optimal_bruteforce(int instances, std::uint64_t seed) {
  SuiteResult result;
  result.name = "optimal-oracle-equivalence";
  InstanceLimits limits;
  limits.max_requests = 6;
  limits.max_budget = 3;
  limits.max_qs = 2;
  for (int i = 0; i < instances; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const SmallInstance inst = random_small_instance(rng, limits);
    ++result.checks;
    OptimalSettings settings;
    settings.time_budget_secs = 600.0;
    const Solution solution = solve_optimal(inst.requests, inst.slot, settings);
    const bruteforce::Best expected = bruteforce::best_assignment(inst.requests, inst.slot);
    if (!solution.optimal_flag || solution.total_utility != expected.utility) {
      result.passed = false;
      std::ostringstream out;
      out << describe(inst, i) << " solver=" << solution.total_utility
          << " enumeration=" << expected.utility << " proven=" << solution.optimal_flag;
      result.failure = out.str();
      break;
    }
  }
  return result;
}

SuiteResult check_rqsa_stability(int trials, std::span<const int> r_values, std::uint64_t seed,
                                 const MatchConfig& config, const ScenarioParams& params) {
  SuiteResult result;
  result.name = "rqsa-swap-stability";
  for (int r_count : r_values) {
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t trial_seed =
          derive_seed(derive_seed(seed, static_cast<std::uint64_t>(r_count)),
                      static_cast<std::uint64_t>(t));
      Rng topo_rng(derive_seed(trial_seed, 1));
      const Topology topology = sample_topology(params, topo_rng);
      Rng slot_rng(derive_seed(trial_seed, 2));
      const SlotState slot = sample_slot(topology, params, slot_rng);
      Rng req_rng(derive_seed(trial_seed, 3));
      const std::vector<Request> requests =
          sample_requests(r_count, topology, params, req_rng);

      ++result.checks;
      MatchingEngine engine(requests, slot, config);
      const RqsaResult run = engine.run();
      const StabilityReport report = engine.check_stable(run.matching);
      if (!report.stable) {
        result.passed = false;
        std::ostringstream out;
        out << "R=" << r_count << " trial=" << t << " seed=" << trial_seed;
        if (report.violation) {
          out << " violating move: request=" << report.violation->request
              << " partner=" << report.violation->partner
              << " from=" << report.violation->from_qs << " to=" << report.violation->to_qs
              << " delta=" << report.violation->delta;
        }
        result.failure = out.str();
        return result;
      }
    }
  }
  return result;
}

}  // namespace qsmatch::selfcheck
