#include "qsmatch/baselines.hpp"

#include <gtest/gtest.h>

#include "qsmatch/bruteforce.hpp"
#include "qsmatch/selfcheck.hpp"
#include "test_util.hpp"

namespace qsmatch {
namespace {

using testutil::default_instance;
using testutil::uniform_slot;

// One tx node, tight budgets: request 1 needs switch 0's quality but
// greedy lets request 0 claim switch 0's only tx pair first.
struct ConflictInstance {
  SlotState slot;
  std::vector<Request> requests;
};

ConflictInstance capacity_conflict() {
  ConflictInstance inst;
  inst.slot = uniform_slot(1, 2, 2, 2, 0.9);
  inst.slot.tx_fidelity.at(0, 0) = 0.95;
  inst.slot.tx_fidelity.at(0, 1) = 0.9;
  inst.slot.rx_fidelity.at(0, 0) = 0.95;
  inst.slot.rx_fidelity.at(0, 1) = 0.95;
  inst.slot.rx_fidelity.at(1, 0) = 0.9;
  inst.slot.rx_fidelity.at(1, 1) = 0.9;
  inst.slot.tx_count.at(0, 0) = 1;
  inst.slot.tx_count.at(0, 1) = 1;
  inst.requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.85}};
  return inst;
}

TEST(Baselines, OptimalEmptySet) {
  const SlotState slot = uniform_slot(2, 2, 2, 3, 0.9);
  const Solution s = solve_optimal({}, slot);
  EXPECT_DOUBLE_EQ(s.total_utility, 0.0);
  EXPECT_EQ(s.served_count, 0);
  EXPECT_TRUE(s.optimal_flag);
  EXPECT_DOUBLE_EQ(s.bound_gap, 0.0);
}

TEST(Baselines, OptimalSingleSwitchEqualsScheduler) {
  for (int i = 0; i < 20; ++i) {
    ScenarioParams params;
    params.num_qs = 1;
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(111, i), 10, &requests, params);
    const Solution s = solve_optimal(requests, slot);
    ASSERT_TRUE(s.optimal_flag);
    EXPECT_DOUBLE_EQ(s.total_utility, qs_utility(0, requests, slot));
  }
}

TEST(Baselines, OptimalMatchesEnumerationOnRandomInstances) {
  selfcheck::InstanceLimits limits;
  limits.max_requests = 6;
  limits.max_budget = 3;
  limits.max_qs = 2;
  for (int i = 0; i < 80; ++i) {
    Rng rng(derive_seed(222, i));
    const auto inst = selfcheck::random_small_instance(rng, limits);
    const Solution s = solve_optimal(inst.requests, inst.slot);
    const auto expected = bruteforce::best_assignment(inst.requests, inst.slot);
    ASSERT_TRUE(s.optimal_flag);
    ASSERT_EQ(s.total_utility, expected.utility) << "instance " << i;
  }
}

TEST(Baselines, CountObjectiveMatchesLexicographicEnumeration) {
  selfcheck::InstanceLimits limits;
  limits.max_requests = 5;
  limits.max_budget = 3;
  limits.max_qs = 2;
  OptimalSettings count_mode;
  count_mode.objective = ObjectiveMode::CountThenFidelity;
  for (int i = 0; i < 60; ++i) {
    Rng rng(derive_seed(333, i));
    const auto inst = selfcheck::random_small_instance(rng, limits);
    const Solution by_count = solve_optimal(inst.requests, inst.slot, count_mode);
    const Solution by_fidelity = solve_optimal(inst.requests, inst.slot);
    const auto expected =
        bruteforce::best_assignment(inst.requests, inst.slot, ObjectiveMode::CountThenFidelity);
    ASSERT_TRUE(by_count.optimal_flag);
    ASSERT_EQ(by_count.served_count, expected.served) << "instance " << i;
    ASSERT_EQ(by_count.total_utility, expected.utility) << "instance " << i;
    // Count-first never serves fewer requests and never more total
    // fidelity than the fidelity-first optimum.
    ASSERT_GE(by_count.served_count, by_fidelity.served_count);
    ASSERT_LE(by_count.total_utility, by_fidelity.total_utility);
  }
}

TEST(Baselines, GreedySingleSwitchMatchesOptimalWhenEveryoneFits) {
  // With one switch the association is forced, so greedy equals the exact
  // solver whenever its direct-pair tally admitted every request. When the
  // tally binds, greedy can only lose (its unmatched requests are out of
  // the scheduler's reach).
  int equality_cases = 0;
  for (int i = 0; i < 20; ++i) {
    ScenarioParams params;
    params.num_qs = 1;
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(444, i), 8, &requests, params);
    const Solution greedy = solve_greedy(requests, slot);
    const Solution optimal = solve_optimal(requests, slot);
    ASSERT_TRUE(optimal.optimal_flag);
    ASSERT_LE(greedy.total_utility, optimal.total_utility);
    if (greedy.matching.matched_count() == static_cast<int>(requests.size())) {
      EXPECT_DOUBLE_EQ(greedy.total_utility, optimal.total_utility);
      ++equality_cases;
    }
  }
  EXPECT_GT(equality_cases, 0);
}

TEST(Baselines, GreedyStrictlyBelowOptimalOnConflictInstance) {
  const ConflictInstance inst = capacity_conflict();
  const Solution greedy = solve_greedy(inst.requests, inst.slot);
  const Solution optimal = solve_optimal(inst.requests, inst.slot);
  ASSERT_TRUE(optimal.optimal_flag);
  EXPECT_EQ(greedy.served_count, 1);
  EXPECT_EQ(optimal.served_count, 2);
  EXPECT_LT(greedy.total_utility, optimal.total_utility);
}

TEST(Baselines, DominanceChainOnRandomTrials) {
  for (int i = 0; i < 20; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(555, i), 12, &requests);
    const Solution optimal = solve_optimal(requests, slot);
    const RqsaSolution rqsa_run = solve_rqsa(requests, slot, MatchConfig{});
    const Solution greedy = solve_greedy(requests, slot);
    ASSERT_TRUE(optimal.optimal_flag);
    EXPECT_GE(optimal.total_utility, rqsa_run.solution.total_utility - 1e-12);
    EXPECT_GE(rqsa_run.solution.total_utility, greedy.total_utility - 1e-12);
  }
}

TEST(Baselines, SolutionsAreCapacityFeasible) {
  for (int i = 0; i < 20; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(666, i), 15, &requests);
    for (const Solution& s : {solve_greedy(requests, slot), solve_optimal(requests, slot)}) {
      ASSERT_EQ(static_cast<int>(s.plans.size()), slot.num_qs());
      int served = 0;
      double utility = 0.0;
      for (int q = 0; q < slot.num_qs(); ++q) {
        ASSERT_TRUE(plan_is_feasible(q, s.plans[q], requests, slot));
        served += s.plans[q].served_count();
        utility += s.plans[q].utility;
      }
      EXPECT_EQ(served, s.served_count);
      EXPECT_DOUBLE_EQ(utility, s.total_utility);
    }
  }
}

TEST(Baselines, RandomDeterministicUnderSeedAndSingleSwitchIsOptimal) {
  std::vector<Request> requests;
  ScenarioParams params;
  params.num_qs = 1;
  const SlotState slot = default_instance(777, 10, &requests, params);
  Rng r1(42), r2(42);
  const Solution a = solve_random(requests, slot, r1);
  const Solution b = solve_random(requests, slot, r2);
  EXPECT_DOUBLE_EQ(a.total_utility, b.total_utility);
  EXPECT_EQ(a.matching, b.matching);
  // One switch leaves random no choice: everything lands on switch 0 and
  // the scheduler sees the full request set, which is exactly the optimum.
  const Solution optimal = solve_optimal(requests, slot);
  ASSERT_TRUE(optimal.optimal_flag);
  EXPECT_DOUBLE_EQ(a.total_utility, optimal.total_utility);
}

TEST(Baselines, RandomHasNoCapacityPrecheck) {
  // A random association can overload a switch; the plans still have to
  // be feasible because scheduling drops the overflow.
  for (int i = 0; i < 10; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(888, i), 20, &requests);
    Rng rng(derive_seed(999, i));
    const Solution s = solve_random(requests, slot, rng);
    for (int q = 0; q < slot.num_qs(); ++q) {
      ASSERT_TRUE(plan_is_feasible(q, s.plans[q], requests, slot));
    }
    EXPECT_EQ(s.matching.matched_count(), 20);
  }
}

TEST(Baselines, RandomMeanBelowGreedyMean) {
  double random_sum = 0.0;
  double greedy_sum = 0.0;
  const int trials = 60;
  for (int i = 0; i < trials; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(1010, i), 20, &requests);
    Rng rng(derive_seed(2020, i));
    random_sum += solve_random(requests, slot, rng).total_utility;
    greedy_sum += solve_greedy(requests, slot).total_utility;
  }
  EXPECT_LE(random_sum / trials, greedy_sum / trials);
}

TEST(Baselines, OptimalBudgetExhaustionIsSignaledNotThrown) {
  std::vector<Request> requests;
  const SlotState slot = default_instance(3030, 40, &requests);
  OptimalSettings settings;
  settings.time_budget_secs = 0.0;  // expire immediately
  const Solution s = solve_optimal(requests, slot, settings);
  EXPECT_FALSE(s.optimal_flag);
  EXPECT_GT(s.bound_gap, 0.0);
  for (int q = 0; q < slot.num_qs(); ++q) {
    ASSERT_TRUE(plan_is_feasible(q, s.plans[q], requests, slot));
  }
}

}  // namespace
}  // namespace qsmatch
