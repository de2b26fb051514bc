#include "qsmatch/matching.hpp"

#include <gtest/gtest.h>

#include "qsmatch/rng.hpp"
#include "test_util.hpp"

namespace qsmatch {
namespace {

using testutil::default_instance;
using testutil::uniform_slot;

// Two switches whose receive-side fidelities are crossed: switch 1 is
// better for rx 0 and switch 0 is better for rx 1.
SlotState crossed_slot() {
  SlotState slot = uniform_slot(1, 2, 2, 2, 0.9);
  slot.rx_fidelity.at(0, 0) = 0.85;
  slot.rx_fidelity.at(0, 1) = 0.95;
  slot.rx_fidelity.at(1, 0) = 0.95;
  slot.rx_fidelity.at(1, 1) = 0.85;
  return slot;
}

TEST(MatchingType, AssignMoveUnassign) {
  Matching m(3);
  m.assign(5, 1);
  m.assign(2, 1);
  EXPECT_EQ(m.qs_of(5), 1);
  EXPECT_EQ(m.requests_of(1), (std::vector<int>{2, 5}));
  m.assign(5, 2);  // move
  EXPECT_EQ(m.requests_of(1), (std::vector<int>{2}));
  EXPECT_EQ(m.requests_of(2), (std::vector<int>{5}));
  m.unassign(5);
  EXPECT_FALSE(m.qs_of(5).has_value());
  EXPECT_EQ(m.matched_count(), 1);
  EXPECT_THROW(m.assign(1, 3), std::out_of_range);
}

TEST(Matching, RequestUtilityIsDirectSwapFidelity) {
  SlotState slot = uniform_slot(1, 1, 1, 4, 0.9);
  slot.tx_fidelity.at(0, 0) = 0.9;
  slot.rx_fidelity.at(0, 0) = 0.8;
  const Request r{0, 0, 0, 0.5};
  EXPECT_NEAR(request_utility(r, 0, slot), 0.726666666667, 1e-6);
  EXPECT_DOUBLE_EQ(request_utility(r, 0, slot),
                   e2e_fidelity(Fidelity(0.9), Fidelity(0.8), Action{}).value());
  slot.tx_fidelity.at(0, 0) = 1.0;
  slot.rx_fidelity.at(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(request_utility(r, 0, slot), 1.0);
}

TEST(Matching, PrefersQsTotalOrder) {
  SlotState slot = uniform_slot(1, 3, 1, 2, 0.9);
  slot.rx_fidelity.at(0, 0) = 0.95;
  slot.rx_fidelity.at(1, 0) = 0.85;
  slot.rx_fidelity.at(2, 0) = 0.85;  // ties with switch 1
  const Request r{0, 0, 0, 0.5};
  EXPECT_EQ(prefers_qs(r, 0, 1, slot), std::strong_ordering::greater);
  EXPECT_EQ(prefers_qs(r, 1, 0, slot), std::strong_ordering::less);
  // Equal utilities: the lower index wins.
  EXPECT_EQ(prefers_qs(r, 1, 2, slot), std::strong_ordering::greater);
  EXPECT_EQ(prefers_qs(r, 2, 1, slot), std::strong_ordering::less);
  EXPECT_EQ(prefers_qs(r, 1, 1, slot), std::strong_ordering::equal);
}

TEST(Matching, PrefersQsAntisymmetryProperty) {
  std::vector<Request> requests;
  const SlotState slot = default_instance(404, 20, &requests);
  for (const Request& r : requests) {
    for (int a = 0; a < slot.num_qs(); ++a) {
      for (int b = 0; b < slot.num_qs(); ++b) {
        const auto ab = prefers_qs(r, a, b, slot);
        const auto ba = prefers_qs(r, b, a, slot);
        if (ab == std::strong_ordering::greater) {
          ASSERT_EQ(ba, std::strong_ordering::less);
        }
        if (ab == std::strong_ordering::equal) {
          ASSERT_EQ(a, b);
        }
      }
    }
  }
}

TEST(Matching, GreedySingleSwitchTakesEveryone) {
  SlotState slot = uniform_slot(2, 1, 2, 10, 0.9);
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 1, 1, 0.5}, {2, 0, 1, 0.5}};
  const Matching m = init_greedy(requests, slot);
  EXPECT_EQ(m.requests_of(0), (std::vector<int>{0, 1, 2}));
}

TEST(Matching, GreedyPicksArgmaxUtility) {
  SlotState slot = crossed_slot();
  const std::vector<Request> requests = {{0, 0, 0, 0.5}};
  const Matching m = init_greedy(requests, slot);
  EXPECT_EQ(m.qs_of(0), 1);  // rx 0 is served best by switch 1
}

TEST(Matching, GreedySpillsToNextBestWhenFull) {
  // Both requests share the only Tx node and prefer switch 0; one direct
  // pair per tx link pushes the second request to switch 1.
  SlotState slot = uniform_slot(1, 2, 2, 2, 0.9);
  slot.rx_fidelity.at(0, 0) = 0.95;
  slot.rx_fidelity.at(0, 1) = 0.95;
  slot.rx_fidelity.at(1, 0) = 0.85;
  slot.rx_fidelity.at(1, 1) = 0.85;
  slot.tx_count.at(0, 0) = 1;
  slot.tx_count.at(0, 1) = 1;
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}};
  const Matching m = init_greedy(requests, slot);
  EXPECT_EQ(m.qs_of(0), 0);
  EXPECT_EQ(m.qs_of(1), 1);
}

TEST(Matching, GreedyLeavesRequestUnmatchedWhenEverythingIsFull) {
  SlotState slot = uniform_slot(1, 2, 1, 1, 0.9);
  slot.tx_count.at(0, 0) = 1;
  slot.tx_count.at(0, 1) = 0;
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 0, 0.5}};
  const Matching m = init_greedy(requests, slot);
  EXPECT_TRUE(m.qs_of(0).has_value());
  EXPECT_FALSE(m.qs_of(1).has_value());
}

TEST(Matching, SwapPhaseFixesCrossedAssignment) {
  const SlotState slot = crossed_slot();
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}};
  Matching crossed(2);
  crossed.assign(0, 0);  // each request sits at the switch the other wants
  crossed.assign(1, 1);

  const auto [fixed, log] = find_and_apply_swaps(crossed, requests, slot, MatchConfig{});
  ASSERT_EQ(log.size(), 1u);
  EXPECT_EQ(log[0].request, 0);
  EXPECT_EQ(log[0].partner, 1);
  EXPECT_EQ(log[0].from_qs, 0);
  EXPECT_EQ(log[0].to_qs, 1);
  EXPECT_GT(log[0].delta, 0.0);
  EXPECT_EQ(fixed.qs_of(0), 1);
  EXPECT_EQ(fixed.qs_of(1), 0);
}

TEST(Matching, SwapPhaseFixesCrossedAssignmentInStrictAllMode) {
  const SlotState slot = crossed_slot();
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}};
  Matching crossed(2);
  crossed.assign(0, 0);
  crossed.assign(1, 1);
  MatchConfig literal;
  literal.allow_relocation = false;
  literal.strict_all = true;
  const auto [fixed, log] = find_and_apply_swaps(crossed, requests, slot, literal);
  EXPECT_EQ(log.size(), 1u);
  EXPECT_EQ(fixed.qs_of(0), 1);
}

TEST(Matching, StableInputStaysUntouched) {
  const SlotState slot = crossed_slot();
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}};
  Matching aligned(2);
  aligned.assign(0, 1);
  aligned.assign(1, 0);
  const auto [result, log] = find_and_apply_swaps(aligned, requests, slot, MatchConfig{});
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(result, aligned);
}

TEST(Matching, UnmatchedRequestRelocatesWhenTheSwitchGains) {
  // Three requests, one direct pair of tx budget per switch. Greedy leaves
  // request 2 unmatched; a relocation then lets switch 1 replace its
  // weaker association.
  SlotState slot = uniform_slot(1, 2, 2, 2, 0.9);
  slot.tx_count.at(0, 0) = 1;
  slot.tx_count.at(0, 1) = 1;
  slot.rx_fidelity.at(0, 0) = 0.95;
  slot.rx_fidelity.at(0, 1) = 0.85;
  slot.rx_fidelity.at(1, 0) = 0.95;
  slot.rx_fidelity.at(1, 1) = 0.85;
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}, {2, 0, 0, 0.5}};

  MatchingEngine engine(requests, slot, MatchConfig{});
  const RqsaResult result = engine.run();

  ASSERT_EQ(result.swaps.size(), 1u);
  EXPECT_EQ(result.swaps[0].request, 2);
  EXPECT_EQ(result.swaps[0].partner, SwapRecord::kVacancy);
  EXPECT_EQ(result.swaps[0].from_qs, SwapRecord::kUnmatched);
  EXPECT_EQ(result.swaps[0].to_qs, 1);
  EXPECT_GT(result.swaps[0].delta, 0.0);
  EXPECT_EQ(result.matching.qs_of(2), 1);
  EXPECT_TRUE(engine.check_stable(result.matching).stable);
}

TEST(Matching, LiteralModeHasNoRelocations) {
  SlotState slot = uniform_slot(1, 2, 2, 2, 0.9);
  slot.tx_count.at(0, 0) = 1;
  slot.tx_count.at(0, 1) = 1;
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}, {2, 0, 0, 0.5}};
  MatchConfig literal;
  literal.allow_relocation = false;
  literal.strict_all = true;
  MatchingEngine engine(requests, slot, literal);
  const RqsaResult result = engine.run();
  for (const SwapRecord& rec : result.swaps) {
    EXPECT_NE(rec.partner, SwapRecord::kVacancy);
  }
  EXPECT_TRUE(engine.check_stable(result.matching).stable);
}

TEST(Matching, RqsaEmptyRequestSet) {
  const SlotState slot = uniform_slot(2, 2, 2, 3, 0.9);
  const RqsaResult result = rqsa({}, slot, MatchConfig{});
  EXPECT_EQ(result.served_count(), 0);
  EXPECT_DOUBLE_EQ(result.total_utility(), 0.0);
  EXPECT_TRUE(result.swaps.empty());
}

TEST(Matching, SingleSwitchRqsaEqualsDirectScheduling) {
  for (int i = 0; i < 20; ++i) {
    ScenarioParams params;
    params.num_qs = 1;
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(606, i), 12, &requests, params);
    const RqsaResult result = rqsa(requests, slot, MatchConfig{});
    EXPECT_DOUBLE_EQ(result.total_utility(), qs_utility(0, requests, slot));
  }
}

TEST(Matching, EveryApprovedSwapRaisesTotalUtility) {
  for (int i = 0; i < 15; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(707, i), 25, &requests);
    MatchingEngine engine(requests, slot, MatchConfig{});
    Matching m = engine.greedy();
    double phi = 0.0;
    for (int q = 0; q < slot.num_qs(); ++q) phi += engine.set_utility(q, m.requests_of(q));
    const auto log = engine.improve(m);
    double phi_after = 0.0;
    for (int q = 0; q < slot.num_qs(); ++q) {
      phi_after += engine.set_utility(q, m.requests_of(q));
    }
    double delta_sum = 0.0;
    for (const SwapRecord& rec : log) {
      ASSERT_GT(rec.delta, 0.0);
      delta_sum += rec.delta;
    }
    EXPECT_NEAR(phi_after, phi + delta_sum, 1e-9);
  }
}

TEST(Matching, RqsaOutputIsSwapStable) {
  for (int i = 0; i < 25; ++i) {
    std::vector<Request> requests;
    const SlotState slot = default_instance(derive_seed(808, i), 20, &requests);
    MatchingEngine engine(requests, slot, MatchConfig{});
    const RqsaResult result = engine.run();
    EXPECT_TRUE(engine.check_stable(result.matching).stable) << "trial " << i;
  }
}

TEST(Matching, StabilityOracleFindsPlantedWitness) {
  const SlotState slot = crossed_slot();
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {1, 0, 1, 0.5}};
  Matching crossed(2);
  crossed.assign(0, 0);
  crossed.assign(1, 1);
  const StabilityReport report = is_swap_stable(crossed, requests, slot, MatchConfig{});
  ASSERT_FALSE(report.stable);
  ASSERT_TRUE(report.violation.has_value());
  EXPECT_EQ(report.violation->request, 0);
  EXPECT_EQ(report.violation->partner, 1);
  EXPECT_GT(report.violation->delta, 0.0);
}

TEST(Matching, EmptyMatchingIsStable) {
  const SlotState slot = uniform_slot(1, 1, 1, 2, 0.9);
  EXPECT_TRUE(is_swap_stable(Matching(1), {}, slot, MatchConfig{}).stable);
}

TEST(Matching, DeterministicSwapLog) {
  std::vector<Request> requests;
  const SlotState slot = default_instance(909, 30, &requests);
  const RqsaResult a = rqsa(requests, slot, MatchConfig{});
  const RqsaResult b = rqsa(requests, slot, MatchConfig{});
  ASSERT_EQ(a.swaps.size(), b.swaps.size());
  for (size_t i = 0; i < a.swaps.size(); ++i) {
    EXPECT_EQ(a.swaps[i].request, b.swaps[i].request);
    EXPECT_EQ(a.swaps[i].partner, b.swaps[i].partner);
    EXPECT_EQ(a.swaps[i].from_qs, b.swaps[i].from_qs);
    EXPECT_EQ(a.swaps[i].to_qs, b.swaps[i].to_qs);
    EXPECT_EQ(a.swaps[i].delta, b.swaps[i].delta);
  }
  EXPECT_EQ(a.matching, b.matching);
  EXPECT_DOUBLE_EQ(a.total_utility(), b.total_utility());
}

TEST(Matching, DuplicateRequestIdsRejected) {
  const SlotState slot = uniform_slot(1, 1, 1, 2, 0.9);
  const std::vector<Request> requests = {{0, 0, 0, 0.5}, {0, 0, 0, 0.6}};
  EXPECT_THROW(MatchingEngine(requests, slot, MatchConfig{}), std::invalid_argument);
}

}  // namespace
}  // namespace qsmatch
