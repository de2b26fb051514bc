#pragma once

#include <span>

#include "qsmatch/matching.hpp"
#include "qsmatch/model.hpp"
#include "qsmatch/rng.hpp"
#include "qsmatch/scheduler.hpp"

namespace qsmatch {

// Objective for the exact baseline. FidelitySum maximizes the summed
// served fidelity; CountThenFidelity maximizes served count first and
// breaks ties by fidelity (sensitivity mode).
enum class ObjectiveMode { FidelitySum, CountThenFidelity };

struct OptimalSettings {
  double time_budget_secs = 60.0;
  ObjectiveMode objective = ObjectiveMode::FidelitySum;
};

// One algorithm's full answer on one instance.
struct Solution {
  Matching matching;
  std::vector<ActionPlan> plans;  // indexed by switch
  double total_utility = 0.0;     // sum of plan utilities, ascending switch index
  int served_count = 0;
  bool optimal_flag = false;  // proven optimal within the search budget
  double bound_gap = 0.0;     // remaining bound minus incumbent when the budget ran out
};

// Per-switch exact action selection on top of a fixed association.
Solution make_solution(const Matching& matching, std::span<const Request> requests,
                       const SlotState& slot, P1Cache* cache = nullptr);

// Exact search over joint (request -> switch-or-drop, action) assignments
// under every link budget. Single-threaded depth-first branch and bound;
// deterministic whenever the search completes. On budget exhaustion the
// best incumbent is returned with optimal_flag = false and the residual
// gap in `bound_gap`.
Solution solve_optimal(std::span<const Request> requests, const SlotState& slot,
                       const OptimalSettings& settings = {});

// Greedy association (highest worst-case fidelity with spillover) followed
// by per-switch exact action selection. No swap phase.
Solution solve_greedy(std::span<const Request> requests, const SlotState& slot);

// Uniformly random association with no capacity pre-check, then per-switch
// exact action selection serves what it can.
Solution solve_random(std::span<const Request> requests, const SlotState& slot, Rng& rng);

// RQSA wrapped as a Solution; swap log returned alongside.
struct RqsaSolution {
  Solution solution;
  std::vector<SwapRecord> swaps;
};
RqsaSolution solve_rqsa(std::span<const Request> requests, const SlotState& slot,
                        const MatchConfig& config);

}  // namespace qsmatch
