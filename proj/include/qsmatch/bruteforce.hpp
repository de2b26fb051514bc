#pragma once

#include <span>

#include "qsmatch/baselines.hpp"
#include "qsmatch/model.hpp"

// Exhaustive reference solvers. Deliberately simple enumeration with no
// pruning: these exist to check the branch-and-bound paths, so they share
// nothing with them beyond the fidelity formulas and the canonical
// ascending-id summation order. Exponential; keep instances tiny.
namespace qsmatch::bruteforce {

struct Best {
  int served = 0;
  double utility = 0.0;
};

// Maximum summed served fidelity for one switch over all action/drop
// combinations that fit the link budgets.
double best_p1_utility(int qs, std::span<const Request> requests, const SlotState& slot);

// Maximum over every (switch-or-drop) assignment with exhaustive
// per-switch action selection. FidelitySum maximizes utility;
// CountThenFidelity maximizes served count, then utility.
Best best_assignment(std::span<const Request> requests, const SlotState& slot,
                     ObjectiveMode objective = ObjectiveMode::FidelitySum);

}  // namespace qsmatch::bruteforce
