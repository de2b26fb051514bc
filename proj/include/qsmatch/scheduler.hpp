#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "qsmatch/fidelity.hpp"
#include "qsmatch/model.hpp"

namespace qsmatch {

struct ActionChoice {
  Action action;
  double fidelity = 0.0;  // end-to-end fidelity this action achieves
};

// Per-switch action schedule for an associated request set. `choices`
// holds the served requests only; anything absent was dropped. `utility`
// is the sum of served fidelities, accumulated in ascending request-id
// order so equal plans produce bit-identical values everywhere.
struct ActionPlan {
  std::map<int, ActionChoice> choices;
  double utility = 0.0;

  int served_count() const { return static_cast<int>(choices.size()); }
};

// The actions that can serve `request` at switch `qs` on their own: the
// end-to-end fidelity meets the request's floor and the pair cost fits the
// link budgets. Sorted by fidelity descending, then action index.
// An empty result means the request is unservable at this switch.
std::vector<ActionChoice> feasible_actions(int qs, const Request& request,
                                           const SlotState& slot);

// Memo for per-switch subproblem results, keyed on (switch, request-id
// set). The solver decomposes a request set into link-sharing components,
// so a cache entry is one solved component; sets differing by a single
// request reuse every untouched component. A cache must only ever see one
// slot's worth of calls (it does not key on the slot contents).
class P1Cache {
 public:
  struct Served {
    int id;
    Action action;
    double fidelity;
  };
  using ComponentResult = std::vector<Served>;

  const ComponentResult* find(int qs, const std::vector<int>& ids) const;
  void insert(int qs, std::vector<int> ids, ComponentResult result);
  std::size_t size() const { return map_.size(); }

  // Memoized feasible_actions; keyed by (switch, request id) like the
  // component results, so the same single-instance rule applies.
  const std::vector<ActionChoice>& options(int qs, const Request& request,
                                           const SlotState& slot);

 private:
  struct Key {
    int qs;
    std::vector<int> ids;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  struct OptionKey {
    int qs;
    int id;
    bool operator==(const OptionKey&) const = default;
  };
  struct OptionKeyHash {
    std::size_t operator()(const OptionKey& k) const;
  };
  std::unordered_map<Key, ComponentResult, KeyHash> map_;
  std::unordered_map<OptionKey, std::vector<ActionChoice>, OptionKeyHash> options_;
};

// Exact action selection for one switch: maximize the summed end-to-end
// fidelity of served requests subject to the per-link pair budgets, with
// dropping always allowed (worth 0). Depth-first branch and bound over
// per-request action choices; the empty plan is always feasible, so this
// never fails. Deterministic for fixed inputs.
ActionPlan solve_p1(int qs, std::span<const Request> requests, const SlotState& slot,
                    P1Cache* cache = nullptr);

// solve_p1(...).utility; 0 for the empty set.
double qs_utility(int qs, std::span<const Request> requests, const SlotState& slot,
                  P1Cache* cache = nullptr);

// Checks the plan invariants: every served request meets its fidelity
// floor and the summed pair consumption fits every link budget.
bool plan_is_feasible(int qs, const ActionPlan& plan, std::span<const Request> requests,
                      const SlotState& slot);

}  // namespace qsmatch
