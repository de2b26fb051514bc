#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "qsmatch/model.hpp"
#include "qsmatch/scheduler.hpp"

namespace qsmatch {

struct MatchConfig {
  // Allow single-request relocation moves (a swap against a virtual empty
  // partner). Without them a request can never move to an under-loaded
  // switch, so greedy capacity spillovers are permanent.
  bool allow_relocation = true;
  // Require every real participant to strictly prefer the swap (the
  // all-strict rule) instead of weak-for-all plus a strict total-utility
  // improvement.
  bool strict_all = false;
  // Safety cap on full scan passes; convergence normally needs far fewer.
  int max_passes = 10000;
};

// Many-to-one association of requests to switches. Each request is matched
// to at most one switch; unmatched requests are discarded in this slot.
class Matching {
 public:
  Matching() = default;
  explicit Matching(int num_qs) : by_qs_(num_qs) {}

  int num_qs() const { return static_cast<int>(by_qs_.size()); }
  std::optional<int> qs_of(int request_id) const;
  const std::vector<int>& requests_of(int qs) const { return by_qs_.at(qs); }
  int matched_count() const { return static_cast<int>(by_request_.size()); }

  void assign(int request_id, int qs);  // moves the request if already matched
  void unassign(int request_id);

  bool operator==(const Matching&) const = default;

 private:
  std::map<int, int> by_request_;
  std::vector<std::vector<int>> by_qs_;  // ascending request ids
};

// One approved move of the swap phase. Pairwise swaps exchange the
// switches of `request` and `partner`; relocations move `request` alone
// (partner == kVacancy). `delta` is the total switch-utility improvement
// and is strictly positive for every approved move.
struct SwapRecord {
  static constexpr int kVacancy = -1;
  static constexpr int kUnmatched = -1;

  int request = 0;
  int partner = kVacancy;
  int from_qs = kUnmatched;
  int to_qs = 0;
  double delta = 0.0;
};

struct RqsaResult {
  Matching matching;
  std::vector<ActionPlan> plans;  // indexed by switch
  std::vector<SwapRecord> swaps;

  double total_utility() const;
  int served_count() const;
};

struct StabilityReport {
  bool stable = true;
  std::optional<SwapRecord> violation;
};

// Worst-case utility a request gets from a switch: the direct-swap
// fidelity, independent of the action the switch will actually pick.
double request_utility(const Request& request, int qs, const SlotState& slot);

// Total preference order of a request over switches: higher worst-case
// fidelity wins, ties go to the lower switch index. `greater` means the
// first switch is preferred.
std::strong_ordering prefers_qs(const Request& request, int q, int q_prime,
                                const SlotState& slot);

// Matching game driver. Owns the subproblem memo, so one engine instance
// amortizes switch-utility evaluations across the greedy phase, the swap
// phase and any stability checks on the same instance. Not thread-safe;
// use one engine per instance per thread.
class MatchingEngine {
 public:
  MatchingEngine(std::span<const Request> requests, const SlotState& slot, MatchConfig config);

  // Phase 1: requests in ascending id order grab their most preferred
  // switch that still has a direct-swap pair budget left, spilling to the
  // next-best switch otherwise; left unmatched when none fits.
  Matching greedy() const;

  // Phase 2: repeated full scans; each request tries strictly preferred
  // switches, pairwise-swapping with a partner that shares its Tx or Rx
  // node, or relocating when allowed. Runs until a full pass applies no
  // move. Returns the move log.
  std::vector<SwapRecord> improve(Matching& matching);

  // Phases 1-3: greedy, swap phase, then one exact action-selection solve
  // per switch.
  RqsaResult run();

  // Exhaustive re-scan of every move the swap phase could make; returns
  // the first beneficial move as a witness if one exists.
  StabilityReport check_stable(const Matching& matching);

  // Optimal utility of a switch for a request-id set (memoized).
  double set_utility(int qs, const std::vector<int>& ids);

  const SlotState& slot() const { return slot_; }
  P1Cache& cache() { return cache_; }

 private:
  const Request& by_id(int id) const;
  double util(const Request& r, int qs) const { return util_.at(idx_of(r.id), qs); }
  int idx_of(int id) const;
  std::optional<SwapRecord> first_beneficial(const Matching& m, const Request& r);
  std::optional<SwapRecord> try_pairwise(const Matching& m, const Request& r, int q,
                                         const Request& partner, int q_prime);
  std::optional<SwapRecord> try_relocation(const Matching& m, const Request& r,
                                           std::optional<int> q, int q_prime);
  void apply(Matching& m, const SwapRecord& rec) const;

  std::vector<Request> requests_;  // ascending id
  const SlotState& slot_;
  MatchConfig cfg_;
  Grid<double> util_;  // request position x switch -> worst-case fidelity
  P1Cache cache_;
};

// Convenience wrappers matching the algorithm's three entry points; each
// builds a fresh engine (and memo) per call.
Matching init_greedy(std::span<const Request> requests, const SlotState& slot);
std::pair<Matching, std::vector<SwapRecord>> find_and_apply_swaps(
    const Matching& matching, std::span<const Request> requests, const SlotState& slot,
    const MatchConfig& config);
RqsaResult rqsa(std::span<const Request> requests, const SlotState& slot,
                const MatchConfig& config);
StabilityReport is_swap_stable(const Matching& matching, std::span<const Request> requests,
                               const SlotState& slot, const MatchConfig& config);

}  // namespace qsmatch
