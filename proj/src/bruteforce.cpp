#include "qsmatch/bruteforce.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "qsmatch/fidelity.hpp"
#include "qsmatch/scheduler.hpp"

namespace qsmatch::bruteforce {

namespace {

std::vector<Request> by_id(std::span<const Request> requests) {
  std::vector<Request> sorted(requests.begin(), requests.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Request& a, const Request& b) { return a.id < b.id; });
  return sorted;
}

// Walks every action/drop combination for the masked subset of requests,
// reporting (served, utility) at each leaf. Utility accumulates in
// ascending request-id order.
template <typename Visitor>
void enumerate_actions(int qs, const std::vector<Request>& sorted, const SlotState& slot,
                       unsigned mask, size_t idx, std::vector<int>& tx_left,
                       std::vector<int>& rx_left, int served, double utility,
                       Visitor&& visit) {
  while (idx < sorted.size() && ((mask >> idx) & 1u) == 0) ++idx;
  if (idx == sorted.size()) {
    visit(served, utility);
    return;
  }
  const Request& r = sorted[idx];
  // Drop.
  enumerate_actions(qs, sorted, slot, mask, idx + 1, tx_left, rx_left, served, utility, visit);
  // Each feasible action.
  const Fidelity f_tx(slot.tx_fidelity.at(r.tx, qs));
  const Fidelity f_rx(slot.rx_fidelity.at(qs, r.rx));
  for (ActionKind kind : kActionKinds) {
    const Action action{kind};
    if (action.alpha_tx() > tx_left[r.tx] || action.alpha_rx() > rx_left[r.rx]) continue;
    const double fid = e2e_fidelity(f_tx, f_rx, action).value();
    if (fid < r.min_fidelity) continue;
    tx_left[r.tx] -= action.alpha_tx();
    rx_left[r.rx] -= action.alpha_rx();
    enumerate_actions(qs, sorted, slot, mask, idx + 1, tx_left, rx_left, served + 1,
                      utility + fid, visit);
    tx_left[r.tx] += action.alpha_tx();
    rx_left[r.rx] += action.alpha_rx();
  }
}

Best best_for_subset(int qs, const std::vector<Request>& sorted, const SlotState& slot,
                     unsigned mask, ObjectiveMode objective) {
  std::vector<int> tx_left(slot.num_tx());
  std::vector<int> rx_left(slot.num_rx());
  for (int k = 0; k < slot.num_tx(); ++k) tx_left[k] = slot.tx_count.at(k, qs);
  for (int m = 0; m < slot.num_rx(); ++m) rx_left[m] = slot.rx_count.at(qs, m);

  Best best;  // the all-drop leaf gives (0, 0)
  bool first = true;
  enumerate_actions(qs, sorted, slot, mask, 0, tx_left, rx_left, 0, 0.0,
                    [&](int served, double utility) {
                      bool better;
                      if (objective == ObjectiveMode::FidelitySum) {
                        better = first || utility > best.utility;
                      } else {
                        better = first || served > best.served ||
                                 (served == best.served && utility > best.utility);
                      }
                      if (better) best = {served, utility};
                      first = false;
                    });
  return best;
}

}  // namespace

double best_p1_utility(int qs, std::span<const Request> requests, const SlotState& slot) {
  if (requests.size() > 20) throw std::invalid_argument("instance too large for enumeration");
  const std::vector<Request> sorted = by_id(requests);
  const unsigned full = requests.empty() ? 0u : (1u << requests.size()) - 1u;
  return best_for_subset(qs, sorted, slot, full, ObjectiveMode::FidelitySum).utility;
}

Best best_assignment(std::span<const Request> requests, const SlotState& slot,
                     ObjectiveMode objective) {
  const size_t n = requests.size();
  if (n > 12) throw std::invalid_argument("instance too large for enumeration");
  const std::vector<Request> sorted = by_id(requests);
  const int num_qs = slot.num_qs();

  // Per-switch best over every subset, then a scan of all (Q+1)^R
  // assignments summing the per-switch table entries.
  std::vector<std::vector<Best>> table(num_qs);
  for (int q = 0; q < num_qs; ++q) {
    table[q].resize(1u << n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      table[q][mask] = best_for_subset(q, sorted, slot, mask, objective);
    }
  }

  Best best;
  bool first = true;
  std::vector<int> assign(n, 0);  // 0 = dropped, 1..Q = switch index + 1
  while (true) {
    std::vector<unsigned> masks(num_qs, 0u);
    for (size_t i = 0; i < n; ++i) {
      if (assign[i] > 0) masks[assign[i] - 1] |= 1u << i;
    }
    int served = 0;
    double utility = 0.0;
    for (int q = 0; q < num_qs; ++q) {
      served += table[q][masks[q]].served;
      utility += table[q][masks[q]].utility;
    }
    bool better;
    if (objective == ObjectiveMode::FidelitySum) {
      better = first || utility > best.utility;
    } else {
      better = first || served > best.served ||
               (served == best.served && utility > best.utility);
    }
    if (better) best = {served, utility};
    first = false;

    size_t pos = 0;
    while (pos < n && assign[pos] == num_qs) assign[pos++] = 0;
    if (pos == n) break;
    ++assign[pos];
  }
  return best;
}

}  // namespace qsmatch::bruteforce
