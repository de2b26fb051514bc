#include "qsmatch/baselines.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <numeric>

namespace qsmatch {

namespace {

using Clock = std::chrono::steady_clock;

struct JointOption {
  int qs;
  Action action;
  double fidelity;
};

struct JointItem {
  const Request* req = nullptr;
  std::vector<JointOption> options;  // fidelity descending, then switch, then action
  double best = 0.0;
};

bool same_demand(const Request& a, const Request& b) {
  return a.tx == b.tx && a.rx == b.rx && a.min_fidelity == b.min_fidelity;
}

// Joint branch-and-bound over the request order fixed at construction.
// The per-item bound is the best fidelity over all switches and actions;
// a residual-capacity pass tightens it when the static bound fails to
// prune. Serving scores count_weight + fidelity so CountThenFidelity
// reduces to the same scalar search.
class JointSolver {
 public:
  JointSolver(std::vector<JointItem> items, const SlotState& slot, double count_weight,
              Clock::time_point deadline)
      : items_(std::move(items)),
        rem_tx_(slot.tx_count),
        rem_rx_(slot.rx_count),
        count_weight_(count_weight),
        deadline_(deadline) {
    const int n = static_cast<int>(items_.size());
    suffix_best_.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) {
      suffix_best_[i] = suffix_best_[i + 1] + (count_weight_ + items_[i].best);
    }
    chosen_.assign(n, 0);
    best_chosen_.assign(n, 0);
    id_order_.resize(n);
    std::iota(id_order_.begin(), id_order_.end(), 0);
    std::sort(id_order_.begin(), id_order_.end(),
              [&](int a, int b) { return items_[a].req->id < items_[b].req->id; });
    members_tx_.resize(rem_tx_.rows());
    members_rx_.resize(rem_rx_.cols());
    tx_slack_.assign(rem_tx_.rows(), 0);
    rx_slack_.assign(rem_rx_.cols(), 0);
    for (int i = 0; i < n; ++i) {
      members_tx_[items_[i].req->tx].push_back(i);  // ascending position = best desc
      members_rx_[items_[i].req->rx].push_back(i);
    }
    for (int k = 0; k < rem_tx_.rows(); ++k) {
      for (int q = 0; q < rem_tx_.cols(); ++q) tx_slack_[k] += rem_tx_.at(k, q);
    }
    for (int m = 0; m < rem_rx_.cols(); ++m) {
      for (int q = 0; q < rem_rx_.rows(); ++q) rx_slack_[m] += rem_rx_.at(q, m);
    }
  }

  // Installs a known-feasible assignment (per item: option rank or drop)
  // as the starting incumbent, so the search begins with a strong lower
  // bound and a timeout can never return anything weaker.
  void seed(const std::vector<int>& chosen) {
    chosen_ = chosen;
    best_chosen_ = chosen;
    incumbent_ = canonical_score();
  }

  void solve() {
    root_bound_ = suffix_best_.empty() ? 0.0 : suffix_best_[0];
    dfs(0, 0.0);
    if (incumbent_ < 0.0) {  // empty item list and no seed
      incumbent_ = 0.0;
    }
  }

  bool timed_out() const { return timed_out_; }
  double gap() const { return timed_out_ ? root_bound_ - incumbent_ : 0.0; }
  const std::vector<JointItem>& items() const { return items_; }
  int best_choice(int i) const { return best_chosen_[i]; }
  bool served(int i) const { return best_chosen_[i] < static_cast<int>(items_[i].options.size()); }

 private:
  int drop_rank(int i) const { return static_cast<int>(items_[i].options.size()); }

  double canonical_score() const {
    // Per-switch sums in ascending request-id order, switches ascending:
    // exactly how Solution::total_utility is assembled afterwards.
    double utility = 0.0;
    int count = 0;
    for (int q = 0; q < rem_tx_.cols(); ++q) {
      for (int i : id_order_) {
        const int rank = chosen_[i];
        if (rank < drop_rank(i) && items_[i].options[rank].qs == q) {
          utility += items_[i].options[rank].fidelity;
          ++count;
        }
      }
    }
    return count_weight_ * count + utility;
  }

  double residual_best(int i) const {
    const JointItem& item = items_[i];
    for (const JointOption& o : item.options) {
      if (o.action.alpha_tx() <= rem_tx_.at(item.req->tx, o.qs) &&
          o.action.alpha_rx() <= rem_rx_.at(o.qs, item.req->rx)) {
        return count_weight_ + o.fidelity;
      }
    }
    return 0.0;
  }

  // Sum over nodes of the top-slack static bests among remaining members;
  // a served request costs at least one pair from its node's total slack
  // across switches.
  double capacity_bound(const std::vector<std::vector<int>>& members,
                        const std::vector<int>& slack, int from) const {
    double total = 0.0;
    for (size_t node = 0; node < members.size(); ++node) {
      int take = slack[node];
      if (take <= 0) continue;
      for (int pos : members[node]) {
        if (pos < from) continue;
        total += count_weight_ + items_[pos].best;
        if (--take == 0) break;
      }
    }
    return total;
  }

  // One-side relaxation over pooled per-node slack: a knapsack per node
  // with each remaining member's best score at pair cost 1 and cost 2,
  // filtered by the other side's pooled slack.
  double knapsack_bound(int from, bool tx_side) const {
    const auto& members = tx_side ? members_tx_ : members_rx_;
    const auto& slack = tx_side ? tx_slack_ : rx_slack_;
    const auto& other_slack = tx_side ? rx_slack_ : tx_slack_;
    double total = 0.0;
    double dp[32];
    for (size_t node = 0; node < members.size(); ++node) {
      const int cap = std::min(slack[node], 31);
      if (cap <= 0) continue;
      std::fill(dp, dp + cap + 1, 0.0);
      for (int pos : members[node]) {
        if (pos < from) continue;
        const JointItem& item = items_[pos];
        const int other_node = tx_side ? item.req->rx : item.req->tx;
        double best1 = 0.0, best2 = 0.0;
        for (const JointOption& o : item.options) {
          const int own = tx_side ? o.action.alpha_tx() : o.action.alpha_rx();
          const int other = tx_side ? o.action.alpha_rx() : o.action.alpha_tx();
          if (other > other_slack[other_node]) continue;
          if (own == 1) {
            if (o.fidelity > best1) best1 = o.fidelity;
          } else if (o.fidelity > best2) {
            best2 = o.fidelity;
          }
        }
        if (best1 == 0.0 && best2 == 0.0) continue;
        for (int c = cap; c >= 1; --c) {
          double cand = dp[c];
          if (best1 > 0.0 && dp[c - 1] + best1 + count_weight_ > cand) {
            cand = dp[c - 1] + best1 + count_weight_;
          }
          if (best2 > 0.0 && c >= 2 && dp[c - 2] + best2 + count_weight_ > cand) {
            cand = dp[c - 2] + best2 + count_weight_;
          }
          dp[c] = cand;
        }
      }
      total += dp[cap];
    }
    return total;
  }

  void dfs(int i, double acc) {
    if (timed_out_) return;
    if (++nodes_ % 4096 == 0 && Clock::now() > deadline_) {
      timed_out_ = true;
      return;
    }
    const int n = static_cast<int>(items_.size());
    if (i == n) {
      const double score = canonical_score();
      if (score > incumbent_) {
        incumbent_ = score;
        best_chosen_ = chosen_;
      }
      return;
    }
    const double need = incumbent_ - acc;
    if (suffix_best_[i] <= need) return;
    if (capacity_bound(members_tx_, tx_slack_, i) <= need) return;
    if (capacity_bound(members_rx_, rx_slack_, i) <= need) return;
    double residual_sum = 0.0;
    for (int j = i; j < n; ++j) residual_sum += residual_best(j);
    if (residual_sum <= need) return;
    if (knapsack_bound(i, true) <= need) return;
    if (knapsack_bound(i, false) <= need) return;

    JointItem& item = items_[i];
    const int min_rank =
        (i > 0 && same_demand(*items_[i - 1].req, *item.req)) ? chosen_[i - 1] : 0;
    for (int rank = min_rank; rank <= drop_rank(i); ++rank) {
      if (rank < drop_rank(i)) {
        const JointOption& o = item.options[rank];
        if (o.action.alpha_tx() > rem_tx_.at(item.req->tx, o.qs) ||
            o.action.alpha_rx() > rem_rx_.at(o.qs, item.req->rx)) {
          continue;
        }
        rem_tx_.at(item.req->tx, o.qs) -= o.action.alpha_tx();
        rem_rx_.at(o.qs, item.req->rx) -= o.action.alpha_rx();
        tx_slack_[item.req->tx] -= o.action.alpha_tx();
        rx_slack_[item.req->rx] -= o.action.alpha_rx();
        chosen_[i] = rank;
        dfs(i + 1, acc + count_weight_ + o.fidelity);
        rem_tx_.at(item.req->tx, o.qs) += o.action.alpha_tx();
        rem_rx_.at(o.qs, item.req->rx) += o.action.alpha_rx();
        tx_slack_[item.req->tx] += o.action.alpha_tx();
        rx_slack_[item.req->rx] += o.action.alpha_rx();
      } else {
        chosen_[i] = rank;
        dfs(i + 1, acc);
      }
      if (timed_out_) return;
    }
  }

  std::vector<JointItem> items_;
  Grid<int> rem_tx_;
  Grid<int> rem_rx_;
  double count_weight_;
  Clock::time_point deadline_;
  std::vector<double> suffix_best_;
  std::vector<int> chosen_;
  std::vector<int> best_chosen_;
  std::vector<int> id_order_;
  std::vector<std::vector<int>> members_tx_;
  std::vector<std::vector<int>> members_rx_;
  std::vector<int> tx_slack_;
  std::vector<int> rx_slack_;
  double incumbent_ = -1.0;
  double root_bound_ = 0.0;
  std::uint64_t nodes_ = 0;
  bool timed_out_ = false;
};

}  // namespace

Solution make_solution(const Matching& matching, std::span<const Request> requests,
                       const SlotState& slot, P1Cache* cache) {
  Solution s;
  s.matching = matching;
  s.plans.reserve(slot.num_qs());
  for (int q = 0; q < slot.num_qs(); ++q) {
    std::vector<Request> members;
    for (int id : matching.requests_of(q)) {
      for (const Request& r : requests) {
        if (r.id == id) {
          members.push_back(r);
          break;
        }
      }
    }
    s.plans.push_back(solve_p1(q, members, slot, cache));
  }
  for (const ActionPlan& plan : s.plans) {
    s.total_utility += plan.utility;
    s.served_count += plan.served_count();
  }
  return s;
}

Solution solve_optimal(std::span<const Request> requests, const SlotState& slot,
                       const OptimalSettings& settings) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(settings.time_budget_secs));

  std::vector<JointItem> items;
  items.reserve(requests.size());
  for (const Request& r : requests) {
    JointItem item;
    item.req = &r;
    for (int q = 0; q < slot.num_qs(); ++q) {
      for (const ActionChoice& c : feasible_actions(q, r, slot)) {
        item.options.push_back({q, c.action, c.fidelity});
      }
    }
    std::sort(item.options.begin(), item.options.end(),
              [](const JointOption& a, const JointOption& b) {
                if (a.fidelity != b.fidelity) return a.fidelity > b.fidelity;
                if (a.qs != b.qs) return a.qs < b.qs;
                return a.action.index() < b.action.index();
              });
    if (item.options.empty()) continue;  // unservable anywhere: always dropped
    item.best = item.options.front().fidelity;
    items.push_back(std::move(item));
  }
  std::sort(items.begin(), items.end(), [](const JointItem& a, const JointItem& b) {
    if (a.best != b.best) return a.best > b.best;
    if (a.req->tx != b.req->tx) return a.req->tx < b.req->tx;
    if (a.req->rx != b.req->rx) return a.req->rx < b.req->rx;
    if (a.req->min_fidelity != b.req->min_fidelity) return a.req->min_fidelity < b.req->min_fidelity;
    return a.req->id < b.req->id;
  });

  const double count_weight = settings.objective == ObjectiveMode::CountThenFidelity
                                  ? static_cast<double>(requests.size() + 1)
                                  : 0.0;
  JointSolver solver(std::move(items), slot, count_weight, deadline);

  // Seed the incumbent with the greedy solution, which is feasible for the
  // joint problem because its per-switch plans respect the same budgets.
  {
    const Solution greedy = solve_greedy(requests, slot);
    std::vector<int> seed(solver.items().size());
    for (size_t i = 0; i < solver.items().size(); ++i) {
      const JointItem& item = solver.items()[i];
      seed[i] = static_cast<int>(item.options.size());  // drop
      for (int q = 0; q < slot.num_qs(); ++q) {
        const auto it = greedy.plans[q].choices.find(item.req->id);
        if (it == greedy.plans[q].choices.end()) continue;
        for (size_t rank = 0; rank < item.options.size(); ++rank) {
          if (item.options[rank].qs == q && item.options[rank].action == it->second.action) {
            seed[i] = static_cast<int>(rank);
            break;
          }
        }
        break;
      }
    }
    solver.seed(seed);
  }
  solver.solve();

  Solution s;
  s.matching = Matching(slot.num_qs());
  s.plans.assign(slot.num_qs(), ActionPlan{});
  for (int i = 0; i < static_cast<int>(solver.items().size()); ++i) {
    if (!solver.served(i)) continue;
    const JointItem& item = solver.items()[i];
    const JointOption& o = item.options[solver.best_choice(i)];
    s.matching.assign(item.req->id, o.qs);
    s.plans[o.qs].choices.emplace(item.req->id, ActionChoice{o.action, o.fidelity});
  }
  for (ActionPlan& plan : s.plans) {
    for (const auto& [id, choice] : plan.choices) plan.utility += choice.fidelity;
    s.total_utility += plan.utility;
    s.served_count += plan.served_count();
  }
  s.optimal_flag = !solver.timed_out();
  s.bound_gap = solver.gap();
  assert([&] {
    for (int q = 0; q < slot.num_qs(); ++q) {
      if (!plan_is_feasible(q, s.plans[q], requests, slot)) return false;
    }
    return true;
  }());
  return s;
}

Solution solve_greedy(std::span<const Request> requests, const SlotState& slot) {
  return make_solution(init_greedy(requests, slot), requests, slot);
}

Solution solve_random(std::span<const Request> requests, const SlotState& slot, Rng& rng) {
  std::vector<const Request*> order;
  order.reserve(requests.size());
  for (const Request& r : requests) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [](const Request* a, const Request* b) { return a->id < b->id; });

  Matching m(slot.num_qs());
  for (const Request* r : order) m.assign(r->id, rng.uniform_int(slot.num_qs()));
  return make_solution(m, requests, slot);
}

RqsaSolution solve_rqsa(std::span<const Request> requests, const SlotState& slot,
                        const MatchConfig& config) {
  RqsaResult result = rqsa(requests, slot, config);
  RqsaSolution out;
  out.solution.matching = result.matching;
  out.solution.plans = std::move(result.plans);
  out.solution.total_utility = 0.0;
  for (const ActionPlan& plan : out.solution.plans) {
    out.solution.total_utility += plan.utility;
    out.solution.served_count += plan.served_count();
  }
  out.swaps = std::move(result.swaps);
  return out;
}

}  // namespace qsmatch
