#include "qsmatch/scheduler.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

#include "qsmatch/rng.hpp"

namespace qsmatch {

namespace {

void check_indices(int qs, const Request& r, const SlotState& slot) {
  if (qs < 0 || qs >= slot.num_qs()) throw std::out_of_range("switch index out of range");
  if (r.tx < 0 || r.tx >= slot.num_tx()) throw std::out_of_range("tx index out of range");
  if (r.rx < 0 || r.rx >= slot.num_rx()) throw std::out_of_range("rx index out of range");
}

struct Item {
  const Request* req = nullptr;
  const std::vector<ActionChoice>* options = nullptr;  // fidelity descending
  double best = 0.0;
  int tx_slot = 0;  // component-local budget indices
  int rx_slot = 0;
};

bool same_demand(const Request& a, const Request& b) {
  return a.tx == b.tx && a.rx == b.rx && a.min_fidelity == b.min_fidelity;
}

// Exact search over one link-sharing component. Options per request are
// ordered best-first with "drop" last, so the first dive is the greedy
// schedule and the incumbent is good immediately. Interchangeable copies
// of one demand are forced into non-increasing option quality by id, which
// removes permuted duplicates and serves lower ids first.
//
// Three admissible bounds prune a node: the static best-fidelity suffix
// sum, a per-node capacity bound (a served request consumes at least one
// pair per side, so node k can serve at most rem[k] more requests), and
// the sum of best fidelities under the residual budgets.
class ComponentSolver {
 public:
  ComponentSolver(std::vector<Item> items, std::vector<int> tx_budget,
                  std::vector<int> rx_budget)
      : items_(std::move(items)),
        rem_tx_(std::move(tx_budget)),
        rem_rx_(std::move(rx_budget)) {
    const int n = static_cast<int>(items_.size());
    suffix_best_.assign(n + 1, 0.0);
    for (int i = n - 1; i >= 0; --i) suffix_best_[i] = suffix_best_[i + 1] + items_[i].best;
    chosen_rank_.assign(n, 0);
    best_rank_.assign(n, 0);
    id_order_.resize(n);
    std::iota(id_order_.begin(), id_order_.end(), 0);
    std::sort(id_order_.begin(), id_order_.end(),
              [&](int a, int b) { return items_[a].req->id < items_[b].req->id; });
    members_tx_.resize(rem_tx_.size());
    members_rx_.resize(rem_rx_.size());
    for (int i = 0; i < n; ++i) {
      members_tx_[items_[i].tx_slot].push_back(i);  // ascending position = best desc
      members_rx_[items_[i].rx_slot].push_back(i);
    }
  }

  P1Cache::ComponentResult solve() {
    incumbent_ = -1.0;  // below the always-feasible empty plan
    dfs(0, 0.0);
    P1Cache::ComponentResult result;
    for (int i : id_order_) {
      const Item& item = items_[i];
      const int rank = best_rank_[i];
      if (rank < static_cast<int>(item.options->size())) {
        result.push_back(
            {item.req->id, (*item.options)[rank].action, (*item.options)[rank].fidelity});
      }
    }
    return result;
  }

 private:
  int drop_rank(int i) const { return static_cast<int>(items_[i].options->size()); }

  double canonical_utility() const {
    double sum = 0.0;
    for (int i : id_order_) {
      const int rank = chosen_rank_[i];
      if (rank < drop_rank(i)) sum += (*items_[i].options)[rank].fidelity;
    }
    return sum;
  }

  // Best fidelity item i can still reach under the residual budgets.
  double residual_best(int i) const {
    const Item& item = items_[i];
    for (const ActionChoice& c : *item.options) {
      if (c.action.alpha_tx() <= rem_tx_[item.tx_slot] &&
          c.action.alpha_rx() <= rem_rx_[item.rx_slot]) {
        return c.fidelity;
      }
    }
    return 0.0;
  }

  // Sum over budget nodes of the top-rem static bests among remaining
  // members; each served request costs that node at least one pair.
  double capacity_bound(const std::vector<std::vector<int>>& members,
                        const std::vector<int>& rem, int from) const {
    double total = 0.0;
    for (size_t s = 0; s < members.size(); ++s) {
      int take = rem[s];
      if (take <= 0) continue;
      for (int pos : members[s]) {
        if (pos < from) continue;
        total += items_[pos].best;
        if (--take == 0) break;
      }
    }
    return total;
  }

  // Exact one-side relaxation: per budget node, a small knapsack over each
  // remaining member's best fidelity at pair cost 1 and at pair cost 2,
  // keeping only options whose other-side cost still fits that side's
  // residual budget. The strongest bound here and the most expensive, so
  // it runs last.
  double knapsack_bound(int from, bool tx_side) const {
    const auto& members = tx_side ? members_tx_ : members_rx_;
    const auto& rem = tx_side ? rem_tx_ : rem_rx_;
    const auto& other_rem = tx_side ? rem_rx_ : rem_tx_;
    double total = 0.0;
    double dp[16];
    for (size_t s = 0; s < members.size(); ++s) {
      const int cap = std::min(rem[s], 15);
      if (cap <= 0) continue;
      std::fill(dp, dp + cap + 1, 0.0);
      for (int pos : members[s]) {
        if (pos < from) continue;
        const Item& item = items_[pos];
        const int other_slot = tx_side ? item.rx_slot : item.tx_slot;
        double best1 = 0.0, best2 = 0.0;
        for (const ActionChoice& c : *item.options) {
          const int own = tx_side ? c.action.alpha_tx() : c.action.alpha_rx();
          const int other = tx_side ? c.action.alpha_rx() : c.action.alpha_tx();
          if (other > other_rem[other_slot]) continue;
          if (own == 1) {
            if (c.fidelity > best1) best1 = c.fidelity;
          } else if (c.fidelity > best2) {
            best2 = c.fidelity;
          }
        }
        if (best1 == 0.0 && best2 == 0.0) continue;
        for (int c = cap; c >= 1; --c) {
          double cand = dp[c];
          if (best1 > 0.0 && dp[c - 1] + best1 > cand) cand = dp[c - 1] + best1;
          if (best2 > 0.0 && c >= 2 && dp[c - 2] + best2 > cand) cand = dp[c - 2] + best2;
          dp[c] = cand;
        }
      }
      total += dp[cap];
    }
    return total;
  }

  void dfs(int i, double acc) {
    const int n = static_cast<int>(items_.size());
    if (i == n) {
      const double utility = canonical_utility();
      if (utility > incumbent_) {
        incumbent_ = utility;
        best_rank_ = chosen_rank_;
      }
      return;
    }
    const double need = incumbent_ - acc;
    if (suffix_best_[i] <= need) return;
    if (capacity_bound(members_tx_, rem_tx_, i) <= need) return;
    if (capacity_bound(members_rx_, rem_rx_, i) <= need) return;
    double residual_sum = 0.0;
    for (int j = i; j < n; ++j) residual_sum += residual_best(j);
    if (residual_sum <= need) return;
    if (knapsack_bound(i, true) <= need) return;
    if (knapsack_bound(i, false) <= need) return;

    const Item& item = items_[i];
    // Copies of one demand share every budget, so their assignments are
    // interchangeable; restricting to non-decreasing ranks keeps exactly
    // one representative per multiset.
    const int min_rank =
        (i > 0 && same_demand(*items_[i - 1].req, *item.req)) ? chosen_rank_[i - 1] : 0;
    for (int rank = min_rank; rank <= drop_rank(i); ++rank) {
      if (rank < drop_rank(i)) {
        const Action a = (*item.options)[rank].action;
        if (a.alpha_tx() > rem_tx_[item.tx_slot] || a.alpha_rx() > rem_rx_[item.rx_slot]) {
          continue;
        }
        rem_tx_[item.tx_slot] -= a.alpha_tx();
        rem_rx_[item.rx_slot] -= a.alpha_rx();
        chosen_rank_[i] = rank;
        dfs(i + 1, acc + (*item.options)[rank].fidelity);
        rem_tx_[item.tx_slot] += a.alpha_tx();
        rem_rx_[item.rx_slot] += a.alpha_rx();
      } else {
        chosen_rank_[i] = rank;
        dfs(i + 1, acc);
      }
    }
  }

  std::vector<Item> items_;
  std::vector<int> rem_tx_;
  std::vector<int> rem_rx_;
  std::vector<double> suffix_best_;
  std::vector<int> chosen_rank_;
  std::vector<int> best_rank_;
  std::vector<int> id_order_;
  std::vector<std::vector<int>> members_tx_;
  std::vector<std::vector<int>> members_rx_;
  double incumbent_ = -1.0;
};

struct UnionFind {
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

P1Cache::ComponentResult solve_component(
    int qs, const SlotState& slot,
    const std::vector<std::pair<const Request*, const std::vector<ActionChoice>*>>& members) {
  // Deterministic exploration order: strongest request first, identical
  // demands adjacent, ids ascending.
  std::vector<Item> items;
  items.reserve(members.size());
  for (const auto& [req, options] : members) {
    Item item;
    item.req = req;
    item.options = options;
    item.best = options->empty() ? 0.0 : options->front().fidelity;
    items.push_back(item);
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.best != b.best) return a.best > b.best;
    if (a.req->tx != b.req->tx) return a.req->tx < b.req->tx;
    if (a.req->rx != b.req->rx) return a.req->rx < b.req->rx;
    if (a.req->min_fidelity != b.req->min_fidelity)
      return a.req->min_fidelity < b.req->min_fidelity;
    return a.req->id < b.req->id;
  });

  // Component-local budget slots for the tx/rx nodes actually touched.
  std::vector<int> tx_budget, rx_budget;
  std::vector<int> tx_slot_of(slot.num_tx(), -1), rx_slot_of(slot.num_rx(), -1);
  for (Item& item : items) {
    if (tx_slot_of[item.req->tx] < 0) {
      tx_slot_of[item.req->tx] = static_cast<int>(tx_budget.size());
      tx_budget.push_back(slot.tx_count.at(item.req->tx, qs));
    }
    if (rx_slot_of[item.req->rx] < 0) {
      rx_slot_of[item.req->rx] = static_cast<int>(rx_budget.size());
      rx_budget.push_back(slot.rx_count.at(qs, item.req->rx));
    }
    item.tx_slot = tx_slot_of[item.req->tx];
    item.rx_slot = rx_slot_of[item.req->rx];
  }

  return ComponentSolver(std::move(items), std::move(tx_budget), std::move(rx_budget)).solve();
}

}  // namespace

std::vector<ActionChoice> feasible_actions(int qs, const Request& request,
                                           const SlotState& slot) {
  check_indices(qs, request, slot);
  const Fidelity f_tx(slot.tx_fidelity.at(request.tx, qs));
  const Fidelity f_rx(slot.rx_fidelity.at(qs, request.rx));
  const int n_tx = slot.tx_count.at(request.tx, qs);
  const int n_rx = slot.rx_count.at(qs, request.rx);

  std::vector<ActionChoice> result;
  for (ActionKind kind : kActionKinds) {
    const Action action{kind};
    if (action.alpha_tx() > n_tx || action.alpha_rx() > n_rx) continue;
    const double fid = e2e_fidelity(f_tx, f_rx, action).value();
    if (fid >= request.min_fidelity) result.push_back({action, fid});
  }
  std::sort(result.begin(), result.end(), [](const ActionChoice& a, const ActionChoice& b) {
    if (a.fidelity != b.fidelity) return a.fidelity > b.fidelity;
    return a.action.index() < b.action.index();
  });
  return result;
}

std::size_t P1Cache::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(k.qs) + 0x51ed270b846b3f7bULL);
  for (int id : k.ids) h = mix64(h ^ static_cast<std::uint64_t>(id));
  return static_cast<std::size_t>(h);
}

const P1Cache::ComponentResult* P1Cache::find(int qs, const std::vector<int>& ids) const {
  auto it = map_.find(Key{qs, ids});
  return it == map_.end() ? nullptr : &it->second;
}

void P1Cache::insert(int qs, std::vector<int> ids, ComponentResult result) {
  map_.emplace(Key{qs, std::move(ids)}, std::move(result));
}

const std::vector<ActionChoice>& P1Cache::options(int qs, const Request& request,
                                                  const SlotState& slot) {
  const OptionKey key{qs, request.id};
  auto it = options_.find(key);
  if (it == options_.end()) {
    it = options_.emplace(key, feasible_actions(qs, request, slot)).first;
  }
  return it->second;
}

std::size_t P1Cache::OptionKeyHash::operator()(const OptionKey& k) const {
  return static_cast<std::size_t>(
      mix64((static_cast<std::uint64_t>(k.qs) << 32) ^ static_cast<std::uint64_t>(k.id)));
}

ActionPlan solve_p1(int qs, std::span<const Request> requests, const SlotState& slot,
                    P1Cache* cache) {
  // Unservable requests are dropped outright; the rest split into
  // components that share no link budget and solve independently.
  std::vector<std::pair<const Request*, const std::vector<ActionChoice>*>> servable;
  std::vector<std::vector<ActionChoice>> local_options;
  local_options.reserve(requests.size());
  servable.reserve(requests.size());
  for (const Request& r : requests) {
    check_indices(qs, r, slot);
    const std::vector<ActionChoice>* options;
    if (cache != nullptr) {
      options = &cache->options(qs, r, slot);
    } else {
      local_options.push_back(feasible_actions(qs, r, slot));
      options = &local_options.back();
    }
    if (!options->empty()) servable.emplace_back(&r, options);
  }

  ActionPlan plan;
  if (servable.empty()) return plan;

  UnionFind uf(slot.num_tx() + slot.num_rx());
  for (const auto& [r, options] : servable) uf.unite(r->tx, slot.num_tx() + r->rx);

  std::map<int, std::vector<std::pair<const Request*, const std::vector<ActionChoice>*>>>
      components;  // root -> members
  for (const auto& member : servable) components[uf.find(member.first->tx)].push_back(member);

  std::vector<P1Cache::Served> served;
  for (auto& [root, members] : components) {
    std::sort(members.begin(), members.end(),
              [](const auto& a, const auto& b) { return a.first->id < b.first->id; });
    std::vector<int> ids;
    ids.reserve(members.size());
    for (const auto& [r, options] : members) ids.push_back(r->id);
    assert(std::adjacent_find(ids.begin(), ids.end()) == ids.end() && "duplicate request ids");

    const P1Cache::ComponentResult* cached = cache ? cache->find(qs, ids) : nullptr;
    P1Cache::ComponentResult fresh;
    if (cached == nullptr) {
      fresh = solve_component(qs, slot, members);
      if (cache != nullptr) {
        cache->insert(qs, std::move(ids), fresh);
      }
      cached = &fresh;
    }
    served.insert(served.end(), cached->begin(), cached->end());
  }

  std::sort(served.begin(), served.end(),
            [](const P1Cache::Served& a, const P1Cache::Served& b) { return a.id < b.id; });
  for (const P1Cache::Served& s : served) {
    plan.choices.emplace(s.id, ActionChoice{s.action, s.fidelity});
    plan.utility += s.fidelity;
  }
  assert(plan_is_feasible(qs, plan, requests, slot));
  return plan;
}

double qs_utility(int qs, std::span<const Request> requests, const SlotState& slot,
                  P1Cache* cache) {
  return solve_p1(qs, requests, slot, cache).utility;
}

bool plan_is_feasible(int qs, const ActionPlan& plan, std::span<const Request> requests,
                      const SlotState& slot) {
  std::vector<int> tx_used(slot.num_tx(), 0), rx_used(slot.num_rx(), 0);
  for (const auto& [id, choice] : plan.choices) {
    const Request* req = nullptr;
    for (const Request& r : requests) {
      if (r.id == id) {
        req = &r;
        break;
      }
    }
    if (req == nullptr) return false;  // plan serves a request not in the set
    const double fid =
        e2e_fidelity(Fidelity(slot.tx_fidelity.at(req->tx, qs)),
                     Fidelity(slot.rx_fidelity.at(qs, req->rx)), choice.action)
            .value();
    if (fid != choice.fidelity || fid < req->min_fidelity) return false;
    tx_used[req->tx] += choice.action.alpha_tx();
    rx_used[req->rx] += choice.action.alpha_rx();
  }
  for (int k = 0; k < slot.num_tx(); ++k) {
    if (tx_used[k] > slot.tx_count.at(k, qs)) return false;
  }
  for (int m = 0; m < slot.num_rx(); ++m) {
    if (rx_used[m] > slot.rx_count.at(qs, m)) return false;
  }
  return true;
}

}  // namespace qsmatch
