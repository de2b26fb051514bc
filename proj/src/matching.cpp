#include "qsmatch/matching.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace qsmatch {

namespace {

void insert_sorted(std::vector<int>& v, int id) {
  v.insert(std::upper_bound(v.begin(), v.end(), id), id);
}

void erase_sorted(std::vector<int>& v, int id) {
  auto it = std::lower_bound(v.begin(), v.end(), id);
  assert(it != v.end() && *it == id);
  v.erase(it);
}

}  // namespace

std::optional<int> Matching::qs_of(int request_id) const {
  auto it = by_request_.find(request_id);
  if (it == by_request_.end()) return std::nullopt;
  return it->second;
}

void Matching::assign(int request_id, int qs) {
  if (qs < 0 || qs >= num_qs()) throw std::out_of_range("switch index out of range");
  unassign(request_id);
  by_request_[request_id] = qs;
  insert_sorted(by_qs_[qs], request_id);
}

void Matching::unassign(int request_id) {
  auto it = by_request_.find(request_id);
  if (it == by_request_.end()) return;
  erase_sorted(by_qs_[it->second], request_id);
  by_request_.erase(it);
}

double RqsaResult::total_utility() const {
  double sum = 0.0;
  for (const ActionPlan& plan : plans) sum += plan.utility;
  return sum;
}

int RqsaResult::served_count() const {
  int count = 0;
  for (const ActionPlan& plan : plans) count += plan.served_count();
  return count;
}

double request_utility(const Request& request, int qs, const SlotState& slot) {
  if (qs < 0 || qs >= slot.num_qs()) throw std::out_of_range("switch index out of range");
  if (request.tx < 0 || request.tx >= slot.num_tx() || request.rx < 0 ||
      request.rx >= slot.num_rx()) {
    throw std::out_of_range("request endpoint out of range");
  }
  return swap_fidelity(Fidelity(slot.tx_fidelity.at(request.tx, qs)),
                       Fidelity(slot.rx_fidelity.at(qs, request.rx)))
      .value();
}

std::strong_ordering prefers_qs(const Request& request, int q, int q_prime,
                                const SlotState& slot) {
  const double u = request_utility(request, q, slot);
  const double u_prime = request_utility(request, q_prime, slot);
  if (u != u_prime) {
    return u > u_prime ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  if (q != q_prime) {
    return q < q_prime ? std::strong_ordering::greater : std::strong_ordering::less;
  }
  return std::strong_ordering::equal;
}

MatchingEngine::MatchingEngine(std::span<const Request> requests, const SlotState& slot,
                               MatchConfig config)
    : requests_(requests.begin(), requests.end()), slot_(slot), cfg_(config) {
  std::sort(requests_.begin(), requests_.end(),
            [](const Request& a, const Request& b) { return a.id < b.id; });
  for (size_t i = 1; i < requests_.size(); ++i) {
    if (requests_[i].id == requests_[i - 1].id) {
      throw std::invalid_argument("duplicate request ids");
    }
  }
  util_ = Grid<double>(static_cast<int>(requests_.size()), slot_.num_qs());
  for (int i = 0; i < static_cast<int>(requests_.size()); ++i) {
    for (int q = 0; q < slot_.num_qs(); ++q) {
      util_.at(i, q) = request_utility(requests_[i], q, slot_);
    }
  }
}

int MatchingEngine::idx_of(int id) const {
  auto it = std::lower_bound(requests_.begin(), requests_.end(), id,
                             [](const Request& r, int v) { return r.id < v; });
  assert(it != requests_.end() && it->id == id);
  return static_cast<int>(it - requests_.begin());
}

const Request& MatchingEngine::by_id(int id) const { return requests_[idx_of(id)]; }

double MatchingEngine::set_utility(int qs, const std::vector<int>& ids) {
  std::vector<Request> members;
  members.reserve(ids.size());
  for (int id : ids) members.push_back(by_id(id));
  return qs_utility(qs, members, slot_, &cache_);
}

Matching MatchingEngine::greedy() const {
  Matching m(slot_.num_qs());
  Grid<int> tx_used(slot_.num_tx(), slot_.num_qs());
  Grid<int> rx_used(slot_.num_qs(), slot_.num_rx());

  std::vector<int> order(slot_.num_qs());
  for (const Request& r : requests_) {
    const int i = idx_of(r.id);
    for (int q = 0; q < slot_.num_qs(); ++q) order[q] = q;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (util_.at(i, a) != util_.at(i, b)) return util_.at(i, a) > util_.at(i, b);
      return a < b;
    });
    // Reserve one direct-swap pair on each side; the request stays
    // unmatched when every switch's tally is exhausted.
    for (int q : order) {
      if (tx_used.at(r.tx, q) < slot_.tx_count.at(r.tx, q) &&
          rx_used.at(q, r.rx) < slot_.rx_count.at(q, r.rx)) {
        m.assign(r.id, q);
        ++tx_used.at(r.tx, q);
        ++rx_used.at(q, r.rx);
        break;
      }
    }
  }
  return m;
}

std::optional<SwapRecord> MatchingEngine::try_pairwise(const Matching& m, const Request& r,
                                                       int q, const Request& partner,
                                                       int q_prime) {
  // The partner's preference costs nothing to test; the four subproblem
  // solves only run when it holds. r strictly prefers q_prime by candidate
  // construction.
  const double p_old = util(partner, q_prime);
  const double p_new = util(partner, q);
  if (cfg_.strict_all ? p_new <= p_old : p_new < p_old) return std::nullopt;

  std::vector<int> rq_new = m.requests_of(q);
  erase_sorted(rq_new, r.id);
  insert_sorted(rq_new, partner.id);
  std::vector<int> rqp_new = m.requests_of(q_prime);
  erase_sorted(rqp_new, partner.id);
  insert_sorted(rqp_new, r.id);

  const double uq_old = set_utility(q, m.requests_of(q));
  const double uq_new = set_utility(q, rq_new);
  if (cfg_.strict_all ? uq_new <= uq_old : uq_new < uq_old) return std::nullopt;
  const double uqp_old = set_utility(q_prime, m.requests_of(q_prime));
  const double uqp_new = set_utility(q_prime, rqp_new);
  const double delta = (uq_new + uqp_new) - (uq_old + uqp_old);

  const bool approved = cfg_.strict_all ? uqp_new > uqp_old
                                        : uqp_new >= uqp_old && delta > 0.0;
  if (!approved) return std::nullopt;
  return SwapRecord{r.id, partner.id, q, q_prime, delta};
}

std::optional<SwapRecord> MatchingEngine::try_relocation(const Matching& m, const Request& r,
                                                         std::optional<int> q, int q_prime) {
  // Losing a request never raises a switch's optimum, so the move only
  // goes through when the gaining switch strictly improves; test that
  // first.
  std::vector<int> rqp_new = m.requests_of(q_prime);
  insert_sorted(rqp_new, r.id);
  const double uqp_old = set_utility(q_prime, m.requests_of(q_prime));
  const double uqp_new = set_utility(q_prime, rqp_new);
  if (uqp_new <= uqp_old) return std::nullopt;
  double delta = uqp_new - uqp_old;

  bool q_weak = true;
  bool q_strict = false;
  if (q.has_value()) {
    std::vector<int> rq_new = m.requests_of(*q);
    erase_sorted(rq_new, r.id);
    const double uq_old = set_utility(*q, m.requests_of(*q));
    const double uq_new = set_utility(*q, rq_new);
    q_weak = uq_new >= uq_old;
    q_strict = uq_new > uq_old;
    delta += uq_new - uq_old;
  }

  bool approved;
  if (cfg_.strict_all) {
    // The vacancy partner is indifferent by definition and exempt from the
    // strictness requirement; every real participant must gain.
    approved = q.has_value() ? q_strict : true;
  } else {
    approved = q_weak && delta > 0.0;
  }
  if (!approved) return std::nullopt;
  return SwapRecord{r.id, SwapRecord::kVacancy, q.value_or(SwapRecord::kUnmatched), q_prime,
                    delta};
}

std::optional<SwapRecord> MatchingEngine::first_beneficial(const Matching& m, const Request& r) {
  const std::optional<int> q = m.qs_of(r.id);
  const int i = idx_of(r.id);
  // An unmatched request values discard at 0, so any switch beats it.
  const double current = q.has_value() ? util_.at(i, *q) : 0.0;

  std::vector<int> candidates;
  for (int qp = 0; qp < slot_.num_qs(); ++qp) {
    if (q.has_value() && qp == *q) continue;
    if (util_.at(i, qp) > current) candidates.push_back(qp);
  }
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (util_.at(i, a) != util_.at(i, b)) return util_.at(i, a) > util_.at(i, b);
    return a < b;
  });

  for (int qp : candidates) {
    if (q.has_value()) {
      for (int partner_id : m.requests_of(qp)) {
        const Request& partner = by_id(partner_id);
        if (partner.tx != r.tx && partner.rx != r.rx) continue;
        if (auto rec = try_pairwise(m, r, *q, partner, qp)) return rec;
      }
    }
    if (cfg_.allow_relocation) {
      if (auto rec = try_relocation(m, r, q, qp)) return rec;
    }
  }
  return std::nullopt;
}

void MatchingEngine::apply(Matching& m, const SwapRecord& rec) const {
  m.assign(rec.request, rec.to_qs);
  if (rec.partner != SwapRecord::kVacancy) {
    assert(rec.from_qs != SwapRecord::kUnmatched);
    m.assign(rec.partner, rec.from_qs);
  }
}

std::vector<SwapRecord> MatchingEngine::improve(Matching& matching) {
  if (matching.num_qs() != slot_.num_qs()) {
    throw std::invalid_argument("matching switch count does not fit the slot");
  }
  std::vector<SwapRecord> log;
  for (int pass = 0; pass < cfg_.max_passes; ++pass) {
    bool moved = false;
    for (const Request& r : requests_) {
      if (auto rec = first_beneficial(matching, r)) {
        apply(matching, *rec);
        log.push_back(*rec);
        moved = true;
      }
    }
    if (!moved) break;
  }
  return log;
}

RqsaResult MatchingEngine::run() {
  RqsaResult result;
  result.matching = greedy();
  result.swaps = improve(result.matching);
  result.plans.reserve(slot_.num_qs());
  for (int q = 0; q < slot_.num_qs(); ++q) {
    std::vector<Request> members;
    for (int id : result.matching.requests_of(q)) members.push_back(by_id(id));
    result.plans.push_back(solve_p1(q, members, slot_, &cache_));
  }
  return result;
}

StabilityReport MatchingEngine::check_stable(const Matching& matching) {
  for (const Request& r : requests_) {
    if (auto rec = first_beneficial(matching, r)) return {false, rec};
  }
  return {true, std::nullopt};
}

Matching init_greedy(std::span<const Request> requests, const SlotState& slot) {
  return MatchingEngine(requests, slot, MatchConfig{}).greedy();
}

std::pair<Matching, std::vector<SwapRecord>> find_and_apply_swaps(
    const Matching& matching, std::span<const Request> requests, const SlotState& slot,
    const MatchConfig& config) {
  MatchingEngine engine(requests, slot, config);
  Matching result = matching;
  auto log = engine.improve(result);
  return {std::move(result), std::move(log)};
}

RqsaResult rqsa(std::span<const Request> requests, const SlotState& slot,
                const MatchConfig& config) {
  return MatchingEngine(requests, slot, config).run();
}

StabilityReport is_swap_stable(const Matching& matching, std::span<const Request> requests,
                               const SlotState& slot, const MatchConfig& config) {
  return MatchingEngine(requests, slot, config).check_stable(matching);
}

}  // namespace qsmatch
