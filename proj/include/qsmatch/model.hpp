#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qsmatch/grid.hpp"
#include "qsmatch/rng.hpp"

namespace qsmatch {

// Scenario configuration. Defaults reproduce the standard desk-scale
// setup: 5 Tx nodes, 5 Rx nodes, 3 switches, 10 generation attempts per
// link per slot, 0.54 km fiber attenuation length, link lengths U(0.1, 1) km,
// per-request fidelity floors U(0.5, 0.8), link fidelities U(0.83, 0.99).
struct ScenarioParams {
  int num_tx = 5;
  int num_rx = 5;
  int num_qs = 3;
  int attempts = 10;
  double attenuation_km = 0.54;
  double dist_min_km = 0.1;
  double dist_max_km = 1.0;
  double fmin_low = 0.5;
  double fmin_high = 0.8;
  double link_fid_low = 0.83;
  double link_fid_high = 0.99;
  std::uint64_t seed = 1;
  // When true, every request draws its own fidelity floor even if another
  // request covers the same (tx, rx) pair.
  bool independent_fmin = false;

  void validate() const;  // throws std::invalid_argument

  // JSON keys: K, M, Q, n, L0_km, dist_min_km, dist_max_km, fmin_low,
  // fmin_high, link_fid_low, link_fid_high, seed, independent_fmin.
  // Unknown keys are rejected.
  static ScenarioParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Static network geometry for one scenario draw.
struct Topology {
  int num_tx = 0;
  int num_rx = 0;
  int num_qs = 0;
  int attempts = 0;
  double attenuation_km = 0.0;
  Grid<double> tx_distance_km;  // num_tx x num_qs
  Grid<double> rx_distance_km;  // num_qs x num_rx

  void validate() const;  // throws std::invalid_argument
};

// Realized link-level EPR state for one time slot: pair counts and the
// (per-link, per-slot) pair fidelity. All pairs on one link within a slot
// share the fidelity scalar.
struct SlotState {
  Grid<int> tx_count;       // num_tx x num_qs
  Grid<double> tx_fidelity; // num_tx x num_qs
  Grid<int> rx_count;       // num_qs x num_rx
  Grid<double> rx_fidelity; // num_qs x num_rx

  int num_tx() const { return tx_count.rows(); }
  int num_qs() const { return tx_count.cols(); }
  int num_rx() const { return rx_count.cols(); }
};

// One end-to-end demand: Tx node `tx` wants a pair with Rx node `rx` at
// fidelity >= min_fidelity, or the request is discarded this slot.
struct Request {
  int id = 0;
  int tx = 0;
  int rx = 0;
  double min_fidelity = 0.5;
};

// Probability that one EPR generation attempt over a fiber of the given
// length succeeds: exp(-d / L0). Throws std::domain_error on d < 0 or
// L0 <= 0.
double link_success_prob(double distance_km, double attenuation_km);

// Draw link lengths i.i.d. U(dist_min_km, dist_max_km). Tx links are drawn
// first in (tx, qs) row-major order, then Rx links in (qs, rx) order.
Topology sample_topology(const ScenarioParams& params, Rng& rng);

// Realize one slot: per link, `attempts` Bernoulli(exp(-d/L0)) generation
// trials followed by one fidelity draw from U(link_fid_low, link_fid_high).
// The fidelity is drawn even for links that realized zero pairs so the
// stream layout does not depend on outcomes.
SlotState sample_slot(const Topology& topology, const ScenarioParams& params, Rng& rng);

// Draw `count` requests with endpoints uniform over nodes. The fidelity
// floor is drawn once per distinct (tx, rx) pair and shared by repeats,
// unless params.independent_fmin is set.
std::vector<Request> sample_requests(int count, const Topology& topology,
                                     const ScenarioParams& params, Rng& rng);

}  // namespace qsmatch
