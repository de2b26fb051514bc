#include "qsmatch/model.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

namespace qsmatch {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_known_keys(const nlohmann::json& j, std::span<const char* const> allowed,
                      const std::string& context) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown key \"" + item.key() + "\" in " + context);
    }
  }
}

}  // namespace

void ScenarioParams::validate() const {
  require(num_tx >= 1 && num_rx >= 1 && num_qs >= 1, "node counts must be >= 1");
  require(attempts >= 1, "attempts must be >= 1");
  require(attenuation_km > 0.0, "attenuation length must be > 0");
  require(dist_min_km > 0.0 && dist_min_km <= dist_max_km, "bad link-length range");
  require(fmin_low >= 0.25 && fmin_low <= fmin_high && fmin_high <= 1.0,
          "fidelity floors must satisfy 0.25 <= low <= high <= 1");
  require(link_fid_low >= 0.25 && link_fid_low <= link_fid_high && link_fid_high <= 1.0,
          "link fidelities must satisfy 0.25 <= low <= high <= 1");
}

ScenarioParams ScenarioParams::from_json(const nlohmann::json& j) {
  static constexpr const char* kKeys[] = {
      "K",        "M",         "Q",           "n",         "L0_km",
      "dist_min_km", "dist_max_km", "fmin_low", "fmin_high", "link_fid_low",
      "link_fid_high", "seed",   "independent_fmin"};
  check_known_keys(j, kKeys, "scenario");

  ScenarioParams p;
  p.num_tx = j.value("K", p.num_tx);
  p.num_rx = j.value("M", p.num_rx);
  p.num_qs = j.value("Q", p.num_qs);
  p.attempts = j.value("n", p.attempts);
  p.attenuation_km = j.value("L0_km", p.attenuation_km);
  p.dist_min_km = j.value("dist_min_km", p.dist_min_km);
  p.dist_max_km = j.value("dist_max_km", p.dist_max_km);
  p.fmin_low = j.value("fmin_low", p.fmin_low);
  p.fmin_high = j.value("fmin_high", p.fmin_high);
  p.link_fid_low = j.value("link_fid_low", p.link_fid_low);
  p.link_fid_high = j.value("link_fid_high", p.link_fid_high);
  p.seed = j.value("seed", p.seed);
  p.independent_fmin = j.value("independent_fmin", p.independent_fmin);
  p.validate();
  return p;
}

nlohmann::json ScenarioParams::to_json() const {
  return nlohmann::json{{"K", num_tx},
                        {"M", num_rx},
                        {"Q", num_qs},
                        {"n", attempts},
                        {"L0_km", attenuation_km},
                        {"dist_min_km", dist_min_km},
                        {"dist_max_km", dist_max_km},
                        {"fmin_low", fmin_low},
                        {"fmin_high", fmin_high},
                        {"link_fid_low", link_fid_low},
                        {"link_fid_high", link_fid_high},
                        {"seed", seed},
                        {"independent_fmin", independent_fmin}};
}

void Topology::validate() const {
  require(num_tx >= 1 && num_rx >= 1 && num_qs >= 1, "node counts must be >= 1");
  require(attempts >= 1, "attempts must be >= 1");
  require(attenuation_km > 0.0, "attenuation length must be > 0");
  require(tx_distance_km.rows() == num_tx && tx_distance_km.cols() == num_qs,
          "tx distance grid shape mismatch");
  require(rx_distance_km.rows() == num_qs && rx_distance_km.cols() == num_rx,
          "rx distance grid shape mismatch");
  for (double d : tx_distance_km.flat()) require(d > 0.0, "tx distances must be > 0");
  for (double d : rx_distance_km.flat()) require(d > 0.0, "rx distances must be > 0");
}

double link_success_prob(double distance_km, double attenuation_km) {
  if (distance_km < 0.0) throw std::domain_error("negative link length");
  if (attenuation_km <= 0.0) throw std::domain_error("attenuation length must be > 0");
  return std::exp(-distance_km / attenuation_km);
}

Topology sample_topology(const ScenarioParams& params, Rng& rng) {
  params.validate();
  Topology t;
  t.num_tx = params.num_tx;
  t.num_rx = params.num_rx;
  t.num_qs = params.num_qs;
  t.attempts = params.attempts;
  t.attenuation_km = params.attenuation_km;
  t.tx_distance_km = Grid<double>(t.num_tx, t.num_qs);
  t.rx_distance_km = Grid<double>(t.num_qs, t.num_rx);
  for (int k = 0; k < t.num_tx; ++k) {
    for (int q = 0; q < t.num_qs; ++q) {
      t.tx_distance_km.at(k, q) = rng.uniform(params.dist_min_km, params.dist_max_km);
    }
  }
  for (int q = 0; q < t.num_qs; ++q) {
    for (int m = 0; m < t.num_rx; ++m) {
      t.rx_distance_km.at(q, m) = rng.uniform(params.dist_min_km, params.dist_max_km);
    }
  }
  return t;
}

SlotState sample_slot(const Topology& topology, const ScenarioParams& params, Rng& rng) {
  topology.validate();
  SlotState s;
  s.tx_count = Grid<int>(topology.num_tx, topology.num_qs);
  s.tx_fidelity = Grid<double>(topology.num_tx, topology.num_qs);
  s.rx_count = Grid<int>(topology.num_qs, topology.num_rx);
  s.rx_fidelity = Grid<double>(topology.num_qs, topology.num_rx);

  auto realize = [&](double distance) {
    const double p = link_success_prob(distance, topology.attenuation_km);
    int generated = 0;
    for (int attempt = 0; attempt < topology.attempts; ++attempt) {
      if (rng.bernoulli(p)) ++generated;
    }
    return generated;
  };

  for (int k = 0; k < topology.num_tx; ++k) {
    for (int q = 0; q < topology.num_qs; ++q) {
      s.tx_count.at(k, q) = realize(topology.tx_distance_km.at(k, q));
      s.tx_fidelity.at(k, q) = rng.uniform(params.link_fid_low, params.link_fid_high);
    }
  }
  for (int q = 0; q < topology.num_qs; ++q) {
    for (int m = 0; m < topology.num_rx; ++m) {
      s.rx_count.at(q, m) = realize(topology.rx_distance_km.at(q, m));
      s.rx_fidelity.at(q, m) = rng.uniform(params.link_fid_low, params.link_fid_high);
    }
  }
  return s;
}

std::vector<Request> sample_requests(int count, const Topology& topology,
                                     const ScenarioParams& params, Rng& rng) {
  if (count < 0) throw std::invalid_argument("request count must be >= 0");
  std::vector<Request> requests;
  requests.reserve(count);
  // Repeated requests on one (tx, rx) pair come from the same application
  // and share the fidelity floor drawn when the pair first appears.
  std::map<std::pair<int, int>, double> pair_fmin;
  for (int l = 0; l < count; ++l) {
    Request r;
    r.id = l;
    r.tx = rng.uniform_int(topology.num_tx);
    r.rx = rng.uniform_int(topology.num_rx);
    if (params.independent_fmin) {
      r.min_fidelity = rng.uniform(params.fmin_low, params.fmin_high);
    } else {
      auto [it, inserted] = pair_fmin.try_emplace({r.tx, r.rx}, 0.0);
      if (inserted) it->second = rng.uniform(params.fmin_low, params.fmin_high);
      r.min_fidelity = it->second;
    }
    requests.push_back(r);
  }
  return requests;
}

}  // namespace qsmatch
