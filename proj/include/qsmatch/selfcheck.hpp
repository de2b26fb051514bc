#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "qsmatch/matching.hpp"
#include "qsmatch/model.hpp"
#include "qsmatch/rng.hpp"

// Executable verification suites: property checks on the fidelity
// calculus, oracle equivalence for both exact solvers, and the swap
// stability guarantee. The CLI `verify` command runs these; failures
// report a replayable witness.
namespace qsmatch::selfcheck {

struct SuiteResult {
  std::string name;
  bool passed = true;
  int checks = 0;
  std::string failure;  // first counterexample, empty when passed
};

struct InstanceLimits {
  int max_requests = 4;
  int max_budget = 4;
  int max_tx = 3;
  int max_rx = 3;
  int max_qs = 1;
};

struct SmallInstance {
  SlotState slot;
  std::vector<Request> requests;
};

// Random instance with budgets, fidelity floors and link fidelities spread
// wide enough to hit unservable requests and repeated demands.
SmallInstance random_small_instance(Rng& rng, const InstanceLimits& limits);

// Swap symmetry/identity/monotonicity, distillation fixed points and
// improvement region, action-fidelity ordering, closure. `distill`
// substitutes the distillation rule (used to prove the suite catches a
// perturbed formula); nullptr means the library implementation.
SuiteResult check_fidelity_identities(int samples, std::uint64_t seed,
                                      std::function<double(double)> distill = nullptr);

// solve_p1 equals exhaustive enumeration, exactly.
SuiteResult check_p1_bruteforce(int instances, std::uint64_t seed);

// solve_optimal (completed search) equals exhaustive assignment
// enumeration, exactly.
SuiteResult check_optimal_bruteforce(int instances, std::uint64_t seed);

// Every converged run passes the exhaustive stability re-scan under the
// same swap-candidate rules.
SuiteResult check_rqsa_stability(int trials, std::span<const int> r_values, std::uint64_t seed,
                                 const MatchConfig& config, const ScenarioParams& params = {});

}  // namespace qsmatch::selfcheck
