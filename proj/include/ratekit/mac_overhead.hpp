#pragma once

// ARF throughput including IEEE 802.11 DCF overhead: DIFS/SIFS/ACK time per
// transmission outcome and binary exponential back-off whose counter is
// carried across rate changes.
//
// States are i_g: rate i entered with back-off counter g. Up-exits land in
// (i+1)_0. A down-exit made of f failures with no success since entry
// carries (g + f) mod (g_max + 1); any other down-exit carries f mod
// (g_max + 1). The lowest rate's down-exits loop back to level 1 with the
// updated counter, so its sojourns use the interior micro chain.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ratekit/chain.hpp"
#include "ratekit/micro_chain.hpp"
#include "ratekit/model.hpp"

namespace ratekit {

struct OverheadTimes {
  double t_success_s = 0.0;
  double t_failure_s = 0.0;
  double slot_s = 0.0;
  std::int64_t cw_min = 1;

  // Mean back-off in slots after `gamma` consecutive failures.
  double backoff_slots(std::int64_t gamma) const;
  double backoff_s(std::int64_t gamma) const { return backoff_slots(gamma) * slot_s; }
};

OverheadTimes overhead_times(const MacOverheadParams& params);

// Expected visits to each run position of the plain micro chain; indexed by
// run via MicroChainSolution::visits_at.
MicroChainSolution expected_visits(double alpha, std::int64_t s, std::int64_t f, Position position);

// Micro-chain shape used for rate `index` when overhead is modelled.
MicroShape overhead_shape(std::size_t index, std::size_t num_rates);

// Mean sojourn of state i_gamma including all overhead.
double sojourn_with_overhead(std::size_t index, std::int64_t gamma, const Scenario& scenario);

// Mean transmission airtime of a sojourn at rate `index` (independent of gamma).
double airtime_per_sojourn(std::size_t index, const Scenario& scenario);

struct OverheadTransition {
  ChainState to;
  double probability = 0.0;
};

// Successor distribution of i_gamma; targets with equal state are merged.
std::vector<OverheadTransition> overhead_transitions(std::size_t index, std::int64_t gamma, const Scenario& scenario);

struct OverheadChain {
  std::vector<ChainState> states;
  Eigen::MatrixXd transition;
};

OverheadChain build_overhead_chain(const Scenario& scenario);

// Full pipeline: chain solve, theta/mu per state, g_i and tau.
ThroughputReport arf_mac_throughput(const Scenario& scenario);

}  // namespace ratekit
