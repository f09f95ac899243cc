#pragma once

// AARF and PAARF throughput. Each rate level i < N owns fall-back states i_b
// (threshold 2^b * s) and probe states i+_b (one probe round at rate i+1);
// the top rate has the single state N_0. Every level collapses to multiples
// of its stage-0 fall-back probability, and the levels then form a
// birth-death chain.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "ratekit/chain.hpp"
#include "ratekit/model.hpp"

namespace ratekit {

struct FallbackExit {
  double expected_transmissions = 0.0;
  double mean_sojourn_s = 0.0;
  double p_toward_probe = 0.0;  // 1 at the lowest rate
};

// Fall-back state i_beta behaves as an ARF state with s replaced by 2^beta s.
FallbackExit fallback_sojourn_and_exit(double alpha, std::int64_t beta, const AarfParams& params, double mean_bits,
                                       double rate_bps, Position position);

struct ProbeParams {
  double mean_sojourn_s = 0.0;
  double p_up = 0.0;
  double p_back = 0.0;
};

// `variant` must be kAarf (one probe) or kPaarf (second probe only if the
// first one fails).
ProbeParams probe_params(double alpha_next, Algorithm variant, double mean_bits, double rate_next_bps);

struct LevelCoefficients {
  std::vector<double> fallback;  // pi_{i_b} / pi_{i_0}, b = 0..beta_max
  std::vector<double> probe;     // pi_{i+_b} / pi_{i_0}
};

// p_toward_probe[b] = P(i_b -> i+_b), p_back[b] = P(i+_b -> i_{min(b+1, beta_max)}).
// Throws Error(kNumeric) if the top-stage loop is degenerate.
LevelCoefficients level_reduce(const std::vector<double>& p_toward_probe, const std::vector<double>& p_back);

// Collapsed birth-death solution. Requires an AARF or PAARF scenario without
// overhead. time_fraction follows the per-rate aggregation, where probe
// states count toward the rate they transmit at.
ThroughputReport aarf_stationary(const Scenario& scenario);
ThroughputReport paarf_throughput(const Scenario& scenario);

// Same pipeline with explicit per-level probe parameters (probes[i] is the
// probe from level i to i+1).
ThroughputReport aarf_stationary_with_probes(const Scenario& scenario, const std::vector<ProbeParams>& probes);

// Complete embedded chain over every fall-back and probe state, in the same
// state order as the collapsed solution.
struct AarfLattice {
  std::vector<ChainState> states;
  Eigen::MatrixXd transition;
  std::vector<double> mu;
};

AarfLattice build_aarf_lattice(const Scenario& scenario);

// Dense linear solve of the full lattice; an independent route to the same pi.
ChainSolution aarf_dense_solve(const Scenario& scenario);

// Per-rate fractions from per-state time fractions.
std::vector<double> aggregate_rate_fractions(const ChainSolution& chain, std::size_t num_rates);

}  // namespace ratekit
