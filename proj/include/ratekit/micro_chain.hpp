#pragma once

// Absorbing chain of ARF's run counters while the rate stays fixed.
//
// Run r > 0 means r consecutive successes, r < 0 means |r| consecutive
// failures, r = 0 is the entry position. The chain terminates when the run
// reaches +s (move up) or -f (move down). Solving it directly gives the
// expected transmission count, the exit split, and the expected number of
// visits to every run position.

#include <cstdint>
#include <vector>

#include "ratekit/model.hpp"

namespace ratekit {

enum class MicroShape {
  kSuccessOnly,  // lowest rate: failures only reset the success run
  kBoth,         // interior rate
  kFailureOnly,  // highest rate: successes only reset the failure run
};

MicroShape shape_for(Position position);

struct MicroState {
  // Set once any transmission inside the sojourn has succeeded. Only
  // distinguished when the chain is solved with phase tracking.
  bool after_success = false;
  std::int64_t run = 0;
};

struct MicroChainSolution {
  std::vector<MicroState> states;
  std::vector<double> visits;  // expected visits starting from the entry state
  double expected_transmissions = 0.0;
  double p_up = 0.0;
  double p_down_immediate = 0.0;      // f failures with no success since entry
  double p_down_after_success = 0.0;  // f failures after at least one success

  double p_down() const noexcept { return p_down_immediate + p_down_after_success; }

  // Expected visits to run position `run`, summed over phases.
  double visits_at(std::int64_t run) const;
};

// Direct linear solve of the absorbing chain. With track_phase the state space
// is split into before/after the first success, which is what separates the
// two down-exit kinds and the back-off counter carried into the sojourn.
MicroChainSolution solve_micro_chain(double alpha, std::int64_t s, std::int64_t f, MicroShape shape,
                                     bool track_phase = false);

inline MicroChainSolution micro_chain_solve(double alpha, std::int64_t s, std::int64_t f, Position position) {
  return solve_micro_chain(alpha, s, f, shape_for(position));
}

}  // namespace ratekit
