#pragma once

// Embedded-chain states, solutions and the semi-Markov time-fraction rule
// shared by all analytic pipelines.

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "ratekit/model.hpp"

namespace ratekit {

enum class StateKind {
  kRate,      // ARF state i
  kFallback,  // AARF/PAARF fall-back state i_beta
  kProbe,     // AARF/PAARF probe state i^{+1}_beta, transmitting at rate i+1
  kBackoff,   // ARF-with-overhead state i_gamma
};

struct ChainState {
  StateKind kind = StateKind::kRate;
  std::size_t rate = 0;     // zero-based index of the owning rate level
  std::int64_t stage = 0;   // beta for fall-back/probe, gamma for back-off

  auto operator<=>(const ChainState&) const = default;

  // Rate actually used for transmissions while in this state.
  std::size_t transmit_rate() const noexcept { return kind == StateKind::kProbe ? rate + 1 : rate; }

  // Human-readable, one-based: "2", "1_b3", "1+_b0", "3_g5".
  std::string label() const;
};

struct ChainSolution {
  std::vector<ChainState> states;
  std::vector<double> pi;      // embedded-chain stationary probabilities
  std::vector<double> mu;      // mean sojourn per state, seconds
  std::vector<double> p_time;  // long-run fraction of time per state
  std::vector<double> theta;   // mean transmission airtime per sojourn (overhead model only)
};

struct ThroughputReport {
  Algorithm algorithm = Algorithm::kArf;
  bool with_overhead = false;
  // f_i, or g_i when overhead is modelled (then the sum is below one).
  std::vector<double> time_fraction;
  double throughput_bps = 0.0;
  ChainSolution chain;
};

// p_k = pi_k mu_k / sum_j pi_j mu_j.
std::vector<double> semi_markov_time_fractions(const std::vector<double>& pi, const std::vector<double>& mu);

// tau = sum_i fraction_i alpha_i R_i.
double throughput_from_fractions(const Scenario& scenario, const std::vector<double>& fractions);

// Stationary distribution of a row-stochastic matrix by a dense solve of
// pi (P - I) = 0 with one balance equation replaced by normalization.
// Throws Error(kNumeric) if the system is singular.
std::vector<double> dense_stationary(const Eigen::MatrixXd& transition);

// Largest |(pi P)_k - pi_k|.
double balance_residual(const Eigen::MatrixXd& transition, const std::vector<double>& pi);

}  // namespace ratekit
