#pragma once

// Closed-form ARF analysis: per-rate expected transmission counts, the
// upward switching probability, birth-death stationary probabilities and the
// resulting throughput.

#include <cstdint>
#include <vector>

#include "ratekit/chain.hpp"
#include "ratekit/model.hpp"

namespace ratekit {

// sum_{j=0}^{n-1} x^j by direct summation.
double geometric_sum(double x, std::int64_t n);

// Mean number of transmissions per sojourn at one rate, entering with both
// runs at zero. Lowest uses only s, highest only f.
double expected_transmissions(double alpha, std::int64_t s, std::int64_t f, Position position);

// Probability that an interior-rate sojourn ends by moving up.
double up_probability(double alpha, std::int64_t s, std::int64_t f);

// mu = xbar * mean_bits / rate.
double mean_sojourn(double xbar, double mean_bits, double rate_bps);

struct BirthDeathSolution {
  std::vector<double> pi;
  bool underflow = false;  // some stationary term fell below 1e-300
};

// `up` holds p_{i,i+1} for each state; p_{i,i-1} = 1 - p_{i,i+1} except at
// the top, where the only exit is downward. Requires up[0] == 1 and
// up[N-1] == 0 when N >= 2, interior entries in (0,1).
BirthDeathSolution birth_death_stationary(const std::vector<double>& up);

// Stationary law of a birth-death chain given the neighbour ratios
// pi_{i+1} / pi_i. Products are accumulated with running rescaling.
BirthDeathSolution birth_death_from_ratios(const std::vector<double>& ratios);

// Throughput of ARF on a validated scenario without MAC overhead.
ThroughputReport arf_throughput(const Scenario& scenario);

}  // namespace ratekit
