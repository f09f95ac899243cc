#include "ratekit/arf.hpp"

#include <cmath>

namespace ratekit {

namespace {

constexpr double kUnderflow = 1e-300;
constexpr double kRescaleHigh = 1e200;
constexpr double kRescaleLow = 1e-200;
// Past this many terms the series is evaluated as (1 - x^n)/(1 - x).
constexpr std::int64_t kDirectSumLimit = std::int64_t{1} << 20;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kAlphaOutOfRange, "alpha must lie in (0,1)");
}

void require_thresholds(std::int64_t s, std::int64_t f) {
  if (s < 1 || f < 1) throw Error(ErrorCode::kBadThreshold, "thresholds must be >= 1");
}

}  // namespace

double geometric_sum(double x, std::int64_t n) {
  if (n <= 0) return 0.0;
  if (n > kDirectSumLimit) return (1.0 - std::pow(x, static_cast<double>(n))) / (1.0 - x);
  double sum = 0.0;
  double term = 1.0;
  for (std::int64_t j = 0; j < n; ++j) {
    sum += term;
    term *= x;
  }
  return sum;
}

namespace {

// sum_{j=1}^{n-1} x^j, without the cancellation of subtracting 1.
double tail_sum(double x, std::int64_t n) { return x * geometric_sum(x, n - 1); }

}  // namespace

double expected_transmissions(double alpha, std::int64_t s, std::int64_t f, Position position) {
  require_alpha(alpha);
  require_thresholds(s, f);
  const double q = 1.0 - alpha;
  switch (position) {
    case Position::kLowest:
      return geometric_sum(alpha, s) / std::pow(alpha, static_cast<double>(s));
    case Position::kHighest:
      return geometric_sum(q, f) / std::pow(q, static_cast<double>(f));
    case Position::kInterior: {
      const double numerator = geometric_sum(alpha, s) * geometric_sum(q, f);
      if (s == 1 || f == 1) return numerator;
      const double loop = tail_sum(alpha, s) * tail_sum(q, f);
      return numerator / (1.0 - loop);
    }
  }
  return 0.0;
}

double up_probability(double alpha, std::int64_t s, std::int64_t f) {
  require_alpha(alpha);
  require_thresholds(s, f);
  const double q = 1.0 - alpha;
  const double numerator = std::pow(alpha, static_cast<double>(s)) * geometric_sum(q, f);
  if (s == 1 || f == 1) return numerator;
  const double loop = tail_sum(alpha, s) * tail_sum(q, f);
  return numerator / (1.0 - loop);
}

double mean_sojourn(double xbar, double mean_bits, double rate_bps) {
  if (!(xbar > 0.0 && mean_bits > 0.0 && rate_bps > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "mean_sojourn needs positive inputs");
  return xbar * mean_bits / rate_bps;
}

BirthDeathSolution birth_death_from_ratios(const std::vector<double>& ratios) {
  BirthDeathSolution out;
  std::vector<double>& pi = out.pi;
  pi.reserve(ratios.size() + 1);
  pi.push_back(1.0);
  double running = 1.0;
  for (double ratio : ratios) {
    if (!(ratio > 0.0) || !std::isfinite(ratio))
      throw Error(ErrorCode::kNumeric, "birth-death ratio must be positive and finite");
    running *= ratio;
    if (running > kRescaleHigh || running < kRescaleLow) {
      for (double& v : pi) v /= running;
      running = 1.0;
    }
    pi.push_back(running);
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (double& v : pi) {
    v /= total;
    if (v < kUnderflow) out.underflow = true;
  }
  return out;
}

BirthDeathSolution birth_death_stationary(const std::vector<double>& up) {
  const std::size_t n = up.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "birth-death chain needs at least one state");
  if (n == 1) return {{1.0}, false};
  if (up.front() != 1.0 || up.back() != 0.0)
    throw Error(ErrorCode::kInvalidArgument, "boundary states must reflect (p_{1,2} = p_{N,N-1} = 1)");
  std::vector<double> ratios;
  ratios.reserve(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (k > 0 && !(up[k] > 0.0 && up[k] < 1.0))
      throw Error(ErrorCode::kInvalidArgument, "interior switching probabilities must lie in (0,1)");
    const double down_next = (k + 2 == n) ? 1.0 : 1.0 - up[k + 1];
    ratios.push_back(up[k] / down_next);
  }
  return birth_death_from_ratios(ratios);
}

ThroughputReport arf_throughput(const Scenario& scenario) {
  if (scenario.overhead) throw Error(ErrorCode::kUnsupported, "use arf_mac_throughput for scenarios with overhead");
  const std::size_t n = scenario.num_rates();
  const auto s = scenario.params.base.s;
  const auto f = scenario.params.base.f;

  ThroughputReport report;
  report.algorithm = Algorithm::kArf;
  auto& chain = report.chain;
  if (n == 1) {
    chain.states = {ChainState{StateKind::kRate, 0, 0}};
    chain.pi = {1.0};
    chain.mu = {scenario.traffic.mean_packet_bits / scenario.rate(0)};
    chain.p_time = {1.0};
  } else {
    std::vector<double> up(n);
    for (std::size_t i = 0; i < n; ++i) {
      chain.states.push_back({StateKind::kRate, i, 0});
      const auto position = position_of(i, n);
      up[i] = position == Position::kLowest    ? 1.0
              : position == Position::kHighest ? 0.0
                                               : up_probability(scenario.alpha(i), s, f);
      const double xbar = expected_transmissions(scenario.alpha(i), s, f, position);
      chain.mu.push_back(mean_sojourn(xbar, scenario.traffic.mean_packet_bits, scenario.rate(i)));
    }
    chain.pi = birth_death_stationary(up).pi;
    chain.p_time = semi_markov_time_fractions(chain.pi, chain.mu);
  }
  report.time_fraction = chain.p_time;
  report.throughput_bps = throughput_from_fractions(scenario, report.time_fraction);
  return report;
}

}  // namespace ratekit
