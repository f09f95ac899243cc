#include "ratekit/aarf.hpp"

#include <map>

#include "ratekit/arf.hpp"

namespace ratekit {

namespace {

void require_variant(const Scenario& scenario) {
  if (scenario.algorithm == Algorithm::kArf)
    throw Error(ErrorCode::kInvalidArgument, "scenario algorithm must be aarf or paarf");
  if (scenario.overhead)
    throw Error(ErrorCode::kUnsupported, "no closed form for AARF/PAARF with MAC overhead; use the simulator");
}

std::vector<ProbeParams> default_probes(const Scenario& scenario) {
  std::vector<ProbeParams> probes;
  for (std::size_t i = 0; i + 1 < scenario.num_rates(); ++i)
    probes.push_back(probe_params(scenario.alpha(i + 1), scenario.algorithm, scenario.traffic.mean_packet_bits,
                                  scenario.rate(i + 1)));
  return probes;
}

// Per-level fall-back exits for every stage.
std::vector<FallbackExit> level_fallbacks(const Scenario& scenario, std::size_t level) {
  std::vector<FallbackExit> out;
  const auto position = position_of(level, scenario.num_rates());
  for (std::int64_t beta = 0; beta <= scenario.params.beta_max; ++beta)
    out.push_back(fallback_sojourn_and_exit(scenario.alpha(level), beta, scenario.params,
                                            scenario.traffic.mean_packet_bits, scenario.rate(level), position));
  return out;
}

ChainSolution single_rate_solution(const Scenario& scenario) {
  ChainSolution chain;
  chain.states = {ChainState{StateKind::kFallback, 0, 0}};
  chain.pi = {1.0};
  chain.mu = {scenario.traffic.mean_packet_bits / scenario.rate(0)};
  chain.p_time = {1.0};
  return chain;
}

}  // namespace

FallbackExit fallback_sojourn_and_exit(double alpha, std::int64_t beta, const AarfParams& params, double mean_bits,
                                       double rate_bps, Position position) {
  if (beta < 0 || beta > params.beta_max) throw Error(ErrorCode::kInvalidArgument, "stage outside [0, beta_max]");
  const std::int64_t threshold = params.success_threshold(beta);
  FallbackExit out;
  out.expected_transmissions = expected_transmissions(alpha, threshold, params.base.f, position);
  out.mean_sojourn_s = mean_sojourn(out.expected_transmissions, mean_bits, rate_bps);
  switch (position) {
    case Position::kLowest: out.p_toward_probe = 1.0; break;
    case Position::kInterior: out.p_toward_probe = up_probability(alpha, threshold, params.base.f); break;
    case Position::kHighest: throw Error(ErrorCode::kInvalidArgument, "the top rate has no fall-back stages");
  }
  return out;
}

ProbeParams probe_params(double alpha_next, Algorithm variant, double mean_bits, double rate_next_bps) {
  if (!(alpha_next > 0.0 && alpha_next < 1.0)) throw Error(ErrorCode::kAlphaOutOfRange, "alpha must lie in (0,1)");
  const double airtime = mean_bits / rate_next_bps;
  const double miss = 1.0 - alpha_next;
  switch (variant) {
    case Algorithm::kAarf: return {airtime, alpha_next, miss};
    case Algorithm::kPaarf:
      return {(2.0 - alpha_next) * airtime, 2.0 * alpha_next - alpha_next * alpha_next, miss * miss};
    case Algorithm::kArf: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "probe parameters exist only for aarf and paarf");
}

LevelCoefficients level_reduce(const std::vector<double>& p_toward_probe, const std::vector<double>& p_back) {
  if (p_toward_probe.empty() || p_toward_probe.size() != p_back.size())
    throw Error(ErrorCode::kInvalidArgument, "stage vectors must be non-empty and equally long");
  const std::size_t stages = p_toward_probe.size();
  const std::size_t top = stages - 1;

  LevelCoefficients c;
  c.fallback.resize(stages);
  c.probe.resize(stages);
  // With a single stage, i_0 is the reference itself and the probe feeds only
  // back into it, so no loop correction applies.
  if (stages == 1) {
    c.fallback[0] = 1.0;
    c.probe[0] = p_toward_probe[0];
    return c;
  }
  double product = 1.0;
  for (std::size_t b = 0; b < stages; ++b) {
    double fb = product;
    if (b == top) {
      const double loop = 1.0 - p_back[b] * p_toward_probe[b];
      if (!(loop > 0.0)) throw Error(ErrorCode::kNumeric, "degenerate probe loop at the top back-off stage");
      fb /= loop;
    }
    c.fallback[b] = fb;
    c.probe[b] = fb * p_toward_probe[b];
    product *= p_toward_probe[b] * p_back[b];
  }
  return c;
}

ThroughputReport aarf_stationary_with_probes(const Scenario& scenario, const std::vector<ProbeParams>& probes) {
  require_variant(scenario);
  const std::size_t n = scenario.num_rates();
  ThroughputReport report;
  report.algorithm = scenario.algorithm;
  if (n == 1) {
    report.chain = single_rate_solution(scenario);
  } else {
    if (probes.size() != n - 1) throw Error(ErrorCode::kInvalidArgument, "need one probe description per level");
    const std::size_t stages = static_cast<std::size_t>(scenario.params.beta_max) + 1;

    std::vector<std::vector<FallbackExit>> fallbacks(n - 1);
    std::vector<LevelCoefficients> coeffs(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      fallbacks[i] = level_fallbacks(scenario, i);
      std::vector<double> toward(stages), back(stages, probes[i].p_back);
      for (std::size_t b = 0; b < stages; ++b) toward[b] = fallbacks[i][b].p_toward_probe;
      coeffs[i] = level_reduce(toward, back);
    }

    // Flow up out of level i equals flow down out of level i+1.
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double up_flow = 0.0;
      for (double c : coeffs[i].probe) up_flow += c * probes[i].p_up;
      double down_flow = 1.0;  // the top state only exits downward
      if (i + 1 < n - 1) {
        down_flow = 0.0;
        for (std::size_t b = 0; b < stages; ++b)
          down_flow += coeffs[i + 1].fallback[b] * (1.0 - fallbacks[i + 1][b].p_toward_probe);
      }
      ratios.push_back(up_flow / down_flow);
    }
    const auto reference = birth_death_from_ratios(ratios).pi;

    auto& chain = report.chain;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t b = 0; b < stages; ++b) {
        chain.states.push_back({StateKind::kFallback, i, static_cast<std::int64_t>(b)});
        chain.pi.push_back(reference[i] * coeffs[i].fallback[b]);
        chain.mu.push_back(fallbacks[i][b].mean_sojourn_s);
      }
      for (std::size_t b = 0; b < stages; ++b) {
        chain.states.push_back({StateKind::kProbe, i, static_cast<std::int64_t>(b)});
        chain.pi.push_back(reference[i] * coeffs[i].probe[b]);
        chain.mu.push_back(probes[i].mean_sojourn_s);
      }
    }
    chain.states.push_back({StateKind::kFallback, n - 1, 0});
    chain.pi.push_back(reference[n - 1]);
    chain.mu.push_back(mean_sojourn(
        expected_transmissions(scenario.alpha(n - 1), scenario.params.base.s, scenario.params.base.f,
                               Position::kHighest),
        scenario.traffic.mean_packet_bits, scenario.rate(n - 1)));

    double total = 0.0;
    for (double v : chain.pi) total += v;
    for (double& v : chain.pi) v /= total;
    chain.p_time = semi_markov_time_fractions(chain.pi, chain.mu);
  }
  report.time_fraction = aggregate_rate_fractions(report.chain, n);
  report.throughput_bps = throughput_from_fractions(scenario, report.time_fraction);
  return report;
}

ThroughputReport aarf_stationary(const Scenario& scenario) {
  require_variant(scenario);
  return aarf_stationary_with_probes(scenario, default_probes(scenario));
}

ThroughputReport paarf_throughput(const Scenario& scenario) {
  if (scenario.algorithm != Algorithm::kPaarf)
    throw Error(ErrorCode::kInvalidArgument, "paarf_throughput needs a paarf scenario");
  return aarf_stationary(scenario);
}

std::vector<double> aggregate_rate_fractions(const ChainSolution& chain, std::size_t num_rates) {
  std::vector<double> out(num_rates, 0.0);
  for (std::size_t k = 0; k < chain.states.size(); ++k) out.at(chain.states[k].transmit_rate()) += chain.p_time[k];
  return out;
}

AarfLattice build_aarf_lattice(const Scenario& scenario) {
  require_variant(scenario);
  const std::size_t n = scenario.num_rates();
  AarfLattice lattice;
  if (n == 1) {
    lattice.states = {ChainState{StateKind::kFallback, 0, 0}};
    lattice.transition = Eigen::MatrixXd::Ones(1, 1);
    lattice.mu = {scenario.traffic.mean_packet_bits / scenario.rate(0)};
    return lattice;
  }
  const std::int64_t beta_max = scenario.params.beta_max;
  const auto probes = default_probes(scenario);

  std::map<ChainState, Eigen::Index> index;
  auto add = [&](ChainState st, double mu) {
    index[st] = static_cast<Eigen::Index>(lattice.states.size());
    lattice.states.push_back(st);
    lattice.mu.push_back(mu);
  };
  std::vector<std::vector<FallbackExit>> fallbacks(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    fallbacks[i] = level_fallbacks(scenario, i);
    for (std::int64_t b = 0; b <= beta_max; ++b)
      add({StateKind::kFallback, i, b}, fallbacks[i][static_cast<std::size_t>(b)].mean_sojourn_s);
    for (std::int64_t b = 0; b <= beta_max; ++b) add({StateKind::kProbe, i, b}, probes[i].mean_sojourn_s);
  }
  add({StateKind::kFallback, n - 1, 0},
      mean_sojourn(expected_transmissions(scenario.alpha(n - 1), scenario.params.base.s, scenario.params.base.f,
                                          Position::kHighest),
                   scenario.traffic.mean_packet_bits, scenario.rate(n - 1)));

  const auto size = static_cast<Eigen::Index>(lattice.states.size());
  lattice.transition = Eigen::MatrixXd::Zero(size, size);
  auto& P = lattice.transition;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::int64_t b = 0; b <= beta_max; ++b) {
      const auto from = index.at({StateKind::kFallback, i, b});
      const double toward = fallbacks[i][static_cast<std::size_t>(b)].p_toward_probe;
      P(from, index.at({StateKind::kProbe, i, b})) += toward;
      if (i > 0) P(from, index.at({StateKind::kFallback, i - 1, 0})) += 1.0 - toward;

      const auto probe = index.at({StateKind::kProbe, i, b});
      P(probe, index.at({StateKind::kFallback, i + 1, 0})) += probes[i].p_up;
      P(probe, index.at({StateKind::kFallback, i, std::min(b + 1, beta_max)})) += probes[i].p_back;
    }
  }
  P(index.at({StateKind::kFallback, n - 1, 0}), index.at({StateKind::kFallback, n - 2, 0})) = 1.0;
  return lattice;
}

ChainSolution aarf_dense_solve(const Scenario& scenario) {
  auto lattice = build_aarf_lattice(scenario);
  ChainSolution chain;
  chain.pi = dense_stationary(lattice.transition);
  chain.states = std::move(lattice.states);
  chain.mu = std::move(lattice.mu);
  chain.p_time = semi_markov_time_fractions(chain.pi, chain.mu);
  return chain;
}

}  // namespace ratekit
