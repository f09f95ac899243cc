#include "ratekit/mac_overhead.hpp"

#include <map>

#include "ratekit/arf.hpp"

namespace ratekit {

namespace {

const MacOverheadParams& require_overhead(const Scenario& scenario) {
  if (!scenario.overhead) throw Error(ErrorCode::kInvalidArgument, "scenario has no MAC overhead parameters");
  return *scenario.overhead;
}

std::int64_t wrap(std::int64_t counter, const MacOverheadParams& mac) { return counter % (mac.gamma_max + 1); }

// Back-off counter in force while transmitting from a micro state of a
// sojourn entered with counter `gamma`.
std::int64_t counter_at(const MicroState& state, std::int64_t gamma, const MacOverheadParams& mac) {
  const std::int64_t failures = state.run < 0 ? -state.run : 0;
  return wrap(state.after_success ? failures : gamma + failures, mac);
}

Position closed_form_position(MicroShape shape) {
  switch (shape) {
    case MicroShape::kSuccessOnly: return Position::kLowest;
    case MicroShape::kFailureOnly: return Position::kHighest;
    case MicroShape::kBoth: return Position::kInterior;
  }
  return Position::kInterior;
}

}  // namespace

double OverheadTimes::backoff_slots(std::int64_t gamma) const {
  return (static_cast<double>(cw_min << gamma) - 1.0) / 2.0;
}

OverheadTimes overhead_times(const MacOverheadParams& params) {
  OverheadTimes t;
  t.t_success_s = params.difs_s + params.sifs_s + params.t_ack_s;
  t.t_failure_s = params.difs_s;
  t.slot_s = params.slot_s;
  t.cw_min = params.cw_min;
  return t;
}

MicroChainSolution expected_visits(double alpha, std::int64_t s, std::int64_t f, Position position) {
  return solve_micro_chain(alpha, s, f, shape_for(position));
}

MicroShape overhead_shape(std::size_t index, std::size_t num_rates) {
  if (num_rates > 1 && index + 1 == num_rates) return MicroShape::kFailureOnly;
  return MicroShape::kBoth;
}

double sojourn_with_overhead(std::size_t index, std::int64_t gamma, const Scenario& scenario) {
  const auto& mac = require_overhead(scenario);
  if (gamma < 0 || gamma > mac.gamma_max) throw Error(ErrorCode::kInvalidArgument, "gamma outside [0, gamma_max]");
  const auto times = overhead_times(mac);
  const double alpha = scenario.alpha(index);
  const auto sol = solve_micro_chain(alpha, scenario.params.base.s, scenario.params.base.f,
                                     overhead_shape(index, scenario.num_rates()), /*track_phase=*/true);
  const double airtime = scenario.traffic.mean_packet_bits / scenario.rate(index);
  const double outcome = alpha * times.t_success_s + (1.0 - alpha) * times.t_failure_s;
  double mu = 0.0;
  for (std::size_t k = 0; k < sol.states.size(); ++k)
    mu += sol.visits[k] * (airtime + times.backoff_s(counter_at(sol.states[k], gamma, mac)) + outcome);
  return mu;
}

double airtime_per_sojourn(std::size_t index, const Scenario& scenario) {
  const auto position = closed_form_position(overhead_shape(index, scenario.num_rates()));
  const double xbar =
      expected_transmissions(scenario.alpha(index), scenario.params.base.s, scenario.params.base.f, position);
  return mean_sojourn(xbar, scenario.traffic.mean_packet_bits, scenario.rate(index));
}

std::vector<OverheadTransition> overhead_transitions(std::size_t index, std::int64_t gamma,
                                                     const Scenario& scenario) {
  const auto& mac = require_overhead(scenario);
  if (gamma < 0 || gamma > mac.gamma_max) throw Error(ErrorCode::kInvalidArgument, "gamma outside [0, gamma_max]");
  const std::size_t n = scenario.num_rates();
  const auto f = scenario.params.base.f;
  const auto sol = solve_micro_chain(scenario.alpha(index), scenario.params.base.s, f, overhead_shape(index, n),
                                     /*track_phase=*/true);

  const std::size_t up_level = index + 1 < n ? index + 1 : index;
  const std::size_t down_level = index > 0 ? index - 1 : 0;
  std::map<ChainState, double> merged;
  if (sol.p_up > 0.0) merged[{StateKind::kBackoff, up_level, 0}] += sol.p_up;
  if (sol.p_down_immediate > 0.0)
    merged[{StateKind::kBackoff, down_level, wrap(gamma + f, mac)}] += sol.p_down_immediate;
  if (sol.p_down_after_success > 0.0)
    merged[{StateKind::kBackoff, down_level, wrap(f, mac)}] += sol.p_down_after_success;

  std::vector<OverheadTransition> out;
  for (const auto& [state, p] : merged) out.push_back({state, p});
  return out;
}

OverheadChain build_overhead_chain(const Scenario& scenario) {
  const auto& mac = require_overhead(scenario);
  const std::size_t n = scenario.num_rates();
  const std::size_t stages = static_cast<std::size_t>(mac.gamma_max) + 1;
  OverheadChain chain;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t g = 0; g < stages; ++g)
      chain.states.push_back({StateKind::kBackoff, i, static_cast<std::int64_t>(g)});

  const auto size = static_cast<Eigen::Index>(chain.states.size());
  auto position = [&](const ChainState& st) {
    return static_cast<Eigen::Index>(st.rate * stages + static_cast<std::size_t>(st.stage));
  };
  chain.transition = Eigen::MatrixXd::Zero(size, size);
  for (const auto& from : chain.states)
    for (const auto& edge : overhead_transitions(from.rate, from.stage, scenario))
      chain.transition(position(from), position(edge.to)) += edge.probability;
  return chain;
}

ThroughputReport arf_mac_throughput(const Scenario& scenario) {
  require_overhead(scenario);
  if (scenario.algorithm != Algorithm::kArf)
    throw Error(ErrorCode::kUnsupported, "closed-form overhead analysis exists only for ARF");
  const std::size_t n = scenario.num_rates();

  auto built = build_overhead_chain(scenario);
  ThroughputReport report;
  report.algorithm = Algorithm::kArf;
  report.with_overhead = true;
  auto& chain = report.chain;
  chain.pi = dense_stationary(built.transition);
  chain.states = std::move(built.states);

  std::vector<double> airtime(n);
  for (std::size_t i = 0; i < n; ++i) airtime[i] = airtime_per_sojourn(i, scenario);
  for (const auto& st : chain.states) {
    chain.mu.push_back(sojourn_with_overhead(st.rate, st.stage, scenario));
    chain.theta.push_back(airtime[st.rate]);
  }
  chain.p_time = semi_markov_time_fractions(chain.pi, chain.mu);

  double total_time = 0.0;
  for (std::size_t k = 0; k < chain.states.size(); ++k) total_time += chain.pi[k] * chain.mu[k];
  report.time_fraction.assign(n, 0.0);
  for (std::size_t k = 0; k < chain.states.size(); ++k)
    report.time_fraction[chain.states[k].rate] += chain.pi[k] * chain.theta[k] / total_time;
  report.throughput_bps = throughput_from_fractions(scenario, report.time_fraction);
  return report;
}

}  // namespace ratekit
