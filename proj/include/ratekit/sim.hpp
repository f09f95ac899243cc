#pragma once

// Packet-level Monte Carlo simulator. ARF, AARF and PAARF run as literal
// per-transmission state machines over independent Bernoulli channels, with
// optional DCF timing (DIFS/SIFS/ACK and uniform back-off draws).
//
// Random numbers are counter based: the u64 used for lane L of transmission t
// is splitmix64_finalize(key + (4t + L + 1) * 0x9E3779B97F4A7C15) with
// key = splitmix64_finalize(seed). Lanes: 0 outcome, 1 back-off, 2 length.
// A run is therefore a pure function of (scenario, n_packets, seed, warmup).

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ratekit/chain.hpp"
#include "ratekit/model.hpp"

namespace ratekit {

struct SimConfig {
  Scenario scenario;
  std::uint64_t n_packets = 1'000'000;  // transmissions, probes included
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> warmup_packets;  // default: 1% of n_packets
  std::uint64_t batches = 50;

  std::uint64_t warmup() const noexcept { return warmup_packets.value_or(n_packets / 100); }
};

// Throws Error on an invalid scenario or n_packets == 0 or warmup >= n_packets.
void check_config(const SimConfig& config);

struct SojournStats {
  std::uint64_t count = 0;
  double total_s = 0.0;
  double total_sq_s2 = 0.0;

  double mean() const noexcept { return count ? total_s / static_cast<double>(count) : 0.0; }
  double stderr_of_mean() const noexcept;

  bool operator==(const SojournStats&) const = default;
};

struct ProbeStats {
  std::uint64_t visits = 0;
  std::uint64_t single = 0;        // visits with exactly one probe transmission
  std::uint64_t two = 0;           // visits with two probe transmissions
  std::uint64_t second_after_success = 0;
  std::uint64_t threshold_mismatches = 0;  // success run at probe entry != 2^beta s
  std::map<std::int64_t, std::uint64_t> entries_by_stage;

  bool operator==(const ProbeStats&) const = default;
};

using Edge = std::pair<ChainState, ChainState>;

struct SimResult {
  double throughput_est = 0.0;
  double throughput_stderr = 0.0;
  // Share of wall time attributed to each rate, overhead included; sums to 1.
  std::vector<double> time_fraction_est;
  std::vector<double> time_fraction_stderr;
  // Share of wall time spent transmitting data at each rate (the g_i of the
  // overhead model); equals time_fraction_est when overhead is off.
  std::vector<double> airtime_fraction_est;
  std::vector<double> airtime_fraction_stderr;
  std::map<Edge, std::uint64_t> transition_counts;
  std::map<ChainState, SojournStats> sojourns;
  ProbeStats probes;
  double total_sim_time = 0.0;
  std::uint64_t transmissions = 0;
  std::uint64_t delivered = 0;
  std::uint64_t batches = 0;

  bool operator==(const SimResult&) const = default;
};

SimResult simulate(const SimConfig& config);

struct TransitionEstimate {
  double probability = 0.0;
  double stderr_ = 0.0;
  std::uint64_t traversals = 0;
  std::uint64_t exits = 0;
};

// Share of observed exits from edge.first that went to edge.second, with the
// binomial standard error. Throws Error(kInvalidArgument) if the source
// state was never exited.
TransitionEstimate estimate_transition_probability(const SimResult& result, const Edge& edge);
TransitionEstimate estimate_transition_probability(const SimConfig& config, const Edge& edge);

}  // namespace ratekit
