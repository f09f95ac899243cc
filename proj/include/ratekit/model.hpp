#pragma once

// Scenario inputs shared by the analytic solvers and the packet simulator.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ratekit {

enum class ErrorCode {
  kNonMonotoneRates,
  kNonPositiveRate,
  kAlphaOutOfRange,
  kLengthMismatch,
  kBadThreshold,
  kThresholdOverflow,
  kBadTraffic,
  kBadDuration,
  kCwMaxTooSmall,
  kParse,
  kUnsupported,
  kNumeric,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

struct Issue {
  ErrorCode code;
  std::string message;
};

// Thrown by every fallible operation in the C++ core. Validation failures
// carry the complete issue list; other failures carry a single issue.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  explicit Error(std::vector<Issue> issues);

  ErrorCode code() const noexcept { return issues_.front().code; }
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

struct RateLadder {
  std::vector<double> rates_bps;  // R_1 < R_2 < ... < R_N

  std::size_t size() const noexcept { return rates_bps.size(); }
};

struct ChannelModel {
  std::vector<double> alphas;  // per-rate success probability, open interval (0,1)
};

struct LengthBin {
  double bits = 0.0;
  double weight = 0.0;
};

// Analytic results depend only on the mean length. The empirical table, when
// non-empty, is what the simulator samples from.
struct TrafficModel {
  double mean_packet_bits = 8000.0;
  std::vector<LengthBin> empirical;

  bool deterministic() const noexcept { return empirical.empty(); }
};

struct ArfParams {
  std::int64_t s = 10;  // consecutive successes before moving up
  std::int64_t f = 2;   // consecutive failures before moving down
};

struct AarfParams {
  ArfParams base;
  std::int64_t beta_max = 3;

  // b_beta = 2^beta * s. Caller guarantees 0 <= beta <= beta_max on a
  // validated scenario.
  std::int64_t success_threshold(std::int64_t beta) const noexcept {
    return base.s << beta;
  }
};

struct MacOverheadParams {
  double difs_s = 50e-6;
  double sifs_s = 10e-6;
  double t_ack_s = 112e-6;
  std::int64_t cw_min = 32;
  std::int64_t cw_max = 1023;
  std::int64_t gamma_max = 5;
  double slot_s = 20e-6;

  // IEEE 802.11b DSSS values.
  static MacOverheadParams ieee80211b() { return {}; }
};

enum class Algorithm { kArf, kAarf, kPaarf };

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct Scenario {
  RateLadder ladder;
  ChannelModel channel;
  TrafficModel traffic;
  Algorithm algorithm = Algorithm::kArf;
  AarfParams params;  // beta_max is ignored for ARF
  std::optional<MacOverheadParams> overhead;

  std::size_t num_rates() const noexcept { return ladder.size(); }
  double rate(std::size_t i) const { return ladder.rates_bps.at(i); }
  double alpha(std::size_t i) const { return channel.alphas.at(i); }
};

// Every violated invariant, in a stable order. Empty means valid.
std::vector<Issue> check(const Scenario& scenario);

// Returns the scenario unchanged when valid; otherwise throws Error carrying
// all issues found by check().
Scenario validate(Scenario scenario);

// Location of a rate inside the ladder, which selects the micro-chain shape.
enum class Position { kLowest, kInterior, kHighest };

inline Position position_of(std::size_t index, std::size_t num_rates) {
  if (index == 0) return Position::kLowest;
  if (index + 1 == num_rates) return Position::kHighest;
  return Position::kInterior;
}

}  // namespace ratekit
