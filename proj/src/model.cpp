#include "ratekit/model.hpp"

#include <cmath>
#include <sstream>

namespace ratekit {

namespace {

std::string join_messages(const std::vector<Issue>& issues) {
  std::ostringstream out;
  for (std::size_t k = 0; k < issues.size(); ++k) {
    if (k) out << "; ";
    out << issues[k].message;
  }
  return out.str();
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonMonotoneRates: return "NonMonotoneRates";
    case ErrorCode::kNonPositiveRate: return "NonPositiveRate";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kBadThreshold: return "BadThreshold";
    case ErrorCode::kThresholdOverflow: return "ThresholdOverflow";
    case ErrorCode::kBadTraffic: return "BadTraffic";
    case ErrorCode::kBadDuration: return "BadDuration";
    case ErrorCode::kCwMaxTooSmall: return "CwMaxTooSmall";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kUnsupported: return "Unsupported";
    case ErrorCode::kNumeric: return "Numeric";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), issues_{Issue{code, message}} {}

Error::Error(std::vector<Issue> issues)
    : std::runtime_error(join_messages(issues)), issues_(std::move(issues)) {
  if (issues_.empty()) issues_.push_back({ErrorCode::kInvalidArgument, "unspecified error"});
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kArf: return "arf";
    case Algorithm::kAarf: return "aarf";
    case Algorithm::kPaarf: return "paarf";
  }
  return "arf";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "arf") return Algorithm::kArf;
  if (name == "aarf") return Algorithm::kAarf;
  if (name == "paarf") return Algorithm::kPaarf;
  return std::nullopt;
}

std::vector<Issue> check(const Scenario& scenario) {
  std::vector<Issue> issues;
  auto add = [&](ErrorCode code, std::string message) {
    issues.push_back({code, std::move(message)});
  };

  const auto& rates = scenario.ladder.rates_bps;
  if (rates.empty()) add(ErrorCode::kLengthMismatch, "rate ladder is empty");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i]))
      add(ErrorCode::kNonPositiveRate, "rate R_" + std::to_string(i + 1) + " must be positive and finite");
  }
  for (std::size_t i = 1; i < rates.size(); ++i) {
    if (!(rates[i - 1] < rates[i])) {
      add(ErrorCode::kNonMonotoneRates, "rates must be strictly increasing (R_" + std::to_string(i) +
                                            " >= R_" + std::to_string(i + 1) + ")");
      break;
    }
  }

  const auto& alphas = scenario.channel.alphas;
  if (alphas.size() != rates.size())
    add(ErrorCode::kLengthMismatch, "alphas has " + std::to_string(alphas.size()) + " entries, rates has " +
                                        std::to_string(rates.size()));
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] < 1.0))
      add(ErrorCode::kAlphaOutOfRange, "alpha_" + std::to_string(i + 1) + " must lie in (0,1)");
  }

  const auto& traffic = scenario.traffic;
  if (!(traffic.mean_packet_bits > 0.0) || !std::isfinite(traffic.mean_packet_bits))
    add(ErrorCode::kBadTraffic, "mean packet length must be positive");
  if (!traffic.empirical.empty()) {
    double total_weight = 0.0;
    double weighted = 0.0;
    bool bins_ok = true;
    for (const auto& bin : traffic.empirical) {
      if (!(bin.bits > 0.0) || !(bin.weight > 0.0)) bins_ok = false;
      total_weight += bin.weight;
      weighted += bin.weight * bin.bits;
    }
    if (!bins_ok) {
      add(ErrorCode::kBadTraffic, "empirical length bins need positive lengths and weights");
    } else {
      const double mean = weighted / total_weight;
      if (std::abs(mean - traffic.mean_packet_bits) > 1e-9 * traffic.mean_packet_bits)
        add(ErrorCode::kBadTraffic, "empirical length distribution mean differs from mean_packet_bits");
    }
  }

  const auto& p = scenario.params;
  if (p.base.s < 1) add(ErrorCode::kBadThreshold, "s must be >= 1");
  if (p.base.f < 1) add(ErrorCode::kBadThreshold, "f must be >= 1");
  if (scenario.algorithm != Algorithm::kArf) {
    if (p.beta_max < 0) {
      add(ErrorCode::kBadThreshold, "beta_max must be >= 0");
    } else if (p.base.s >= 1) {
      // 2^beta_max * s must fit; keep one bit of headroom for run counters.
      if (p.beta_max >= 62 || (p.base.s > (std::int64_t{1} << (62 - p.beta_max))))
        add(ErrorCode::kThresholdOverflow, "2^beta_max * s overflows the threshold counter");
    }
  }

  if (scenario.overhead) {
    const auto& o = *scenario.overhead;
    for (auto [name, value] : {std::pair{"difs", o.difs_s}, std::pair{"sifs", o.sifs_s},
                               std::pair{"t_ack", o.t_ack_s}, std::pair{"slot", o.slot_s}}) {
      if (!(value >= 0.0) || !std::isfinite(value))
        add(ErrorCode::kBadDuration, std::string(name) + " must be a non-negative duration");
    }
    if (o.cw_min < 1) add(ErrorCode::kBadThreshold, "cw_min must be >= 1");
    if (o.gamma_max < 0) add(ErrorCode::kBadThreshold, "gamma_max must be >= 0");
    if (o.cw_min >= 1 && o.gamma_max >= 0) {
      if (o.gamma_max >= 40 || o.cw_min > (std::int64_t{1} << (62 - o.gamma_max))) {
        add(ErrorCode::kThresholdOverflow, "2^gamma_max * cw_min overflows");
      } else if (o.cw_max < (o.cw_min << o.gamma_max) - 1) {
        add(ErrorCode::kCwMaxTooSmall, "cw_max must be >= 2^gamma_max * cw_min - 1");
      }
    }
  }
  return issues;
}

Scenario validate(Scenario scenario) {
  auto issues = check(scenario);
  if (!issues.empty()) throw Error(std::move(issues));
  return scenario;
}

}  // namespace ratekit
