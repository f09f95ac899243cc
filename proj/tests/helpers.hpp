#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ratekit/model.hpp"

namespace testing_support {

inline ratekit::Scenario make_scenario(std::vector<double> rates, std::vector<double> alphas,
                                       ratekit::Algorithm algo = ratekit::Algorithm::kArf, std::int64_t s = 10,
                                       std::int64_t f = 2, std::int64_t beta_max = 3, bool overhead = false,
                                       double bits = 8000.0) {
  ratekit::Scenario sc;
  sc.ladder.rates_bps = std::move(rates);
  sc.channel.alphas = std::move(alphas);
  sc.traffic.mean_packet_bits = bits;
  sc.algorithm = algo;
  sc.params.base = {s, f};
  sc.params.beta_max = beta_max;
  if (overhead) sc.overhead = ratekit::MacOverheadParams::ieee80211b();
  return sc;
}

}  // namespace testing_support
