#include "ratekit/analyze.hpp"

#include "ratekit/aarf.hpp"
#include "ratekit/arf.hpp"
#include "ratekit/mac_overhead.hpp"

namespace ratekit {

bool has_closed_form(const Scenario& scenario) noexcept {
  return scenario.algorithm == Algorithm::kArf || !scenario.overhead;
}

ThroughputReport analyze(const Scenario& scenario) {
  const Scenario checked = validate(scenario);
  if (!has_closed_form(checked))
    throw Error(ErrorCode::kUnsupported, "no closed form for " + std::string(to_string(checked.algorithm)) +
                                             " with MAC overhead; use the simulator");
  if (checked.algorithm == Algorithm::kArf)
    return checked.overhead ? arf_mac_throughput(checked) : arf_throughput(checked);
  return aarf_stationary(checked);
}

}  // namespace ratekit
