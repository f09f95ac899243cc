#pragma once

#include "ratekit/chain.hpp"
#include "ratekit/model.hpp"

namespace ratekit {

// Validates the scenario and dispatches to the matching closed-form
// pipeline. AARF/PAARF with overhead have no closed form and throw
// Error(kUnsupported).
ThroughputReport analyze(const Scenario& scenario);

bool has_closed_form(const Scenario& scenario) noexcept;

}  // namespace ratekit
