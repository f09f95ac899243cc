#pragma once

// Scenario <-> JSON. Field names:
//   rates_bps, alphas, mean_packet_bits, algorithm ("arf"|"aarf"|"paarf"),
//   s, f, beta_max (optional), packet_lengths (optional [{bits, weight}]),
//   overhead (optional {difs_us, sifs_us, t_ack_us, cw_min, cw_max,
//   gamma_max, slot_us}).
// Parsing checks types only; call validate() for the model invariants.

#include <json.hpp>

#include <filesystem>
#include <string_view>

#include "ratekit/model.hpp"

namespace ratekit {

Scenario scenario_from_json(const nlohmann::json& doc);
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const Scenario& scenario);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace ratekit
