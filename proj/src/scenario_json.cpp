#include "ratekit/scenario_json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace ratekit {

namespace {

using nlohmann::json;

constexpr double kMicro = 1e-6;

[[noreturn]] void parse_error(const std::string& message) { throw Error(ErrorCode::kParse, message); }

const json& require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) parse_error(std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& value, const char* key) {
  if (!value.is_number()) parse_error(std::string("field '") + key + "' must be a number");
  return value.get<double>();
}

std::int64_t integer(const json& value, const char* key) {
  if (!value.is_number()) parse_error(std::string("field '") + key + "' must be an integer");
  const double v = value.get<double>();
  if (!(std::fabs(v) < 0x1p62) || v != std::trunc(v))
    parse_error(std::string("field '") + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::vector<double> number_array(const json& value, const char* key) {
  if (!value.is_array()) parse_error(std::string("field '") + key + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& item : value) out.push_back(number(item, key));
  return out;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) parse_error("scenario must be a JSON object");

  Scenario sc;
  sc.ladder.rates_bps = number_array(require(doc, "rates_bps"), "rates_bps");
  sc.channel.alphas = number_array(require(doc, "alphas"), "alphas");
  sc.traffic.mean_packet_bits = number(require(doc, "mean_packet_bits"), "mean_packet_bits");

  const auto& algo = require(doc, "algorithm");
  if (!algo.is_string()) parse_error("field 'algorithm' must be a string");
  auto parsed = parse_algorithm(algo.get<std::string>());
  if (!parsed) parse_error("unknown algorithm '" + algo.get<std::string>() + "'");
  sc.algorithm = *parsed;

  sc.params.base.s = integer(require(doc, "s"), "s");
  sc.params.base.f = integer(require(doc, "f"), "f");
  if (auto it = doc.find("beta_max"); it != doc.end()) sc.params.beta_max = integer(*it, "beta_max");

  if (auto it = doc.find("packet_lengths"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) parse_error("field 'packet_lengths' must be an array");
    for (const auto& bin : *it) {
      if (!bin.is_object()) parse_error("packet_lengths entries must be objects");
      sc.traffic.empirical.push_back(
          {number(require(bin, "bits"), "bits"), number(require(bin, "weight"), "weight")});
    }
  }

  if (auto it = doc.find("overhead"); it != doc.end() && !it->is_null()) {
    const json& o = *it;
    if (!o.is_object()) parse_error("field 'overhead' must be an object");
    MacOverheadParams mac;
    mac.difs_s = number(require(o, "difs_us"), "difs_us") * kMicro;
    mac.sifs_s = number(require(o, "sifs_us"), "sifs_us") * kMicro;
    mac.t_ack_s = number(require(o, "t_ack_us"), "t_ack_us") * kMicro;
    mac.cw_min = integer(require(o, "cw_min"), "cw_min");
    mac.cw_max = integer(require(o, "cw_max"), "cw_max");
    mac.gamma_max = integer(require(o, "gamma_max"), "gamma_max");
    if (auto slot = o.find("slot_us"); slot != o.end()) mac.slot_s = number(*slot, "slot_us") * kMicro;
    sc.overhead = mac;
  }
  return sc;
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_error(std::string("invalid JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": invalid JSON: " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json_file(path)); }

json to_json(const Scenario& sc) {
  json doc;
  doc["rates_bps"] = sc.ladder.rates_bps;
  doc["alphas"] = sc.channel.alphas;
  doc["mean_packet_bits"] = sc.traffic.mean_packet_bits;
  doc["algorithm"] = std::string(to_string(sc.algorithm));
  doc["s"] = sc.params.base.s;
  doc["f"] = sc.params.base.f;
  if (sc.algorithm != Algorithm::kArf) doc["beta_max"] = sc.params.beta_max;
  if (!sc.traffic.empirical.empty()) {
    json bins = json::array();
    for (const auto& bin : sc.traffic.empirical) bins.push_back({{"bits", bin.bits}, {"weight", bin.weight}});
    doc["packet_lengths"] = bins;
  }
  if (sc.overhead) {
    const auto& o = *sc.overhead;
    doc["overhead"] = {{"difs_us", o.difs_s / kMicro}, {"sifs_us", o.sifs_s / kMicro},
                       {"t_ack_us", o.t_ack_s / kMicro}, {"cw_min", o.cw_min},
                       {"cw_max", o.cw_max},          {"gamma_max", o.gamma_max},
                       {"slot_us", o.slot_s / kMicro}};
  }
  return doc;
}

}  // namespace ratekit
