#include "ratekit/ratekit.h"

#include <json.hpp>

#include <cstring>
#include <memory>
#include <string>

#include "ratekit/analyze.hpp"
#include "ratekit/arf.hpp"
#include "ratekit/scenario_json.hpp"
#include "ratekit/sim.hpp"
#include "ratekit/sweep.hpp"

struct ratekit_scenario {
  ratekit::Scenario value;
};
struct ratekit_issues {
  std::vector<ratekit::Issue> value;
};
struct ratekit_report {
  ratekit::ThroughputReport value;
};
struct ratekit_sim_result {
  ratekit::SimResult value;
};
struct ratekit_sweep {
  ratekit::SweepSpec value;
};
struct ratekit_table {
  ratekit::SweepTable value;
};

namespace {

using nlohmann::json;

thread_local std::string g_last_error;

ratekit_status to_status(ratekit::ErrorCode code) {
  using ratekit::ErrorCode;
  switch (code) {
    case ErrorCode::kNonMonotoneRates: return RATEKIT_E_NONMONOTONE_RATES;
    case ErrorCode::kNonPositiveRate: return RATEKIT_E_NONPOSITIVE_RATE;
    case ErrorCode::kAlphaOutOfRange: return RATEKIT_E_ALPHA_OUT_OF_RANGE;
    case ErrorCode::kLengthMismatch: return RATEKIT_E_LENGTH_MISMATCH;
    case ErrorCode::kBadThreshold: return RATEKIT_E_BAD_THRESHOLD;
    case ErrorCode::kThresholdOverflow: return RATEKIT_E_THRESHOLD_OVERFLOW;
    case ErrorCode::kBadTraffic: return RATEKIT_E_BAD_TRAFFIC;
    case ErrorCode::kBadDuration: return RATEKIT_E_BAD_DURATION;
    case ErrorCode::kCwMaxTooSmall: return RATEKIT_E_CW_MAX_TOO_SMALL;
    case ErrorCode::kParse: return RATEKIT_E_PARSE;
    case ErrorCode::kUnsupported: return RATEKIT_E_UNSUPPORTED;
    case ErrorCode::kNumeric: return RATEKIT_E_NUMERIC;
    case ErrorCode::kInvalidArgument: return RATEKIT_E_INVALID_ARGUMENT;
    case ErrorCode::kIo: return RATEKIT_E_IO;
  }
  return RATEKIT_E_INTERNAL;
}

ratekit_status fail(ratekit_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class Body>
ratekit_status guarded(Body&& body) {
  try {
    body();
    return RATEKIT_OK;
  } catch (const ratekit::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(RATEKIT_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RATEKIT_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RATEKIT_E_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& text) {
  auto* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

#define RATEKIT_REQUIRE(cond)                                                      \
  do {                                                                             \
    if (!(cond)) return fail(RATEKIT_E_INVALID_ARGUMENT, "null or invalid argument: " #cond); \
  } while (0)

json report_json(const ratekit::ThroughputReport& r) {
  json states = json::array();
  for (std::size_t k = 0; k < r.chain.states.size(); ++k) {
    json st = {{"state", r.chain.states[k].label()},
               {"pi", r.chain.pi[k]},
               {"mu_s", r.chain.mu[k]},
               {"p_time", r.chain.p_time[k]}};
    if (k < r.chain.theta.size()) st["theta_s"] = r.chain.theta[k];
    states.push_back(std::move(st));
  }
  return {{"algorithm", std::string(ratekit::to_string(r.algorithm))},
          {"with_overhead", r.with_overhead},
          {"throughput_bps", r.throughput_bps},
          {"time_fraction", r.time_fraction},
          {"states", std::move(states)}};
}

json sim_json(const ratekit::SimResult& r) {
  json transitions = json::array();
  for (const auto& [edge, count] : r.transition_counts)
    transitions.push_back({{"from", edge.first.label()}, {"to", edge.second.label()}, {"count", count}});
  json probes = {{"visits", r.probes.visits},
                 {"single", r.probes.single},
                 {"two", r.probes.two},
                 {"threshold_mismatches", r.probes.threshold_mismatches}};
  return {{"throughput_bps", r.throughput_est},
          {"throughput_stderr_bps", r.throughput_stderr},
          {"time_fraction", r.time_fraction_est},
          {"time_fraction_stderr", r.time_fraction_stderr},
          {"airtime_fraction", r.airtime_fraction_est},
          {"airtime_fraction_stderr", r.airtime_fraction_stderr},
          {"total_sim_time_s", r.total_sim_time},
          {"transmissions", r.transmissions},
          {"delivered", r.delivered},
          {"batches", r.batches},
          {"transitions", std::move(transitions)},
          {"probes", std::move(probes)}};
}

std::size_t copy_values(const std::vector<double>& values, double* dst, std::size_t n) {
  if (dst)
    for (std::size_t i = 0; i < n && i < values.size(); ++i) dst[i] = values[i];
  return values.size();
}

}  // namespace

extern "C" {

const char* ratekit_last_error(void) { return g_last_error.c_str(); }

const char* ratekit_status_name(ratekit_status status) {
  switch (status) {
    case RATEKIT_OK: return "OK";
    case RATEKIT_E_NONMONOTONE_RATES: return "NonMonotoneRates";
    case RATEKIT_E_NONPOSITIVE_RATE: return "NonPositiveRate";
    case RATEKIT_E_ALPHA_OUT_OF_RANGE: return "AlphaOutOfRange";
    case RATEKIT_E_LENGTH_MISMATCH: return "LengthMismatch";
    case RATEKIT_E_BAD_THRESHOLD: return "BadThreshold";
    case RATEKIT_E_THRESHOLD_OVERFLOW: return "ThresholdOverflow";
    case RATEKIT_E_BAD_TRAFFIC: return "BadTraffic";
    case RATEKIT_E_BAD_DURATION: return "BadDuration";
    case RATEKIT_E_CW_MAX_TOO_SMALL: return "CwMaxTooSmall";
    case RATEKIT_E_PARSE: return "Parse";
    case RATEKIT_E_UNSUPPORTED: return "Unsupported";
    case RATEKIT_E_NUMERIC: return "Numeric";
    case RATEKIT_E_INVALID_ARGUMENT: return "InvalidArgument";
    case RATEKIT_E_IO: return "Io";
    case RATEKIT_E_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* ratekit_version(void) { return "1.0.0"; }

void ratekit_string_free(char* text) { std::free(text); }

ratekit_status ratekit_scenario_parse(const char* json_text, ratekit_scenario** out) {
  RATEKIT_REQUIRE(json_text && out);
  *out = nullptr;
  return guarded([&] { *out = new ratekit_scenario{ratekit::parse_scenario(json_text)}; });
}

ratekit_status ratekit_scenario_load(const char* path, ratekit_scenario** out) {
  RATEKIT_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new ratekit_scenario{ratekit::load_scenario(path)}; });
}

void ratekit_scenario_free(ratekit_scenario* scenario) { delete scenario; }

ratekit_status ratekit_scenario_to_json(const ratekit_scenario* scenario, char** out) {
  RATEKIT_REQUIRE(scenario && out);
  return guarded([&] { *out = copy_string(ratekit::to_json(scenario->value).dump(2)); });
}

size_t ratekit_scenario_num_rates(const ratekit_scenario* scenario) {
  return scenario ? scenario->value.num_rates() : 0;
}

ratekit_status ratekit_scenario_check(const ratekit_scenario* scenario, ratekit_issues** out) {
  RATEKIT_REQUIRE(scenario && out);
  *out = nullptr;
  ratekit_status first = RATEKIT_OK;
  const auto status = guarded([&] {
    *out = new ratekit_issues{ratekit::check(scenario->value)};
    if (!(*out)->value.empty()) first = to_status((*out)->value.front().code);
  });
  if (status != RATEKIT_OK) return status;
  if (first != RATEKIT_OK) fail(first, (*out)->value.front().message);
  return first;
}

size_t ratekit_issues_count(const ratekit_issues* issues) { return issues ? issues->value.size() : 0; }

ratekit_status ratekit_issues_code(const ratekit_issues* issues, size_t index) {
  if (!issues || index >= issues->value.size()) return RATEKIT_E_INVALID_ARGUMENT;
  return to_status(issues->value[index].code);
}

const char* ratekit_issues_message(const ratekit_issues* issues, size_t index) {
  if (!issues || index >= issues->value.size()) return "";
  return issues->value[index].message.c_str();
}

void ratekit_issues_free(ratekit_issues* issues) { delete issues; }

ratekit_status ratekit_analyze(const ratekit_scenario* scenario, ratekit_report** out) {
  RATEKIT_REQUIRE(scenario && out);
  *out = nullptr;
  return guarded([&] { *out = new ratekit_report{ratekit::analyze(scenario->value)}; });
}

void ratekit_report_free(ratekit_report* report) { delete report; }

double ratekit_report_throughput(const ratekit_report* report) { return report ? report->value.throughput_bps : 0.0; }

size_t ratekit_report_num_rates(const ratekit_report* report) {
  return report ? report->value.time_fraction.size() : 0;
}

size_t ratekit_report_time_fractions(const ratekit_report* report, double* dst, size_t n) {
  return report ? copy_values(report->value.time_fraction, dst, n) : 0;
}

ratekit_status ratekit_report_to_json(const ratekit_report* report, char** out) {
  RATEKIT_REQUIRE(report && out);
  return guarded([&] { *out = copy_string(report_json(report->value).dump(2)); });
}

ratekit_status ratekit_expected_transmissions(double alpha, int64_t s, int64_t f, ratekit_position position,
                                              double* out) {
  RATEKIT_REQUIRE(out);
  RATEKIT_REQUIRE(position >= RATEKIT_POSITION_LOWEST && position <= RATEKIT_POSITION_HIGHEST);
  static constexpr ratekit::Position kPositions[] = {ratekit::Position::kLowest, ratekit::Position::kInterior,
                                                     ratekit::Position::kHighest};
  return guarded([&] { *out = ratekit::expected_transmissions(alpha, s, f, kPositions[position]); });
}

ratekit_status ratekit_up_probability(double alpha, int64_t s, int64_t f, double* out) {
  RATEKIT_REQUIRE(out);
  return guarded([&] { *out = ratekit::up_probability(alpha, s, f); });
}

ratekit_status ratekit_simulate(const ratekit_scenario* scenario, uint64_t packets, uint64_t seed,
                                int64_t warmup_packets, ratekit_sim_result** out) {
  RATEKIT_REQUIRE(scenario && out);
  *out = nullptr;
  return guarded([&] {
    ratekit::SimConfig config;
    config.scenario = scenario->value;
    config.n_packets = packets;
    config.seed = seed;
    if (warmup_packets >= 0) config.warmup_packets = static_cast<std::uint64_t>(warmup_packets);
    *out = new ratekit_sim_result{ratekit::simulate(config)};
  });
}

void ratekit_sim_result_free(ratekit_sim_result* result) { delete result; }

double ratekit_sim_throughput(const ratekit_sim_result* result) { return result ? result->value.throughput_est : 0.0; }

double ratekit_sim_throughput_stderr(const ratekit_sim_result* result) {
  return result ? result->value.throughput_stderr : 0.0;
}

size_t ratekit_sim_airtime_fractions(const ratekit_sim_result* result, double* dst, size_t n) {
  return result ? copy_values(result->value.airtime_fraction_est, dst, n) : 0;
}

ratekit_status ratekit_sim_result_to_json(const ratekit_sim_result* result, char** out) {
  RATEKIT_REQUIRE(result && out);
  return guarded([&] { *out = copy_string(sim_json(result->value).dump(2)); });
}

ratekit_status ratekit_sweep_load(const char* path, ratekit_sweep** out) {
  RATEKIT_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new ratekit_sweep{ratekit::load_sweep_spec(path)}; });
}

ratekit_status ratekit_sweep_parse(const char* json_text, ratekit_sweep** out) {
  RATEKIT_REQUIRE(json_text && out);
  *out = nullptr;
  return guarded([&] { *out = new ratekit_sweep{ratekit::sweep_spec_from_json(json::parse(json_text))}; });
}

ratekit_status ratekit_sweep_figure(int figure, double mean_packet_bits, ratekit_sweep** out) {
  RATEKIT_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    ratekit::FigureOptions options;
    if (mean_packet_bits > 0.0) options.mean_packet_bits = mean_packet_bits;
    *out = new ratekit_sweep{ratekit::figure_preset(figure, options)};
  });
}

void ratekit_sweep_free(ratekit_sweep* sweep) { delete sweep; }

void ratekit_sweep_set_sim(ratekit_sweep* sweep, int with_sim, uint64_t packets) {
  if (!sweep) return;
  if (with_sim >= 0) sweep->value.with_sim = with_sim != 0;
  if (packets > 0) sweep->value.packets = packets;
}

void ratekit_sweep_set_seed(ratekit_sweep* sweep, uint64_t seed) {
  if (sweep) sweep->value.seed = seed;
}

ratekit_status ratekit_sweep_run(const ratekit_sweep* sweep, size_t threads, ratekit_table** out) {
  RATEKIT_REQUIRE(sweep && out);
  *out = nullptr;
  return guarded([&] {
    const std::size_t workers = threads == 0 ? ratekit::threads_from_env() : threads;
    *out = new ratekit_table{ratekit::run_sweep(sweep->value, workers)};
  });
}

void ratekit_table_free(ratekit_table* table) { delete table; }

int ratekit_table_all_ok(const ratekit_table* table) { return table && table->value.all_ok() ? 1 : 0; }

size_t ratekit_table_num_points(const ratekit_table* table) { return table ? table->value.points.size() : 0; }

ratekit_status ratekit_table_emit(const ratekit_table* table, ratekit_format format, char** out) {
  RATEKIT_REQUIRE(table && out);
  return guarded([&] {
    *out = copy_string(ratekit::emit(
        table->value, format == RATEKIT_FORMAT_DAT ? ratekit::TableFormat::kDat : ratekit::TableFormat::kCsv));
  });
}

ratekit_status ratekit_table_write(const ratekit_table* table, const char* path, ratekit_format format) {
  RATEKIT_REQUIRE(table && path);
  return guarded([&] {
    ratekit::write_table(table->value, path,
                         format == RATEKIT_FORMAT_DAT ? ratekit::TableFormat::kDat : ratekit::TableFormat::kCsv);
  });
}

}  // extern "C"
