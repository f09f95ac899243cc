#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ratekit/ratekit.h"

namespace {

constexpr const char* kScenario =
    R"({"rates_bps": [1e6, 2e6], "alphas": [0.5, 0.5], "mean_packet_bits": 8000, "algorithm": "arf", "s": 1, "f": 1})";

}  // namespace

TEST_SUITE("c api") {
  TEST_CASE("analyze through opaque handles") {
    ratekit_scenario* sc = nullptr;
    REQUIRE(ratekit_scenario_parse(kScenario, &sc) == RATEKIT_OK);
    CHECK(ratekit_scenario_num_rates(sc) == 2);

    ratekit_report* report = nullptr;
    REQUIRE(ratekit_analyze(sc, &report) == RATEKIT_OK);
    CHECK(ratekit_report_throughput(report) == doctest::Approx(2e6 / 3.0));
    double f[2] = {0, 0};
    CHECK(ratekit_report_time_fractions(report, f, 2) == 2);
    CHECK(f[0] == doctest::Approx(2.0 / 3.0));

    char* json = nullptr;
    REQUIRE(ratekit_report_to_json(report, &json) == RATEKIT_OK);
    CHECK(std::string(json).find("\"throughput_bps\"") != std::string::npos);
    ratekit_string_free(json);

    ratekit_report_free(report);
    ratekit_scenario_free(sc);
  }

  TEST_CASE("validation reports every issue") {
    ratekit_scenario* sc = nullptr;
    REQUIRE(ratekit_scenario_parse(
                R"({"rates_bps": [2e6, 1e6], "alphas": [1.0, 0.2], "mean_packet_bits": 8000, "algorithm": "arf", "s": 0, "f": 1})",
                &sc) == RATEKIT_OK);
    ratekit_issues* issues = nullptr;
    CHECK(ratekit_scenario_check(sc, &issues) == RATEKIT_E_NONMONOTONE_RATES);
    REQUIRE(issues != nullptr);
    CHECK(ratekit_issues_count(issues) == 3);
    CHECK(ratekit_issues_code(issues, 1) == RATEKIT_E_ALPHA_OUT_OF_RANGE);
    CHECK(ratekit_issues_code(issues, 2) == RATEKIT_E_BAD_THRESHOLD);
    CHECK(std::string(ratekit_issues_message(issues, 0)).size() > 0);
    CHECK(ratekit_issues_code(issues, 9) == RATEKIT_E_INVALID_ARGUMENT);

    ratekit_report* report = nullptr;
    CHECK(ratekit_analyze(sc, &report) == RATEKIT_E_NONMONOTONE_RATES);
    CHECK(report == nullptr);
    CHECK(std::string(ratekit_last_error()).find("increasing") != std::string::npos);
    ratekit_issues_free(issues);
    ratekit_scenario_free(sc);
  }

  TEST_CASE("errors map to status codes") {
    ratekit_scenario* sc = nullptr;
    CHECK(ratekit_scenario_parse("{", &sc) == RATEKIT_E_PARSE);
    CHECK(sc == nullptr);
    CHECK(ratekit_scenario_load("/nonexistent.json", &sc) == RATEKIT_E_IO);
    CHECK(ratekit_scenario_parse(nullptr, &sc) == RATEKIT_E_INVALID_ARGUMENT);
    CHECK(std::string(ratekit_status_name(RATEKIT_E_UNSUPPORTED)) == "Unsupported");

    REQUIRE(ratekit_scenario_parse(
                R"({"rates_bps": [1e6, 2e6], "alphas": [0.9, 0.2], "mean_packet_bits": 8000, "algorithm": "aarf", "s": 10, "f": 2,
                    "overhead": {"difs_us": 50, "sifs_us": 10, "t_ack_us": 112, "cw_min": 32, "cw_max": 1023, "gamma_max": 5}})",
                &sc) == RATEKIT_OK);
    ratekit_report* report = nullptr;
    CHECK(ratekit_analyze(sc, &report) == RATEKIT_E_UNSUPPORTED);
    ratekit_sim_result* sim = nullptr;
    CHECK(ratekit_simulate(sc, 10000, 1, -1, &sim) == RATEKIT_OK);
    CHECK(ratekit_sim_throughput(sim) > 0.0);
    ratekit_sim_result_free(sim);
    CHECK(ratekit_simulate(sc, 100, 1, 100, &sim) == RATEKIT_E_INVALID_ARGUMENT);
    ratekit_scenario_free(sc);
  }

  TEST_CASE("closed-form helpers") {
    double x = 0;
    CHECK(ratekit_expected_transmissions(0.5, 2, 2, RATEKIT_POSITION_INTERIOR, &x) == RATEKIT_OK);
    CHECK(x == doctest::Approx(3.0));
    CHECK(ratekit_up_probability(0.5, 2, 2, &x) == RATEKIT_OK);
    CHECK(x == doctest::Approx(0.5));
    CHECK(ratekit_expected_transmissions(0.5, 2, 2, static_cast<ratekit_position>(7), &x) == RATEKIT_E_INVALID_ARGUMENT);
  }

  TEST_CASE("simulation is deterministic through the api") {
    ratekit_scenario* sc = nullptr;
    REQUIRE(ratekit_scenario_parse(kScenario, &sc) == RATEKIT_OK);
    ratekit_sim_result *a = nullptr, *b = nullptr;
    REQUIRE(ratekit_simulate(sc, 50000, 9, -1, &a) == RATEKIT_OK);
    REQUIRE(ratekit_simulate(sc, 50000, 9, -1, &b) == RATEKIT_OK);
    char *ja = nullptr, *jb = nullptr;
    REQUIRE(ratekit_sim_result_to_json(a, &ja) == RATEKIT_OK);
    REQUIRE(ratekit_sim_result_to_json(b, &jb) == RATEKIT_OK);
    CHECK(std::string(ja) == std::string(jb));
    double g[2];
    CHECK(ratekit_sim_airtime_fractions(a, g, 2) == 2);
    CHECK(g[0] + g[1] == doctest::Approx(1.0));
    ratekit_string_free(ja);
    ratekit_string_free(jb);
    ratekit_sim_result_free(a);
    ratekit_sim_result_free(b);
    ratekit_scenario_free(sc);
  }

  TEST_CASE("figure sweep to files") {
    ratekit_sweep* sweep = nullptr;
    REQUIRE(ratekit_sweep_figure(5, 0, &sweep) == RATEKIT_OK);
    ratekit_sweep* rejected = nullptr;
    CHECK(ratekit_sweep_figure(10, 0, &rejected) == RATEKIT_E_INVALID_ARGUMENT);
    CHECK(rejected == nullptr);
    ratekit_table* table = nullptr;
    REQUIRE(ratekit_sweep_run(sweep, 2, &table) == RATEKIT_OK);
    CHECK(ratekit_table_all_ok(table) == 1);
    CHECK(ratekit_table_num_points(table) == 17);
    const auto path = std::filesystem::temp_directory_path() / "ratekit_capi_fig5.csv";
    REQUIRE(ratekit_table_write(table, path.c_str(), RATEKIT_FORMAT_CSV) == RATEKIT_OK);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "param,algo,analytic_tau_bps,sim_tau_bps,sim_stderr_bps,f_1,f_2");
    std::filesystem::remove(path);
    ratekit_table_free(table);
    ratekit_sweep_free(sweep);
  }

  TEST_CASE("sweep documents and overrides") {
    ratekit_sweep* sweep = nullptr;
    CHECK(ratekit_sweep_parse("[]", &sweep) == RATEKIT_E_PARSE);
    const std::string doc = R"({"base": )" + std::string(kScenario) +
                            R"(, "parameter": "alphas[1]", "grid": [0.3, 0.6], "algorithms": ["arf", "paarf"]})";
    REQUIRE(ratekit_sweep_parse(doc.c_str(), &sweep) == RATEKIT_OK);
    ratekit_sweep_set_sim(sweep, 1, 5000);
    ratekit_sweep_set_seed(sweep, 4);
    ratekit_table* table = nullptr;
    REQUIRE(ratekit_sweep_run(sweep, 1, &table) == RATEKIT_OK);
    char* csv = nullptr;
    REQUIRE(ratekit_table_emit(table, RATEKIT_FORMAT_CSV, &csv) == RATEKIT_OK);
    CHECK(std::string(csv).find("0.29999999999999999,paarf,") != std::string::npos);
    CHECK(std::string(csv).find(",,") == std::string::npos);
    ratekit_string_free(csv);
    ratekit_table_free(table);
    ratekit_sweep_free(sweep);
  }

  TEST_CASE("null handles are tolerated by accessors and free functions") {
    ratekit_scenario_free(nullptr);
    ratekit_report_free(nullptr);
    ratekit_table_free(nullptr);
    CHECK(ratekit_report_throughput(nullptr) == 0.0);
    CHECK(ratekit_table_all_ok(nullptr) == 0);
    CHECK(ratekit_analyze(nullptr, nullptr) == RATEKIT_E_INVALID_ARGUMENT);
    CHECK(std::string(ratekit_version()) == "1.0.0");
  }
}
