// Command-line front end over the C API.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "ratekit/ratekit.h"

namespace {

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Scenario = std::unique_ptr<ratekit_scenario, Deleter<ratekit_scenario, ratekit_scenario_free>>;
using Issues = std::unique_ptr<ratekit_issues, Deleter<ratekit_issues, ratekit_issues_free>>;
using Report = std::unique_ptr<ratekit_report, Deleter<ratekit_report, ratekit_report_free>>;
using SimResult = std::unique_ptr<ratekit_sim_result, Deleter<ratekit_sim_result, ratekit_sim_result_free>>;
using Sweep = std::unique_ptr<ratekit_sweep, Deleter<ratekit_sweep, ratekit_sweep_free>>;
using Table = std::unique_ptr<ratekit_table, Deleter<ratekit_table, ratekit_table_free>>;

struct Text {
  char* ptr = nullptr;
  ~Text() { ratekit_string_free(ptr); }
};

int report_failure(const char* what, ratekit_status status) {
  std::cerr << "ratekit: " << what << ": " << ratekit_status_name(status) << ": " << ratekit_last_error() << '\n';
  return 2;
}

struct SimOptions {
  bool enabled = false;
  std::uint64_t packets = 1'000'000;
  std::uint64_t seed = 1;
};

void add_sim_options(CLI::App* cmd, SimOptions& sim) {
  cmd->add_flag("--with-sim", sim.enabled, "Also run the packet simulator");
  cmd->add_option("--packets", sim.packets, "Simulated packets per run")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", sim.seed, "Simulator seed");
}

int cmd_validate(const std::string& path) {
  ratekit_scenario* raw = nullptr;
  if (auto st = ratekit_scenario_load(path.c_str(), &raw); st != RATEKIT_OK) return report_failure("load", st);
  Scenario scenario(raw);
  ratekit_issues* raw_issues = nullptr;
  const auto st = ratekit_scenario_check(scenario.get(), &raw_issues);
  Issues issues(raw_issues);
  if (!issues) return report_failure("check", st);
  const std::size_t n = ratekit_issues_count(issues.get());
  if (n == 0) {
    std::cout << "ok: " << ratekit_scenario_num_rates(scenario.get()) << " rates\n";
    return 0;
  }
  for (std::size_t i = 0; i < n; ++i)
    std::cout << ratekit_status_name(ratekit_issues_code(issues.get(), i)) << ": "
              << ratekit_issues_message(issues.get(), i) << '\n';
  return 1;
}

// Prints {"analytic": ..., "simulation": ...}. The analytic part is omitted
// when no closed form exists and a simulation was requested.
int cmd_analyze(const std::string& path, const SimOptions& sim) {
  ratekit_scenario* raw = nullptr;
  if (auto st = ratekit_scenario_load(path.c_str(), &raw); st != RATEKIT_OK) return report_failure("load", st);
  Scenario scenario(raw);

  std::string out = "{\n\"analytic\": ";
  ratekit_report* raw_report = nullptr;
  const auto st = ratekit_analyze(scenario.get(), &raw_report);
  Report report(raw_report);
  if (st == RATEKIT_OK) {
    Text text;
    if (auto s2 = ratekit_report_to_json(report.get(), &text.ptr); s2 != RATEKIT_OK)
      return report_failure("serialize", s2);
    out += text.ptr;
  } else if (st == RATEKIT_E_UNSUPPORTED && sim.enabled) {
    out += "null";
  } else {
    return report_failure("analyze", st);
  }

  if (sim.enabled) {
    ratekit_sim_result* raw_sim = nullptr;
    if (auto s3 = ratekit_simulate(scenario.get(), sim.packets, sim.seed, -1, &raw_sim); s3 != RATEKIT_OK)
      return report_failure("simulate", s3);
    SimResult result(raw_sim);
    Text text;
    if (auto s4 = ratekit_sim_result_to_json(result.get(), &text.ptr); s4 != RATEKIT_OK)
      return report_failure("serialize", s4);
    out += ",\n\"simulation\": ";
    out += text.ptr;
  }
  std::cout << out << "\n}\n";
  return 0;
}

int run_and_write(ratekit_sweep* sweep, const std::string& out_path, ratekit_format format) {
  ratekit_table* raw = nullptr;
  if (auto st = ratekit_sweep_run(sweep, 0, &raw); st != RATEKIT_OK) return report_failure("sweep", st);
  Table table(raw);
  if (out_path.empty()) {
    Text text;
    if (auto st = ratekit_table_emit(table.get(), format, &text.ptr); st != RATEKIT_OK)
      return report_failure("emit", st);
    std::fputs(text.ptr, stdout);
  } else if (auto st = ratekit_table_write(table.get(), out_path.c_str(), format); st != RATEKIT_OK) {
    return report_failure("write", st);
  }
  return ratekit_table_all_ok(table.get()) ? 0 : 1;
}

// Command-line simulation options override the spec only where given.
int cmd_sweep(const std::string& path, const CLI::App& cmd, const SimOptions& sim, const std::string& out,
              const std::string& format) {
  ratekit_sweep* raw = nullptr;
  if (auto st = ratekit_sweep_load(path.c_str(), &raw); st != RATEKIT_OK) return report_failure("load", st);
  Sweep sweep(raw);
  ratekit_sweep_set_sim(sweep.get(), sim.enabled ? 1 : -1, cmd.count("--packets") ? sim.packets : 0);
  if (cmd.count("--seed")) ratekit_sweep_set_seed(sweep.get(), sim.seed);
  return run_and_write(sweep.get(), out, format == "dat" ? RATEKIT_FORMAT_DAT : RATEKIT_FORMAT_CSV);
}

int cmd_figure(int figure, const std::string& dir, const SimOptions& sim, double mean_bits) {
  ratekit_sweep* raw = nullptr;
  if (auto st = ratekit_sweep_figure(figure, mean_bits, &raw); st != RATEKIT_OK) return report_failure("preset", st);
  Sweep sweep(raw);
  ratekit_sweep_set_sim(sweep.get(), sim.enabled, sim.packets);
  ratekit_sweep_set_seed(sweep.get(), sim.seed);

  ratekit_table* raw_table = nullptr;
  if (auto st = ratekit_sweep_run(sweep.get(), 0, &raw_table); st != RATEKIT_OK) return report_failure("sweep", st);
  Table table(raw_table);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::cerr << "ratekit: cannot create " << dir << ": " << ec.message() << '\n';
    return 2;
  }
  const std::string stem = (std::filesystem::path(dir) / ("fig" + std::to_string(figure))).string();
  for (auto [ext, format] : {std::pair{".csv", RATEKIT_FORMAT_CSV}, std::pair{".dat", RATEKIT_FORMAT_DAT}}) {
    const std::string file = stem + ext;
    if (auto st = ratekit_table_write(table.get(), file.c_str(), format); st != RATEKIT_OK)
      return report_failure("write", st);
    std::cerr << "wrote " << file << '\n';
  }
  return ratekit_table_all_ok(table.get()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state throughput of ARF, AARF and PAARF rate adaptation"};
  app.set_version_flag("--version", ratekit_version());
  app.require_subcommand(1);

  std::string scenario_path;
  SimOptions sim;

  auto* validate = app.add_subcommand("validate", "Check a scenario file and list every problem");
  validate->add_option("scenario", scenario_path, "Scenario JSON")->required();

  auto* analyze = app.add_subcommand("analyze", "Closed-form throughput of a scenario, as JSON");
  analyze->add_option("scenario", scenario_path, "Scenario JSON")->required();
  add_sim_options(analyze, sim);

  std::string spec_path, out_path, format = "csv";
  auto* sweep = app.add_subcommand("sweep", "Evaluate a parameter sweep and emit a table");
  sweep->add_option("spec", spec_path, "Sweep specification JSON")->required();
  add_sim_options(sweep, sim);
  sweep->add_option("--out", out_path, "Output file (default stdout)");
  sweep->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "dat"}));

  int figure = 0;
  std::string out_dir = ".";
  double mean_bits = 8000.0;
  auto* fig = app.add_subcommand("figure", "Reproduce a figure preset as figN.csv and figN.dat");
  fig->add_option("number", figure, "Figure preset")->required()->check(CLI::Range(4, 9));
  fig->add_option("--out", out_dir, "Output directory");
  fig->add_option("--mean-bits", mean_bits, "Mean packet length in bits")->check(CLI::PositiveNumber);
  add_sim_options(fig, sim);

  CLI11_PARSE(app, argc, argv);

  if (*validate) return cmd_validate(scenario_path);
  if (*analyze) return cmd_analyze(scenario_path, sim);
  if (*sweep) return cmd_sweep(spec_path, *sweep, sim, out_path, format);
  return cmd_figure(figure, out_dir, sim, mean_bits);
}
