#pragma once

// Parameter sweeps over a base scenario, the figure presets, and CSV/.dat
// serialization of the resulting tables.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ratekit/model.hpp"

namespace ratekit {

struct SweepSpec {
  nlohmann::json base;            // scenario document, see scenario_json.hpp
  std::string parameter;          // e.g. "alphas[0]", "s", "overhead.difs_us"
  std::vector<double> grid;
  std::vector<Algorithm> algorithms;
  bool with_sim = false;
  bool with_overhead = false;     // base overhead, or 802.11b defaults if absent
  std::uint64_t packets = 1'000'000;
  std::uint64_t seed = 1;
};

// Throws Error(kParse) on a malformed document. Grid points are not checked
// here; a bad point becomes an in-row error.
SweepSpec sweep_spec_from_json(const nlohmann::json& doc);
SweepSpec load_sweep_spec(const std::filesystem::path& path);

struct AlgoCell {
  std::string algo;   // "arf", "aarf", "paarf", with "+mac" when overhead is on
  bool sim_only = false;
  std::optional<double> analytic_tau;
  std::optional<double> sim_tau;
  std::optional<double> sim_stderr;
  std::vector<double> analytic_fractions;  // f_i, or g_i with overhead
  std::vector<double> sim_fractions;       // airtime fractions from the simulator
  std::vector<double> sim_fraction_stderr;
  std::string error;  // empty when the cell computed

  bool ok() const noexcept { return error.empty(); }
  const std::vector<double>& fractions() const { return analytic_tau ? analytic_fractions : sim_fractions; }
};

struct SweepPoint {
  double value = 0.0;
  std::vector<AlgoCell> cells;  // in SweepSpec::algorithms order
};

struct SweepTable {
  std::string parameter;
  std::size_t num_rates = 0;
  std::vector<SweepPoint> points;  // in grid order

  bool all_ok() const noexcept;
  const AlgoCell* find(std::size_t point, std::string_view algo) const;
};

std::string algo_label(Algorithm algorithm, bool with_overhead);

// Worker count from RATEKIT_THREADS, else the hardware concurrency.
std::size_t threads_from_env();

// Evaluates every (grid point, algorithm) pair. Results do not depend on
// `threads`: simulation seeds are derived from (seed, point, algorithm).
SweepTable run_sweep(const SweepSpec& spec, std::size_t threads = threads_from_env());

// Seed used for the simulation of one table cell.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t point, std::size_t algo);

struct FigureOptions {
  double mean_packet_bits = 8000.0;
  bool with_sim = false;
  std::uint64_t packets = 1'000'000;
  std::uint64_t seed = 1;
};

// alpha_1 grid of the figure presets: 0.70, 0.72, ..., 0.98, 0.99, 1 - 1e-6.
std::vector<double> figure_alpha_grid();

// Presets 4..9. Figures 6-9 turn on 802.11b overhead; their AARF and PAARF
// columns come from the simulator only.
SweepSpec figure_preset(int figure, const FigureOptions& options = {});

enum class TableFormat { kCsv, kDat };

std::string emit(const SweepTable& table, TableFormat format);
void write_table(const SweepTable& table, const std::filesystem::path& path, TableFormat format);

// Inverse of emit(kCsv); parameter name is not stored in the CSV.
SweepTable parse_csv(std::string_view text);

}  // namespace ratekit
