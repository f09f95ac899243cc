#include "ratekit/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>
#include <utility>

#include "ratekit/analyze.hpp"
#include "ratekit/scenario_json.hpp"
#include "ratekit/sim.hpp"

namespace ratekit {

namespace {

using nlohmann::json;

[[noreturn]] void parse_error(const std::string& message) { throw Error(ErrorCode::kParse, message); }

// Writes `value` at a path such as "alphas[0]" or "overhead.difs_us".
void set_path(json& doc, std::string_view path, double value) {
  json* node = &doc;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const std::size_t end = path.find_first_of(".[", pos);
    const std::string key(path.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (key.empty()) throw Error(ErrorCode::kInvalidArgument, "bad parameter path '" + std::string(path) + "'");
    if (!node->is_object() || !node->contains(key))
      throw Error(ErrorCode::kInvalidArgument, "parameter path '" + std::string(path) + "' not found in base");
    node = &(*node)[key];
    pos = end == std::string_view::npos ? path.size() : end;
    while (pos < path.size() && path[pos] == '[') {
      const std::size_t close = path.find(']', pos);
      if (close == std::string_view::npos)
        throw Error(ErrorCode::kInvalidArgument, "bad parameter path '" + std::string(path) + "'");
      const auto idx = std::stoul(std::string(path.substr(pos + 1, close - pos - 1)));
      if (!node->is_array() || idx >= node->size())
        throw Error(ErrorCode::kInvalidArgument, "index out of range in '" + std::string(path) + "'");
      node = &(*node)[idx];
      pos = close + 1;
    }
    if (pos < path.size() && path[pos] == '.') ++pos;
  }
  *node = value;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find(sep, pos);
    out.emplace_back(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  return out;
}

std::optional<double> parse_optional(const std::string& field) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') parse_error("bad numeric field '" + field + "'");
  return v;
}

AlgoCell evaluate_cell(const SweepSpec& spec, double value, Algorithm algorithm, std::uint64_t seed) {
  AlgoCell cell;
  cell.algo = algo_label(algorithm, spec.with_overhead);
  try {
    json doc = spec.base;
    doc["algorithm"] = std::string(to_string(algorithm));
    if (spec.with_overhead) {
      if (!doc.contains("overhead") || doc["overhead"].is_null()) {
        Scenario defaults;
        defaults.overhead = MacOverheadParams::ieee80211b();
        doc["overhead"] = to_json(defaults)["overhead"];
      }
    } else {
      doc.erase("overhead");
    }
    set_path(doc, spec.parameter, value);
    const Scenario scenario = validate(scenario_from_json(doc));

    cell.sim_only = !has_closed_form(scenario);
    if (!cell.sim_only) {
      const auto report = analyze(scenario);
      cell.analytic_tau = report.throughput_bps;
      cell.analytic_fractions = report.time_fraction;
    }
    if (spec.with_sim || cell.sim_only) {
      SimConfig config;
      config.scenario = scenario;
      config.n_packets = spec.packets;
      config.seed = seed;
      const auto sim = simulate(config);
      cell.sim_tau = sim.throughput_est;
      cell.sim_stderr = sim.throughput_stderr;
      cell.sim_fractions = sim.airtime_fraction_est;
      cell.sim_fraction_stderr = sim.airtime_fraction_stderr;
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

namespace {

SweepSpec spec_from_json_unchecked(const json& doc) {
  if (!doc.is_object()) parse_error("sweep spec must be a JSON object");
  SweepSpec spec;
  auto it = doc.find("base");
  if (it == doc.end() || !it->is_object()) parse_error("sweep spec needs an object field 'base'");
  spec.base = *it;
  it = doc.find("parameter");
  if (it == doc.end() || !it->is_string()) parse_error("sweep spec needs a string field 'parameter'");
  spec.parameter = it->get<std::string>();
  it = doc.find("grid");
  if (it == doc.end() || !it->is_array() || it->empty()) parse_error("sweep spec needs a non-empty array 'grid'");
  for (const auto& v : *it) {
    if (!v.is_number()) parse_error("grid values must be numbers");
    spec.grid.push_back(v.get<double>());
  }
  it = doc.find("algorithms");
  if (it == doc.end() || !it->is_array() || it->empty())
    parse_error("sweep spec needs a non-empty array 'algorithms'");
  for (const auto& v : *it) {
    auto algo = v.is_string() ? parse_algorithm(v.get<std::string>()) : std::nullopt;
    if (!algo) parse_error("unknown algorithm in 'algorithms'");
    spec.algorithms.push_back(*algo);
  }
  if (auto w = doc.find("with_sim"); w != doc.end()) spec.with_sim = w->get<bool>();
  if (auto w = doc.find("with_overhead"); w != doc.end()) spec.with_overhead = w->get<bool>();
  if (auto p = doc.find("packets"); p != doc.end()) spec.packets = p->get<std::uint64_t>();
  if (auto s = doc.find("seed"); s != doc.end()) spec.seed = s->get<std::uint64_t>();
  return spec;
}

}  // namespace

SweepSpec sweep_spec_from_json(const json& doc) {
  try {
    return spec_from_json_unchecked(doc);
  } catch (const json::exception& e) {
    parse_error(std::string("sweep spec: ") + e.what());
  }
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  try {
    return sweep_spec_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    parse_error(path.string() + ": " + e.what());
  }
}

bool SweepTable::all_ok() const noexcept {
  for (const auto& p : points)
    for (const auto& c : p.cells)
      if (!c.ok()) return false;
  return true;
}

const AlgoCell* SweepTable::find(std::size_t point, std::string_view algo) const {
  for (const auto& c : points.at(point).cells)
    if (c.algo == algo) return &c;
  return nullptr;
}

std::string algo_label(Algorithm algorithm, bool with_overhead) {
  std::string label(to_string(algorithm));
  if (with_overhead) label += "+mac";
  return label;
}

std::size_t threads_from_env() {
  if (const char* env = std::getenv("RATEKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t point, std::size_t algo) {
  // Distinct cells get well-separated seeds; simulate() hashes the seed again.
  return seed * 0x100000001B3ULL + (static_cast<std::uint64_t>(point) << 8) + algo;
}

SweepTable run_sweep(const SweepSpec& spec, std::size_t threads) {
  if (spec.algorithms.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one algorithm");
  SweepTable table;
  table.parameter = spec.parameter;
  if (auto it = spec.base.find("rates_bps"); it != spec.base.end() && it->is_array()) table.num_rates = it->size();
  table.points.resize(spec.grid.size());
  for (std::size_t p = 0; p < spec.grid.size(); ++p) {
    table.points[p].value = spec.grid[p];
    table.points[p].cells.resize(spec.algorithms.size());
  }

  const std::size_t tasks = spec.grid.size() * spec.algorithms.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t p = t / spec.algorithms.size();
      const std::size_t a = t % spec.algorithms.size();
      table.points[p].cells[a] = evaluate_cell(spec, spec.grid[p], spec.algorithms[a], cell_seed(spec.seed, p, a));
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, tasks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return table;
}

std::vector<double> figure_alpha_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 14; ++k) grid.push_back((70.0 + 2.0 * k) / 100.0);
  grid.push_back(0.99);
  grid.push_back(1.0 - 1e-6);
  return grid;
}

SweepSpec figure_preset(int figure, const FigureOptions& options) {
  if (figure < 4 || figure > 9) throw Error(ErrorCode::kInvalidArgument, "figure presets are 4..9");
  const bool high_rates = figure == 8 || figure == 9;
  const bool overhead = figure >= 6;
  const double alpha2 = (figure % 2 == 0) ? 0.2 : 0.7;

  Scenario base;
  base.ladder.rates_bps = high_rates ? std::vector<double>{5.5e6, 11e6} : std::vector<double>{1e6, 2e6};
  base.channel.alphas = {0.7, alpha2};
  base.traffic.mean_packet_bits = options.mean_packet_bits;
  base.params.base = {10, 2};
  base.params.beta_max = 3;
  base.algorithm = Algorithm::kAarf;
  if (overhead) base.overhead = MacOverheadParams::ieee80211b();

  SweepSpec spec;
  spec.base = to_json(base);
  spec.parameter = "alphas[0]";
  spec.grid = figure_alpha_grid();
  spec.algorithms = {Algorithm::kArf, Algorithm::kAarf, Algorithm::kPaarf};
  spec.with_sim = options.with_sim;
  spec.with_overhead = overhead;
  spec.packets = options.packets;
  spec.seed = options.seed;
  return spec;
}

std::string emit(const SweepTable& table, TableFormat format) {
  std::ostringstream out;
  std::vector<std::string> sim_only;
  std::vector<std::string> order;
  for (const auto& p : table.points)
    for (const auto& c : p.cells) {
      if (std::find(order.begin(), order.end(), c.algo) == order.end()) order.push_back(c.algo);
      if (c.sim_only && std::find(sim_only.begin(), sim_only.end(), c.algo) == sim_only.end())
        sim_only.push_back(c.algo);
    }

  if (format == TableFormat::kCsv) {
    if (!sim_only.empty()) {
      out << "# simulation-only (no closed form):";
      for (const auto& a : sim_only) out << ' ' << a;
      out << '\n';
    }
    out << "param,algo,analytic_tau_bps,sim_tau_bps,sim_stderr_bps";
    for (std::size_t i = 1; i <= table.num_rates; ++i) out << ",f_" << i;
    out << '\n';
    for (const auto& p : table.points) {
      for (const auto& c : p.cells) {
        if (!c.ok()) out << "# error at " << format_number(p.value) << " (" << c.algo << "): " << c.error << '\n';
        out << format_number(p.value) << ',' << c.algo << ',' << format_optional(c.analytic_tau) << ','
            << format_optional(c.sim_tau) << ',' << format_optional(c.sim_stderr);
        const auto& fr = c.fractions();
        for (std::size_t i = 0; i < table.num_rates; ++i) {
          out << ',';
          if (i < fr.size()) out << format_number(fr[i]);
        }
        out << '\n';
      }
    }
    return out.str();
  }

  // .dat: one block per algorithm, separated by two blank lines.
  bool first = true;
  for (const auto& algo : order) {
    if (!first) out << "\n\n";
    first = false;
    out << "# " << algo << (std::find(sim_only.begin(), sim_only.end(), algo) != sim_only.end() ? " (simulation only)" : "")
        << '\n';
    out << "# " << (table.parameter.empty() ? "param" : table.parameter)
        << " analytic_tau_bps sim_tau_bps sim_stderr_bps";
    for (std::size_t i = 1; i <= table.num_rates; ++i) out << " f_" << i;
    out << '\n';
    for (const auto& p : table.points) {
      for (const auto& c : p.cells) {
        if (c.algo != algo) continue;
        auto field = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("nan"); };
        out << format_number(p.value) << ' ' << field(c.analytic_tau) << ' ' << field(c.sim_tau) << ' '
            << field(c.sim_stderr);
        const auto& fr = c.fractions();
        for (std::size_t i = 0; i < table.num_rates; ++i)
          out << ' ' << (i < fr.size() ? format_number(fr[i]) : std::string("nan"));
        out << '\n';
      }
    }
  }
  return out.str();
}

void write_table(const SweepTable& table, const std::filesystem::path& path, TableFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << emit(table, format);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

SweepTable parse_csv(std::string_view text) {
  SweepTable table;
  std::vector<std::string> sim_only;
  std::string pending_error;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kSimOnly = "# simulation-only (no closed form):";
      if (line.substr(0, kSimOnly.size()) == kSimOnly)
        for (auto& name : split(line.substr(kSimOnly.size()), ' '))
          if (!name.empty()) sim_only.push_back(name);
      constexpr std::string_view kError = "# error at ";
      if (line.substr(0, kError.size()) == kError) {
        const auto colon = line.find("): ");
        pending_error = colon == std::string_view::npos ? std::string(line) : std::string(line.substr(colon + 3));
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() < 5 || fields[0] != "param" || fields[1] != "algo") parse_error("missing CSV header");
      table.num_rates = fields.size() - 5;
      header_seen = true;
      continue;
    }
    if (fields.size() != 5 + table.num_rates) parse_error("CSV row has the wrong number of fields");
    const auto param = parse_optional(fields[0]);
    if (!param) parse_error("CSV row without a parameter value");
    const double value = *param;
    if (table.points.empty() || table.points.back().value != value) table.points.push_back({value, {}});
    AlgoCell cell;
    cell.algo = fields[1];
    cell.sim_only = std::find(sim_only.begin(), sim_only.end(), cell.algo) != sim_only.end();
    cell.analytic_tau = parse_optional(fields[2]);
    cell.sim_tau = parse_optional(fields[3]);
    cell.sim_stderr = parse_optional(fields[4]);
    cell.error = std::exchange(pending_error, {});
    std::vector<double> fr;
    for (std::size_t i = 0; i < table.num_rates; ++i)
      if (auto v = parse_optional(fields[5 + i])) fr.push_back(*v);
    (cell.analytic_tau ? cell.analytic_fractions : cell.sim_fractions) = std::move(fr);
    table.points.back().cells.push_back(std::move(cell));
  }
  if (!header_seen) parse_error("missing CSV header");
  return table;
}

}  // namespace ratekit
