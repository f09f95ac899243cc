#include "ratekit/sim.hpp"

#include <algorithm>
#include <cmath>

#include "ratekit/mac_overhead.hpp"

namespace ratekit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Lane : std::uint64_t { kOutcome = 0, kBackoff = 1, kLength = 2 };

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(splitmix64_finalize(seed)) {}

  std::uint64_t bits(std::uint64_t tx, Lane lane) const {
    return splitmix64_finalize(key_ + (4 * tx + lane + 1) * kGolden);
  }
  double uniform(std::uint64_t tx, Lane lane) const {
    return static_cast<double>(bits(tx, lane) >> 11) * 0x1.0p-53;
  }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t tx, Lane lane, std::uint64_t bound) const {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(bits(tx, lane)) * bound) >> 64);
  }

 private:
  std::uint64_t key_;
};

class LengthSampler {
 public:
  explicit LengthSampler(const TrafficModel& traffic) : mean_(traffic.mean_packet_bits) {
    double acc = 0.0;
    for (const auto& bin : traffic.empirical) {
      acc += bin.weight;
      cumulative_.push_back(acc);
      lengths_.push_back(bin.bits);
    }
  }

  double draw(const CounterRng& rng, std::uint64_t tx) const {
    if (lengths_.empty()) return mean_;
    const double u = rng.uniform(tx, kLength) * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), lengths_.size() - 1);
    return lengths_[k];
  }

 private:
  double mean_;
  std::vector<double> cumulative_;
  std::vector<double> lengths_;
};

struct Batch {
  double time = 0.0;
  double bits = 0.0;
  std::vector<double> time_rate;
  std::vector<double> air_rate;
};

// Rate-control state machine. `state()` is the analytic chain state the
// current sojourn belongs to.
class Controller {
 public:
  explicit Controller(const Scenario& sc)
      : sc_(sc),
        n_(sc.num_rates()),
        s_(sc.params.base.s),
        f_(sc.params.base.f),
        overhead_(sc.overhead.has_value()),
        gamma_wrap_(sc.overhead ? sc.overhead->gamma_max + 1 : 1) {}

  std::size_t transmit_rate() const { return probing_ ? rate_ + 1 : rate_; }
  std::int64_t counter() const { return counter_; }
  bool probing() const { return probing_; }

  ChainState state() const {
    switch (sc_.algorithm) {
      case Algorithm::kArf:
        return overhead_ ? ChainState{StateKind::kBackoff, rate_, entry_counter_} : ChainState{StateKind::kRate, rate_, 0};
      case Algorithm::kAarf:
      case Algorithm::kPaarf:
        if (probing_) return {StateKind::kProbe, rate_, stage_};
        return {StateKind::kFallback, rate_, stage_};
    }
    return {};
  }

  // Applies one transmission outcome. Returns true if the chain state
  // changed (including self-loops of the overhead model).
  bool apply(bool success, ProbeStats& probes, bool record) {
    counter_ = success ? 0 : (counter_ + 1) % gamma_wrap_;
    if (sc_.algorithm == Algorithm::kArf) return apply_arf(success);
    return apply_aarf(success, probes, record);
  }

 private:
  void enter(std::size_t rate) {
    rate_ = rate;
    success_run_ = 0;
    failure_run_ = 0;
    entry_counter_ = counter_;
  }

  bool apply_arf(bool success) {
    const bool top = rate_ + 1 == n_;
    // With overhead, the lowest rate (and a single-rate ladder) closes a
    // sojourn on every threshold hit and re-enters itself.
    const bool loops_low = overhead_ && rate_ == 0;
    const bool loops_high = overhead_ && n_ == 1;
    if (success) {
      failure_run_ = 0;
      if (top && !loops_high) return false;
      if (++success_run_ == s_) {
        enter(top ? rate_ : rate_ + 1);
        return true;
      }
      return false;
    }
    success_run_ = 0;
    if (rate_ == 0 && !loops_low) return false;
    if (++failure_run_ == f_) {
      enter(rate_ == 0 ? 0 : rate_ - 1);
      return true;
    }
    return false;
  }

  bool apply_aarf(bool success, ProbeStats& probes, bool record) {
    const bool top = rate_ + 1 == n_;
    if (probing_) {
      ++probe_tx_;
      if (probe_tx_ == 1) first_probe_succeeded_ = success;
      if (success) {
        finish_probe(probes, record);
        stage_ = 0;
        enter(rate_ + 1);
        return true;
      }
      if (sc_.algorithm == Algorithm::kPaarf && probe_tx_ == 1) return false;
      finish_probe(probes, record);
      stage_ = std::min(stage_ + 1, sc_.params.beta_max);
      enter(rate_);
      return true;
    }
    if (success) {
      failure_run_ = 0;
      if (top) return false;
      if (++success_run_ == sc_.params.success_threshold(stage_)) {
        if (record) {
          ++probes.entries_by_stage[stage_];
          if (success_run_ != (s_ << stage_)) ++probes.threshold_mismatches;
        }
        probing_ = true;
        probe_tx_ = 0;
        success_run_ = 0;
        return true;
      }
      return false;
    }
    success_run_ = 0;
    if (rate_ == 0) return false;
    if (++failure_run_ == f_) {
      stage_ = 0;
      enter(rate_ - 1);
      return true;
    }
    return false;
  }

  void finish_probe(ProbeStats& probes, bool record) {
    probing_ = false;
    if (!record) return;
    ++probes.visits;
    if (probe_tx_ == 1) ++probes.single;
    if (probe_tx_ == 2) ++probes.two;
    if (probe_tx_ == 2 && first_probe_succeeded_) ++probes.second_after_success;
  }

  const Scenario& sc_;
  std::size_t n_;
  std::int64_t s_;
  std::int64_t f_;
  bool overhead_;
  std::int64_t gamma_wrap_;

  std::size_t rate_ = 0;
  std::int64_t stage_ = 0;
  std::int64_t success_run_ = 0;
  std::int64_t failure_run_ = 0;
  std::int64_t counter_ = 0;
  std::int64_t entry_counter_ = 0;
  bool probing_ = false;
  int probe_tx_ = 0;
  bool first_probe_succeeded_ = false;
};

double batch_stderr(const std::vector<double>& values) {
  const std::size_t b = values.size();
  if (b < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(b);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace

double SojournStats::stderr_of_mean() const noexcept {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double m = total_s / n;
  const double var = std::max(0.0, (total_sq_s2 - n * m * m) / (n - 1.0));
  return std::sqrt(var / n);
}

void check_config(const SimConfig& config) {
  validate(config.scenario);
  if (config.n_packets == 0) throw Error(ErrorCode::kInvalidArgument, "n_packets must be >= 1");
  if (config.warmup() >= config.n_packets) throw Error(ErrorCode::kInvalidArgument, "warmup must be < n_packets");
  if (config.batches == 0) throw Error(ErrorCode::kInvalidArgument, "batches must be >= 1");
}

SimResult simulate(const SimConfig& config) {
  check_config(config);
  const Scenario& sc = config.scenario;
  const std::size_t n = sc.num_rates();
  const std::uint64_t warmup = config.warmup();
  const std::uint64_t measured = config.n_packets - warmup;
  const std::uint64_t batches = std::min(config.batches, measured);

  const CounterRng rng(config.seed);
  const LengthSampler lengths(sc.traffic);
  std::optional<OverheadTimes> times;
  if (sc.overhead) times = overhead_times(*sc.overhead);

  std::vector<Batch> per_batch(batches, Batch{0.0, 0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)});

  SimResult result;
  result.batches = batches;
  Controller ctl(sc);
  ChainState current = ctl.state();
  bool sojourn_measured = warmup == 0;
  double sojourn_time = 0.0;

  for (std::uint64_t tx = 0; tx < config.n_packets; ++tx) {
    const bool record = tx >= warmup;
    if (tx == warmup) {
      // Sojourns already in progress at the warm-up boundary are not measured.
      sojourn_time = 0.0;
    }
    const std::size_t rate = ctl.transmit_rate();
    const bool success = rng.uniform(tx, kOutcome) < sc.alpha(rate);
    const double bits = lengths.draw(rng, tx);
    const double air = bits / sc.rate(rate);
    double spent = air;
    if (times) {
      const auto window = static_cast<std::uint64_t>(times->cw_min) << ctl.counter();
      spent += static_cast<double>(rng.below(tx, kBackoff, window)) * times->slot_s;
      spent += success ? times->t_success_s : times->t_failure_s;
    }

    if (record) {
      auto& b = per_batch[(tx - warmup) * batches / measured];
      b.time += spent;
      b.time_rate[rate] += spent;
      b.air_rate[rate] += air;
      if (success) {
        b.bits += bits;
        ++result.delivered;
      }
      ++result.transmissions;
    }
    sojourn_time += spent;

    if (ctl.apply(success, result.probes, record)) {
      const ChainState next = ctl.state();
      if (record) {
        ++result.transition_counts[{current, next}];
        if (sojourn_measured) {
          auto& st = result.sojourns[current];
          ++st.count;
          st.total_s += sojourn_time;
          st.total_sq_s2 += sojourn_time * sojourn_time;
        }
        sojourn_measured = true;
      }
      sojourn_time = 0.0;
      current = next;
    }
  }

  double total_time = 0.0, total_bits = 0.0;
  std::vector<double> time_rate(n, 0.0), air_rate(n, 0.0);
  for (const auto& b : per_batch) {
    total_time += b.time;
    total_bits += b.bits;
    for (std::size_t i = 0; i < n; ++i) {
      time_rate[i] += b.time_rate[i];
      air_rate[i] += b.air_rate[i];
    }
  }
  result.total_sim_time = total_time;
  result.throughput_est = total_bits / total_time;
  result.time_fraction_est.resize(n);
  result.airtime_fraction_est.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.time_fraction_est[i] = time_rate[i] / total_time;
    result.airtime_fraction_est[i] = air_rate[i] / total_time;
  }

  std::vector<double> samples(batches);
  for (std::size_t k = 0; k < batches; ++k) samples[k] = per_batch[k].bits / per_batch[k].time;
  result.throughput_stderr = batch_stderr(samples);
  result.time_fraction_stderr.resize(n);
  result.airtime_fraction_stderr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < batches; ++k) samples[k] = per_batch[k].time_rate[i] / per_batch[k].time;
    result.time_fraction_stderr[i] = batch_stderr(samples);
    for (std::size_t k = 0; k < batches; ++k) samples[k] = per_batch[k].air_rate[i] / per_batch[k].time;
    result.airtime_fraction_stderr[i] = batch_stderr(samples);
  }
  return result;
}

TransitionEstimate estimate_transition_probability(const SimResult& result, const Edge& edge) {
  TransitionEstimate est;
  for (const auto& [e, count] : result.transition_counts) {
    if (e.first != edge.first) continue;
    est.exits += count;
    if (e.second == edge.second) est.traversals += count;
  }
  if (est.exits == 0)
    throw Error(ErrorCode::kInvalidArgument, "state " + edge.first.label() + " was never exited in the simulation");
  const double n = static_cast<double>(est.exits);
  est.probability = static_cast<double>(est.traversals) / n;
  est.stderr_ = std::sqrt(est.probability * (1.0 - est.probability) / n);
  return est;
}

TransitionEstimate estimate_transition_probability(const SimConfig& config, const Edge& edge) {
  return estimate_transition_probability(simulate(config), edge);
}

}  // namespace ratekit
