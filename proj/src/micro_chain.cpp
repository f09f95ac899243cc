#include "ratekit/micro_chain.hpp"

#include <Eigen/Dense>

#include <map>

namespace ratekit {

namespace {

// Long double keeps the oracle accurate when the expected counts are huge
// (e.g. alpha = 0.01 with s = 12 gives ~1e24 transmissions).
using Scalar = long double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Target { kState, kUp, kDownImmediate, kDownAfterSuccess };

}  // namespace

MicroShape shape_for(Position position) {
  switch (position) {
    case Position::kLowest: return MicroShape::kSuccessOnly;
    case Position::kHighest: return MicroShape::kFailureOnly;
    case Position::kInterior: return MicroShape::kBoth;
  }
  return MicroShape::kBoth;
}

double MicroChainSolution::visits_at(std::int64_t run) const {
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k)
    if (states[k].run == run) total += visits[k];
  return total;
}

MicroChainSolution solve_micro_chain(double alpha, std::int64_t s, std::int64_t f, MicroShape shape,
                                     bool track_phase) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kAlphaOutOfRange, "alpha must lie in (0,1)");
  if (s < 1 || f < 1) throw Error(ErrorCode::kBadThreshold, "thresholds must be >= 1");
  const bool success_exits = shape != MicroShape::kFailureOnly;
  const bool failure_exits = shape != MicroShape::kSuccessOnly;
  if (!success_exits && !failure_exits) throw Error(ErrorCode::kInvalidArgument, "chain has no exit");

  MicroChainSolution out;
  std::map<std::pair<bool, std::int64_t>, std::size_t> index;
  auto add_state = [&](bool after, std::int64_t run) {
    index.emplace(std::pair{after, run}, out.states.size());
    out.states.push_back({after, run});
  };

  // Entry state first. Without phase tracking everything lives in phase
  // "false", including positive runs.
  add_state(false, 0);
  const std::vector<bool> phases = track_phase ? std::vector<bool>{false, true} : std::vector<bool>{false};
  for (bool after : phases) {
    if (after) add_state(true, 0);
    if (failure_exits)
      for (std::int64_t r = 1; r < f; ++r) add_state(after, -r);
    if (success_exits && (after || !track_phase))
      for (std::int64_t r = 1; r < s; ++r) add_state(after, r);
  }

  const std::size_t n = out.states.size();
  Matrix system = Matrix::Identity(n, n);  // I - Q, transposed as we fill it
  std::vector<Scalar> up_rate(n, 0), down_imm_rate(n, 0), down_after_rate(n, 0);
  const Scalar a = alpha;
  const Scalar q = 1.0L - a;

  for (std::size_t k = 0; k < n; ++k) {
    const auto [after, run] = out.states[k];

    // Success.
    {
      const std::int64_t next = success_exits ? (run > 0 ? run + 1 : 1) : 0;
      const bool next_phase = track_phase ? true : after;
      if (success_exits && next == s) {
        up_rate[k] += a;
      } else {
        system(index.at({next_phase, next}), k) -= a;
      }
    }
    // Failure.
    {
      const std::int64_t next = failure_exits ? (run < 0 ? run - 1 : -1) : 0;
      if (failure_exits && next == -f) {
        (after ? down_after_rate : down_imm_rate)[k] += q;
      } else {
        system(index.at({after, next}), k) -= q;
      }
    }
  }

  // visits = e_entry^T (I - Q)^{-1}  <=>  (I - Q)^T visits = e_entry.
  Vector rhs = Vector::Zero(n);
  rhs(0) = 1;
  const Vector visits = system.partialPivLu().solve(rhs);

  Scalar total = 0, up = 0, down_imm = 0, down_after = 0;
  out.visits.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.visits[k] = static_cast<double>(visits(k));
    total += visits(k);
    up += visits(k) * up_rate[k];
    down_imm += visits(k) * down_imm_rate[k];
    down_after += visits(k) * down_after_rate[k];
  }
  out.expected_transmissions = static_cast<double>(total);
  out.p_up = static_cast<double>(up);
  out.p_down_immediate = static_cast<double>(down_imm);
  out.p_down_after_success = static_cast<double>(down_after);
  return out;
}

}  // namespace ratekit
