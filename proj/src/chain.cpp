#include "ratekit/chain.hpp"

#include <cmath>

namespace ratekit {

std::string ChainState::label() const {
  const std::string level = std::to_string(rate + 1);
  switch (kind) {
    case StateKind::kRate: return level;
    case StateKind::kFallback: return level + "_b" + std::to_string(stage);
    case StateKind::kProbe: return level + "+_b" + std::to_string(stage);
    case StateKind::kBackoff: return level + "_g" + std::to_string(stage);
  }
  return level;
}

std::vector<double> semi_markov_time_fractions(const std::vector<double>& pi, const std::vector<double>& mu) {
  double total = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) total += pi[k] * mu[k];
  std::vector<double> out(pi.size());
  for (std::size_t k = 0; k < pi.size(); ++k) out[k] = pi[k] * mu[k] / total;
  return out;
}

double throughput_from_fractions(const Scenario& scenario, const std::vector<double>& fractions) {
  double tau = 0.0;
  for (std::size_t i = 0; i < fractions.size(); ++i) tau += fractions[i] * scenario.alpha(i) * scenario.rate(i);
  return tau;
}

std::vector<double> dense_stationary(const Eigen::MatrixXd& transition) {
  const Eigen::Index n = transition.rows();
  if (n == 0 || transition.cols() != n) throw Error(ErrorCode::kInvalidArgument, "transition matrix must be square");
  // The diagonal is minus the off-diagonal row mass rather than P_ii - 1:
  // in nearly decomposable chains the rounding slack in a row sum would
  // otherwise swamp the weak coupling between blocks.
  using Matrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Matrix system = transition.transpose().cast<long double>();
  for (Eigen::Index i = 0; i < n; ++i) {
    long double out = 0.0L;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) out += transition(i, j);
    system(i, i) = -out;
  }
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0L;

  Eigen::FullPivLU<Matrix> lu(system);
  if (!lu.isInvertible()) throw Error(ErrorCode::kNumeric, "embedded chain is singular");
  const Eigen::VectorXd pi = lu.solve(rhs).cast<double>();

  std::vector<double> out(pi.data(), pi.data() + n);
  for (double& v : out) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNumeric, "embedded chain solve produced non-finite values");
    if (v < 0.0 && v > -1e-14) v = 0.0;
  }
  return out;
}

double balance_residual(const Eigen::MatrixXd& transition, const std::vector<double>& pi) {
  const Eigen::Map<const Eigen::RowVectorXd> row(pi.data(), static_cast<Eigen::Index>(pi.size()));
  return (row * transition - row).cwiseAbs().maxCoeff();
}

}  // namespace ratekit
