#include "dyncausal/effect.hpp"

#include <cmath>
#include <stdexcept>

#include "dyncausal/rng.hpp"

namespace dyncausal {

namespace {

/// (I - C^T)^{-1} v by the Neumann series; exact after p-2 terms when C^T is
/// nilpotent (acyclic mediator block). Throws if the block is not nilpotent.
Eigen::VectorXd neumann_solve(const Eigen::MatrixXd& c_transpose,
                              const Eigen::VectorXd& v) {
  const int q = static_cast<int>(c_transpose.rows());
  Eigen::VectorXd sum = v;
  Eigen::VectorXd term = v;
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(q, q);
  for (int k = 1; k < q; ++k) {
    term = c_transpose * term;
    sum += term;
    power = c_transpose * power;
  }
  if (q > 0) {
    power = c_transpose * power;  // (C^T)^q must vanish for a DAG block
    if (power.cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + c_transpose.cwiseAbs().maxCoeff())) {
      throw std::invalid_argument(
          "dynamic_effect: mediator block is not nilpotent (cyclic input)");
    }
  }
  return sum;
}

}  // namespace

double dynamic_effect(const PartitionedWeights& weights, double a) {
  const Eigen::VectorXd mediated =
      neumann_solve(weights.C_t.transpose(), weights.alpha_t.transpose());
  return (weights.gamma_t + weights.beta_t.dot(mediated)) * a;
}

double dynamic_effect(const GraphSequence& graphs, double t, double a) {
  const int idx = graphs.index_of(t + 1.0);
  if (idx < 0) {
    throw std::out_of_range("dynamic_effect: no graph at stamp t+1");
  }
  std::optional<Eigen::MatrixXd> w;
  if (graphs.W) w = graphs.W->at(static_cast<std::size_t>(idx));
  return dynamic_effect(
      partition_weights(graphs.B[static_cast<std::size_t>(idx)], w), a);
}

namespace {

/// One forward step of the structural recursions at stamp `stamp` with the
/// treatment clamped to `a_value`; history rows are full x vectors for
/// stamps 1..stamp-1.
double simulate_outcome(const GroundTruth& truth, int stamp, double a_value,
                        const std::vector<Eigen::RowVectorXd>& history,
                        const Eigen::RowVectorXd& noise) {
  const auto& graphs = truth.graphs;
  const int idx = graphs.index_of(static_cast<double>(stamp));
  if (idx < 0) throw std::out_of_range("mc_effect_oracle: stamp out of range");
  const Eigen::MatrixXd& b = graphs.B[static_cast<std::size_t>(idx)];
  const int p = static_cast<int>(b.rows());
  const int q = p - 2;

  std::optional<Eigen::MatrixXd> w;
  if (truth.d >= 1 && graphs.W) w = graphs.W->at(static_cast<std::size_t>(idx));
  const PartitionedWeights blocks = partition_weights(b, w);

  // Lagged contributions to the mediators and the outcome.
  Eigen::VectorXd lag_m = Eigen::VectorXd::Zero(q);
  double lag_y = 0.0;
  for (int i = 1; i <= truth.d; ++i) {
    if (stamp - i < 1) continue;  // before the first stamp: no lag term
    const auto& lag = blocks.lags[static_cast<std::size_t>(i - 1)];
    const Eigen::RowVectorXd& past = history.at(static_cast<std::size_t>(stamp - i - 1));
    const double a_past = past(0);
    const Eigen::VectorXd m_past = past.segment(1, q).transpose();
    const double y_past = past(p - 1);
    lag_m += lag.alpha.transpose() * a_past + lag.C.transpose() * m_past +
             lag.d.transpose() * y_past;
    lag_y += lag.gamma * a_past + lag.beta.dot(m_past) + lag.f * y_past;
  }

  const Eigen::VectorXd eps_m = noise.segment(1, q).transpose();
  const Eigen::VectorXd m_now = neumann_solve(
      blocks.C_t.transpose(),
      Eigen::VectorXd(blocks.alpha_t.transpose() * a_value + eps_m + lag_m));
  return blocks.gamma_t * a_value + blocks.beta_t.dot(m_now) + noise(p - 1) +
         lag_y;
}

}  // namespace

OracleResult mc_effect_oracle_with_history(
    const GroundTruth& truth, int t, double a, int n_samples,
    std::uint64_t seed, const std::vector<Eigen::RowVectorXd>& history) {
  if (n_samples < 1) {
    throw std::invalid_argument("mc_effect_oracle: n_samples must be >= 1");
  }
  const int stamp = t + 1;
  const int p = static_cast<int>(truth.graphs.B.front().rows());
  Rng rng(seed);

  double sum = 0.0;
  double sum_sq = 0.0;
  const double half_width = std::sqrt(3.0) * truth.noise_std;
  Eigen::RowVectorXd noise(p);
  for (int i = 0; i < n_samples; ++i) {
    for (int v = 0; v < p; ++v) {
      noise(v) = truth.noise_kind == NoiseKind::Gaussian
                     ? rng.normal(0.0, truth.noise_std)
                     : rng.uniform(-half_width, half_width);
    }
    // Common random numbers: the same noise row feeds both arms.
    const double y_a = simulate_outcome(truth, stamp, a, history, noise);
    const double y_0 = simulate_outcome(truth, stamp, 0.0, history, noise);
    const double diff = y_a - y_0;
    sum += diff;
    sum_sq += diff * diff;
  }
  OracleResult out;
  out.estimate = sum / n_samples;
  if (n_samples > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / n_samples) / (n_samples - 1));
    out.std_error = std::sqrt(var / n_samples);
  }
  return out;
}

OracleResult mc_effect_oracle(const GroundTruth& truth, int t, double a,
                              int n_samples, std::uint64_t seed) {
  // A single shared history realization, simulated forward from stamp 1.
  std::vector<Eigen::RowVectorXd> history;
  if (t >= 1) {
    const PanelTensor hist_panel =
        simulate_from_truth(truth, 1, truth.noise_std,
                            derive_seed(seed, 0x68697374ULL), truth.noise_kind);
    for (int s = 1; s <= t; ++s) {
      history.push_back(hist_panel.x[static_cast<std::size_t>(s - 1)].row(0));
    }
  }
  return mc_effect_oracle_with_history(truth, t, a, n_samples,
                                       derive_seed(seed, 1), history);
}

std::vector<TrajectoryPoint> effect_trajectory(const GraphSequence& graphs,
                                               double a) {
  std::vector<TrajectoryPoint> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    TrajectoryPoint pt;
    pt.t = graphs.times[i] - 1.0;
    pt.is_predicted = graphs.is_predicted(i);
    std::optional<Eigen::MatrixXd> w;
    if (graphs.W) w = graphs.W->at(i);
    pt.effect = dynamic_effect(partition_weights(graphs.B[i], w), a);
    out.push_back(pt);
  }
  return out;
}

}  // namespace dyncausal
