#include "dyncausal/graphs.hpp"

#include <cmath>
#include <stdexcept>

namespace dyncausal {

Eigen::MatrixXd contemporaneous_at(const CoefficientSet& coef, double t) {
  const int p = coef.p();
  const Eigen::RowVectorXd f = eval_basis(coef.basis, t);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < coef.K(); ++k) {
    if (f(k) == 0.0) continue;
    b += f(k) * coef.gamma.middleRows(k * p, p);
  }
  return b;
}

Eigen::MatrixXd lagged_at(const CoefficientSet& coef, double t) {
  if (!coef.tau) throw std::invalid_argument("lagged_at: no tau coefficients");
  const int p = coef.p();
  const int pd = p * coef.d;
  const Eigen::RowVectorXd f = eval_basis(coef.basis, t);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(pd, p);
  for (int k = 0; k < coef.K(); ++k) {
    if (f(k) == 0.0) continue;
    w += f(k) * coef.tau->middleRows(k * pd, pd);
  }
  return w;
}

BoolMatrix GraphSequence::adjacency(std::size_t i) const {
  const Eigen::MatrixXd& b = B.at(i);
  return (b.array().abs() > threshold).matrix();
}

BoolMatrix GraphSequence::lagged_adjacency(std::size_t i) const {
  if (!W) throw std::invalid_argument("lagged_adjacency: no W matrices");
  return (W->at(i).array().abs() > threshold).matrix();
}

int GraphSequence::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] == t) return static_cast<int>(i);
  }
  return -1;
}

GraphSequence coefficients_to_graphs(const CoefficientSet& coef,
                                     const std::vector<double>& times,
                                     double threshold) {
  GraphSequence seq;
  seq.threshold = threshold;
  seq.times = times;
  seq.B.reserve(times.size());
  if (coef.tau) seq.W.emplace();
  for (double t : times) {
    seq.B.push_back(contemporaneous_at(coef, t));
    if (coef.tau) seq.W->push_back(lagged_at(coef, t));
  }
  return seq;
}

namespace {

void check_structural_zeros(const Eigen::MatrixXd& B_t) {
  const int p = static_cast<int>(B_t.rows());
  constexpr double kTol = 1e-8;
  if (B_t.col(0).array().abs().maxCoeff() > kTol) {
    throw std::invalid_argument(
        "partition_weights: treatment column of B_t is not zero");
  }
  if (B_t.row(p - 1).array().abs().maxCoeff() > kTol) {
    throw std::invalid_argument(
        "partition_weights: outcome row of B_t is not zero");
  }
}

}  // namespace

PartitionedWeights partition_weights(const Eigen::MatrixXd& B_t,
                                     const std::optional<Eigen::MatrixXd>& W_t) {
  const int p = static_cast<int>(B_t.rows());
  if (p < 2 || B_t.cols() != p) {
    throw std::invalid_argument("partition_weights: B_t must be p x p, p >= 2");
  }
  check_structural_zeros(B_t);

  const int q = p - 2;  // mediator count
  PartitionedWeights out;
  out.gamma_t = B_t(0, p - 1);
  out.alpha_t = B_t.block(0, 1, 1, q);
  out.beta_t = B_t.block(1, p - 1, q, 1);
  out.C_t = B_t.block(1, 1, q, q);

  if (W_t) {
    if (W_t->cols() != p || W_t->rows() % p != 0) {
      throw std::invalid_argument("partition_weights: W_t must be pd x p");
    }
    const int d = static_cast<int>(W_t->rows()) / p;
    constexpr double kTol = 1e-8;
    if (W_t->col(0).array().abs().maxCoeff() > kTol) {
      throw std::invalid_argument(
          "partition_weights: treatment column of W_t is not zero");
    }
    out.lags.resize(static_cast<std::size_t>(d));
    for (int i = 1; i <= d; ++i) {
      const Eigen::MatrixXd block = W_t->middleRows((i - 1) * p, p);
      auto& lag = out.lags[static_cast<std::size_t>(i - 1)];
      lag.gamma = block(0, p - 1);
      lag.alpha = block.block(0, 1, 1, q);
      lag.beta = block.block(1, p - 1, q, 1);
      lag.C = block.block(1, 1, q, q);
      lag.d = block.block(p - 1, 1, 1, q);
      lag.f = block(p - 1, p - 1);
    }
  }
  return out;
}

Eigen::MatrixXd assemble_contemporaneous(const PartitionedWeights& w, int p) {
  const int q = p - 2;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  b(0, p - 1) = w.gamma_t;
  b.block(0, 1, 1, q) = w.alpha_t;
  b.block(1, p - 1, q, 1) = w.beta_t;
  b.block(1, 1, q, q) = w.C_t;
  return b;
}

Eigen::MatrixXd assemble_lagged(const PartitionedWeights& w, int p) {
  const int q = p - 2;
  const int d = static_cast<int>(w.lags.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p * d, p);
  for (int i = 1; i <= d; ++i) {
    const auto& lag = w.lags[static_cast<std::size_t>(i - 1)];
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(p, p);
    block(0, p - 1) = lag.gamma;
    block.block(0, 1, 1, q) = lag.alpha;
    block.block(1, p - 1, q, 1) = lag.beta;
    block.block(1, 1, q, q) = lag.C;
    block.block(p - 1, 1, 1, q) = lag.d;
    block(p - 1, p - 1) = lag.f;
    out.middleRows((i - 1) * p, p) = block;
  }
  return out;
}

bool is_acyclic(const BoolMatrix& adj) {
  const int n = static_cast<int>(adj.rows());
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (adj(i, j)) ++indegree[static_cast<std::size_t>(j)];
    }
  }
  std::vector<int> queue;
  queue.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (indegree[static_cast<std::size_t>(i)] == 0) queue.push_back(i);
  }
  int removed = 0;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    ++removed;
    for (int j = 0; j < n; ++j) {
      if (adj(v, j) && --indegree[static_cast<std::size_t>(j)] == 0) {
        queue.push_back(j);
      }
    }
  }
  return removed == n;
}

}  // namespace dyncausal
