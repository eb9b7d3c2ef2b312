#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dyncausal/basis.hpp"

namespace dyncausal {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Basis coefficients of the expanded model. gamma is pK x p with blocks
/// ordered basis-major: row (k-1)*p + a holds the coefficients of edge
/// a -> * for basis k (1-based k, 0-based a). tau, present iff d >= 1, is
/// pdK x p with the same layout over the lag-concatenated source index.
/// Variable convention throughout: treatment = column 0, outcome = column
/// p-1, mediators in between.
struct CoefficientSet {
  Eigen::MatrixXd gamma;
  std::optional<Eigen::MatrixXd> tau;
  BasisConfig basis;
  int d = 0;

  int p() const { return static_cast<int>(gamma.cols()); }
  int K() const { return basis.K; }
};

/// B_t = sum_k F_k(t) * gamma block k; p x p.
Eigen::MatrixXd contemporaneous_at(const CoefficientSet& coef, double t);
/// W_t = sum_k F_k(t) * tau block k; pd x p. Requires tau.
Eigen::MatrixXd lagged_at(const CoefficientSet& coef, double t);

/// Weighted graphs over a list of time stamps plus the derived thresholded
/// adjacency. `predicted`, when non-empty, flags slots that come from the
/// spline evaluated beyond the fitted stamps.
struct GraphSequence {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> B;
  std::optional<std::vector<Eigen::MatrixXd>> W;
  double threshold = 0.2;
  std::vector<bool> predicted;  // empty means all observed

  std::size_t size() const { return times.size(); }
  bool is_predicted(std::size_t i) const {
    return !predicted.empty() && predicted[i];
  }
  /// |B_t| > threshold, recomputed on demand (no independent state).
  BoolMatrix adjacency(std::size_t i) const;
  BoolMatrix lagged_adjacency(std::size_t i) const;
  /// Index of the slot whose time equals t (integer stamps), or -1.
  int index_of(double t) const;
};

GraphSequence coefficients_to_graphs(const CoefficientSet& coef,
                                     const std::vector<double>& times,
                                     double threshold = 0.2);

/// Treatment/mediator/outcome blocks of a contemporaneous matrix (and
/// optional lagged matrix): direct A->Y weight, A->M row, M->Y column,
/// M->M block, and per lag the same plus Y->M and Y->Y entries.
struct PartitionedWeights {
  double gamma_t = 0.0;
  Eigen::RowVectorXd alpha_t;  // 1 x (p-2)
  Eigen::VectorXd beta_t;      // (p-2) x 1
  Eigen::MatrixXd C_t;         // (p-2) x (p-2)

  struct LagBlock {
    double gamma = 0.0;
    Eigen::RowVectorXd alpha;
    Eigen::VectorXd beta;
    Eigen::MatrixXd C;
    Eigen::RowVectorXd d;  // Y -> M, 1 x (p-2)
    double f = 0.0;        // Y -> Y
  };
  std::vector<LagBlock> lags;
};

/// Splits B_t (p x p, structural zeros required to 1e-8) and optionally W_t
/// (pd x p) into blocks. Throws on structural-zero violations.
PartitionedWeights partition_weights(
    const Eigen::MatrixXd& B_t,
    const std::optional<Eigen::MatrixXd>& W_t = std::nullopt);

/// Inverse bookkeeping: reassembles the p x p matrix from the blocks.
Eigen::MatrixXd assemble_contemporaneous(const PartitionedWeights& w, int p);
/// Reassembles the pd x p lagged matrix from the lag blocks.
Eigen::MatrixXd assemble_lagged(const PartitionedWeights& w, int p);

/// Kahn topological sort on a boolean adjacency; true iff acyclic.
bool is_acyclic(const BoolMatrix& adj);

}  // namespace dyncausal
