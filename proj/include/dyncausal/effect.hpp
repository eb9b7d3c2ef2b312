#pragma once

#include <cstdint>
#include <vector>

#include "dyncausal/datagen.hpp"
#include "dyncausal/graphs.hpp"

namespace dyncausal {

/// Closed-form dynamic causal effect of treatment level a set at stamp t+1:
/// (gamma_{t+1} + beta_{t+1}^T (I - C_{t+1}^T)^{-1} alpha_{t+1}^T) * a.
/// The inverse is the nilpotent Neumann series (exact for acyclic mediator
/// blocks). Throws if the mediator block fails to be nilpotent (a cyclic
/// hand-built input).
double dynamic_effect(const PartitionedWeights& weights, double a);

/// Same, reading B_{t+1} from the sequence; `t` is the query stamp (the
/// effect is realized at t+1, which may be the predicted slot).
double dynamic_effect(const GraphSequence& graphs, double t, double a);

struct OracleResult {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Independent interventional check: simulates the structural recursions one
/// step forward under A_{t+1} = a versus A_{t+1} = 0 with common random
/// numbers and a shared fixed history, and returns the mean difference in
/// Y_{t+1} with its standard error.
OracleResult mc_effect_oracle(const GroundTruth& truth, int t, double a,
                              int n_samples, std::uint64_t seed);

/// Oracle variant with a caller-supplied history (unit rows for stamps
/// 1..t); used by the history-invariance property check.
OracleResult mc_effect_oracle_with_history(
    const GroundTruth& truth, int t, double a, int n_samples,
    std::uint64_t seed, const std::vector<Eigen::RowVectorXd>& history);

struct TrajectoryPoint {
  double t = 0.0;
  double effect = 0.0;
  bool is_predicted = false;
};

/// dynamic_effect at every available slot: one point per graph stamp tau,
/// reported as t = tau - 1 (the treatment is set at tau = t+1).
std::vector<TrajectoryPoint> effect_trajectory(const GraphSequence& graphs,
                                               double a);

}  // namespace dyncausal
