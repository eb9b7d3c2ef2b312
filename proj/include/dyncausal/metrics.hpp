#pragma once

#include <vector>

#include "dyncausal/graphs.hpp"

namespace dyncausal {

struct PerTimeCounts {
  double t = 0.0;
  long tp = 0, fp = 0, fn = 0, reversed = 0;
  long shd = 0;
};

/// Graph-recovery report. FDR/TPR come from confusion counts summed over
/// the compared stamps; SHD is the per-stamp edit count (a reversal counts
/// once) averaged over stamps; MSE is the mean squared weight error over
/// true-support positions and stamps.
struct EvalReport {
  double fdr = 0.0, tpr = 1.0, shd = 0.0, mse = 0.0;
  long tp = 0, fp = 0, fn = 0, reversed = 0;
  std::vector<PerTimeCounts> per_time;
};

/// Compares the contemporaneous graphs at the common stamps, both sides
/// thresholded at their own configured thresholds.
EvalReport evaluate(const GraphSequence& est, const GraphSequence& truth);

/// Same confusion logic on the lagged W matrices (entrywise; reversals are
/// undefined across node copies and never counted).
EvalReport evaluate_lagged(const GraphSequence& est, const GraphSequence& truth);

enum class MsePositions { TrueSupport, Union, All };

/// Mean squared difference of weighted B_t entries over the requested
/// positions and the common stamps.
double mse_weights(const GraphSequence& est, const GraphSequence& truth,
                   MsePositions positions = MsePositions::Union);

}  // namespace dyncausal
