#include "dyncausal/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dyncausal {

namespace {

struct StampPair {
  std::size_t est_idx;
  std::size_t truth_idx;
  double t;
};

std::vector<StampPair> common_stamps(const GraphSequence& est,
                                     const GraphSequence& truth) {
  std::vector<StampPair> out;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const int j = truth.index_of(est.times[i]);
    if (j >= 0) out.push_back({i, static_cast<std::size_t>(j), est.times[i]});
  }
  if (out.empty()) {
    throw std::invalid_argument("evaluate: no common time stamps");
  }
  return out;
}

void check_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("evaluate: graph shape mismatch");
  }
}

/// Confusion counts for one stamp. `square` enables reversal detection.
PerTimeCounts count_stamp(const BoolMatrix& est, const BoolMatrix& truth,
                          bool square, double t) {
  PerTimeCounts c;
  c.t = t;
  const auto rows = est.rows();
  const auto cols = est.cols();
  long reversal_pairs = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (est(i, j) && truth(i, j)) ++c.tp;
      if (est(i, j) && !truth(i, j)) ++c.fp;
      if (!est(i, j) && truth(i, j)) ++c.fn;
    }
  }
  if (square) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = i + 1; j < cols; ++j) {
        const bool est_fwd = est(i, j) && !est(j, i);
        const bool est_bwd = est(j, i) && !est(i, j);
        const bool tr_fwd = truth(i, j) && !truth(j, i);
        const bool tr_bwd = truth(j, i) && !truth(i, j);
        if ((est_fwd && tr_bwd) || (est_bwd && tr_fwd)) ++reversal_pairs;
      }
    }
  }
  c.reversed = reversal_pairs;
  c.shd = c.fp + c.fn - c.reversed;  // a reversal is one edit, not two
  return c;
}

EvalReport evaluate_impl(const GraphSequence& est, const GraphSequence& truth,
                         bool lagged) {
  const auto stamps = common_stamps(est, truth);
  EvalReport report;
  double shd_sum = 0.0;
  double mse_sum = 0.0;
  long mse_count = 0;
  for (const auto& s : stamps) {
    const Eigen::MatrixXd& be =
        lagged ? est.W->at(s.est_idx) : est.B[s.est_idx];
    const Eigen::MatrixXd& bt =
        lagged ? truth.W->at(s.truth_idx) : truth.B[s.truth_idx];
    check_shape(be, bt);
    const BoolMatrix ae = (be.array().abs() > est.threshold).matrix();
    const BoolMatrix at = (bt.array().abs() > truth.threshold).matrix();
    const PerTimeCounts c = count_stamp(ae, at, !lagged, s.t);
    report.per_time.push_back(c);
    report.tp += c.tp;
    report.fp += c.fp;
    report.fn += c.fn;
    report.reversed += c.reversed;
    shd_sum += static_cast<double>(c.shd);
    for (Eigen::Index i = 0; i < bt.rows(); ++i) {
      for (Eigen::Index j = 0; j < bt.cols(); ++j) {
        if (bt(i, j) != 0.0) {
          const double diff = be(i, j) - bt(i, j);
          mse_sum += diff * diff;
          ++mse_count;
        }
      }
    }
  }
  report.fdr = (report.tp + report.fp) == 0
                   ? 0.0
                   : static_cast<double>(report.fp) /
                         static_cast<double>(report.tp + report.fp);
  report.tpr = (report.tp + report.fn) == 0
                   ? 1.0
                   : static_cast<double>(report.tp) /
                         static_cast<double>(report.tp + report.fn);
  report.shd = shd_sum / static_cast<double>(stamps.size());
  report.mse = mse_count == 0 ? 0.0 : mse_sum / static_cast<double>(mse_count);
  return report;
}

}  // namespace

EvalReport evaluate(const GraphSequence& est, const GraphSequence& truth) {
  return evaluate_impl(est, truth, /*lagged=*/false);
}

EvalReport evaluate_lagged(const GraphSequence& est, const GraphSequence& truth) {
  if (!est.W || !truth.W) {
    throw std::invalid_argument("evaluate_lagged: both sides need W matrices");
  }
  return evaluate_impl(est, truth, /*lagged=*/true);
}

double mse_weights(const GraphSequence& est, const GraphSequence& truth,
                   MsePositions positions) {
  const auto stamps = common_stamps(est, truth);
  double sum = 0.0;
  long count = 0;
  for (const auto& s : stamps) {
    const Eigen::MatrixXd& be = est.B[s.est_idx];
    const Eigen::MatrixXd& bt = truth.B[s.truth_idx];
    check_shape(be, bt);
    for (Eigen::Index i = 0; i < bt.rows(); ++i) {
      for (Eigen::Index j = 0; j < bt.cols(); ++j) {
        bool include = false;
        switch (positions) {
          case MsePositions::TrueSupport:
            include = bt(i, j) != 0.0;
            break;
          case MsePositions::Union:
            include = bt(i, j) != 0.0 || be(i, j) != 0.0;
            break;
          case MsePositions::All:
            include = true;
            break;
        }
        if (include) {
          const double diff = be(i, j) - bt(i, j);
          sum += diff * diff;
          ++count;
        }
      }
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace dyncausal
