#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyncausal/graphs.hpp"
#include "dyncausal/panel.hpp"

namespace dyncausal {

struct SolverConfig {
  double acyclicity_alpha = 0.0;  // <= 0 means 1/p
  double threshold = 0.2;
  int max_outer_iters = 100;
  int inner_steps = 200;
  double learning_rate = 0.003;
  double rho_init = 1.0;
  double rho_mult = 10.0;
  double h_decrease_factor = 0.25;
  double rho_max = 1e16;
  double h_tol = 1e-8;
  /// L1 sparsity penalty on the implied per-stamp graph weights |B_t|,
  /// |W_t| (mean over stamps, normalized by p so the value is an
  /// approximate soft-threshold in weight units); 0 disables.
  double l1_penalty = 0.05;
  /// Re-estimate the surviving support by plain least squares after the
  /// augmented-Lagrangian stage, removing the L1 selection bias.
  bool refit = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceEntry {
  int outer = 0;
  double score = 0.0;
  double h1 = 0.0;
  double rho = 0.0;
  double lambda = 0.0;
};

struct FitResult {
  CoefficientSet coef;
  GraphSequence graphs;  // fitted stamps d+1..T
  Eigen::MatrixXd predicted_B;
  std::optional<Eigen::MatrixXd> predicted_W;
  double prediction_time = 0.0;
  double final_score = 0.0;
  double final_h1 = 0.0;
  bool converged = false;  // augmented-Lagrangian stage reached h1 <= h_tol
  std::vector<TraceEntry> trace;
  std::vector<std::string> repairs;  // cycle-repair log, normally empty

  /// Fitted graphs with the prediction appended as a flagged slot.
  GraphSequence full_sequence() const;
};

/// Free-coefficient masks (true = optimizable). gamma: treatment column and
/// the outcome row of every basis block are fixed at zero; tau: treatment
/// column fixed at zero.
BoolMatrix gamma_mask(int p, int K);
BoolMatrix tau_mask(int p, int d, int K);

/// Zeroes the structurally-fixed coordinates; idempotent.
CoefficientSet enforce_treatment_mask(CoefficientSet coef);

/// Sum of |coef| over the structurally-fixed gamma coordinates (treatment
/// constraint residual; 0 iff the mask holds exactly).
double h2_value(const CoefficientSet& coef);
/// Same including the tau treatment column (the lagged variant; equals
/// h2_value when d = 0).
double h2_star_value(const CoefficientSet& coef);

/// Gaussian reconstruction score (1 / 2N) sum_t ||X_t - D_t G - G_t T||_F^2
/// over stamps d+1..T, N = (T-d) * m * p.
double score(const CoefficientSet& coef, const PanelTensor& data);
Eigen::MatrixXd score_gradient_gamma(const CoefficientSet& coef,
                                     const PanelTensor& data);
Eigen::MatrixXd score_gradient_tau(const CoefficientSet& coef,
                                   const PanelTensor& data);

/// |tr[(I + alpha * B .* B)^p] - p| for one matrix, evaluated by repeated
/// multiplication; exactly 0 on acyclic supports.
double acyclicity_gap(const Eigen::MatrixXd& B, double alpha);
/// d gap / dB = p * [(I + alpha B.*B)^(p-1)]^T .* (2 alpha B); the absolute
/// value contributes subgradient 0 when the gap is exactly zero.
Eigen::MatrixXd acyclicity_gap_gradient(const Eigen::MatrixXd& B, double alpha);

/// Acyclicity constraint value summed over time stamps; alpha <= 0 means 1/p.
double h1_value(const CoefficientSet& coef, const std::vector<double>& times,
                double alpha = 0.0);
/// Gradient of h1 with respect to gamma, chained through B_ab(t) =
/// sum_k F_k(t) gamma_abk. Unmasked; fit discards masked entries.
Eigen::MatrixXd h1_gradient(const CoefficientSet& coef,
                            const std::vector<double>& times,
                            double alpha = 0.0);

/// Constrained fit: minimizes score + l1 + lambda h1 + (rho/2) h1^2 over the
/// masked coefficients with Adam inner loops and NOTEARS-style outer updates,
/// then thresholds, repairs any residual cycles, optionally refits the
/// surviving support by least squares, and evaluates the coefficient splines
/// at T+1 for the one-step-ahead prediction.
FitResult fit(const PanelTensor& data, const BasisConfig& basis, int d,
              const SolverConfig& cfg);

/// Coefficient splines evaluated at the prediction stamp.
std::pair<Eigen::MatrixXd, std::optional<Eigen::MatrixXd>> predict_next(
    const FitResult& result);

}  // namespace dyncausal
