#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dyncausal {

struct PanelTensor;
struct SolverConfig;

/// B-spline basis system F_1..F_K used to expand time-varying coefficients.
///
/// "order" is the polynomial degree of each piece (order 0 = indicator
/// functions). The knot vector is clamped: boundary knots repeated with
/// multiplicity order+1, interior knots equally spaced. The vector already
/// covers the full evaluation domain, including any prediction extension,
/// so evaluation never extrapolates: valid t is [knots.front(), knots.back()]
/// with the last interval closed on the right.
struct BasisConfig {
  int order = 2;
  std::vector<double> knots;
  int K = 0;
  double domain_end_extension = 0.0;

  double domain_min() const { return knots.front(); }
  double domain_max() const { return knots.back(); }
};

/// Builds a clamped knot vector with n_interior equally spaced interior
/// knots over [t_min, t_max + domain_end_extension]. K = n_interior + order + 1.
BasisConfig build_knots(double t_min, double t_max, int n_interior, int order,
                        double domain_end_extension = 0.0);

/// Evaluates all K basis functions at t by the order-raising recursion
/// seeded with half-open indicators (right-continuous; the last nonempty
/// interval is closed on the right so the domain end is representable).
/// Throws std::domain_error outside [domain_min, domain_max].
Eigen::RowVectorXd eval_basis(const BasisConfig& config, double t);

/// Selects the interior-knot count from `candidates` by cross-validation:
/// units (replicates) are partitioned into `folds` groups so every fold sees
/// all time stamps, each candidate is fitted on the training units and scored
/// by mean held-out reconstruction error. A larger candidate must beat the
/// incumbent by a relative margin of 1e-9; ties resolve to fewer knots.
BasisConfig select_knots_cv(const PanelTensor& data,
                            const std::vector<int>& candidates, int folds,
                            const SolverConfig& solver_cfg, int lag = 0,
                            int order = 2);

}  // namespace dyncausal
