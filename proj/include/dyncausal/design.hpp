#pragma once

#include <Eigen/Dense>

#include "dyncausal/basis.hpp"
#include "dyncausal/panel.hpp"

namespace dyncausal {

/// D_t = F_t (x) X_t, m x pK, block k holding F_k(t) * X_t. The layout
/// pairs with the basis-major rows of CoefficientSet::gamma so that
/// D_t * gamma == X_t * B_t.
Eigen::MatrixXd design_contemporaneous(const PanelTensor& data,
                                       const BasisConfig& basis, int t);

/// G_t = F_t (x) Z_t, m x pdK; defined for stamps t >= d+1.
Eigen::MatrixXd design_lagged(const LaggedPanel& lagged,
                              const BasisConfig& basis, int t);

}  // namespace dyncausal
