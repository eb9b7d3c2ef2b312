#include "dyncausal/design.hpp"

#include <stdexcept>

namespace dyncausal {

namespace {

Eigen::MatrixXd kron_expand(const Eigen::RowVectorXd& f,
                            const Eigen::MatrixXd& block) {
  const auto m = block.rows();
  const auto w = block.cols();
  Eigen::MatrixXd out(m, w * f.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    out.middleCols(k * w, w) = f(k) * block;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd design_contemporaneous(const PanelTensor& data,
                                       const BasisConfig& basis, int t) {
  if (t < 1 || t > data.T()) {
    throw std::out_of_range("design_contemporaneous: stamp out of range");
  }
  return kron_expand(eval_basis(basis, static_cast<double>(t)),
                     data.x[static_cast<std::size_t>(t - 1)]);
}

Eigen::MatrixXd design_lagged(const LaggedPanel& lagged,
                              const BasisConfig& basis, int t) {
  if (t <= lagged.d) {
    throw std::out_of_range("design_lagged: stamp must exceed lag order");
  }
  if (t > lagged.T) {
    throw std::out_of_range("design_lagged: stamp out of range");
  }
  return kron_expand(eval_basis(basis, static_cast<double>(t)),
                     lagged.at_stamp(t));
}

}  // namespace dyncausal
