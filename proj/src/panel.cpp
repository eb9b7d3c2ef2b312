#include "dyncausal/panel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dyncausal {

void PanelTensor::validate() const {
  if (x.empty()) throw std::invalid_argument("panel: no time stamps");
  const auto rows = x.front().rows();
  const auto cols = x.front().cols();
  if (rows < 1 || cols < 1) throw std::invalid_argument("panel: empty slice");
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t].rows() != rows || x[t].cols() != cols) {
      throw std::invalid_argument("panel: ragged slice at stamp " +
                                  std::to_string(t + 1));
    }
    if (!x[t].allFinite()) {
      throw std::invalid_argument("panel: non-finite entry at stamp " +
                                  std::to_string(t + 1));
    }
  }
  if (!variable_names.empty() &&
      variable_names.size() != static_cast<std::size_t>(cols)) {
    throw std::invalid_argument("panel: variable_names size mismatch");
  }
}

PanelTensor make_panel(int T, int m, int p) {
  PanelTensor panel;
  panel.x.assign(static_cast<std::size_t>(T), Eigen::MatrixXd::Zero(m, p));
  return panel;
}

LaggedPanel build_lagged(const PanelTensor& base, int d) {
  if (d < 1) throw std::invalid_argument("build_lagged: d must be >= 1");
  if (base.T() <= d) {
    throw std::invalid_argument("build_lagged: need more stamps than lags");
  }
  const int m = base.m();
  const int p = base.p();

  LaggedPanel out;
  out.d = d;
  out.T = base.T();
  out.z.reserve(static_cast<std::size_t>(base.T() - d));
  for (int t = d + 1; t <= base.T(); ++t) {
    Eigen::MatrixXd zt(m, p * d);
    for (int i = 1; i <= d; ++i) {
      zt.middleCols((i - 1) * p, p) = base.x[static_cast<std::size_t>(t - i - 1)];
    }
    out.z.push_back(std::move(zt));
  }
  return out;
}

}  // namespace dyncausal
