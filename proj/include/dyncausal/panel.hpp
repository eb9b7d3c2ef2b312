#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dyncausal {

/// Observed panel: one m x p matrix per time stamp. Time stamps are the
/// integers 1..T; every public operation that takes a time argument uses
/// that 1-based stamp, storage is 0-based.
struct PanelTensor {
  std::vector<Eigen::MatrixXd> x;
  std::vector<std::string> variable_names;  // size p, or empty

  int T() const { return static_cast<int>(x.size()); }
  int m() const { return x.empty() ? 0 : static_cast<int>(x.front().rows()); }
  int p() const { return x.empty() ? 0 : static_cast<int>(x.front().cols()); }

  /// Throws if shapes are ragged or any entry is non-finite.
  void validate() const;
};

PanelTensor make_panel(int T, int m, int p);

/// Lag-concatenated panel: Z_t row u = [x_{t-1}(u), ..., x_{t-d}(u)],
/// defined for stamps t in {d+1, ..., T}.
struct LaggedPanel {
  int d = 0;
  int T = 0;
  std::vector<Eigen::MatrixXd> z;  // z[i] belongs to stamp t = d+1+i

  const Eigen::MatrixXd& at_stamp(int t) const { return z.at(t - d - 1); }
};

LaggedPanel build_lagged(const PanelTensor& base, int d);

}  // namespace dyncausal
