#include <algorithm>
#include <stdexcept>
#include <vector>

#include "dyncausal/basis.hpp"
#include "dyncausal/panel.hpp"
#include "dyncausal/solver.hpp"

namespace dyncausal {

namespace {

PanelTensor select_units(const PanelTensor& data, const std::vector<int>& units) {
  PanelTensor out;
  out.variable_names = data.variable_names;
  out.x.reserve(data.x.size());
  for (const auto& slice : data.x) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(units.size()), slice.cols());
    for (std::size_t r = 0; r < units.size(); ++r) {
      sub.row(static_cast<Eigen::Index>(r)) = slice.row(units[r]);
    }
    out.x.push_back(std::move(sub));
  }
  return out;
}

}  // namespace

BasisConfig select_knots_cv(const PanelTensor& data,
                            const std::vector<int>& candidates, int folds,
                            const SolverConfig& solver_cfg, int lag,
                            int order) {
  data.validate();
  if (candidates.empty()) {
    throw std::invalid_argument("select_knots_cv: empty candidate list");
  }
  if (folds < 2) {
    throw std::invalid_argument("select_knots_cv: folds must be >= 2");
  }
  const int T = data.T();
  const int m = data.m();
  if (T < 2) throw std::invalid_argument("select_knots_cv: need T >= 2");
  if (folds > m) {
    throw std::invalid_argument("select_knots_cv: more folds than units");
  }

  // Units assigned round-robin so every fold sees all time stamps.
  std::vector<std::vector<int>> fold_units(static_cast<std::size_t>(folds));
  for (int u = 0; u < m; ++u) {
    fold_units[static_cast<std::size_t>(u % folds)].push_back(u);
  }

  int best_candidate = -1;
  double best_error = 0.0;
  for (int n_interior : candidates) {
    if (n_interior < 0) {
      throw std::invalid_argument("select_knots_cv: negative knot count");
    }
    const BasisConfig basis = build_knots(1.0, static_cast<double>(T),
                                          n_interior, order,
                                          /*domain_end_extension=*/1.0);
    if (basis.K > T - lag) {
      throw std::invalid_argument(
          "select_knots_cv: candidate yields K > T - d");
    }

    double error_sum = 0.0;
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train;
      for (int g = 0; g < folds; ++g) {
        if (g == f) continue;
        train.insert(train.end(), fold_units[static_cast<std::size_t>(g)].begin(),
                     fold_units[static_cast<std::size_t>(g)].end());
      }
      std::sort(train.begin(), train.end());
      const PanelTensor train_panel = select_units(data, train);
      const PanelTensor test_panel =
          select_units(data, fold_units[static_cast<std::size_t>(f)]);
      const FitResult fitted = fit(train_panel, basis, lag, solver_cfg);
      error_sum += score(fitted.coef, test_panel);
    }
    const double mean_error = error_sum / static_cast<double>(folds);

    // A candidate must improve on the incumbent by a real relative margin;
    // near-ties break toward fewer knots.
    if (best_candidate < 0) {
      best_candidate = n_interior;
      best_error = mean_error;
    } else if (mean_error < best_error * (1.0 - 1e-9)) {
      best_candidate = n_interior;
      best_error = mean_error;
    } else if (mean_error <= best_error * (1.0 + 1e-9) &&
               n_interior < best_candidate) {
      best_candidate = n_interior;
      best_error = std::min(best_error, mean_error);
    }
  }
  return build_knots(1.0, static_cast<double>(T), best_candidate, order, 1.0);
}

}  // namespace dyncausal
