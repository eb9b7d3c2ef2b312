#include "dyncausal/basis.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace dyncausal {

BasisConfig build_knots(double t_min, double t_max, int n_interior, int order,
                        double domain_end_extension) {
  if (!(t_max > t_min)) {
    throw std::invalid_argument("build_knots: t_max must exceed t_min");
  }
  if (n_interior < 0) {
    throw std::invalid_argument("build_knots: n_interior must be >= 0");
  }
  if (order < 0) {
    throw std::invalid_argument("build_knots: order must be >= 0");
  }
  if (domain_end_extension < 0.0) {
    throw std::invalid_argument("build_knots: extension must be >= 0");
  }

  BasisConfig cfg;
  cfg.order = order;
  cfg.domain_end_extension = domain_end_extension;

  const double hi = t_max + domain_end_extension;
  const double step = (hi - t_min) / static_cast<double>(n_interior + 1);

  cfg.knots.reserve(2 * (order + 1) + n_interior);
  for (int i = 0; i <= order; ++i) cfg.knots.push_back(t_min);
  for (int i = 1; i <= n_interior; ++i) cfg.knots.push_back(t_min + step * i);
  for (int i = 0; i <= order; ++i) cfg.knots.push_back(hi);

  cfg.K = static_cast<int>(cfg.knots.size()) - order - 1;
  return cfg;
}

Eigen::RowVectorXd eval_basis(const BasisConfig& config, double t) {
  const auto& k = config.knots;
  const int n_knots = static_cast<int>(k.size());
  if (n_knots < 2 || config.K != n_knots - config.order - 1 || config.K < 1) {
    throw std::invalid_argument("eval_basis: inconsistent basis config");
  }
  if (t < k.front() || t > k.back()) {
    throw std::domain_error("eval_basis: t=" + std::to_string(t) +
                            " outside basis domain [" +
                            std::to_string(k.front()) + ", " +
                            std::to_string(k.back()) + "]");
  }

  const double last = k.back();

  // Order-0 indicators on [k_j, k_{j+1}); the last nonempty interval also
  // contains its right endpoint.
  std::vector<double> values(static_cast<std::size_t>(n_knots - 1), 0.0);
  for (int j = 0; j + 1 < n_knots; ++j) {
    const bool inside = (t >= k[j] && t < k[j + 1]);
    const bool at_end = (t == last && k[j + 1] == last && k[j] < k[j + 1]);
    values[static_cast<std::size_t>(j)] = (inside || at_end) ? 1.0 : 0.0;
  }

  for (int r = 1; r <= config.order; ++r) {
    const int count = n_knots - 1 - r;
    for (int j = 0; j < count; ++j) {
      const double den1 = k[j + r] - k[j];
      const double v1 = den1 != 0.0 ? (t - k[j]) / den1 : 0.0;
      const double den2 = k[j + 1 + r] - k[j + 1];
      const double v2 = den2 != 0.0 ? (t - k[j + 1]) / den2 : 0.0;
      values[static_cast<std::size_t>(j)] =
          v1 * values[static_cast<std::size_t>(j)] +
          (1.0 - v2) * values[static_cast<std::size_t>(j + 1)];
    }
  }

  Eigen::RowVectorXd out(config.K);
  for (int j = 0; j < config.K; ++j) out(j) = values[static_cast<std::size_t>(j)];
  return out;
}

}  // namespace dyncausal
