#include "dyncausal/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "dyncausal/design.hpp"

namespace dyncausal {

void SolverConfig::validate() const {
  if (threshold < 0.0) throw std::invalid_argument("solver: threshold < 0");
  if (max_outer_iters < 1 || inner_steps < 1) {
    throw std::invalid_argument("solver: iteration counts must be positive");
  }
  if (learning_rate <= 0.0 || rho_init <= 0.0 || h_tol <= 0.0) {
    throw std::invalid_argument("solver: rates and tolerances must be positive");
  }
  if (rho_mult <= 1.0) throw std::invalid_argument("solver: rho_mult must exceed 1");
  if (h_decrease_factor <= 0.0 || h_decrease_factor >= 1.0) {
    throw std::invalid_argument("solver: h_decrease_factor must be in (0,1)");
  }
  if (l1_penalty < 0.0) throw std::invalid_argument("solver: l1_penalty < 0");
}

BoolMatrix gamma_mask(int p, int K) {
  BoolMatrix mask = BoolMatrix::Constant(p * K, p, true);
  for (int k = 0; k < K; ++k) {
    for (int a = 0; a < p; ++a) mask(k * p + a, 0) = false;  // treatment column
    for (int b = 0; b < p; ++b) mask(k * p + p - 1, b) = false;  // outcome row
  }
  return mask;
}

BoolMatrix tau_mask(int p, int d, int K) {
  BoolMatrix mask = BoolMatrix::Constant(p * d * K, p, true);
  mask.col(0).setConstant(false);
  return mask;
}

CoefficientSet enforce_treatment_mask(CoefficientSet coef) {
  const int p = coef.p();
  coef.gamma = coef.gamma.cwiseProduct(gamma_mask(p, coef.K()).cast<double>());
  if (coef.tau) {
    coef.tau->col(0).setZero();
  }
  return coef;
}

double h2_value(const CoefficientSet& coef) {
  const int p = coef.p();
  const BoolMatrix gm = gamma_mask(p, coef.K());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < coef.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < coef.gamma.cols(); ++j) {
      if (!gm(i, j)) sum += std::abs(coef.gamma(i, j));
    }
  }
  return sum;
}

double h2_star_value(const CoefficientSet& coef) {
  double sum = h2_value(coef);
  if (coef.tau) sum += coef.tau->col(0).array().abs().sum();
  return sum;
}

namespace {

std::vector<double> fitted_stamps(int T, int d) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(T - d));
  for (int t = d + 1; t <= T; ++t) times.push_back(static_cast<double>(t));
  return times;
}

void check_dims(const CoefficientSet& coef, const PanelTensor& data) {
  const int p = data.p();
  if (coef.p() != p) throw std::invalid_argument("score: p mismatch");
  if (coef.gamma.rows() != static_cast<Eigen::Index>(p) * coef.K()) {
    throw std::invalid_argument("score: gamma rows != p*K");
  }
  if (coef.d > 0) {
    if (!coef.tau) throw std::invalid_argument("score: d > 0 needs tau");
    if (coef.tau->rows() != static_cast<Eigen::Index>(p) * coef.d * coef.K()) {
      throw std::invalid_argument("score: tau rows != p*d*K");
    }
  }
  if (data.T() <= coef.d) throw std::invalid_argument("score: T <= d");
}

struct Stacked {
  Eigen::MatrixXd X;  // (T-d)m x p
  Eigen::MatrixXd D;  // (T-d)m x pK
  Eigen::MatrixXd G;  // (T-d)m x pdK, empty when d = 0
  Eigen::MatrixXd F;  // (T-d) x K basis rows
  std::vector<double> times;
  double n_entries = 0.0;
};

Stacked stack_designs(const PanelTensor& data, const BasisConfig& basis, int d) {
  const int T = data.T();
  const int m = data.m();
  const int p = data.p();
  const int K = basis.K;
  const int rows_per_t = m;
  const int nt = T - d;

  Stacked s;
  s.times = fitted_stamps(T, d);
  s.X.resize(static_cast<Eigen::Index>(nt) * rows_per_t, p);
  s.D.resize(static_cast<Eigen::Index>(nt) * rows_per_t, static_cast<Eigen::Index>(p) * K);
  s.F.resize(nt, K);
  LaggedPanel lagged;
  if (d >= 1) {
    lagged = build_lagged(data, d);
    s.G.resize(static_cast<Eigen::Index>(nt) * rows_per_t,
               static_cast<Eigen::Index>(p) * d * K);
  }
  for (int i = 0; i < nt; ++i) {
    const int t = d + 1 + i;
    s.X.middleRows(static_cast<Eigen::Index>(i) * m, m) =
        data.x[static_cast<std::size_t>(t - 1)];
    s.D.middleRows(static_cast<Eigen::Index>(i) * m, m) =
        design_contemporaneous(data, basis, t);
    s.F.row(i) = eval_basis(basis, static_cast<double>(t));
    if (d >= 1) {
      s.G.middleRows(static_cast<Eigen::Index>(i) * m, m) =
          design_lagged(lagged, basis, t);
    }
  }
  s.n_entries = static_cast<double>(nt) * m * p;
  return s;
}

Eigen::MatrixXd graph_from_gamma(const Eigen::MatrixXd& gamma,
                                 const Eigen::RowVectorXd& f, int p) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (f(k) != 0.0) b += f(k) * gamma.middleRows(k * p, p);
  }
  return b;
}

Eigen::MatrixXd lag_from_tau(const Eigen::MatrixXd& tau,
                             const Eigen::RowVectorXd& f, int pd) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(pd, tau.cols());
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    if (f(k) != 0.0) w += f(k) * tau.middleRows(k * pd, pd);
  }
  return w;
}

double resolve_alpha(double alpha, int p) {
  return alpha > 0.0 ? alpha : 1.0 / static_cast<double>(p);
}

/// One cycle of the thresholded adjacency, as a list of edges; empty if none.
std::vector<std::pair<int, int>> find_cycle(const BoolMatrix& adj) {
  const int n = static_cast<int>(adj.rows());
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  std::vector<int> path;
  std::vector<std::pair<int, int>> cycle;

  std::function<bool(int)> dfs = [&](int v) -> bool {
    color[static_cast<std::size_t>(v)] = 1;
    path.push_back(v);
    for (int w = 0; w < n; ++w) {
      if (!adj(v, w)) continue;
      if (color[static_cast<std::size_t>(w)] == 1) {
        auto it = std::find(path.begin(), path.end(), w);
        for (auto j = it; j + 1 != path.end(); ++j) {
          cycle.emplace_back(*j, *(j + 1));
        }
        cycle.emplace_back(v, w);
        return true;
      }
      if (color[static_cast<std::size_t>(w)] == 0 && dfs(w)) return true;
    }
    path.pop_back();
    color[static_cast<std::size_t>(v)] = 2;
    return false;
  };

  for (int v = 0; v < n; ++v) {
    if (color[static_cast<std::size_t>(v)] == 0 && dfs(v)) return cycle;
  }
  return {};
}

/// Removes the weakest on-cycle edge (by `magnitude`) from `support` until
/// the support is acyclic. Returns a log line per removal.
void repair_support(BoolMatrix& support, const Eigen::MatrixXd& magnitude,
                    std::vector<std::string>& log) {
  for (;;) {
    const auto cycle = find_cycle(support);
    if (cycle.empty()) return;
    auto weakest = cycle.front();
    for (const auto& e : cycle) {
      if (magnitude(e.first, e.second) <
          magnitude(weakest.first, weakest.second)) {
        weakest = e;
      }
    }
    support(weakest.first, weakest.second) = false;
    log.push_back("cycle repair: removed edge " + std::to_string(weakest.first) +
                  "->" + std::to_string(weakest.second) + " (|w|=" +
                  std::to_string(magnitude(weakest.first, weakest.second)) + ")");
  }
}

/// Zeroes the weakest on-cycle entries of a weighted matrix until its
/// thresholded adjacency is acyclic.
void repair_graph(Eigen::MatrixXd& B, double threshold,
                  std::vector<std::string>& log) {
  for (;;) {
    const BoolMatrix adj = (B.array().abs() > threshold).matrix();
    const auto cycle = find_cycle(adj);
    if (cycle.empty()) return;
    auto weakest = cycle.front();
    for (const auto& e : cycle) {
      if (std::abs(B(e.first, e.second)) <
          std::abs(B(weakest.first, weakest.second))) {
        weakest = e;
      }
    }
    log.push_back("cycle repair: zeroed entry " + std::to_string(weakest.first) +
                  "->" + std::to_string(weakest.second));
    B(weakest.first, weakest.second) = 0.0;
  }
}

}  // namespace

double score(const CoefficientSet& coef, const PanelTensor& data) {
  check_dims(coef, data);
  const Stacked s = stack_designs(data, coef.basis, coef.d);
  Eigen::MatrixXd resid = s.X - s.D * coef.gamma;
  if (coef.d >= 1) resid.noalias() -= s.G * *coef.tau;
  return resid.squaredNorm() / (2.0 * s.n_entries);
}

Eigen::MatrixXd score_gradient_gamma(const CoefficientSet& coef,
                                     const PanelTensor& data) {
  check_dims(coef, data);
  const Stacked s = stack_designs(data, coef.basis, coef.d);
  Eigen::MatrixXd resid = s.X - s.D * coef.gamma;
  if (coef.d >= 1) resid.noalias() -= s.G * *coef.tau;
  return -(s.D.transpose() * resid) / s.n_entries;
}

Eigen::MatrixXd score_gradient_tau(const CoefficientSet& coef,
                                   const PanelTensor& data) {
  check_dims(coef, data);
  if (coef.d < 1) throw std::invalid_argument("score_gradient_tau: d = 0");
  const Stacked s = stack_designs(data, coef.basis, coef.d);
  Eigen::MatrixXd resid = s.X - s.D * coef.gamma - s.G * *coef.tau;
  return -(s.G.transpose() * resid) / s.n_entries;
}

double acyclicity_gap(const Eigen::MatrixXd& B, double alpha) {
  const int p = static_cast<int>(B.rows());
  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(p, p) + alpha * B.cwiseProduct(B);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p, p);
  for (int i = 0; i < p; ++i) power = power * M;
  return std::abs(power.trace() - static_cast<double>(p));
}

Eigen::MatrixXd acyclicity_gap_gradient(const Eigen::MatrixXd& B, double alpha) {
  const int p = static_cast<int>(B.rows());
  const Eigen::MatrixXd M =
      Eigen::MatrixXd::Identity(p, p) + alpha * B.cwiseProduct(B);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p, p);  // M^(p-1)
  for (int i = 0; i < p - 1; ++i) power = power * M;
  const double gap = (power * M).trace() - static_cast<double>(p);
  if (gap == 0.0) return Eigen::MatrixXd::Zero(p, p);
  // gap >= 0 holds for alpha > 0, so |.| contributes sign +1 here.
  return static_cast<double>(p) *
         power.transpose().cwiseProduct(2.0 * alpha * B);
}

double h1_value(const CoefficientSet& coef, const std::vector<double>& times,
                double alpha) {
  const int p = coef.p();
  const double a = resolve_alpha(alpha, p);
  double total = 0.0;
  for (double t : times) {
    total += acyclicity_gap(contemporaneous_at(coef, t), a);
  }
  return total;
}

Eigen::MatrixXd h1_gradient(const CoefficientSet& coef,
                            const std::vector<double>& times, double alpha) {
  const int p = coef.p();
  const double a = resolve_alpha(alpha, p);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(coef.gamma.rows(), p);
  for (double t : times) {
    const Eigen::RowVectorXd f = eval_basis(coef.basis, t);
    const Eigen::MatrixXd gb =
        acyclicity_gap_gradient(graph_from_gamma(coef.gamma, f, p), a);
    for (int k = 0; k < coef.K(); ++k) {
      if (f(k) != 0.0) grad.middleRows(k * p, p) += f(k) * gb;
    }
  }
  return grad;
}

namespace {

/// Adam state for one parameter matrix.
struct AdamState {
  Eigen::MatrixXd m, v;
  explicit AdamState(Eigen::Index rows, Eigen::Index cols)
      : m(Eigen::MatrixXd::Zero(rows, cols)), v(Eigen::MatrixXd::Zero(rows, cols)) {}
  void step(Eigen::MatrixXd& theta, const Eigen::MatrixXd& grad, double lr,
            int t) {
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    theta -= (lr / c1) * m.cwiseQuotient(((v / c2).cwiseSqrt().array() + kEps).matrix());
  }
};

struct Objective {
  const Stacked& s;
  int p, K, d;
  double alpha, l1;
  Eigen::MatrixXd gamma_mask_d, tau_mask_d;  // 1.0 = free

  double last_score = 0.0;
  double last_h1 = 0.0;

  /// Gradient of score + l1-on-graphs + (lambda + rho*h1)*h1 at (gamma, tau).
  void eval(const Eigen::MatrixXd& gamma, const Eigen::MatrixXd* tau,
            double lambda, double rho, Eigen::MatrixXd& g_gamma,
            Eigen::MatrixXd& g_tau) {
    Eigen::MatrixXd resid = s.X - s.D * gamma;
    if (tau) resid.noalias() -= s.G * *tau;
    last_score = resid.squaredNorm() / (2.0 * s.n_entries);
    g_gamma = -(s.D.transpose() * resid) / s.n_entries;
    if (tau) g_tau = -(s.G.transpose() * resid) / s.n_entries;

    const int nt = static_cast<int>(s.times.size());
    const double l1_scale = l1 / (static_cast<double>(nt) * p);
    Eigen::MatrixXd h_grad = Eigen::MatrixXd::Zero(gamma.rows(), p);
    double h = 0.0;
    for (int i = 0; i < nt; ++i) {
      const Eigen::RowVectorXd f = s.F.row(i);
      const Eigen::MatrixXd b = graph_from_gamma(gamma, f, p);
      h += acyclicity_gap(b, alpha);
      const Eigen::MatrixXd gb = acyclicity_gap_gradient(b, alpha);
      const Eigen::MatrixXd sgn =
          b.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
      for (int k = 0; k < K; ++k) {
        if (f(k) == 0.0) continue;
        h_grad.middleRows(k * p, p) += f(k) * gb;
        if (l1 > 0.0) g_gamma.middleRows(k * p, p) += (l1_scale * f(k)) * sgn;
      }
      if (tau && l1 > 0.0) {
        const Eigen::MatrixXd w = lag_from_tau(*tau, f, p * d);
        const Eigen::MatrixXd wsgn =
            w.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
        for (int k = 0; k < K; ++k) {
          if (f(k) != 0.0) {
            g_tau.middleRows(k * p * d, p * d) += (l1_scale * f(k)) * wsgn;
          }
        }
      }
    }
    last_h1 = h;
    g_gamma += (lambda + rho * h) * h_grad;

    g_gamma = g_gamma.cwiseProduct(gamma_mask_d);
    if (tau) g_tau = g_tau.cwiseProduct(tau_mask_d);
  }
};

}  // namespace

FitResult fit(const PanelTensor& data, const BasisConfig& basis, int d,
              const SolverConfig& cfg) {
  cfg.validate();
  data.validate();
  const int T = data.T();
  const int p = data.p();
  const int K = basis.K;
  if (p < 2) throw std::invalid_argument("fit: need p >= 2");
  if (d < 0 || d >= T) throw std::invalid_argument("fit: invalid lag order");
  if (K > T - d) {
    throw std::invalid_argument(
        "fit: K = " + std::to_string(K) + " exceeds T - d = " +
        std::to_string(T - d) + " (basis coefficients unidentifiable)");
  }
  const double prediction_time = static_cast<double>(T + 1);
  if (basis.domain_min() > static_cast<double>(d + 1) ||
      basis.domain_max() < prediction_time) {
    throw std::invalid_argument(
        "fit: basis domain must cover [d+1, T+1]; build it with "
        "domain_end_extension = 1");
  }

  const Stacked s = stack_designs(data, basis, d);
  const double alpha = resolve_alpha(cfg.acyclicity_alpha, p);

  // The optimizable set adds a no-self-loop restriction on top of the
  // treatment mask: a contemporaneous diagonal entry is a one-node cycle,
  // and leaving it free only makes the score (X_a predicts itself) fight
  // the acyclicity penalty. Lagged self-effects in tau stay free.
  BoolMatrix free_gamma = gamma_mask(p, K);
  for (int k = 0; k < K; ++k) {
    for (int a = 0; a < p; ++a) free_gamma(k * p + a, a) = false;
  }
  Objective obj{s, p, K, d, alpha, cfg.l1_penalty,
                free_gamma.cast<double>(),
                d >= 1 ? tau_mask(p, d, K).cast<double>() : Eigen::MatrixXd()};

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * K, p);
  Eigen::MatrixXd tau;
  if (d >= 1) tau = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * d * K, p);

  FitResult result;
  double lambda = 0.0;
  double rho = cfg.rho_init;
  double h_prev = std::numeric_limits<double>::infinity();
  double score_prev = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd g_gamma, g_tau;
  const auto minimize_subproblem = [&]() {
    AdamState adam_gamma(gamma.rows(), gamma.cols());
    AdamState adam_tau(tau.rows(), tau.cols());
    for (int step = 1; step <= cfg.inner_steps; ++step) {
      obj.eval(gamma, d >= 1 ? &tau : nullptr, lambda, rho, g_gamma, g_tau);
      adam_gamma.step(gamma, g_gamma, cfg.learning_rate, step);
      if (d >= 1) adam_tau.step(tau, g_tau, cfg.learning_rate, step);
    }
    obj.eval(gamma, d >= 1 ? &tau : nullptr, lambda, rho, g_gamma, g_tau);
  };

  for (int outer = 1; outer <= cfg.max_outer_iters; ++outer) {
    // Re-solve at escalating rho until h1 shrinks enough; the multiplier is
    // then updated once with the post-collapse value, so lambda stays
    // proportionate and never freezes the structure search.
    minimize_subproblem();
    while (obj.last_h1 > cfg.h_tol &&
           obj.last_h1 > cfg.h_decrease_factor * h_prev &&
           rho < cfg.rho_max) {
      rho = std::min(rho * cfg.rho_mult, cfg.rho_max);
      minimize_subproblem();
    }
    const double h_new = obj.last_h1;
    const double score_new = obj.last_score;
    result.trace.push_back({outer, score_new, h_new, rho, lambda});
    if (!std::isfinite(h_new) || !std::isfinite(score_new)) {
      throw std::runtime_error("fit: objective diverged (non-finite value)");
    }
    // Exit once feasible and the score has stopped moving; a fixed-step
    // inner loop may need several feasible outer rounds to finish the
    // score descent.
    if (h_new <= cfg.h_tol &&
        std::abs(score_prev - score_new) <= 1e-6 * std::max(1.0, std::abs(score_prev))) {
      break;
    }
    if (h_new > cfg.h_tol) {
      lambda += rho * h_new;
      h_prev = h_new;
    }
    score_prev = score_new;
  }

  const double al_h1 = result.trace.back().h1;
  result.converged = al_h1 <= cfg.h_tol;

  CoefficientSet coef;
  coef.basis = basis;
  coef.d = d;
  coef.gamma = gamma;
  if (d >= 1) coef.tau = tau;

  const int nt = static_cast<int>(s.times.size());
  if (cfg.refit) {
    // Support selection on the fitted stamps.
    Eigen::MatrixXd max_b = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd max_w;
    if (d >= 1) max_w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * d, p);
    for (int i = 0; i < nt; ++i) {
      const Eigen::RowVectorXd f = s.F.row(i);
      max_b = max_b.cwiseMax(graph_from_gamma(gamma, f, p).cwiseAbs());
      if (d >= 1) max_w = max_w.cwiseMax(lag_from_tau(tau, f, p * d).cwiseAbs());
    }
    BoolMatrix support_b = (max_b.array() > cfg.threshold).matrix();
    repair_support(support_b, max_b, result.repairs);
    BoolMatrix support_w;
    if (d >= 1) support_w = (max_w.array() > cfg.threshold).matrix();

    // Least-squares re-estimation on the surviving support (removes the L1
    // selection bias), followed by a BIC-guarded forward pass over absent
    // slots and a threshold prune. The forward pass exists because the
    // mediator block is the one place where both edge directions are
    // optimizable, so the 2-cycle term of h1 can suppress a true pair
    // symmetrically below the threshold during the penalty stage.
    Eigen::MatrixXd refit_gamma = Eigen::MatrixXd::Zero(gamma.rows(), p);
    Eigen::MatrixXd refit_tau;
    if (d >= 1) refit_tau = Eigen::MatrixXd::Zero(tau.rows(), p);

    const auto refit_column = [&](int b, const BoolMatrix& sb,
                                  const BoolMatrix& sw, Eigen::MatrixXd& rg,
                                  Eigen::MatrixXd& rt) -> double {
      std::vector<int> gcols, wcols;
      for (int a = 0; a < p; ++a) {
        if (sb(a, b)) {
          for (int k = 0; k < K; ++k) gcols.push_back(k * p + a);
        }
      }
      if (d >= 1) {
        for (int i = 0; i < p * d; ++i) {
          if (sw(i, b)) {
            for (int k = 0; k < K; ++k) wcols.push_back(k * p * d + i);
          }
        }
      }
      rg.col(b).setZero();
      if (d >= 1) rt.col(b).setZero();
      const int ncols = static_cast<int>(gcols.size() + wcols.size());
      if (ncols == 0) return s.X.col(b).squaredNorm();
      Eigen::MatrixXd design(s.X.rows(), ncols);
      for (std::size_t j = 0; j < gcols.size(); ++j) {
        design.col(static_cast<Eigen::Index>(j)) = s.D.col(gcols[j]);
      }
      for (std::size_t j = 0; j < wcols.size(); ++j) {
        design.col(static_cast<Eigen::Index>(gcols.size() + j)) = s.G.col(wcols[j]);
      }
      const Eigen::VectorXd theta =
          design.colPivHouseholderQr().solve(s.X.col(b));
      for (std::size_t j = 0; j < gcols.size(); ++j) {
        rg(gcols[j], b) = theta(static_cast<Eigen::Index>(j));
      }
      for (std::size_t j = 0; j < wcols.size(); ++j) {
        rt(wcols[j], b) = theta(static_cast<Eigen::Index>(gcols.size() + j));
      }
      return (s.X.col(b) - design * theta).squaredNorm();
    };

    std::vector<double> rss(static_cast<std::size_t>(p));
    for (int b = 0; b < p; ++b) {
      rss[static_cast<std::size_t>(b)] =
          refit_column(b, support_b, support_w, refit_gamma, refit_tau);
    }

    // Greedy score refinement: alternating BIC-guarded forward additions and
    // backward deletions (K parameters per edge function). The forward phase
    // recovers suppressed mediator pairs, the backward phase clears edges
    // the additions made redundant. The BIC pools the residual variance
    // across columns (the equal-variance likelihood); per-column variances
    // would make the two directions of an isolated pair score identically.
    const double n_entries = s.n_entries;
    const double bic_bar = static_cast<double>(K) * std::log(n_entries);
    const double rss_floor = 1e-12;
    const auto rss_total = [&]() {
      double total = 0.0;
      for (double v : rss) total += v;
      return std::max(total, rss_floor);
    };
    for (int cycle = 0; cycle < 4; ++cycle) {
      bool cycle_changed = false;

      for (int round = 0; round < p * p; ++round) {
        double best_gain = 0.0;
        int best_a = -1, best_b = -1;
        double best_rss = 0.0;
        const double total_old = rss_total();
        for (int a = 0; a < p - 1; ++a) {  // the outcome has no children
          for (int b = 1; b < p; ++b) {    // the treatment has no parents
            if (a == b || support_b(a, b)) continue;
            BoolMatrix trial = support_b;
            trial(a, b) = true;
            if (!is_acyclic(trial)) continue;
            Eigen::MatrixXd tg = refit_gamma, tt = refit_tau;
            const double rss_new = refit_column(b, trial, support_w, tg, tt);
            const double total_new = std::max(
                total_old - rss[static_cast<std::size_t>(b)] + rss_new, rss_floor);
            const double gain =
                n_entries * std::log(total_old / total_new) - bic_bar;
            if (gain > best_gain) {
              best_gain = gain;
              best_a = a;
              best_b = b;
              best_rss = rss_new;
            }
          }
        }
        if (best_a < 0) break;
        support_b(best_a, best_b) = true;
        rss[static_cast<std::size_t>(best_b)] = best_rss;
        refit_column(best_b, support_b, support_w, refit_gamma, refit_tau);
        cycle_changed = true;
      }

      for (int round = 0; round < p * p; ++round) {
        double weakest_loss = bic_bar;
        int weak_a = -1, weak_b = -1;
        double weak_rss = 0.0;
        const double total_old = rss_total();
        for (int a = 0; a < p; ++a) {
          for (int b = 0; b < p; ++b) {
            if (!support_b(a, b)) continue;
            BoolMatrix trial = support_b;
            trial(a, b) = false;
            Eigen::MatrixXd tg = refit_gamma, tt = refit_tau;
            const double rss_new = refit_column(b, trial, support_w, tg, tt);
            const double total_new = std::max(
                total_old - rss[static_cast<std::size_t>(b)] + rss_new, rss_floor);
            const double loss = n_entries * std::log(total_new / total_old);
            if (loss < weakest_loss) {
              weakest_loss = loss;
              weak_a = a;
              weak_b = b;
              weak_rss = rss_new;
            }
          }
        }
        if (weak_a < 0) break;
        support_b(weak_a, weak_b) = false;
        rss[static_cast<std::size_t>(weak_b)] = weak_rss;
        refit_column(weak_b, support_b, support_w, refit_gamma, refit_tau);
        cycle_changed = true;
      }

      // Turning phase: reverse one edge when the flipped orientation scores
      // strictly better (no parameter-count change, so no BIC bar).
      for (int round = 0; round < p * p; ++round) {
        double best_gain = 1e-8;
        int turn_a = -1, turn_b = -1;
        double best_rss_b = 0.0, best_rss_a = 0.0;
        const double total_old = rss_total();
        for (int a = 0; a < p; ++a) {
          for (int b = 0; b < p; ++b) {
            if (!support_b(a, b) || b == p - 1 || a == 0) continue;
            BoolMatrix trial = support_b;
            trial(a, b) = false;
            trial(b, a) = true;
            if (!is_acyclic(trial)) continue;
            Eigen::MatrixXd tg = refit_gamma, tt = refit_tau;
            const double rss_b = refit_column(b, trial, support_w, tg, tt);
            const double rss_a = refit_column(a, trial, support_w, tg, tt);
            const double total_new = std::max(
                total_old - rss[static_cast<std::size_t>(b)] -
                    rss[static_cast<std::size_t>(a)] + rss_b + rss_a,
                rss_floor);
            const double gain = n_entries * std::log(total_old / total_new);
            if (gain > best_gain) {
              best_gain = gain;
              turn_a = a;
              turn_b = b;
              best_rss_b = rss_b;
              best_rss_a = rss_a;
            }
          }
        }
        if (turn_a < 0) break;
        support_b(turn_a, turn_b) = false;
        support_b(turn_b, turn_a) = true;
        rss[static_cast<std::size_t>(turn_b)] = best_rss_b;
        rss[static_cast<std::size_t>(turn_a)] = best_rss_a;
        refit_column(turn_b, support_b, support_w, refit_gamma, refit_tau);
        refit_column(turn_a, support_b, support_w, refit_gamma, refit_tau);
        cycle_changed = true;
      }

      if (!cycle_changed) break;
    }

    // Prune edge functions whose refit values never clear the threshold,
    // re-estimating the affected columns until stable.
    for (bool changed = true; changed;) {
      changed = false;
      Eigen::MatrixXd max_rb = Eigen::MatrixXd::Zero(p, p);
      Eigen::MatrixXd max_rw;
      if (d >= 1) max_rw = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p) * d, p);
      for (int i = 0; i < nt; ++i) {
        const Eigen::RowVectorXd f = s.F.row(i);
        max_rb = max_rb.cwiseMax(graph_from_gamma(refit_gamma, f, p).cwiseAbs());
        if (d >= 1) {
          max_rw = max_rw.cwiseMax(lag_from_tau(refit_tau, f, p * d).cwiseAbs());
        }
      }
      std::vector<bool> dirty(static_cast<std::size_t>(p), false);
      for (int b = 0; b < p; ++b) {
        for (int a = 0; a < p; ++a) {
          if (support_b(a, b) && max_rb(a, b) <= cfg.threshold) {
            support_b(a, b) = false;
            dirty[static_cast<std::size_t>(b)] = true;
          }
        }
        if (d >= 1) {
          for (int i = 0; i < p * d; ++i) {
            if (support_w(i, b) && max_rw(i, b) <= cfg.threshold) {
              support_w(i, b) = false;
              dirty[static_cast<std::size_t>(b)] = true;
            }
          }
        }
      }
      for (int b = 0; b < p; ++b) {
        if (dirty[static_cast<std::size_t>(b)]) {
          rss[static_cast<std::size_t>(b)] =
              refit_column(b, support_b, support_w, refit_gamma, refit_tau);
          changed = true;
        }
      }
    }

    coef.gamma = refit_gamma;
    if (d >= 1) coef.tau = refit_tau;
  }

  // Materialize output graphs; per-stamp repair is a final guarantee and is
  // a no-op whenever the union support is already acyclic.
  result.graphs.threshold = cfg.threshold;
  result.graphs.times = s.times;
  if (d >= 1) result.graphs.W.emplace();
  for (double t : s.times) {
    Eigen::MatrixXd b = contemporaneous_at(coef, t);
    repair_graph(b, cfg.threshold, result.repairs);
    result.graphs.B.push_back(std::move(b));
    if (d >= 1) result.graphs.W->push_back(lagged_at(coef, t));
  }

  result.prediction_time = prediction_time;
  result.predicted_B = contemporaneous_at(coef, prediction_time);
  repair_graph(result.predicted_B, cfg.threshold, result.repairs);
  if (d >= 1) result.predicted_W = lagged_at(coef, prediction_time);

  result.coef = std::move(coef);
  result.final_score = score(result.coef, data);
  result.final_h1 = h1_value(result.coef, s.times, alpha);
  return result;
}

std::pair<Eigen::MatrixXd, std::optional<Eigen::MatrixXd>> predict_next(
    const FitResult& result) {
  Eigen::MatrixXd b = contemporaneous_at(result.coef, result.prediction_time);
  std::vector<std::string> log;
  repair_graph(b, result.graphs.threshold, log);
  std::optional<Eigen::MatrixXd> w;
  if (result.coef.tau) w = lagged_at(result.coef, result.prediction_time);
  return {std::move(b), std::move(w)};
}

GraphSequence FitResult::full_sequence() const {
  GraphSequence seq = graphs;
  seq.predicted.assign(seq.times.size(), false);
  seq.times.push_back(prediction_time);
  seq.B.push_back(predicted_B);
  if (seq.W && predicted_W) seq.W->push_back(*predicted_W);
  seq.predicted.push_back(true);
  return seq;
}

}  // namespace dyncausal
