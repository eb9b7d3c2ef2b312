#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dyncausal/basis.hpp"
#include "dyncausal/datagen.hpp"
#include "dyncausal/solver.hpp"

using namespace dyncausal;

namespace {

// Closed-form cardinal B-spline pieces on uniform knots, used as the
// independent oracle for the recursion. Piece selection mirrors the
// half-open evaluation convention.
double uniform_bspline_closed_form(int order, double knot0, double h, double x) {
  const double u = (x - knot0) / h;
  if (u < 0.0 || u >= order + 1.0) return 0.0;
  switch (order) {
    case 0:
      return 1.0;
    case 1:
      return u < 1.0 ? u : 2.0 - u;
    case 2:
      if (u < 1.0) return 0.5 * u * u;
      if (u < 2.0) return 0.5 * (-2.0 * u * u + 6.0 * u - 3.0);
      return 0.5 * (3.0 - u) * (3.0 - u);
    default:
      throw std::logic_error("oracle only covers orders 0..2");
  }
}

BasisConfig uniform_unclamped(int n_knots, int order) {
  BasisConfig cfg;
  cfg.order = order;
  for (int i = 0; i < n_knots; ++i) cfg.knots.push_back(static_cast<double>(i));
  cfg.K = n_knots - order - 1;
  return cfg;
}

}  // namespace

TEST_CASE("build_knots shapes and degenerate cases") {
  const BasisConfig one = build_knots(1.0, 10.0, 0, 0);
  CHECK(one.K == 1);
  CHECK(one.knots == std::vector<double>{1.0, 10.0});
  CHECK(eval_basis(one, 3.0)(0) == 1.0);
  CHECK(eval_basis(one, 10.0)(0) == 1.0);  // right end closed

  const BasisConfig quad = build_knots(1.0, 10.0, 2, 2);
  CHECK(quad.K == 5);
  CHECK(quad.knots == std::vector<double>{1.0, 1.0, 1.0, 4.0, 7.0, 10.0, 10.0, 10.0});
  CHECK(quad.K == static_cast<int>(quad.knots.size()) - quad.order - 1);

  const BasisConfig split = build_knots(0.0, 10.0, 1, 0);
  CHECK(split.K == 2);
  CHECK(split.knots == std::vector<double>{0.0, 5.0, 10.0});
  const Eigen::RowVectorXd at2 = eval_basis(split, 2.0);
  CHECK(at2(0) == 1.0);
  CHECK(at2(1) == 0.0);

  CHECK_THROWS_AS(build_knots(5.0, 5.0, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_knots(10.0, 1.0, 0, 2), std::invalid_argument);
}

TEST_CASE("evaluation is right-continuous at knots, closed at the domain end") {
  const BasisConfig split = build_knots(0.0, 10.0, 1, 0);
  const Eigen::RowVectorXd at_knot = eval_basis(split, 5.0);
  CHECK(at_knot(0) == 0.0);  // lower indicator releases at its right end
  CHECK(at_knot(1) == 1.0);  // upper indicator picks up
  const Eigen::RowVectorXd at_end = eval_basis(split, 10.0);
  CHECK(at_end(0) == 0.0);
  CHECK(at_end(1) == 1.0);

  CHECK_THROWS_AS(eval_basis(split, -0.5), std::domain_error);
  CHECK_THROWS_AS(eval_basis(split, 10.5), std::domain_error);
}

TEST_CASE("domain extension is baked into the knot vector") {
  const BasisConfig cfg = build_knots(1.0, 10.0, 2, 2, 1.0);
  CHECK(cfg.domain_end_extension == 1.0);
  CHECK(cfg.domain_max() == 11.0);
  CHECK_NOTHROW(eval_basis(cfg, 11.0));
  // Clamped end: only the last basis function is active at the boundary.
  const Eigen::RowVectorXd at_end = eval_basis(cfg, 11.0);
  CHECK(at_end(cfg.K - 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at_end.head(cfg.K - 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-negativity, local support, partition of unity") {
  for (int order = 0; order <= 2; ++order) {
    for (int interior : {0, 1, 2, 5}) {
      const BasisConfig cfg = build_knots(1.0, 11.0, interior, order);
      for (int i = 0; i <= 200; ++i) {
        const double t = 1.0 + 10.0 * i / 200.0;
        const Eigen::RowVectorXd f = eval_basis(cfg, t);
        CHECK(f.minCoeff() >= 0.0);
        CHECK((f.array() > 0.0).count() <= order + 1);
        CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("recursion matches the closed-form piecewise polynomial") {
  for (int order = 0; order <= 2; ++order) {
    const int n_knots = 9;
    const BasisConfig cfg = uniform_unclamped(n_knots, order);
    for (int g = 0; g < 100; ++g) {
      // Offset grid dodges the knot points themselves, where the order-0
      // half-open convention is tested separately.
      const double t = (n_knots - 1) * (g + 0.5) / 100.0;
      const Eigen::RowVectorXd f = eval_basis(cfg, t);
      for (int j = 0; j < cfg.K; ++j) {
        const double expected =
            uniform_bspline_closed_form(order, static_cast<double>(j), 1.0, t);
        CHECK(f(j) == doctest::Approx(expected).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("Kronecker-friendly count: enumerating the recursion levels") {
  // Each order-raising level drops one function: n_knots-1 indicators at
  // order 0 down to n_knots-1-r at order r.
  const BasisConfig cfg = build_knots(1.0, 10.0, 2, 2);
  int count = static_cast<int>(cfg.knots.size()) - 1;
  for (int r = 1; r <= cfg.order; ++r) count -= 1;
  CHECK(count == cfg.K);
  CHECK(cfg.K == 2 + 2 + 1);
}

TEST_CASE("select_knots_cv picks the minimal basis for constant coefficients") {
  ScenarioSpec spec;
  spec.strength_fn = StrengthFn::Constant;
  spec.constant_value = 0.7;
  spec.noise_std = 1e-4;  // essentially noiseless
  spec.m = 12;
  spec.seed = 11;
  const auto [panel, truth] = simulate_lsem(spec);

  SolverConfig cfg;
  cfg.max_outer_iters = 20;
  const BasisConfig chosen = select_knots_cv(panel, {0, 1, 2, 3}, 3, cfg);
  CHECK(chosen.K == 3);  // zero interior knots at order 2
}

TEST_CASE("select_knots_cv single candidate and error paths") {
  ScenarioSpec spec;
  spec.m = 6;
  spec.T = 8;
  spec.seed = 3;
  const auto [panel, truth] = simulate_lsem(spec);

  SolverConfig cfg;
  cfg.max_outer_iters = 10;
  const BasisConfig chosen = select_knots_cv(panel, {2}, 2, cfg);
  CHECK(chosen.K == 5);

  CHECK_THROWS_AS(select_knots_cv(panel, {}, 2, cfg), std::invalid_argument);
  CHECK_THROWS_AS(select_knots_cv(panel, {1}, 1, cfg), std::invalid_argument);
}

TEST_CASE("select_knots_cv on cosine-strength data needs no more than 2 knots") {
  ScenarioSpec spec;
  spec.seed = 5;
  const auto [panel, truth] = simulate_lsem(spec);

  SolverConfig cfg;
  cfg.max_outer_iters = 20;
  const BasisConfig chosen = select_knots_cv(panel, {1, 2, 3, 4}, 3, cfg);
  const int interior = static_cast<int>(chosen.knots.size()) - 2 * (chosen.order + 1);
  CHECK(interior <= 2);
}
