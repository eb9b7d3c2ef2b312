#include <doctest.h>

#include <stdexcept>

#include "dyncausal/metrics.hpp"
#include "dyncausal/rng.hpp"

using namespace dyncausal;

namespace {

GraphSequence single_graph(const Eigen::MatrixXd& b, double threshold = 0.2) {
  GraphSequence seq;
  seq.threshold = threshold;
  seq.times = {1.0};
  seq.B = {b};
  return seq;
}

Eigen::MatrixXd with_edges(int p,
                           std::initializer_list<std::tuple<int, int, double>> edges) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (const auto& [i, j, w] : edges) b(i, j) = w;
  return b;
}

}  // namespace

TEST_CASE("identity comparison scores perfectly") {
  const Eigen::MatrixXd b = with_edges(4, {{0, 3, 0.8}, {1, 2, -0.5}});
  const EvalReport r = evaluate(single_graph(b), single_graph(b));
  CHECK(r.fdr == 0.0);
  CHECK(r.tpr == 1.0);
  CHECK(r.shd == 0.0);
  CHECK(r.mse == 0.0);
}

TEST_CASE("hand-enumerated confusion sets") {
  SUBCASE("one extra edge") {
    const Eigen::MatrixXd truth = with_edges(4, {{0, 3, 0.8}});
    const Eigen::MatrixXd est = with_edges(4, {{0, 3, 0.8}, {0, 1, 0.5}});
    const EvalReport r = evaluate(single_graph(est), single_graph(truth));
    CHECK(r.fdr == 0.5);
    CHECK(r.tpr == 1.0);
    CHECK(r.shd == 1.0);
    CHECK(r.tp == 1);
    CHECK(r.fp == 1);
    CHECK(r.fn == 0);
  }

  SUBCASE("a reversal counts once in SHD") {
    const Eigen::MatrixXd truth = with_edges(3, {{0, 2, 0.8}});
    const Eigen::MatrixXd est = with_edges(3, {{2, 0, 0.8}});
    const EvalReport r = evaluate(single_graph(est), single_graph(truth));
    CHECK(r.shd == 1.0);
    CHECK(r.reversed == 1);
    CHECK(r.tpr == 0.0);
    CHECK(r.fdr == 1.0);
  }

  SUBCASE("0/0 conventions: empty truth and estimate score perfectly") {
    const Eigen::MatrixXd none = Eigen::MatrixXd::Zero(3, 3);
    const EvalReport r = evaluate(single_graph(none), single_graph(none));
    CHECK(r.fdr == 0.0);
    CHECK(r.tpr == 1.0);
  }
}

TEST_CASE("report internals stay consistent with the counts") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    GraphSequence est, truth;
    est.times = truth.times = {1.0, 2.0, 3.0};
    for (int t = 0; t < 3; ++t) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          if (i == j) continue;
          if (rng.uniform() < 0.3) a(i, j) = rng.uniform(-1.0, 1.0);
          if (rng.uniform() < 0.3) b(i, j) = rng.uniform(-1.0, 1.0);
        }
      }
      est.B.push_back(a);
      truth.B.push_back(b);
    }
    const EvalReport r = evaluate(est, truth);
    const double fdr = (r.tp + r.fp) == 0
                           ? 0.0
                           : static_cast<double>(r.fp) / (r.tp + r.fp);
    const double tpr = (r.tp + r.fn) == 0
                           ? 1.0
                           : static_cast<double>(r.tp) / (r.tp + r.fn);
    CHECK(r.fdr == fdr);
    CHECK(r.tpr == tpr);
    long tp = 0, fp = 0, fn = 0, shd_sum = 0;
    for (const auto& c : r.per_time) {
      tp += c.tp;
      fp += c.fp;
      fn += c.fn;
      shd_sum += c.shd;
      CHECK(c.shd == c.fp + c.fn - c.reversed);
    }
    CHECK(tp == r.tp);
    CHECK(fp == r.fp);
    CHECK(fn == r.fn);
    CHECK(r.shd == doctest::Approx(shd_sum / 3.0));

    // SHD symmetry.
    const EvalReport swapped = evaluate(truth, est);
    CHECK(swapped.shd == r.shd);
  }
}

TEST_CASE("raising the estimate threshold never raises FP or TP") {
  Rng rng(11);
  Eigen::MatrixXd est = Eigen::MatrixXd::Zero(5, 5);
  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i == j) continue;
      est(i, j) = rng.uniform(-1.0, 1.0);
      if (rng.uniform() < 0.4) truth(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  long prev_fp = -1, prev_tp = -1;
  bool first = true;
  for (double threshold : {0.1, 0.2, 0.4, 0.6, 0.9}) {
    const EvalReport r =
        evaluate(single_graph(est, threshold), single_graph(truth, 0.2));
    if (!first) {
      CHECK(r.fp <= prev_fp);
      CHECK(r.tp <= prev_tp);
    }
    prev_fp = r.fp;
    prev_tp = r.tp;
    first = false;
  }
}

TEST_CASE("weight MSE over the requested positions") {
  const Eigen::MatrixXd truth = with_edges(3, {{0, 2, 0.5}, {0, 1, 0.4}});
  Eigen::MatrixXd est = truth;
  est(0, 2) += 0.1;

  GraphSequence eg, tg;
  eg.times = tg.times = {1.0, 2.0};
  eg.B = {est, est};
  tg.B = {truth, truth};

  CHECK(mse_weights(tg, tg) == 0.0);
  // Union support has 2 positions; one carries squared error 0.01.
  CHECK(mse_weights(eg, tg) == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(mse_weights(eg, tg, MsePositions::TrueSupport) ==
        doctest::Approx(0.005).epsilon(1e-12));
  CHECK(mse_weights(eg, tg, MsePositions::All) ==
        doctest::Approx(0.01 * 2 / 18.0).epsilon(1e-12));

  // The report MSE uses true-support positions.
  const EvalReport r = evaluate(eg, tg);
  CHECK(r.mse == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("shape and span mismatches are rejected") {
  GraphSequence small = single_graph(Eigen::MatrixXd::Zero(3, 3));
  GraphSequence big = single_graph(Eigen::MatrixXd::Zero(4, 4));
  CHECK_THROWS_AS(evaluate(small, big), std::invalid_argument);

  GraphSequence shifted = single_graph(Eigen::MatrixXd::Zero(3, 3));
  shifted.times = {9.0};
  CHECK_THROWS_AS(evaluate(small, shifted), std::invalid_argument);

  CHECK_THROWS_AS(evaluate_lagged(small, small), std::invalid_argument);
}

TEST_CASE("lagged evaluation compares W matrices entrywise") {
  GraphSequence est = single_graph(Eigen::MatrixXd::Zero(3, 3));
  GraphSequence truth = single_graph(Eigen::MatrixXd::Zero(3, 3));
  est.W.emplace();
  truth.W.emplace();
  Eigen::MatrixXd w_true = Eigen::MatrixXd::Zero(6, 3);  // d = 2
  w_true(1, 1) = 1.0;
  w_true(4, 2) = 0.9;
  Eigen::MatrixXd w_est = w_true;
  w_est(4, 2) = 0.0;   // one miss
  w_est(2, 1) = -0.7;  // one extra
  est.W->push_back(w_est);
  truth.W->push_back(w_true);

  const EvalReport r = evaluate_lagged(est, truth);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  CHECK(r.reversed == 0);
  CHECK(r.shd == 2.0);
}
