#include "dyncausal/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dyncausal/rng.hpp"

namespace dyncausal {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double strength(StrengthFn fn, double t, double constant_value) {
  switch (fn) {
    case StrengthFn::F1Cosine:
      return std::cos(t / (4.0 * kPi)) * 0.8;
    case StrengthFn::F2QuadraticLsem:
      return (-10.0 + (5.0 - t) * (5.0 - t)) / 20.0;
    case StrengthFn::F2QuadraticSvar:
      return (-15.0 + (5.0 - t) * (5.0 - t)) / 25.0;
    case StrengthFn::F1CosineLong:
      return std::cos(t / (30.0 * kPi)) * 0.8;
    case StrengthFn::Constant:
      return constant_value;
  }
  throw std::logic_error("strength: unknown function id");
}

BoolMatrix random_dag(int p, double expected_degree, std::uint64_t seed) {
  if (p < 2) throw std::invalid_argument("random_dag: p must be >= 2");
  if (expected_degree < 0.0 || expected_degree >= static_cast<double>(p)) {
    throw std::invalid_argument("random_dag: expected_degree out of range");
  }
  Rng rng(seed);

  // Fisher-Yates for the topological order.
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  for (int i = p - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }

  const double prob = expected_degree / static_cast<double>(p - 1);
  BoolMatrix adj = BoolMatrix::Constant(p, p, false);
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const int src = order[static_cast<std::size_t>(a)];
      const int dst = order[static_cast<std::size_t>(b)];
      if (rng.uniform() < prob) adj(src, dst) = true;
    }
  }
  // Structural zeros: nothing into the treatment, nothing out of the outcome.
  for (int i = 0; i < p; ++i) {
    adj(i, 0) = false;
    adj(p - 1, i) = false;
  }
  return adj;
}

PanelTensor simulate_from_truth(const GroundTruth& truth, int m,
                                double noise_std, std::uint64_t seed,
                                NoiseKind noise_kind) {
  const auto& graphs = truth.graphs;
  const int T = static_cast<int>(graphs.size());
  const int p = static_cast<int>(graphs.B.front().rows());
  const int d = truth.d;
  Rng rng(seed);
  // Uniform draws use the half-width that matches the requested standard
  // deviation: U[-a, a] with a = sqrt(3) * sd.
  const double half_width = std::sqrt(3.0) * noise_std;

  PanelTensor panel = make_panel(T, m, p);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(p, p);
  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd e(m, p);
    for (int u = 0; u < m; ++u) {
      for (int v = 0; v < p; ++v) {
        e(u, v) = noise_kind == NoiseKind::Gaussian
                      ? rng.normal(0.0, noise_std)
                      : rng.uniform(-half_width, half_width);
      }
    }
    const int idx = graphs.index_of(static_cast<double>(t));
    if (idx < 0) throw std::logic_error("simulate_from_truth: missing stamp");
    const Eigen::MatrixXd& b = graphs.B[static_cast<std::size_t>(idx)];

    Eigen::MatrixXd rhs = e;
    if (d >= 1 && t > d && graphs.W) {
      const Eigen::MatrixXd& w = graphs.W->at(static_cast<std::size_t>(idx));
      Eigen::MatrixXd z(m, p * d);
      for (int i = 1; i <= d; ++i) {
        z.middleCols((i - 1) * p, p) = panel.x[static_cast<std::size_t>(t - i - 1)];
      }
      rhs += z * w;
    }
    // X (I - B) = rhs; solve the transposed system for each unit row.
    panel.x[static_cast<std::size_t>(t - 1)] =
        (identity - b).transpose().partialPivLu().solve(rhs.transpose()).transpose();
  }
  return panel;
}

namespace {

GroundTruth build_truth(const ScenarioSpec& spec, bool with_lag) {
  const int p = spec.p;
  const int T = spec.T;
  GroundTruth truth;
  truth.d = with_lag ? spec.d : 0;
  truth.noise_std = spec.noise_std;
  truth.graphs.threshold = 0.2;

  BoolMatrix structure = BoolMatrix::Constant(p, p, false);
  BoolMatrix varying = BoolMatrix::Constant(p, p, false);
  Eigen::MatrixXd static_weights = Eigen::MatrixXd::Zero(p, p);

  if (spec.scenario == Scenario::S2) {
    structure = random_dag(p, spec.expected_degree, derive_seed(spec.seed, 1));
    Rng rng(derive_seed(spec.seed, 2));
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) {
        if (!structure(a, b)) continue;
        varying(a, b) = rng.uniform() < 0.5;
        if (!varying(a, b)) {
          const double mag = rng.uniform(0.5, 1.0);
          static_weights(a, b) = rng.uniform() < 0.5 ? mag : -mag;
        }
      }
    }
  } else {
    structure(0, p - 1) = true;
    varying(0, p - 1) = true;
  }

  truth.structure = structure;
  truth.time_varying = varying;

  for (int t = 1; t <= T; ++t) {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
    for (int a = 0; a < p; ++a) {
      for (int c = 0; c < p; ++c) {
        if (!structure(a, c)) continue;
        b(a, c) = varying(a, c)
                      ? strength(spec.strength_fn, static_cast<double>(t),
                                 spec.constant_value)
                      : static_weights(a, c);
      }
    }
    truth.graphs.times.push_back(static_cast<double>(t));
    truth.graphs.B.push_back(std::move(b));
  }

  if (with_lag) {
    // The fixed lag matrix: identity on the non-treatment diagonal of the
    // first lag block, zero elsewhere and zero for higher lags.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p * spec.d, p);
    for (int v = 1; v < p; ++v) w(v, v) = 1.0;
    truth.graphs.W.emplace();
    for (int t = 1; t <= T; ++t) truth.graphs.W->push_back(w);
  }
  return truth;
}

}  // namespace

std::pair<PanelTensor, GroundTruth> simulate_lsem(const ScenarioSpec& spec) {
  if (spec.d != 0) {
    throw std::invalid_argument("simulate_lsem: spec.d must be 0");
  }
  GroundTruth truth = build_truth(spec, /*with_lag=*/false);
  truth.noise_kind = spec.noise_kind;
  PanelTensor panel =
      simulate_from_truth(truth, spec.m, spec.noise_std, derive_seed(spec.seed, 0),
                          spec.noise_kind);
  return {std::move(panel), std::move(truth)};
}

std::pair<PanelTensor, GroundTruth> simulate_svar(const ScenarioSpec& spec) {
  if (spec.d < 1) {
    throw std::invalid_argument("simulate_svar: spec.d must be >= 1");
  }
  GroundTruth truth = build_truth(spec, /*with_lag=*/true);
  truth.noise_kind = spec.noise_kind;
  PanelTensor panel =
      simulate_from_truth(truth, spec.m, spec.noise_std, derive_seed(spec.seed, 0),
                          spec.noise_kind);
  return {std::move(panel), std::move(truth)};
}

}  // namespace dyncausal
