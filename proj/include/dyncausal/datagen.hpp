#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "dyncausal/graphs.hpp"
#include "dyncausal/panel.hpp"

namespace dyncausal {

enum class Scenario { S1, S2, Svar1 };

enum class StrengthFn {
  F1Cosine,         // cos(t / 4pi) * 0.8
  F2QuadraticLsem,  // (-10 + (5 - t)^2) / 20
  F2QuadraticSvar,  // (-15 + (5 - t)^2) / 25
  F1CosineLong,     // cos(t / 30pi) * 0.8, long single-unit runs
  Constant,
};

/// Gaussian is the default; Uniform (matched standard deviation) exists for
/// the non-Gaussian identifiability smoke check.
enum class NoiseKind { Gaussian, Uniform };

struct ScenarioSpec {
  Scenario scenario = Scenario::S1;
  StrengthFn strength_fn = StrengthFn::F1Cosine;
  double constant_value = 0.8;  // used by StrengthFn::Constant
  int p = 5;
  int m = 30;
  int T = 10;
  int d = 0;  // 0 for LSEM scenarios, >= 1 for SVAR
  double noise_std = 1.0;
  NoiseKind noise_kind = NoiseKind::Gaussian;
  std::uint64_t seed = 0;
  double expected_degree = 4.0;  // S2 only
};

double strength(StrengthFn fn, double t, double constant_value = 0.8);

/// Masked Erdos-Renyi DAG: a uniformly random topological order, each
/// order-respecting pair kept with probability expected_degree / (p-1),
/// then edges into the treatment (col 0) and out of the outcome (row p-1)
/// removed. Acyclic by construction.
BoolMatrix random_dag(int p, double expected_degree, std::uint64_t seed);

/// True generating graphs. B spans stamps 1..T; for SVAR runs W also spans
/// 1..T (the lag matrix is defined at every stamp, only t > d uses it).
struct GroundTruth {
  GraphSequence graphs;
  BoolMatrix structure;     // union contemporaneous edge set
  BoolMatrix time_varying;  // edge-kind flags (S2); false = static
  int d = 0;
  double noise_std = 1.0;
  NoiseKind noise_kind = NoiseKind::Gaussian;
};

std::pair<PanelTensor, GroundTruth> simulate_lsem(const ScenarioSpec& spec);
std::pair<PanelTensor, GroundTruth> simulate_svar(const ScenarioSpec& spec);

/// Forward-simulates the structural dynamics from explicit true graphs:
/// X_t = (Z_t W_t + E_t)(I - B_t)^{-1}, lag terms dropped for t <= d.
/// Noise is drawn per (t, unit, variable) in that order, so runs with the
/// same seed share draws regardless of lag order.
PanelTensor simulate_from_truth(const GroundTruth& truth, int m,
                                double noise_std, std::uint64_t seed,
                                NoiseKind noise_kind = NoiseKind::Gaussian);

}  // namespace dyncausal
