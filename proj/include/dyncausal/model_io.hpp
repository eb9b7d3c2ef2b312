#pragma once

#include <string>
#include <vector>

#include "dyncausal/datagen.hpp"
#include "dyncausal/effect.hpp"
#include "dyncausal/graphs.hpp"
#include "dyncausal/metrics.hpp"
#include "dyncausal/solver.hpp"

namespace dyncausal {

/// Fit/ground-truth JSON (schema in docs/formats.md): top-level keys
/// p, T, K, d, threshold, basis{order, knots, domain_end_extension}, gamma,
/// tau, B, W, times, plus predicted_B/predicted_W/converged/final_score/
/// final_h1 for fits. Truth files carry null gamma/basis.
std::string fit_to_json(const FitResult& result, int panel_T);
std::string truth_to_json(const GroundTruth& truth);

/// Graphs loaded back from either file kind. `coef` is present only for fit
/// files (needed to re-evaluate the splines).
struct LoadedModel {
  GraphSequence graphs;  // includes the predicted slot for fit files
  int p = 0;
  int T = 0;
  int d = 0;
};
LoadedModel load_model_json(const std::string& path);

/// Round-trips used by tests.
FitResult fit_from_json(const std::string& text);

std::string eval_report_to_json(const EvalReport& report);
std::string eval_report_to_csv(const EvalReport& report);

std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& trajectory);

std::string trace_to_lines(const std::vector<TraceEntry>& trace);

}  // namespace dyncausal
