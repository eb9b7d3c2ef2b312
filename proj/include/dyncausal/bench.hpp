#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dyncausal/datagen.hpp"
#include "dyncausal/metrics.hpp"
#include "dyncausal/solver.hpp"

namespace dyncausal {

enum class BenchTable { Lsem, Svar, SvarLagged, LongSingleUnit, VaryP };

BenchTable parse_bench_table(const std::string& name);

struct BenchOptions {
  int reps = 30;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  int interior_knots = 0;
  int order = 2;
  SolverConfig solver;
};

/// One simulate+fit+evaluate run. `w` is present for SVAR scenarios;
/// `prediction_error` is |predicted B_{T+1}(A,Y) - true strength(T+1)|.
/// `valid` is false when the replicate raised an error; such runs carry no
/// metrics and only contribute a failure flag.
struct ReplicateMetrics {
  EvalReport b;
  std::optional<EvalReport> w;
  bool converged = false;
  bool valid = true;
  double prediction_error = 0.0;
  std::string error;
};

ReplicateMetrics run_replicate(const ScenarioSpec& spec,
                               const BenchOptions& opts);

/// Per-cell replicate runs with derived seeds, executed on a worker pool.
std::vector<ReplicateMetrics> run_cell(const ScenarioSpec& base,
                                       const BenchOptions& opts);

struct BenchCell {
  std::string scenario;
  // metric -> (mean, sd) over replicates
  std::vector<std::pair<std::string, std::pair<double, double>>> metrics;
  std::string flags;  // one char per replicate, '1' = converged
};

struct BenchResult {
  std::string table;
  std::vector<BenchCell> cells;
  std::string to_csv() const;
};

BenchResult run_bench(BenchTable table, const BenchOptions& opts);

/// The scenario grids behind each table (exposed for the acceptance suite).
std::vector<std::pair<std::string, ScenarioSpec>> bench_grid(BenchTable table);

}  // namespace dyncausal
