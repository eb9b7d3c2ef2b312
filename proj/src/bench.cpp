#include "dyncausal/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dyncausal/basis.hpp"
#include "dyncausal/panel_io.hpp"
#include "dyncausal/rng.hpp"

namespace dyncausal {

BenchTable parse_bench_table(const std::string& name) {
  if (name == "lsem") return BenchTable::Lsem;
  if (name == "svar") return BenchTable::Svar;
  if (name == "svar_lagged") return BenchTable::SvarLagged;
  if (name == "long_single_unit") return BenchTable::LongSingleUnit;
  if (name == "vary_p") return BenchTable::VaryP;
  throw std::invalid_argument("unknown bench table: " + name);
}

std::vector<std::pair<std::string, ScenarioSpec>> bench_grid(BenchTable table) {
  std::vector<std::pair<std::string, ScenarioSpec>> grid;
  switch (table) {
    case BenchTable::Lsem: {
      ScenarioSpec s1f1;
      grid.emplace_back("S1F1", s1f1);
      ScenarioSpec s1f2;
      s1f2.strength_fn = StrengthFn::F2QuadraticLsem;
      grid.emplace_back("S1F2", s1f2);
      ScenarioSpec s2;
      s2.scenario = Scenario::S2;
      grid.emplace_back("S2", s2);
      break;
    }
    case BenchTable::Svar:
    case BenchTable::SvarLagged: {
      ScenarioSpec f1;
      f1.scenario = Scenario::Svar1;
      f1.d = 1;
      grid.emplace_back("F1", f1);
      ScenarioSpec f2;
      f2.scenario = Scenario::Svar1;
      f2.strength_fn = StrengthFn::F2QuadraticSvar;
      f2.d = 1;
      grid.emplace_back("F2", f2);
      break;
    }
    case BenchTable::LongSingleUnit: {
      ScenarioSpec spec;
      spec.strength_fn = StrengthFn::F1CosineLong;
      spec.m = 1;
      spec.T = 100;
      grid.emplace_back("S1F1_long", spec);
      break;
    }
    case BenchTable::VaryP: {
      for (int p : {5, 8, 10}) {
        ScenarioSpec spec;
        spec.p = p;
        grid.emplace_back("p=" + std::to_string(p), spec);
      }
      break;
    }
  }
  return grid;
}

ReplicateMetrics run_replicate(const ScenarioSpec& spec,
                               const BenchOptions& opts) {
  const auto [panel, truth] = spec.d >= 1 ? simulate_svar(spec)
                                          : simulate_lsem(spec);
  const BasisConfig basis =
      build_knots(1.0, static_cast<double>(spec.T), opts.interior_knots,
                  opts.order, /*domain_end_extension=*/1.0);
  SolverConfig solver = opts.solver;
  solver.seed = spec.seed;
  const FitResult fitted = fit(panel, basis, spec.d, solver);

  ReplicateMetrics out;
  out.converged = fitted.converged;
  out.b = evaluate(fitted.graphs, truth.graphs);
  if (spec.d >= 1) out.w = evaluate_lagged(fitted.graphs, truth.graphs);
  const double true_next = strength(spec.strength_fn,
                                    static_cast<double>(spec.T + 1),
                                    spec.constant_value);
  out.prediction_error =
      std::abs(fitted.predicted_B(0, spec.p - 1) - true_next);
  return out;
}

std::vector<ReplicateMetrics> run_cell(const ScenarioSpec& base,
                                       const BenchOptions& opts) {
  std::vector<ReplicateMetrics> results(static_cast<std::size_t>(opts.reps));
  std::atomic<int> next{0};
  int workers = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, opts.reps);

  auto worker = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= opts.reps) return;
      ScenarioSpec spec = base;
      spec.seed = derive_seed(opts.seed, static_cast<std::uint64_t>(rep));
      auto& slot = results[static_cast<std::size_t>(rep)];
      try {
        slot = run_replicate(spec, opts);
      } catch (const std::exception& e) {
        slot.valid = false;
        slot.converged = false;
        slot.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& values) {
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

BenchCell aggregate_cell(const std::string& name,
                         const std::vector<ReplicateMetrics>& reps,
                         bool lagged) {
  BenchCell cell;
  cell.scenario = name;
  const std::vector<std::string> metric_names =
      lagged ? std::vector<std::string>{"FDR", "TPR", "SHD"}
             : std::vector<std::string>{"FDR", "TPR", "SHD", "MSE"};
  for (const auto& metric : metric_names) {
    std::vector<double> values;
    values.reserve(reps.size());
    for (const auto& r : reps) {
      if (!r.valid) continue;  // failed replicates only contribute a flag
      const EvalReport& report = lagged ? *r.w : r.b;
      if (metric == "FDR") values.push_back(report.fdr);
      if (metric == "TPR") values.push_back(report.tpr);
      if (metric == "SHD") values.push_back(report.shd);
      if (metric == "MSE") values.push_back(report.mse);
    }
    cell.metrics.emplace_back(
        metric, values.empty()
                    ? std::make_pair(std::numeric_limits<double>::quiet_NaN(), 0.0)
                    : mean_sd(values));
  }
  for (const auto& r : reps) cell.flags += r.converged ? '1' : '0';
  return cell;
}

}  // namespace

BenchResult run_bench(BenchTable table, const BenchOptions& opts) {
  if (opts.reps < 1) throw std::invalid_argument("bench: reps must be >= 1");
  const char* names[] = {"lsem", "svar", "svar_lagged", "long_single_unit",
                         "vary_p"};
  BenchResult result;
  result.table = names[static_cast<int>(table)];
  const bool lagged = table == BenchTable::SvarLagged;
  for (const auto& [name, spec] : bench_grid(table)) {
    const auto reps = run_cell(spec, opts);
    result.cells.push_back(aggregate_cell(name, reps, lagged));
  }
  return result;
}

std::string BenchResult::to_csv() const {
  std::string out = "table,scenario,metric,mean,sd,reps,flags\n";
  for (const auto& cell : cells) {
    for (const auto& [metric, stats] : cell.metrics) {
      out += table + "," + cell.scenario + "," + metric + "," +
             format_double(stats.first) + "," + format_double(stats.second) +
             "," + std::to_string(cell.flags.size()) + "," + cell.flags + "\n";
    }
  }
  return out;
}

}  // namespace dyncausal
