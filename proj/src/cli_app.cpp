#include "dyncausal/cli_app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>

#include "dyncausal/basis.hpp"
#include "dyncausal/bench.hpp"
#include "dyncausal/datagen.hpp"
#include "dyncausal/effect.hpp"
#include "dyncausal/metrics.hpp"
#include "dyncausal/model_io.hpp"
#include "dyncausal/panel_io.hpp"
#include "dyncausal/solver.hpp"

namespace dyncausal {

namespace {

Scenario parse_scenario(const std::string& name) {
  if (name == "s1") return Scenario::S1;
  if (name == "s2") return Scenario::S2;
  if (name == "svar1") return Scenario::Svar1;
  throw CLI::ValidationError("--scenario", "unknown scenario: " + name);
}

StrengthFn parse_strength(const std::string& name) {
  if (name == "f1") return StrengthFn::F1Cosine;
  if (name == "f2") return StrengthFn::F2QuadraticLsem;
  if (name == "f2svar") return StrengthFn::F2QuadraticSvar;
  if (name == "f1long") return StrengthFn::F1CosineLong;
  if (name == "const") return StrengthFn::Constant;
  throw CLI::ValidationError("--strength", "unknown strength function: " + name);
}

struct FitFlags {
  int lag = 0;
  int knots = 0;
  int order = 2;
  double threshold = 0.2;
  double alpha = 0.0;
  int max_outer = 100;
  int inner_steps = 200;
  double lr = 0.003;
  double l1 = 0.05;
  bool no_refit = false;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lag", lag, "autoregressive order d (0 = LSEM)");
    cmd->add_option("--knots", knots, "interior knot count");
    cmd->add_option("--order", order, "B-spline order (piece degree)");
    cmd->add_option("--threshold", threshold, "edge weight threshold");
    cmd->add_option("--alpha", alpha, "acyclicity alpha (0 = 1/p)");
    cmd->add_option("--max-outer", max_outer, "max outer iterations");
    cmd->add_option("--inner-steps", inner_steps, "inner Adam steps");
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--l1", l1, "sparsity penalty on graph weights");
    cmd->add_flag("--no-refit", no_refit, "skip the post-selection refit");
    cmd->add_option("--seed", seed, "random seed");
  }

  SolverConfig solver() const {
    SolverConfig cfg;
    cfg.acyclicity_alpha = alpha;
    cfg.threshold = threshold;
    cfg.max_outer_iters = max_outer;
    cfg.inner_steps = inner_steps;
    cfg.learning_rate = lr;
    cfg.l1_penalty = l1;
    cfg.refit = !no_refit;
    cfg.seed = seed;
    return cfg;
  }
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// Expands a flat key=value config file into --key=value tokens, appended
/// after the explicit arguments so that flags given on the command line win
/// (CLI11 reports a duplicate otherwise, so present keys are skipped).
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": empty key");
    }
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& arg : args) {
      if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
        present = true;
        break;
      }
    }
    if (!present) args.push_back(flag + "=" + value);
  }
  return args;
}

void enable_config(CLI::App* cmd) {
  static std::string sink;
  cmd->add_option("--config", sink, "flat key=value config file; flags override");
}

}  // namespace

int run_cli(std::vector<std::string> args) {
  CLI::App app{"time-varying causal graph learning and dynamic effects"};
  app.require_subcommand(1);

  // --- simulate ---------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "generate synthetic panel data");
  enable_config(sim);
  std::string sim_scenario = "s1";
  std::string sim_strength = "f1";
  ScenarioSpec spec;
  std::string sim_out, sim_truth;
  sim->add_option("--scenario", sim_scenario, "s1 | s2 | svar1");
  sim->add_option("--strength", sim_strength, "f1 | f2 | f2svar | f1long | const");
  sim->add_option("--const-value", spec.constant_value, "constant strength value");
  sim->add_option("--p", spec.p, "variable count");
  sim->add_option("--m", spec.m, "units per stamp");
  sim->add_option("--T", spec.T, "time stamps");
  sim->add_option("--lag", spec.d, "autoregressive order");
  sim->add_option("--noise", spec.noise_std, "noise standard deviation");
  std::string sim_noise_kind = "gaussian";
  sim->add_option("--noise-kind", sim_noise_kind, "gaussian | uniform");
  sim->add_option("--expected-degree", spec.expected_degree, "S2 expected degree");
  sim->add_option("--seed", spec.seed, "random seed");
  sim->add_option("--out", sim_out, "panel CSV path")->required();
  sim->add_option("--truth", sim_truth, "ground-truth JSON path");

  // --- fit --------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "learn time-varying graphs");
  enable_config(fit_cmd);
  std::string fit_input, fit_out, fit_trace;
  FitFlags fit_flags;
  fit_cmd->add_option("input", fit_input, "panel CSV")->required();
  fit_flags.attach(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "fit JSON path")->required();
  fit_cmd->add_option("--trace", fit_trace, "line-delimited trace path");

  // --- effect -----------------------------------------------------------
  auto* eff = app.add_subcommand("effect", "dynamic causal effect trajectory");
  enable_config(eff);
  std::string eff_input, eff_out;
  double eff_a = 1.0;
  eff->add_option("input", eff_input, "fit or truth JSON")->required();
  eff->add_option("--a", eff_a, "treatment level");
  eff->add_option("--out", eff_out, "trajectory CSV path")->required();

  // --- eval -------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "graph-recovery metrics");
  enable_config(ev);
  std::string ev_est, ev_truth, ev_out, ev_csv, ev_target = "b";
  ev->add_option("--est", ev_est, "estimated fit JSON")->required();
  ev->add_option("--truth", ev_truth, "ground-truth JSON")->required();
  ev->add_option("--target", ev_target, "b (contemporaneous) | w (lagged)");
  ev->add_option("--out", ev_out, "report JSON path")->required();
  ev->add_option("--csv", ev_csv, "report CSV path");

  // --- bench ------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "simulation benchmark tables");
  enable_config(bench_cmd);
  std::string bench_table = "lsem", bench_out;
  BenchOptions bench_opts;
  FitFlags bench_flags;
  bench_cmd->add_option("--table", bench_table,
                        "lsem | svar | svar_lagged | long_single_unit | vary_p");
  bench_cmd->add_option("--reps", bench_opts.reps, "replicates per cell");
  bench_cmd->add_option("--threads", bench_opts.threads, "worker threads (0 = auto)");
  bench_flags.attach(bench_cmd);
  bench_cmd->add_option("--out", bench_out, "results CSV path")->required();

  try {
    args = apply_config_file(std::move(args));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) {
      spec.scenario = parse_scenario(sim_scenario);
      spec.strength_fn = parse_strength(sim_strength);
      if (sim_noise_kind == "uniform") {
        spec.noise_kind = NoiseKind::Uniform;
      } else if (sim_noise_kind != "gaussian") {
        throw std::invalid_argument("--noise-kind must be gaussian or uniform");
      }
      const auto [panel, truth] = spec.d >= 1 ? simulate_svar(spec)
                                              : simulate_lsem(spec);
      emit_panel_csv(sim_out, panel);
      if (!sim_truth.empty()) atomic_write(sim_truth, truth_to_json(truth));
      return 0;
    }

    if (*fit_cmd) {
      const PanelTensor panel = ingest_panel_csv(fit_input);
      const BasisConfig basis =
          build_knots(1.0, static_cast<double>(panel.T()), fit_flags.knots,
                      fit_flags.order, /*domain_end_extension=*/1.0);
      const FitResult result = fit(panel, basis, fit_flags.lag,
                                   fit_flags.solver());
      atomic_write(fit_out, fit_to_json(result, panel.T()));
      if (!fit_trace.empty()) atomic_write(fit_trace, trace_to_lines(result.trace));
      if (!result.converged) {
        std::cerr << "fit: acyclicity constraint not met (h1 = "
                  << result.trace.back().h1 << " > tolerance); result flagged\n";
        return 2;
      }
      return 0;
    }

    if (*eff) {
      const LoadedModel model = load_model_json(eff_input);
      atomic_write(eff_out,
                   trajectory_to_csv(effect_trajectory(model.graphs, eff_a)));
      return 0;
    }

    if (*ev) {
      const LoadedModel est = load_model_json(ev_est);
      const LoadedModel truth = load_model_json(ev_truth);
      EvalReport report;
      if (ev_target == "b") {
        report = evaluate(est.graphs, truth.graphs);
      } else if (ev_target == "w") {
        report = evaluate_lagged(est.graphs, truth.graphs);
      } else {
        throw std::invalid_argument("eval: --target must be b or w");
      }
      atomic_write(ev_out, eval_report_to_json(report));
      if (!ev_csv.empty()) atomic_write(ev_csv, eval_report_to_csv(report));
      return 0;
    }

    if (*bench_cmd) {
      bench_opts.seed = bench_flags.seed;
      bench_opts.interior_knots = bench_flags.knots;
      bench_opts.order = bench_flags.order;
      bench_opts.solver = bench_flags.solver();
      const BenchResult result =
          run_bench(parse_bench_table(bench_table), bench_opts);
      atomic_write(bench_out, result.to_csv());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dyncausal
