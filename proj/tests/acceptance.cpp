// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dyncausal/basis.hpp"
#include "dyncausal/bench.hpp"
#include "dyncausal/cli_app.hpp"
#include "dyncausal/datagen.hpp"
#include "dyncausal/effect.hpp"
#include "dyncausal/model_io.hpp"
#include "dyncausal/panel_io.hpp"
#include "dyncausal/rng.hpp"
#include "dyncausal/solver.hpp"

using namespace dyncausal;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& details) {
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              name.c_str(), details.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

struct CellStats {
  double fdr = 0.0, tpr = 0.0, shd = 0.0, mse = 0.0;
  double w_fdr = 0.0, w_tpr = 0.0, w_shd = 0.0;
  std::vector<double> prediction_errors;
};

CellStats aggregate(const std::vector<ReplicateMetrics>& reps) {
  CellStats s;
  double n = 0.0;
  for (const auto& r : reps) {
    if (!r.valid) continue;
    n += 1.0;
    s.fdr += r.b.fdr;
    s.tpr += r.b.tpr;
    s.shd += r.b.shd;
    s.mse += r.b.mse;
    if (r.w) {
      s.w_fdr += r.w->fdr;
      s.w_tpr += r.w->tpr;
      s.w_shd += r.w->shd;
    }
    s.prediction_errors.push_back(r.prediction_error);
  }
  if (n == 0.0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.fdr = s.tpr = s.shd = s.mse = s.w_fdr = s.w_tpr = s.w_shd = nan;
    return s;
  }
  s.fdr /= n;
  s.tpr /= n;
  s.shd /= n;
  s.mse /= n;
  s.w_fdr /= n;
  s.w_tpr /= n;
  s.w_shd /= n;
  return s;
}

std::string fmt(const char* pattern, double a, double b, double c, double d) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c, d);
  return buf;
}

// Closed-form cardinal B-spline on uniform knots; the independent route for
// the recursion check.
double uniform_closed_form(int order, double knot0, double x) {
  const double u = x - knot0;
  if (u < 0.0 || u >= order + 1.0) return 0.0;
  switch (order) {
    case 0:
      return 1.0;
    case 1:
      return u < 1.0 ? u : 2.0 - u;
    default:
      if (u < 1.0) return 0.5 * u * u;
      if (u < 2.0) return 0.5 * (-2.0 * u * u + 6.0 * u - 3.0);
      return 0.5 * (3.0 - u) * (3.0 - u);
  }
}

GroundTruth random_effect_truth(int p, int d, std::uint64_t seed) {
  GroundTruth truth;
  truth.d = d;
  truth.noise_std = 1.0;
  truth.graphs.threshold = 0.2;
  const BoolMatrix structure = random_dag(p, std::min(2.5, p - 1.5), seed);
  Rng rng(derive_seed(seed, 99));
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (int a = 0; a < p; ++a) {
    for (int c = 0; c < p; ++c) {
      if (structure(a, c)) {
        const double mag = rng.uniform(0.3, 0.9);
        b(a, c) = rng.uniform() < 0.5 ? mag : -mag;
      }
    }
  }
  Eigen::MatrixXd w;
  if (d >= 1) {
    w = Eigen::MatrixXd::Zero(p * d, p);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (int j = 1; j < p; ++j) w(i, j) = rng.uniform(-0.5, 0.5);
    }
  }
  for (int t = 1; t <= 6; ++t) {
    truth.graphs.times.push_back(static_cast<double>(t));
    truth.graphs.B.push_back(b);
    if (d >= 1) {
      if (!truth.graphs.W) truth.graphs.W.emplace();
      truth.graphs.W->push_back(w);
    }
  }
  return truth;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  BenchOptions opts;
  opts.reps = 30;
  opts.seed = 1;

  // --- criteria 1-3: LSEM table ------------------------------------------
  {
    const auto grid = bench_grid(BenchTable::Lsem);
    const CellStats s1f1 = aggregate(run_cell(grid[0].second, opts));
    report(1, "S1F1 LSEM recovery",
           s1f1.fdr <= 0.10 && s1f1.tpr >= 0.90 && s1f1.shd <= 0.5 &&
               s1f1.mse <= 0.05,
           fmt("FDR %.3f<=0.10, TPR %.3f>=0.90, SHD %.3f<=0.5, MSE %.3f<=0.05",
               s1f1.fdr, s1f1.tpr, s1f1.shd, s1f1.mse));

    const CellStats s1f2 = aggregate(run_cell(grid[1].second, opts));
    report(2, "S1F2 LSEM recovery",
           s1f2.fdr <= 0.10 && s1f2.tpr >= 0.85 && s1f2.shd <= 0.5 &&
               s1f2.mse <= 0.05,
           fmt("FDR %.3f<=0.10, TPR %.3f>=0.85, SHD %.3f<=0.5, MSE %.3f<=0.05",
               s1f2.fdr, s1f2.tpr, s1f2.shd, s1f2.mse));

    const CellStats s2 = aggregate(run_cell(grid[2].second, opts));
    report(3, "S2 LSEM recovery",
           s2.fdr <= 0.25 && s2.tpr >= 0.70 && s2.shd <= 2.5 && s2.mse <= 0.15,
           fmt("FDR %.3f<=0.25, TPR %.3f>=0.70, SHD %.3f<=2.5, MSE %.3f<=0.15",
               s2.fdr, s2.tpr, s2.shd, s2.mse));

    // --- criterion 11: one-step prediction on the S1F1 runs ---------------
    int ok = 0;
    for (double err : s1f1.prediction_errors) {
      if (err <= 0.2) ++ok;
    }
    const double frac = static_cast<double>(ok) / 30.0;
    report(11, "one-step prediction of the S1F1 edge weight", frac >= 0.80,
           fmt("|B(T+1) error|<=0.2 in %.0f%% of 30 >= 80%%", 100.0 * frac, 0,
               0, 0));
  }

  // --- criteria 4-5: SVAR tables -----------------------------------------
  {
    const auto grid = bench_grid(BenchTable::Svar);
    const CellStats f1 = aggregate(run_cell(grid[0].second, opts));
    const CellStats f2 = aggregate(run_cell(grid[1].second, opts));
    report(4, "SVAR contemporaneous recovery (F1 and F2)",
           f1.fdr <= 0.25 && f1.tpr >= 0.85 && f1.shd <= 1.0 && f1.mse <= 0.06 &&
               f2.fdr <= 0.25 && f2.tpr >= 0.85 && f2.shd <= 1.0 &&
               f2.mse <= 0.06,
           fmt("F1 FDR %.3f TPR %.3f SHD %.3f MSE %.3f", f1.fdr, f1.tpr, f1.shd,
               f1.mse) +
               fmt("; F2 FDR %.3f TPR %.3f SHD %.3f MSE %.3f", f2.fdr, f2.tpr,
                   f2.shd, f2.mse));
    report(5, "SVAR lagged-matrix recovery (F1 and F2)",
           f1.w_tpr >= 0.85 && f1.w_shd <= 3.0 && f2.w_tpr >= 0.85 &&
               f2.w_shd <= 3.0,
           fmt("F1 TPR %.3f>=0.85 SHD %.3f<=3.0; F2 TPR %.3f SHD %.3f", f1.w_tpr,
               f1.w_shd, f2.w_tpr, f2.w_shd));
  }

  // --- criterion 6: long single-unit run ---------------------------------
  {
    BenchOptions long_opts = opts;
    long_opts.reps = 10;
    const auto grid = bench_grid(BenchTable::LongSingleUnit);
    const CellStats s = aggregate(run_cell(grid[0].second, long_opts));
    report(6, "long single-unit run (m=1, T=100)",
           s.fdr <= 0.15 && s.tpr >= 0.80 && s.mse <= 0.10,
           fmt("FDR %.3f<=0.15, TPR %.3f>=0.80, MSE %.3f<=0.10 (SHD %.3f)",
               s.fdr, s.tpr, s.mse, s.shd));
  }

  // --- criterion 7: effect-oracle equivalence ----------------------------
  {
    bool all_ok = true;
    double worst = 0.0;
    const auto t7 = std::chrono::steady_clock::now();
    for (std::uint64_t i = 0; i < 20; ++i) {
      const int p = i % 2 == 0 ? 3 : 5;
      const int d = i % 4 < 2 ? 0 : 1;
      const GroundTruth truth = random_effect_truth(p, d, 500 + i);
      const double a = 1.0;
      const double formula = dynamic_effect(truth.graphs, 3.0, a);
      const OracleResult oracle = mc_effect_oracle(truth, 3, a, 100000, i);
      const double tol = std::max(3.0 * oracle.std_error, 1e-9 * (1.0 + std::abs(a)));
      const double err = std::abs(formula - oracle.estimate);
      worst = std::max(worst, err);
      if (err > tol) all_ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t7).count();
    report(7, "closed-form effect equals the interventional oracle",
           all_ok && secs <= 120.0,
           fmt("20 instances, worst |formula-oracle| %.2e, %.1f s <= 120 s",
               worst, secs, 0, 0));
  }

  // --- criterion 8: acyclicity characterization --------------------------
  {
    bool ok = true;
    const int slots[6][2] = {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
    for (int bits = 0; bits < 64; ++bits) {
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
      BoolMatrix adj = BoolMatrix::Constant(3, 3, false);
      for (int s = 0; s < 6; ++s) {
        if (bits & (1 << s)) {
          b(slots[s][0], slots[s][1]) = 1.0;
          adj(slots[s][0], slots[s][1]) = true;
        }
      }
      const double gap = acyclicity_gap(b, 1.0 / 3.0);
      if (is_acyclic(adj) ? (gap != 0.0) : (gap <= 1e-12)) ok = false;
    }
    report(8, "h1 = 0 exactly iff acyclic over all 64 3-node patterns", ok,
           "exhaustive census");
  }

  // --- criterion 9: gradient checks --------------------------------------
  {
    const double step = 1e-5;
    bool ok = true;
    double worst = 0.0;
    ScenarioSpec spec;
    spec.T = 8;
    spec.m = 6;
    spec.seed = 31;
    const auto [panel, truth] = simulate_lsem(spec);
    std::vector<double> times;
    for (int t = 1; t <= spec.T; ++t) times.push_back(t);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CoefficientSet coef;
      coef.basis = build_knots(1.0, 8.0, 1, 2, 1.0);
      Rng rng(700 + seed);
      coef.gamma.resize(spec.p * coef.basis.K, spec.p);
      for (Eigen::Index i = 0; i < coef.gamma.rows(); ++i) {
        for (int j = 0; j < spec.p; ++j) coef.gamma(i, j) = rng.normal(0.0, 0.4);
      }
      const Eigen::MatrixXd gh = h1_gradient(coef, times);
      const Eigen::MatrixXd gs = score_gradient_gamma(coef, panel);
      for (int trial = 0; trial < 10; ++trial) {
        const auto i = static_cast<Eigen::Index>(
            rng.uniform_index(static_cast<std::uint64_t>(coef.gamma.rows())));
        const auto j = static_cast<Eigen::Index>(
            rng.uniform_index(static_cast<std::uint64_t>(coef.gamma.cols())));
        const double saved = coef.gamma(i, j);
        coef.gamma(i, j) = saved + step;
        const double h_up = h1_value(coef, times);
        const double s_up = score(coef, panel);
        coef.gamma(i, j) = saved - step;
        const double h_dn = h1_value(coef, times);
        const double s_dn = score(coef, panel);
        coef.gamma(i, j) = saved;
        const double fd_h = (h_up - h_dn) / (2.0 * step);
        const double fd_s = (s_up - s_dn) / (2.0 * step);
        if (std::abs(gh(i, j)) > 1e-6) {
          const double rel = std::abs(fd_h - gh(i, j)) / std::abs(gh(i, j));
          worst = std::max(worst, rel);
          if (rel >= 1e-4) ok = false;
        }
        if (std::abs(gs(i, j)) > 1e-6) {
          const double rel = std::abs(fd_s - gs(i, j)) / std::abs(gs(i, j));
          worst = std::max(worst, rel);
          if (rel >= 1e-4) ok = false;
        }
      }
    }
    report(9, "analytic score and h1 gradients match finite differences", ok,
           fmt("20 instances, worst relative error %.2e < 1e-4", worst, 0, 0, 0));
  }

  // --- criterion 10: spline properties ------------------------------------
  {
    bool ok = true;
    for (int order = 0; order <= 2 && ok; ++order) {
      for (int interior : {0, 2, 5}) {
        const BasisConfig cfg = build_knots(1.0, 11.0, interior, order);
        for (int g = 0; g <= 300; ++g) {
          const double t = 1.0 + 10.0 * g / 300.0;
          const Eigen::RowVectorXd f = eval_basis(cfg, t);
          if (f.minCoeff() < 0.0) ok = false;
          if ((f.array() > 0.0).count() > order + 1) ok = false;
          if (std::abs(f.sum() - 1.0) > 1e-12) ok = false;
        }
      }
      // Recursion vs the closed-form piecewise polynomial on uniform knots.
      BasisConfig uniform;
      uniform.order = order;
      for (int i = 0; i < 9; ++i) uniform.knots.push_back(i);
      uniform.K = 9 - order - 1;
      for (int g = 0; g < 100; ++g) {
        const double t = 8.0 * (g + 0.5) / 100.0;
        const Eigen::RowVectorXd f = eval_basis(uniform, t);
        for (int j = 0; j < uniform.K; ++j) {
          if (std::abs(f(j) - uniform_closed_form(order, j, t)) > 1e-10) {
            ok = false;
          }
        }
      }
    }
    report(10, "spline non-negativity, support, unity, recursion agreement", ok,
           "orders 0-2, dense grids");
  }

  // --- criterion 12: determinism and format round trips -------------------
  {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dyncausal_acceptance";
    fs::create_directories(dir);
    const auto a_csv = (dir / "a.csv").string();
    const auto b_csv = (dir / "b.csv").string();
    const auto a_json = (dir / "a.json").string();
    const auto b_json = (dir / "b.json").string();
    bool ok = run_cli({"simulate", "--seed", "7", "--out", a_csv, "--truth",
                       a_json}) == 0 &&
              run_cli({"simulate", "--seed", "7", "--out", b_csv, "--truth",
                       b_json}) == 0;
    ok = ok && read_file(a_csv) == read_file(b_csv) &&
         read_file(a_json) == read_file(b_json);

    // Value-exact CSV and JSON round trips.
    const PanelTensor panel = ingest_panel_csv(a_csv);
    emit_panel_csv(b_csv, panel);
    ok = ok && read_file(a_csv) == read_file(b_csv);

    ScenarioSpec spec;
    spec.seed = 7;
    const auto [sim_panel, sim_truth] = simulate_lsem(spec);
    for (int t = 0; t < spec.T && ok; ++t) {
      if (panel.x[static_cast<std::size_t>(t)] !=
          sim_panel.x[static_cast<std::size_t>(t)]) {
        ok = false;
      }
    }
    const FitResult fitted =
        fit(sim_panel, build_knots(1.0, 10.0, 0, 2, 1.0), 0, SolverConfig{});
    const FitResult back = fit_from_json(fit_to_json(fitted, spec.T));
    ok = ok && back.coef.gamma == fitted.coef.gamma &&
         back.predicted_B == fitted.predicted_B;
    report(12, "seeded determinism and value-exact round trips", ok,
           "byte-identical outputs, bitwise CSV/JSON round trips");
  }

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/12 criteria passed in %.1f s\n", 12 - g_failures, total);
  return g_failures;
}
