#include "dyncausal/model_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "dyncausal/panel_io.hpp"

namespace dyncausal {

namespace {

using nlohmann::json;

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd json_to_mat(const json& j) {
  const auto rows = j.size();
  if (rows == 0) return {};
  const auto cols = j.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j.at(i);
    if (row.size() != cols) throw std::runtime_error("ragged matrix in JSON");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          row.at(c).get<double>();
    }
  }
  return m;
}

json graphs_to_json(const GraphSequence& graphs) {
  json b = json::array();
  for (const auto& mat : graphs.B) b.push_back(mat_to_json(mat));
  return b;
}

json basis_to_json(const BasisConfig& basis) {
  return json{{"order", basis.order},
              {"knots", basis.knots},
              {"domain_end_extension", basis.domain_end_extension}};
}

BasisConfig basis_from_json(const json& j) {
  BasisConfig basis;
  basis.order = j.at("order").get<int>();
  basis.knots = j.at("knots").get<std::vector<double>>();
  basis.domain_end_extension = j.at("domain_end_extension").get<double>();
  basis.K = static_cast<int>(basis.knots.size()) - basis.order - 1;
  return basis;
}

}  // namespace

std::string fit_to_json(const FitResult& result, int panel_T) {
  const auto& coef = result.coef;
  json out;
  out["p"] = coef.p();
  out["T"] = panel_T;
  out["K"] = coef.K();
  out["d"] = coef.d;
  out["threshold"] = result.graphs.threshold;
  out["basis"] = basis_to_json(coef.basis);
  out["gamma"] = mat_to_json(coef.gamma);
  out["tau"] = coef.tau ? mat_to_json(*coef.tau) : json(nullptr);
  out["times"] = result.graphs.times;
  out["B"] = graphs_to_json(result.graphs);
  if (result.graphs.W) {
    json w = json::array();
    for (const auto& mat : *result.graphs.W) w.push_back(mat_to_json(mat));
    out["W"] = std::move(w);
  } else {
    out["W"] = nullptr;
  }
  out["predicted_B"] = mat_to_json(result.predicted_B);
  out["predicted_W"] =
      result.predicted_W ? mat_to_json(*result.predicted_W) : json(nullptr);
  out["prediction_time"] = result.prediction_time;
  out["converged"] = result.converged;
  out["final_score"] = result.final_score;
  out["final_h1"] = result.final_h1;
  out["repairs"] = result.repairs;
  return out.dump(2) + "\n";
}

std::string truth_to_json(const GroundTruth& truth) {
  const int p = static_cast<int>(truth.graphs.B.front().rows());
  json out;
  out["p"] = p;
  out["T"] = truth.graphs.times.size();
  out["K"] = 0;
  out["d"] = truth.d;
  out["threshold"] = truth.graphs.threshold;
  out["basis"] = nullptr;
  out["gamma"] = nullptr;
  out["tau"] = nullptr;
  out["times"] = truth.graphs.times;
  out["B"] = graphs_to_json(truth.graphs);
  if (truth.graphs.W) {
    json w = json::array();
    for (const auto& mat : *truth.graphs.W) w.push_back(mat_to_json(mat));
    out["W"] = std::move(w);
  } else {
    out["W"] = nullptr;
  }
  out["noise_std"] = truth.noise_std;
  return out.dump(2) + "\n";
}

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return j;
}

GraphSequence graphs_from_json(const json& j) {
  GraphSequence graphs;
  graphs.threshold = j.at("threshold").get<double>();
  graphs.times = j.at("times").get<std::vector<double>>();
  for (const auto& mat : j.at("B")) graphs.B.push_back(json_to_mat(mat));
  if (!j.at("W").is_null()) {
    graphs.W.emplace();
    for (const auto& mat : j.at("W")) graphs.W->push_back(json_to_mat(mat));
  }
  return graphs;
}

}  // namespace

LoadedModel load_model_json(const std::string& path) {
  const json j = parse_file(path);
  LoadedModel out;
  out.p = j.at("p").get<int>();
  out.T = j.at("T").get<int>();
  out.d = j.at("d").get<int>();
  out.graphs = graphs_from_json(j);
  if (j.contains("predicted_B") && !j.at("predicted_B").is_null()) {
    out.graphs.predicted.assign(out.graphs.times.size(), false);
    out.graphs.times.push_back(j.value("prediction_time", 0.0));
    out.graphs.B.push_back(json_to_mat(j.at("predicted_B")));
    if (out.graphs.W && j.contains("predicted_W") &&
        !j.at("predicted_W").is_null()) {
      out.graphs.W->push_back(json_to_mat(j.at("predicted_W")));
    }
    out.graphs.predicted.push_back(true);
  }
  return out;
}

FitResult fit_from_json(const std::string& text) {
  const json j = json::parse(text);
  FitResult result;
  result.coef.d = j.at("d").get<int>();
  result.coef.basis = basis_from_json(j.at("basis"));
  result.coef.gamma = json_to_mat(j.at("gamma"));
  if (!j.at("tau").is_null()) result.coef.tau = json_to_mat(j.at("tau"));
  result.graphs = graphs_from_json(j);
  result.predicted_B = json_to_mat(j.at("predicted_B"));
  if (!j.at("predicted_W").is_null()) {
    result.predicted_W = json_to_mat(j.at("predicted_W"));
  }
  result.prediction_time = j.at("prediction_time").get<double>();
  result.converged = j.at("converged").get<bool>();
  result.final_score = j.at("final_score").get<double>();
  result.final_h1 = j.at("final_h1").get<double>();
  result.repairs = j.at("repairs").get<std::vector<std::string>>();
  return result;
}

std::string eval_report_to_json(const EvalReport& report) {
  json out;
  out["fdr"] = report.fdr;
  out["tpr"] = report.tpr;
  out["shd"] = report.shd;
  out["mse"] = report.mse;
  out["tp"] = report.tp;
  out["fp"] = report.fp;
  out["fn"] = report.fn;
  out["reversed"] = report.reversed;
  json per_time = json::array();
  for (const auto& c : report.per_time) {
    per_time.push_back(json{{"t", c.t},
                            {"tp", c.tp},
                            {"fp", c.fp},
                            {"fn", c.fn},
                            {"reversed", c.reversed},
                            {"shd", c.shd}});
  }
  out["per_time"] = std::move(per_time);
  return out.dump(2) + "\n";
}

std::string eval_report_to_csv(const EvalReport& report) {
  std::string out = "fdr,tpr,shd,mse,tp,fp,fn,reversed\n";
  out += format_double(report.fdr) + "," + format_double(report.tpr) + "," +
         format_double(report.shd) + "," + format_double(report.mse) + "," +
         std::to_string(report.tp) + "," + std::to_string(report.fp) + "," +
         std::to_string(report.fn) + "," + std::to_string(report.reversed) +
         "\n";
  return out;
}

std::string trajectory_to_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::string out = "t,effect,is_predicted\n";
  for (const auto& pt : trajectory) {
    out += format_double(pt.t) + "," + format_double(pt.effect) + "," +
           (pt.is_predicted ? "1" : "0") + "\n";
  }
  return out;
}

std::string trace_to_lines(const std::vector<TraceEntry>& trace) {
  std::string out;
  for (const auto& e : trace) {
    nlohmann::json line{{"iteration", e.outer},
                        {"score", e.score},
                        {"h1", e.h1},
                        {"rho", e.rho},
                        {"lambda", e.lambda}};
    out += line.dump() + "\n";
  }
  return out;
}

}  // namespace dyncausal
