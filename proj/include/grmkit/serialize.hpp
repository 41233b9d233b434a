#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "grmkit/beta.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/evaluation.hpp"
#include "grmkit/factor.hpp"
#include "grmkit/graph.hpp"
#include "grmkit/grm.hpp"
#include "grmkit/interaction.hpp"
#include "grmkit/precision.hpp"
#include "grmkit/synth.hpp"

#include <json.hpp>

namespace grmkit {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const Json& j) {
  const Index rows = static_cast<Index>(j.size());
  require(rows > 0, errc::io_failure, "matrix JSON is empty");
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    require(static_cast<Index>(j.at(i).size()) == cols, errc::io_failure,
            "ragged matrix JSON");
    for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace detail

inline Json to_json(const PrecisionEstimate& est) {
  Json j;
  j["type"] = "precision_estimate";
  j["asset_ids"] = est.asset_ids;
  j["method"] = method_name(est.method);
  j["lambda"] = est.lambda;
  j["frobenius_weight"] = est.frobenius_weight;
  j["iterations"] = est.iterations;
  j["converged"] = est.converged;
  j["kkt_residual"] = est.kkt_residual;
  j["objective_trace"] = est.objective_trace;
  j["omega"] = detail::matrix_to_json(est.omega);
  Json triplets = Json::array();
  for (Index i = 0; i < est.omega.rows(); ++i)
    for (Index c = 0; c < est.omega.cols(); ++c)
      if (est.omega(i, c) != 0.0)
        triplets.push_back(Json::array({i, c, est.omega(i, c)}));
  j["nonzeros"] = std::move(triplets);
  return j;
}

inline PrecisionEstimate precision_from_json(const Json& j) {
  PrecisionEstimate est;
  est.asset_ids = j.at("asset_ids").get<std::vector<std::string>>();
  const std::string method = j.at("method").get<std::string>();
  if (method == "glasso")
    est.method = Method::glasso;
  else if (method == "concord")
    est.method = Method::concord;
  else if (method == "pca_plugin")
    est.method = Method::pca_plugin;
  else if (method == "exact_inverse")
    est.method = Method::exact_inverse;
  else
    fail(errc::io_failure, "unknown precision method '" + method + "'");
  est.lambda = j.at("lambda").get<double>();
  est.frobenius_weight = j.at("frobenius_weight").get<double>();
  est.iterations = j.at("iterations").get<int>();
  est.converged = j.at("converged").get<bool>();
  est.kkt_residual = j.at("kkt_residual").get<double>();
  est.objective_trace = j.at("objective_trace").get<std::vector<double>>();
  est.omega = detail::matrix_from_json(j.at("omega"));
  validate_precision(est);
  return est;
}

inline Json to_json(const GrmModel& grm) {
  Json j;
  j["type"] = "grm_model";
  j["asset_ids"] = grm.asset_ids;
  j["A"] = detail::matrix_to_json(grm.A);
  j["D"] = detail::vector_to_json(grm.D);
  j["omega_source"] = to_json(grm.omega_source);
  return j;
}

inline GrmModel grm_from_json(const Json& j) {
  const GrmModel grm = build_grm(precision_from_json(j.at("omega_source")));
  // revalidate the serialized A and D against the rebuilt model
  const Matrix a = detail::matrix_from_json(j.at("A"));
  const Vector d = detail::vector_from_json(j.at("D"));
  require((a - grm.A).cwiseAbs().maxCoeff() <= 1e-12 &&
              (d - grm.D).cwiseAbs().maxCoeff() <= 1e-12,
          errc::io_failure, "stored A/D do not match I - D.Omega");
  return grm;
}

inline Json to_json(const FactorModel& model) {
  Json j;
  j["type"] = "factor_model";
  j["kind"] = model.kind == FactorKind::exogenous ? "exogenous" : "pca";
  j["asset_ids"] = model.asset_ids;
  j["k"] = model.k;
  j["B"] = detail::matrix_to_json(model.B);
  j["fitted_on"] = model.fitted_on;
  return j;
}

inline FactorModel factor_from_json(const Json& j) {
  FactorModel model;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "exogenous")
    model.kind = FactorKind::exogenous;
  else if (kind == "pca")
    model.kind = FactorKind::pca;
  else
    fail(errc::io_failure, "unknown factor kind '" + kind + "'");
  model.asset_ids = j.at("asset_ids").get<std::vector<std::string>>();
  model.k = j.at("k").get<Index>();
  model.B = detail::matrix_from_json(j.at("B"));
  model.fitted_on = j.at("fitted_on").get<std::string>();
  require(model.k >= 1 && model.B.cols() == model.k, errc::io_failure,
          "factor exposure shape mismatch");
  if (model.kind == FactorKind::pca) {
    const Matrix gram = model.B.transpose() * model.B;
    require((gram - Matrix::Identity(model.k, model.k)).cwiseAbs().maxCoeff() <=
                1e-10,
            errc::io_failure, "pca exposures must be orthonormal");
  }
  return model;
}

inline Json to_json(const ImpliedFactorMatrix& implied) {
  Json j;
  j["type"] = "implied_factor_matrix";
  j["asset_ids"] = implied.asset_ids;
  j["normalization"] =
      implied.normalization == BetaNormalization::unit ? "unit" : "mean_one";
  j["eigenvalues"] = detail::vector_to_json(implied.eigenvalues);
  j["B_imp"] = detail::matrix_to_json(implied.B_imp);
  return j;
}

inline Json to_json(const MixedModel& model) {
  Json j;
  j["type"] = "mixed_model";
  j["asset_ids"] = model.weights.asset_ids;
  j["rho"] = model.rho;
  j["weights_source"] =
      model.weights.source == WeightSource::spatial ? "spatial" : "grm_A";
  j["W"] = detail::matrix_to_json(model.weights.W);
  j["B"] = detail::matrix_to_json(model.B);
  j["search_bounds"] =
      Json::array({model.search_bounds.first, model.search_bounds.second});
  j["objective_value"] = model.objective_value;
  Json trace = Json::array();
  for (const auto& [kappa, objective] : model.search_trace)
    trace.push_back(Json::array({kappa, objective}));
  j["search_trace"] = std::move(trace);
  return j;
}

inline MixedModel mixed_from_json(const Json& j) {
  MixedModel model;
  model.weights.asset_ids = j.at("asset_ids").get<std::vector<std::string>>();
  model.weights.source = j.at("weights_source").get<std::string>() == "spatial"
                             ? WeightSource::spatial
                             : WeightSource::grm_A;
  model.weights.W = detail::matrix_from_json(j.at("W"));
  model.rho = j.at("rho").get<double>();
  model.B = detail::matrix_from_json(j.at("B"));
  model.search_bounds = {j.at("search_bounds").at(0).get<double>(),
                         j.at("search_bounds").at(1).get<double>()};
  model.objective_value = j.at("objective_value").get<double>();
  for (const auto& row : j.at("search_trace"))
    model.search_trace.emplace_back(row.at(0).get<double>(),
                                    row.at(1).get<double>());
  require(model.weights.W.diagonal().cwiseAbs().maxCoeff() == 0.0,
          errc::io_failure, "interaction weights must have a zero diagonal");
  return model;
}

inline Json to_json(const EvalReport& report) {
  Json j;
  j["model"] = report.model_label;
  j["rmse"] = report.rmse;
  j["rmse_pct"] = report.rmse_pct;
  j["bic"] = report.bic;
  j["r2_mean"] = report.r2_mean;
  j["kappa"] = report.kappa;
  j["p"] = report.p;
  j["n_O"] = report.n_O;
  return j;
}

inline std::string eval_csv_header() {
  return "model,rmse,rmse_pct,bic,r2_mean,kappa,p,n_O";
}

inline std::string eval_csv_row(const EvalReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << r.model_label << ',' << r.rmse << ',' << r.rmse_pct << ',' << r.bic
      << ',' << r.r2_mean << ',' << r.kappa << ',' << r.p << ',' << r.n_O;
  return out.str();
}

inline Json to_json(const SyntheticSpec& spec) {
  Json j;
  j["type"] = "synthetic_spec";
  j["p"] = spec.p;
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  Json s;
  if (std::holds_alternative<ChainStructure>(spec.structure)) {
    s["kind"] = "chain";
  } else if (const auto* banded = std::get_if<BandedStructure>(&spec.structure)) {
    s["kind"] = "banded";
    s["width"] = banded->width;
  } else if (const auto* sparse =
                 std::get_if<RandomSparseStructure>(&spec.structure)) {
    s["kind"] = "random_sparse";
    s["density"] = sparse->density;
  } else if (const auto* one = std::get_if<OneFactorStructure>(&spec.structure)) {
    s["kind"] = "one_factor";
    s["beta"] = detail::vector_to_json(one->beta);
    s["idio_var"] = one->idio_var;
    s["factor_var"] = one->factor_var;
  } else if (const auto* kf = std::get_if<KFactorStructure>(&spec.structure)) {
    s["kind"] = "k_factor";
    s["B"] = detail::matrix_to_json(kf->B);
    s["V"] = detail::matrix_to_json(kf->V);
    s["delta"] = detail::vector_to_json(kf->delta);
  }
  j["structure"] = std::move(s);
  return j;
}

inline SyntheticSpec synthetic_spec_from_json(const Json& j) {
  SyntheticSpec spec;
  spec.p = j.at("p").get<Index>();
  spec.n = j.at("n").get<Index>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  const Json& s = j.at("structure");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "chain") {
    spec.structure = ChainStructure{};
  } else if (kind == "banded") {
    spec.structure = BandedStructure{s.at("width").get<int>()};
  } else if (kind == "random_sparse") {
    spec.structure = RandomSparseStructure{s.at("density").get<double>()};
  } else if (kind == "one_factor") {
    OneFactorStructure one;
    one.beta = detail::vector_from_json(s.at("beta"));
    one.idio_var = s.at("idio_var").get<double>();
    one.factor_var = s.value("factor_var", 1.0);
    spec.structure = one;
  } else if (kind == "k_factor") {
    KFactorStructure kf;
    kf.B = detail::matrix_from_json(s.at("B"));
    kf.V = detail::matrix_from_json(s.at("V"));
    kf.delta = detail::vector_from_json(s.at("delta"));
    spec.structure = kf;
  } else {
    fail(errc::io_failure, "unknown synthetic structure '" + kind + "'");
  }
  return spec;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_failure, "cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::io_failure, "malformed JSON in " + path + ": " + e.what());
  }
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), errc::io_failure, "cannot write " + path);
  out << j.dump(2) << "\n";
  require(out.good(), errc::io_failure, "write failed for " + path);
}

}  // namespace grmkit
