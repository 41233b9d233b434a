// grmkit command line: fit / eval / graph / communities / beta / backtest / synth.
// Exit codes: 0 success, 1 computation or data error, 2 usage error.

#include <grmkit/grmkit.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using grmkit::Index;
using grmkit::Json;
using grmkit::Matrix;
using grmkit::Vector;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output wrapper: deterministic config + payload, timestamp isolated in meta.
Json wrap(Json config, Json payload) {
  Json j;
  j["config"] = std::move(config);
  j["model"] = std::move(payload);
  j["meta"] = Json{{"created_utc", utc_now()}, {"tool", "grmkit"}};
  return j;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) grmkit::fail(grmkit::errc::io_failure, "cannot create " + dir);
}

grmkit::ReturnsPanel load_panel(const std::string& path,
                                const std::string& split_date,
                                const std::string& side) {
  auto panel = grmkit::load_returns(path);
  if (!split_date.empty()) {
    auto [in_panel, out_panel] = grmkit::split(panel, split_date);
    panel = side == "out" ? out_panel : in_panel;
  }
  return grmkit::center(panel);
}

struct FitArgs {
  std::string input, out_dir = ".", method;
  std::string factors_path, distances_path, weights_model, weights_method = "glasso";
  std::string split_date;
  double lambda = -1.0;
  int cv_folds = 0;
  double frobenius_weight = 0.0;
  double tol = 1e-6;
  int max_iter = 500;
  Index k = 3;
  std::vector<double> bounds = {-2.0, 4.0};
  int grid_size = 601;
  unsigned threads = 0;
  std::uint64_t seed = kDefaultSeed;
};

Json fit_args_config(const FitArgs& a) {
  Json c;
  c["command"] = "fit";
  c["input"] = a.input;
  c["method"] = a.method;
  c["lambda"] = a.lambda;
  c["cv_folds"] = a.cv_folds;
  c["frobenius_weight"] = a.frobenius_weight;
  c["tol"] = a.tol;
  c["max_iter"] = a.max_iter;
  c["k"] = a.k;
  c["factors"] = a.factors_path;
  c["distances"] = a.distances_path;
  c["weights_model"] = a.weights_model;
  c["weights_method"] = a.weights_method;
  c["split_date"] = a.split_date;
  c["bounds"] = a.bounds;
  c["grid_size"] = a.grid_size;
  c["seed"] = a.seed;
  return c;
}

grmkit::PrecisionEstimate fit_precision(const grmkit::ReturnsPanel& panel,
                                        grmkit::Method method, const FitArgs& a,
                                        std::string* note) {
  const grmkit::SolverOptions opts{a.tol, a.max_iter};
  const auto cov = grmkit::sample_covariance(panel, grmkit::Divisor::n);
  double lambda = a.lambda;
  if (a.cv_folds > 0) {
    const auto grid = grmkit::default_lambda_grid(cov);
    const auto cv = grmkit::cross_validate(panel, method, grid, a.cv_folds, opts,
                                           a.frobenius_weight,
                                           grmkit::effective_threads(a.threads));
    lambda = cv.best_lambda;
    if (note) {
      *note = "cross-validated lambda = " + std::to_string(lambda) + " over " +
              std::to_string(grid.size()) + " grid points, " +
              std::to_string(a.cv_folds) + " folds";
    }
  } else if (lambda < 0.0) {
    throw UsageError("method " + a.method + " needs --lambda or --cv");
  }
  return grmkit::solve_precision(cov, method, lambda, opts, a.frobenius_weight);
}

grmkit::FactorPanel load_factors_for(const grmkit::ReturnsPanel& panel,
                                     const std::string& path) {
  auto factors = grmkit::load_factors(path);
  // keep only the panel's timestamps, in panel order
  std::map<std::string, Index> column_of;
  for (Index j = 0; j < factors.n(); ++j) column_of[factors.timestamps[j]] = j;
  Matrix values(factors.k(), panel.n());
  for (Index j = 0; j < panel.n(); ++j) {
    const auto it = column_of.find(panel.timestamps[j]);
    grmkit::require(it != column_of.end(), grmkit::errc::misalignment,
                    "factor file lacks date " + panel.timestamps[j]);
    values.col(j) = factors.values.col(it->second);
  }
  factors.values = std::move(values);
  factors.timestamps = panel.timestamps;
  return grmkit::center(factors);
}

int cmd_fit(const FitArgs& a) {
  const auto panel = load_panel(a.input, a.split_date, "in");
  ensure_out_dir(a.out_dir);
  Json payload;
  std::string summary = "method: " + a.method + "\n";
  summary += "p: " + std::to_string(panel.p()) + ", n: " + std::to_string(panel.n()) + "\n";

  if (a.method == "glasso" || a.method == "concord") {
    std::string note;
    const auto est = fit_precision(
        panel, a.method == "glasso" ? grmkit::Method::glasso : grmkit::Method::concord,
        a, &note);
    payload = grmkit::to_json(est);
    if (!note.empty()) summary += note + "\n";
    summary += "lambda: " + std::to_string(est.lambda) + "\n";
    summary += "iterations: " + std::to_string(est.iterations) + "\n";
    summary += "kkt_residual: " + std::to_string(est.kkt_residual) + "\n";
    summary += "zero_entries: " + std::to_string(grmkit::zero_count(est.omega)) + "\n";
  } else if (a.method == "pca") {
    const auto model = grmkit::fit_pca(panel, a.k);
    payload = grmkit::to_json(model);
    summary += "k: " + std::to_string(a.k) + "\n";
  } else if (a.method == "exogenous") {
    if (a.factors_path.empty()) throw UsageError("method exogenous needs --factors");
    const auto factors = load_factors_for(panel, a.factors_path);
    const auto model = grmkit::fit_exogenous(panel, factors);
    payload = grmkit::to_json(model);
    summary += "k: " + std::to_string(model.k) + "\n";
  } else if (a.method == "spatial" || a.method == "mixed") {
    if (a.factors_path.empty())
      throw UsageError("method " + a.method + " needs --factors");
    const auto factors = load_factors_for(panel, a.factors_path);
    grmkit::InteractionWeights weights;
    if (a.method == "spatial") {
      if (a.distances_path.empty())
        throw UsageError("method spatial needs --distances");
      auto dist = grmkit::load_distances(a.distances_path);
      grmkit::require(dist.asset_ids == panel.asset_ids, grmkit::errc::misalignment,
                      "distance matrix assets do not match the panel");
      weights = grmkit::spatial_weights(dist);
    } else {
      grmkit::PrecisionEstimate omega;
      if (!a.weights_model.empty()) {
        omega = grmkit::precision_from_json(
            grmkit::load_json(a.weights_model).at("model"));
      } else {
        std::string note;
        omega = fit_precision(panel,
                              a.weights_method == "concord"
                                  ? grmkit::Method::concord
                                  : grmkit::Method::glasso,
                              a, &note);
        if (!note.empty()) summary += note + "\n";
      }
      weights = grmkit::grm_weights(grmkit::build_grm(omega));
    }
    const auto model = grmkit::fit_mixed(panel, factors, weights,
                                         {a.bounds[0], a.bounds[1]}, a.grid_size);
    payload = grmkit::to_json(model);
    summary += "rho: " + std::to_string(model.rho) + "\n";
    summary += "objective: " + std::to_string(model.objective_value) + "\n";
  } else {
    throw UsageError("unknown fit method '" + a.method + "'");
  }

  grmkit::save_json(wrap(fit_args_config(a), std::move(payload)),
                    a.out_dir + "/model.json");
  std::ofstream sum(a.out_dir + "/summary.txt");
  sum << summary;
  std::cout << summary;
  return 0;
}

struct EvalArgs {
  std::vector<std::string> models;
  std::string input, factors_path, out_dir = ".", split_date;
};

struct LoadedModel {
  std::string label;
  grmkit::Predictor predictor;
  long kappa = 0;
};

LoadedModel instantiate_model(const Json& wrapper, const grmkit::ReturnsPanel& oos,
                              const std::optional<grmkit::FactorPanel>& factors) {
  const Json& m = wrapper.at("model");
  const std::string type = m.at("type").get<std::string>();
  LoadedModel out;
  const Index p = oos.p();
  if (type == "precision_estimate") {
    const auto est = grmkit::precision_from_json(m);
    const auto grm = grmkit::build_grm(est);
    out.label = "grm_" + grmkit::method_name(est.method);
    out.kappa = grmkit::count_parameters(
        {grmkit::ModelKind::grm, p, 0, grmkit::zero_count(est.omega)});
    out.predictor = [grm](const grmkit::ReturnsPanel& panel) {
      return grmkit::predict(grm, panel);
    };
  } else if (type == "factor_model") {
    const auto model = grmkit::factor_from_json(m);
    const bool exogenous = model.kind == grmkit::FactorKind::exogenous;
    out.label = (exogenous ? "exogenous_" : "pca_") + std::to_string(model.k);
    out.kappa = grmkit::count_parameters(
        {exogenous ? grmkit::ModelKind::exogenous_factor
                   : grmkit::ModelKind::pca_factor,
         p, model.k, 0});
    if (exogenous && !factors)
      throw UsageError("evaluating an exogenous model needs --factors");
    out.predictor = [model, factors](const grmkit::ReturnsPanel& panel) {
      return grmkit::predict_factor(model, panel,
                                    factors ? &*factors : nullptr);
    };
  } else if (type == "mixed_model") {
    const auto model = grmkit::mixed_from_json(m);
    if (!factors) throw UsageError("evaluating a mixed model needs --factors");
    const bool spatial = model.weights.source == grmkit::WeightSource::spatial;
    const Index k = model.B.cols();
    out.label = (spatial ? "spatial_" : "mixed_grm_") + std::to_string(k);
    // for GRM weights, g(omega) equals the zero count of W once the p
    // structural zeros on the diagonal are set aside
    const long g = spatial ? 0 : grmkit::zero_count(model.weights.W) - p;
    out.kappa = grmkit::count_parameters(
        {spatial ? grmkit::ModelKind::spatial_mixed : grmkit::ModelKind::grm_mixed,
         p, k, g});
    const auto f = *factors;
    out.predictor = [model, f](const grmkit::ReturnsPanel& panel) {
      return grmkit::predict_mixed(model, panel, f);
    };
  } else {
    grmkit::fail(grmkit::errc::unknown_kind, "cannot evaluate model type " + type);
  }
  return out;
}

int cmd_eval(const EvalArgs& a) {
  const auto oos = load_panel(a.input, a.split_date, "out");
  std::optional<grmkit::FactorPanel> factors;
  if (!a.factors_path.empty()) factors = load_factors_for(oos, a.factors_path);
  ensure_out_dir(a.out_dir);

  std::vector<grmkit::EvalReport> reports;
  for (const auto& path : a.models) {
    const Json wrapper = grmkit::load_json(path);
    auto model = instantiate_model(wrapper, oos, factors);
    const auto predicted = model.predictor(oos);
    const auto r = grmkit::rmse(predicted, oos);
    grmkit::EvalReport report;
    report.model_label = model.label;
    report.rmse = r.rmse;
    report.rmse_pct = r.rmse_pct;
    report.bic = grmkit::bic(predicted, oos, model.kappa);
    report.r2_mean = grmkit::r2_mean(predicted, oos);
    report.kappa = model.kappa;
    report.p = oos.p();
    report.n_O = oos.n();
    reports.push_back(std::move(report));
  }
  std::sort(reports.begin(), reports.end(),
            [](const auto& x, const auto& y) { return x.model_label < y.model_label; });

  std::ofstream csv(a.out_dir + "/report.csv");
  csv << grmkit::eval_csv_header() << "\n";
  for (const auto& r : reports) csv << grmkit::eval_csv_row(r) << "\n";

  Json config;
  config["command"] = "eval";
  config["input"] = a.input;
  config["factors"] = a.factors_path;
  config["models"] = a.models;
  config["split_date"] = a.split_date;
  config["oos_centering"] = "own_mean";
  Json rows = Json::array();
  for (const auto& r : reports) rows.push_back(grmkit::to_json(r));
  grmkit::save_json(wrap(std::move(config), std::move(rows)),
                    a.out_dir + "/report.json");
  for (const auto& r : reports)
    std::cout << grmkit::eval_csv_row(r) << "\n";
  return 0;
}

grmkit::PrecisionEstimate load_precision_model(const std::string& path) {
  return grmkit::precision_from_json(grmkit::load_json(path).at("model"));
}

grmkit::GraphSource source_of(const grmkit::PrecisionEstimate& est) {
  switch (est.method) {
    case grmkit::Method::glasso: return grmkit::GraphSource::glasso;
    case grmkit::Method::concord: return grmkit::GraphSource::concord;
    default: return grmkit::GraphSource::pca_threshold;
  }
}

int cmd_graph(const std::string& model_path, const std::string& format,
              const std::string& out_path, int with_communities,
              int walk_length, const std::string& sectors_path) {
  const auto est = load_precision_model(model_path);
  const auto graph = grmkit::graph_from_precision(est, source_of(est));
  std::optional<grmkit::CommunityPartition> partition;
  if (with_communities > 0)
    partition = grmkit::walktrap(graph, walk_length, with_communities);
  std::optional<grmkit::SectorMap> sectors;
  if (!sectors_path.empty()) sectors = grmkit::load_sectors(sectors_path);

  grmkit::GraphFormat fmt;
  if (format == "graphml")
    fmt = grmkit::GraphFormat::graphml;
  else if (format == "dot")
    fmt = grmkit::GraphFormat::dot;
  else if (format == "json")
    fmt = grmkit::GraphFormat::json;
  else
    throw UsageError("unknown graph format '" + format + "'");
  grmkit::export_graph(graph, out_path, fmt,
                       partition ? &*partition : nullptr,
                       sectors ? &*sectors : nullptr);
  std::cout << "wrote " << out_path << " (" << graph.edges.size() << " edges)\n";
  return 0;
}

int cmd_communities(const std::string& model_path, int k, int walk_length,
                    const std::string& sectors_path, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const auto est = load_precision_model(model_path);
  const auto graph = grmkit::graph_from_precision(est, source_of(est));
  const auto partition = grmkit::walktrap(graph, walk_length, k);

  std::ofstream labels(out_dir + "/communities.csv");
  labels << "symbol,community\n";
  for (Index v = 0; v < graph.vertex_count(); ++v)
    labels << graph.asset_ids[v] << "," << partition.labels[v] << "\n";

  const auto community_ratio =
      grmkit::ratio_matrix(graph, grmkit::group_by_communities(partition));
  Json payload;
  payload["communities"] = partition.k;
  payload["requested_k"] = k;
  payload["walk_length"] = walk_length;
  payload["ratio_communities"] = Json{
      {"labels", community_ratio.group_labels},
      {"phi", grmkit::detail::matrix_to_json(community_ratio.phi)},
      {"phi_scaled", grmkit::detail::matrix_to_json(community_ratio.phi_scaled)}};

  if (!sectors_path.empty()) {
    const auto sectors = grmkit::load_sectors(sectors_path);
    const auto grouping = grmkit::group_by_sectors(graph, sectors);
    const auto sector_ratio = grmkit::ratio_matrix(graph, grouping);
    payload["ratio_sectors"] = Json{
        {"labels", sector_ratio.group_labels},
        {"phi", grmkit::detail::matrix_to_json(sector_ratio.phi)},
        {"phi_scaled", grmkit::detail::matrix_to_json(sector_ratio.phi_scaled)}};
    // sector x community stock counts
    std::map<std::string, std::vector<int>> counts;
    for (Index v = 0; v < graph.vertex_count(); ++v) {
      auto& row = counts[grouping.labels[grouping.assignment[v]]];
      row.resize(partition.k, 0);
      row[partition.labels[v] - 1] += 1;
    }
    std::ofstream table(out_dir + "/sector_community_counts.csv");
    table << "sector";
    for (int c = 1; c <= partition.k; ++c) table << ",community_" << c;
    table << "\n";
    for (const auto& [sector, row] : counts) {
      table << sector;
      for (int c = 0; c < partition.k; ++c)
        table << "," << (c < static_cast<int>(row.size()) ? row[c] : 0);
      table << "\n";
    }
  }

  Json config;
  config["command"] = "communities";
  config["model"] = model_path;
  config["k"] = k;
  config["walk_length"] = walk_length;
  config["sectors"] = sectors_path;
  grmkit::save_json(wrap(std::move(config), std::move(payload)),
                    out_dir + "/communities.json");
  std::cout << "detected " << partition.k << " communities\n";
  return 0;
}

int cmd_beta(const std::string& model_path, const std::string& input,
             const std::string& factors_path, const std::string& split_date,
             Index pca_k, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const auto panel = load_panel(input, split_date, "in");
  const auto est = load_precision_model(model_path);
  grmkit::require(est.asset_ids == panel.asset_ids, grmkit::errc::misalignment,
                  "model assets do not match the panel");

  const auto implied =
      grmkit::implied_factors(est, 1, grmkit::BetaNormalization::mean_one);
  const auto implied_beta =
      grmkit::make_beta(est.asset_ids, implied.B_imp.col(0),
                        grmkit::BetaNorm::mean_one,
                        "implied_" + grmkit::method_name(est.method));

  std::vector<grmkit::BetaVector> betas = {implied_beta};
  const auto pca_model = grmkit::fit_pca(panel, pca_k);
  betas.push_back(grmkit::make_beta(panel.asset_ids, pca_model.B.col(0),
                                    grmkit::BetaNorm::mean_one, "pca"));
  if (!factors_path.empty()) {
    const auto factors = load_factors_for(panel, factors_path);
    const auto exo = grmkit::fit_exogenous(panel, factors);
    betas.push_back(grmkit::make_beta(panel.asset_ids, exo.B.col(0),
                                      grmkit::BetaNorm::mean_one, "exogenous"));
  }

  Json payload;
  Json angle_rows = Json::array();
  for (std::size_t i = 0; i < betas.size(); ++i)
    for (std::size_t j = i + 1; j < betas.size(); ++j)
      angle_rows.push_back(Json{{"a", betas[i].source},
                                {"b", betas[j].source},
                                {"degrees", grmkit::angle_degrees(betas[i], betas[j])}});
  payload["angles"] = std::move(angle_rows);
  Json dispersion_rows = Json::array();
  for (const auto& b : betas)
    dispersion_rows.push_back(Json{{"beta", b.source},
                                   {"dispersion", grmkit::dispersion(b)}});
  payload["dispersions"] = std::move(dispersion_rows);
  Json vol_rows = Json::array();
  for (const auto& b : betas)
    vol_rows.push_back(Json{
        {"beta", b.source},
        {"annualized_vol_pct", grmkit::annualized_vol_projected(b, panel.values)}});
  payload["annualized_vols"] = std::move(vol_rows);
  const auto diag = grmkit::beta_diagnostics(implied_beta);
  payload["implied_diagnostics"] = Json{
      {"fraction_positive", diag.fraction_positive},
      {"fraction_within_band", diag.fraction_within_band},
      {"band", Json::array({0.5, 1.5})}};
  payload["frobenius_weight"] = est.frobenius_weight;

  Json config;
  config["command"] = "beta";
  config["model"] = model_path;
  config["input"] = input;
  config["factors"] = factors_path;
  config["split_date"] = split_date;
  config["pca_k"] = pca_k;
  grmkit::save_json(wrap(std::move(config), std::move(payload)),
                    out_dir + "/beta.json");
  std::cout << "implied beta positive fraction: " << diag.fraction_positive << "\n";
  return 0;
}

int cmd_backtest(const std::string& input, const std::string& recipe_name,
                 Index window, Index step, Index k, double lambda, int cv_folds,
                 unsigned threads, const std::string& out_path) {
  const auto panel = grmkit::center(grmkit::load_returns(input));
  grmkit::Recipe recipe;
  if (recipe_name == "grm") {
    recipe = [lambda, cv_folds, threads](const grmkit::ReturnsPanel& in) {
      const auto cov = grmkit::sample_covariance(in, grmkit::Divisor::n);
      double lam = lambda;
      if (cv_folds > 0) {
        const auto grid = grmkit::default_lambda_grid(cov, 10);
        lam = grmkit::cross_validate(in, grmkit::Method::glasso, grid, cv_folds,
                                     {}, 0.0, grmkit::effective_threads(threads))
                  .best_lambda;
      } else if (lam < 0.0) {
        throw UsageError("recipe grm needs --lambda or --cv");
      }
      const auto grm = grmkit::build_grm(grmkit::glasso(cov, lam));
      return grmkit::Predictor([grm](const grmkit::ReturnsPanel& out) {
        return grmkit::predict(grm, out);
      });
    };
  } else if (recipe_name == "pca") {
    recipe = [k](const grmkit::ReturnsPanel& in) {
      const auto model = grmkit::fit_pca(in, k);
      return grmkit::Predictor([model](const grmkit::ReturnsPanel& out) {
        return grmkit::predict_factor(model, out);
      });
    };
  } else {
    throw UsageError("unknown recipe '" + recipe_name + "'");
  }

  const auto results = grmkit::rolling_backtest(panel, recipe, window, step);
  std::ofstream out(out_path);
  grmkit::require(out.good(), grmkit::errc::io_failure, "cannot write " + out_path);
  out << "period,r2_mean\n";
  out.precision(10);
  for (const auto& r : results) out << r.period << "," << r.r2 << "\n";
  std::cout << "backtest periods: " << results.size() << "\n";
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_path,
              const std::string& truth_path, std::optional<std::uint64_t> seed) {
  auto spec = grmkit::synthetic_spec_from_json(grmkit::load_json(spec_path));
  if (seed) spec.seed = *seed;
  const auto market = grmkit::generate(spec);
  grmkit::save_returns(market.panel, out_path);
  if (!truth_path.empty()) {
    Json truth;
    truth["spec"] = grmkit::to_json(spec);
    if (market.truth.omega)
      truth["omega"] = grmkit::detail::matrix_to_json(*market.truth.omega);
    if (market.truth.B) truth["B"] = grmkit::detail::matrix_to_json(*market.truth.B);
    if (market.truth.V) truth["V"] = grmkit::detail::matrix_to_json(*market.truth.V);
    if (market.truth.delta)
      truth["delta"] = grmkit::detail::vector_to_json(*market.truth.delta);
    grmkit::save_json(truth, truth_path);
  }
  std::cout << "wrote " << out_path << " (p=" << spec.p << ", n=" << spec.n
            << ", seed=" << spec.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphical representation model toolkit"};
  app.require_subcommand(1);
  app.set_config("--config");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a returns panel");
  fit_cmd->add_option("--input", fit.input, "returns CSV (date,SYM1,...)")->required();
  fit_cmd->add_option("--method", fit.method,
                      "glasso|concord|pca|exogenous|spatial|mixed")->required();
  fit_cmd->add_option("--out", fit.out_dir, "output directory");
  fit_cmd->add_option("--lambda", fit.lambda, "l1 penalty");
  fit_cmd->add_option("--cv", fit.cv_folds, "cross-validation folds");
  fit_cmd->add_option("--frobenius-weight", fit.frobenius_weight,
                      "CONCORD Frobenius augmentation weight");
  fit_cmd->add_option("--tol", fit.tol, "solver tolerance");
  fit_cmd->add_option("--max-iter", fit.max_iter, "solver sweep cap");
  fit_cmd->add_option("--k", fit.k, "factor count (pca)");
  fit_cmd->add_option("--factors", fit.factors_path, "factor CSV");
  fit_cmd->add_option("--distances", fit.distances_path, "distance CSV (spatial)");
  fit_cmd->add_option("--weights-model", fit.weights_model,
                      "fitted precision model.json for mixed weights");
  fit_cmd->add_option("--weights-method", fit.weights_method,
                      "glasso|concord for inline mixed weights");
  fit_cmd->add_option("--split-date", fit.split_date,
                      "keep only observations up to this date");
  fit_cmd->add_option("--bounds", fit.bounds, "rho search bounds")->expected(2);
  fit_cmd->add_option("--grid-size", fit.grid_size, "rho grid points");
  fit_cmd->add_option("--threads", fit.threads, "worker cap");
  fit_cmd->add_option("--seed", fit.seed, "rng seed");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score fitted models out of sample");
  eval_cmd->add_option("--model", eval.models, "model.json (repeatable)")->required();
  eval_cmd->add_option("--input", eval.input, "out-of-sample returns CSV")->required();
  eval_cmd->add_option("--factors", eval.factors_path, "factor CSV");
  eval_cmd->add_option("--out", eval.out_dir, "output directory");
  eval_cmd->add_option("--split-date", eval.split_date,
                       "keep only observations after this date");

  std::string graph_model, graph_format = "graphml", graph_out = "graph.graphml";
  std::string graph_sectors;
  int graph_communities = 0, graph_walk = 4;
  auto* graph_cmd = app.add_subcommand("graph", "export the partial correlation graph");
  graph_cmd->add_option("--model", graph_model, "precision model.json")->required();
  graph_cmd->add_option("--format", graph_format, "graphml|dot|json");
  graph_cmd->add_option("--out", graph_out, "output file");
  graph_cmd->add_option("--with-communities", graph_communities,
                        "attach walktrap labels cut to this many communities");
  graph_cmd->add_option("--walk-length", graph_walk, "random walk length");
  graph_cmd->add_option("--sectors", graph_sectors, "sector CSV for node labels");

  std::string comm_model, comm_sectors, comm_out = ".";
  int comm_k = 11, comm_walk = 4;
  auto* comm_cmd = app.add_subcommand("communities", "walktrap community detection");
  comm_cmd->add_option("--model", comm_model, "precision model.json")->required();
  comm_cmd->add_option("--k", comm_k, "community count to cut to");
  comm_cmd->add_option("--walk-length", comm_walk, "random walk length");
  comm_cmd->add_option("--sectors", comm_sectors, "sector CSV for ratio matrices");
  comm_cmd->add_option("--out", comm_out, "output directory");

  std::string beta_model, beta_input, beta_factors, beta_split, beta_out = ".";
  Index beta_k = 3;
  auto* beta_cmd = app.add_subcommand("beta", "implied beta diagnostics");
  beta_cmd->add_option("--model", beta_model, "precision model.json")->required();
  beta_cmd->add_option("--input", beta_input, "in-sample returns CSV")->required();
  beta_cmd->add_option("--factors", beta_factors, "factor CSV");
  beta_cmd->add_option("--split-date", beta_split, "keep observations up to date");
  beta_cmd->add_option("--k", beta_k, "PCA factor count for the reference beta");
  beta_cmd->add_option("--out", beta_out, "output directory");

  std::string bt_input, bt_recipe = "grm", bt_out = "backtest.csv";
  Index bt_window = 61, bt_step = 61, bt_k = 5;
  double bt_lambda = -1.0;
  int bt_cv = 0;
  unsigned bt_threads = 0;
  auto* bt_cmd = app.add_subcommand("backtest", "rolling re-calibrated R^2");
  bt_cmd->add_option("--input", bt_input, "returns CSV")->required();
  bt_cmd->add_option("--recipe", bt_recipe, "grm|pca");
  bt_cmd->add_option("--window", bt_window, "in-sample window columns");
  bt_cmd->add_option("--step", bt_step, "out-of-sample step columns");
  bt_cmd->add_option("--k", bt_k, "PCA factor count");
  bt_cmd->add_option("--lambda", bt_lambda, "glasso penalty");
  bt_cmd->add_option("--cv", bt_cv, "cross-validation folds per window");
  bt_cmd->add_option("--threads", bt_threads, "worker cap");
  bt_cmd->add_option("--out", bt_out, "output CSV");

  std::string synth_spec, synth_out = "data.csv", synth_truth;
  std::uint64_t synth_seed = kDefaultSeed;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic market");
  synth_cmd->add_option("--spec", synth_spec, "SyntheticSpec JSON")->required();
  synth_cmd->add_option("--out", synth_out, "returns CSV to write");
  synth_cmd->add_option("--truth-out", synth_truth, "ground truth JSON to write");
  auto* seed_opt = synth_cmd->add_option("--seed", synth_seed,
                                         "override the spec seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (graph_cmd->parsed())
      return cmd_graph(graph_model, graph_format, graph_out, graph_communities,
                       graph_walk, graph_sectors);
    if (comm_cmd->parsed())
      return cmd_communities(comm_model, comm_k, comm_walk, comm_sectors, comm_out);
    if (beta_cmd->parsed())
      return cmd_beta(beta_model, beta_input, beta_factors, beta_split, beta_k,
                      beta_out);
    if (bt_cmd->parsed())
      return cmd_backtest(bt_input, bt_recipe, bt_window, bt_step, bt_k,
                          bt_lambda, bt_cv, bt_threads, bt_out);
    if (synth_cmd->parsed())
      return cmd_synth(synth_spec, synth_out, synth_truth,
                       seed_opt->count() ? std::optional<std::uint64_t>(synth_seed)
                                         : std::nullopt);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const grmkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
