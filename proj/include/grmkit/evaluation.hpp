#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"

namespace grmkit {

struct EvalReport {
  std::string model_label;
  double rmse = 0.0;
  double rmse_pct = 0.0;  // percent
  double bic = 0.0;
  double r2_mean = 0.0;
  long kappa = 0;
  Index n_O = 0;
  Index p = 0;
};

struct RmseResult {
  double rmse = 0.0;
  double rmse_pct = 0.0;
};

inline void check_shapes(const ReturnsPanel& predicted,
                         const ReturnsPanel& actual) {
  require(predicted.p() == actual.p() && predicted.n() == actual.n(),
          errc::shape_mismatch, "predicted and actual panels differ in shape");
}

// RMSE = sqrt(||Yhat - Y||_F^2 / (p n)); the percentage form divides by the
// same norm of Y itself.
inline RmseResult rmse(const ReturnsPanel& predicted, const ReturnsPanel& actual) {
  check_shapes(predicted, actual);
  const double cells =
      static_cast<double>(actual.p()) * static_cast<double>(actual.n());
  RmseResult out;
  out.rmse = std::sqrt((predicted.values - actual.values).squaredNorm() / cells);
  const double base = std::sqrt(actual.values.squaredNorm() / cells);
  if (base > 0.0)
    out.rmse_pct = out.rmse / base * 100.0;
  else
    out.rmse_pct = out.rmse > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return out;
}

enum class ModelKind { exogenous_factor, pca_factor, spatial_mixed, grm_mixed, grm };

struct ModelDescriptor {
  ModelKind kind = ModelKind::grm;
  Index p = 0;
  Index k = 0;          // factor count where applicable
  long zero_count = 0;  // g(omega), all zero cells of the symmetric matrix
};

// Free-parameter counts:
//   exogenous/pca k-factor: pk
//   spatial mixed:          1 + pk
//   grm mixed:              1 + pk + p(p+1)/2 - g/2
//   grm:                    p(p+1)/2 - g/2
inline long count_parameters(const ModelDescriptor& d) {
  const long p = static_cast<long>(d.p);
  const long k = static_cast<long>(d.k);
  switch (d.kind) {
    case ModelKind::exogenous_factor:
    case ModelKind::pca_factor:
      return p * k;
    case ModelKind::spatial_mixed:
      return 1 + p * k;
    case ModelKind::grm_mixed:
      return 1 + p * k + (p * (p + 1) - d.zero_count) / 2;
    case ModelKind::grm:
      return (p * (p + 1) - d.zero_count) / 2;
  }
  fail(errc::unknown_kind, "unrecognized model kind");
}

// BIC = n_O sum_i log(RSS_i) + kappa log(n_O), RSS_i = mean squared residual
// of asset i over the out-of-sample columns.
inline double bic(const ReturnsPanel& predicted, const ReturnsPanel& actual,
                  long kappa) {
  check_shapes(predicted, actual);
  const double n = static_cast<double>(actual.n());
  double log_sum = 0.0;
  for (Index i = 0; i < actual.p(); ++i) {
    const double rss =
        (predicted.values.row(i) - actual.values.row(i)).squaredNorm() / n;
    require(rss > 0.0, errc::zero_residual,
            "asset " + std::to_string(i) + " has zero residual sum of squares");
    log_sum += std::log(rss);
  }
  return n * log_sum + static_cast<double>(kappa) * std::log(n);
}

// Mean over assets of R^2_i = 1 - SS_res_i / SS_tot_i, SS_tot around the
// asset's own out-of-sample mean.
inline double r2_mean(const ReturnsPanel& predicted, const ReturnsPanel& actual) {
  check_shapes(predicted, actual);
  double total = 0.0;
  for (Index i = 0; i < actual.p(); ++i) {
    const double mean = actual.values.row(i).mean();
    const double ss_tot =
        (actual.values.row(i).array() - mean).square().sum();
    require(ss_tot > 0.0, errc::constant_row,
            "asset " + std::to_string(i) + " is constant over the sample");
    const double ss_res =
        (predicted.values.row(i) - actual.values.row(i)).squaredNorm();
    total += 1.0 - ss_res / ss_tot;
  }
  return total / static_cast<double>(actual.p());
}

// A recipe maps an in-sample panel to a predictor applied to out-of-sample
// panels of the same assets.
using Predictor = std::function<ReturnsPanel(const ReturnsPanel&)>;
using Recipe = std::function<Predictor(const ReturnsPanel&)>;

struct BacktestPeriod {
  std::string period;  // first out-of-sample timestamp
  double r2 = 0.0;
};

// Non-overlapping rolling evaluation: fit on [t, t+window), score r2_mean on
// [t+window, t+window+step), advance by step. Both windows are centered with
// their own means before use.
inline std::vector<BacktestPeriod> rolling_backtest(const ReturnsPanel& panel,
                                                    const Recipe& recipe,
                                                    Index window, Index step) {
  require(window >= 2 && step >= 1, errc::invalid_argument,
          "window must be >= 2 and step >= 1");
  require(window + step <= panel.n(), errc::insufficient_history,
          "panel too short: need window + step <= n");
  std::vector<BacktestPeriod> out;
  for (Index t = 0; t + window + step <= panel.n(); t += step) {
    const ReturnsPanel in_panel = center(slice_columns(panel, t, window));
    const ReturnsPanel out_panel = center(slice_columns(panel, t + window, step));
    const Predictor predictor = recipe(in_panel);
    const ReturnsPanel predicted = predictor(out_panel);
    out.push_back({out_panel.timestamps.front(), r2_mean(predicted, out_panel)});
  }
  return out;
}

}  // namespace grmkit
