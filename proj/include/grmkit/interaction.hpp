#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "grmkit/errors.hpp"
#include "grmkit/factor.hpp"
#include "grmkit/grm.hpp"
#include "grmkit/panel.hpp"

namespace grmkit {

enum class WeightSource { spatial, grm_A };

struct InteractionWeights {
  std::vector<std::string> asset_ids;
  Matrix W;  // zero diagonal; spatial rows sum to 1
  WeightSource source = WeightSource::spatial;
};

struct MixedModel {
  double rho = 0.0;
  Matrix B;  // p x k exposures
  InteractionWeights weights;
  std::pair<double, double> search_bounds{-2.0, 4.0};
  double objective_value = 0.0;
  std::vector<std::pair<double, double>> search_trace;  // (kappa, objective)
};

// W_ij = (s_i d_ij)^-1 with s_i = sum_{j != i} d_ij^-1; rows sum to one.
inline InteractionWeights spatial_weights(const DistanceMatrix& dist) {
  const Index p = dist.d.rows();
  InteractionWeights w;
  w.asset_ids = dist.asset_ids;
  w.source = WeightSource::spatial;
  w.W = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    double s = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (j == i) continue;
      require(dist.d(i, j) > 0.0, errc::zero_distance,
              "zero distance between distinct assets " + std::to_string(i) +
                  " and " + std::to_string(j));
      s += 1.0 / dist.d(i, j);
    }
    for (Index j = 0; j < p; ++j)
      if (j != i) w.W(i, j) = 1.0 / (s * dist.d(i, j));
  }
  return w;
}

inline InteractionWeights grm_weights(const GrmModel& grm) {
  InteractionWeights w;
  w.asset_ids = grm.asset_ids;
  w.W = grm.A;
  w.source = WeightSource::grm_A;
  return w;
}

namespace detail {

inline bool invertible_enough(const Matrix& m) {
  Eigen::PartialPivLU<Matrix> lu(m);
  return lu.rcond() > 1e-12;  // condition number below 1e12
}

}  // namespace detail

// Least-squares rho over a grid on [zeta, eta] restricted to kappa where
// I - kappa.W is numerically invertible, refined by golden section inside the
// best bracket. Objective: ||(I - kappa W) Y_I (I - X^T (X X^T)^-1 X)||_F^2,
// which is quadratic in kappa. Flat objectives resolve to rho = 0.
inline MixedModel fit_mixed(const ReturnsPanel& panel, const FactorPanel& factors,
                            const InteractionWeights& weights,
                            std::pair<double, double> bounds = {-2.0, 4.0},
                            int grid_size = 601) {
  detail::check_alignment(panel, factors);
  require(weights.W.rows() == panel.p(), errc::dimension_mismatch,
          "weight matrix dimension does not match the panel");
  const auto [zeta, eta] = bounds;
  require(std::isfinite(zeta) && std::isfinite(eta) && zeta <= eta,
          errc::invalid_argument, "bounds must be finite with zeta <= eta");
  require(grid_size >= 1, errc::invalid_argument, "grid_size must be >= 1");

  const Matrix& x = factors.values;
  const Matrix gram = x * x.transpose();
  Eigen::LLT<Matrix> llt(gram);
  require(llt.info() == Eigen::Success && llt.rcond() > 1e-12,
          errc::singular_factor_gram, "factor Gram matrix X X^T is singular");

  // R = Y (I - X^T (X X^T)^-1 X) does not depend on kappa, so the objective
  // reduces to a - 2 kappa b + kappa^2 c.
  const Matrix r = panel.values - (panel.values * x.transpose()) * llt.solve(x);
  const Matrix wr = weights.W * r;
  const double a = r.squaredNorm();
  const double b = (r.cwiseProduct(wr)).sum();
  const double c = wr.squaredNorm();
  const Index p = panel.p();
  const Matrix identity = Matrix::Identity(p, p);

  auto objective = [&](double kappa) { return a - 2.0 * kappa * b + kappa * kappa * c; };
  auto feasible = [&](double kappa) {
    return detail::invertible_enough(identity - kappa * weights.W);
  };

  MixedModel model;
  model.weights = weights;
  model.search_bounds = bounds;

  double best_obj = std::numeric_limits<double>::infinity();
  double worst_obj = -std::numeric_limits<double>::infinity();
  int best_idx = -1;
  std::vector<double> kappas(grid_size);
  for (int i = 0; i < grid_size; ++i)
    kappas[i] = grid_size == 1
                    ? zeta
                    : zeta + (eta - zeta) * static_cast<double>(i) / (grid_size - 1);
  for (int i = 0; i < grid_size; ++i) {
    if (!feasible(kappas[i])) continue;
    const double obj = objective(kappas[i]);
    model.search_trace.emplace_back(kappas[i], obj);
    if (obj < best_obj) {
      best_obj = obj;
      best_idx = i;
    }
    worst_obj = std::max(worst_obj, obj);
  }
  require(best_idx >= 0, errc::no_feasible_point,
          "no kappa in [zeta, eta] leaves I - kappa W invertible");

  const double flat_slack = 1e-12 * (1.0 + std::abs(best_obj));
  const bool flat = worst_obj - best_obj <= flat_slack;
  if (flat) {
    const double zero_k = std::clamp(0.0, zeta, eta);
    model.rho = feasible(zero_k) ? zero_k : kappas[best_idx];
    model.objective_value = objective(model.rho);
  } else {
    double rho = kappas[best_idx];
    double rho_obj = best_obj;
    // golden-section refinement inside the bracket around the grid argmin
    double lo = kappas[std::max(best_idx - 1, 0)];
    double hi = kappas[std::min(best_idx + 1, grid_size - 1)];
    if (hi > lo) {
      const double inv_phi = 0.6180339887498949;
      double x1 = hi - inv_phi * (hi - lo);
      double x2 = lo + inv_phi * (hi - lo);
      auto guarded = [&](double kappa) {
        return feasible(kappa) ? objective(kappa)
                               : std::numeric_limits<double>::infinity();
      };
      double f1 = guarded(x1);
      double f2 = guarded(x2);
      for (int it = 0; it < 80 && hi - lo > 1e-12 * (1.0 + std::abs(hi)); ++it) {
        if (f1 <= f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = guarded(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = guarded(x2);
        }
      }
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid) && objective(mid) <= rho_obj) {
        rho = mid;
        rho_obj = objective(mid);
      }
    }
    model.rho = rho;
    model.objective_value = rho_obj;
  }

  model.B = ((identity - model.rho * weights.W) * panel.values * x.transpose()) *
            llt.solve(Matrix::Identity(x.rows(), x.rows()));
  return model;
}

// Yhat_O = rho W Y_O + B X_O (the interaction term skips the own return by
// the zero diagonal of W).
inline ReturnsPanel predict_mixed(const MixedModel& model,
                                  const ReturnsPanel& out_panel,
                                  const FactorPanel& out_factors) {
  detail::check_alignment(out_panel, out_factors);
  require(model.weights.W.rows() == out_panel.p(), errc::misalignment,
          "weight matrix dimension does not match the panel");
  require(model.B.cols() == out_factors.k(), errc::misalignment,
          "factor count does not match the fitted exposures");
  ReturnsPanel out;
  out.asset_ids = out_panel.asset_ids;
  out.timestamps = out_panel.timestamps;
  out.centered = false;
  out.values = model.rho * (model.weights.W * out_panel.values) +
               model.B * out_factors.values;
  return out;
}

}  // namespace grmkit
