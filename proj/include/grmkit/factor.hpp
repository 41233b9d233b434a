#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "grmkit/covariance.hpp"
#include "grmkit/eigs.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/precision.hpp"

namespace grmkit {

enum class FactorKind { exogenous, pca };

struct FactorModel {
  FactorKind kind = FactorKind::exogenous;
  std::vector<std::string> asset_ids;
  Matrix B;  // p x k exposures; orthonormal columns for the pca kind
  Index k = 0;
  std::string fitted_on;  // sample annotation, e.g. "n=61 [2008-01-02..2008-03-31]"
};

enum class BetaNormalization { unit, mean_one };

struct ImpliedFactorMatrix {
  std::vector<std::string> asset_ids;
  Matrix B_imp;        // p x k leading eigenvectors of omega^-1
  Vector eigenvalues;  // strictly descending, positive
  BetaNormalization normalization = BetaNormalization::unit;
};

namespace detail {

inline std::string sample_tag(const ReturnsPanel& panel) {
  std::string tag = "n=" + std::to_string(panel.n());
  if (!panel.timestamps.empty())
    tag += " [" + panel.timestamps.front() + ".." + panel.timestamps.back() + "]";
  return tag;
}

inline void check_alignment(const ReturnsPanel& panel, const FactorPanel& factors) {
  require(panel.n() == factors.n() && panel.timestamps == factors.timestamps,
          errc::misalignment,
          "returns and factor panels are not aligned on timestamps");
}

}  // namespace detail

// Least-squares exposures B = Y X^T (X X^T)^-1 on time-aligned centered panels.
inline FactorModel fit_exogenous(const ReturnsPanel& panel,
                                 const FactorPanel& factors) {
  detail::check_alignment(panel, factors);
  const Matrix& x = factors.values;
  const Matrix gram = x * x.transpose();
  Eigen::LLT<Matrix> llt(gram);
  require(llt.info() == Eigen::Success && llt.rcond() > 1e-12,
          errc::singular_factor_gram, "factor Gram matrix X X^T is singular");

  FactorModel model;
  model.kind = FactorKind::exogenous;
  model.asset_ids = panel.asset_ids;
  model.k = factors.k();
  model.B = llt.solve(x * panel.values.transpose()).transpose();
  model.fitted_on = detail::sample_tag(panel);
  return model;
}

// Top-k eigenvectors of the n-1 divisor sample covariance, descending order.
inline FactorModel fit_pca(const ReturnsPanel& panel, Index k) {
  const Index p = panel.p();
  require(k >= 1 && k <= p, errc::invalid_argument,
          "factor count k must satisfy 1 <= k <= p");
  const auto cov = sample_covariance(panel, Divisor::n_minus_1);
  const Index want = std::min(k + 1, p);
  const auto eig = top_eigenpairs(cov.S, want, 1e-10, 10000, k);
  for (Index i = 0; i + 1 < want; ++i)
    require(eig.eigenvalues[i] - eig.eigenvalues[i + 1] >= 1e-12,
            errc::tied_eigenvalues,
            "eigenvalue gap below 1e-12 at cut " + std::to_string(i + 1));

  FactorModel model;
  model.kind = FactorKind::pca;
  model.asset_ids = panel.asset_ids;
  model.k = k;
  model.B = eig.vectors.leftCols(k);
  model.fitted_on = detail::sample_tag(panel);
  return model;
}

// Exogenous: Yhat = B X_O. PCA: recover Xhat = (B^T B)^-1 B^T Y_O, then B Xhat.
inline ReturnsPanel predict_factor(const FactorModel& model,
                                   const ReturnsPanel& out_panel,
                                   const FactorPanel* out_factors = nullptr) {
  require(out_panel.asset_ids == model.asset_ids, errc::dimension_mismatch,
          "panel asset ids do not match the model");
  ReturnsPanel out;
  out.asset_ids = out_panel.asset_ids;
  out.timestamps = out_panel.timestamps;
  out.centered = false;
  if (model.kind == FactorKind::exogenous) {
    require(out_factors != nullptr, errc::missing_factors,
            "exogenous prediction needs out-of-sample factor returns");
    detail::check_alignment(out_panel, *out_factors);
    out.values = model.B * out_factors->values;
  } else {
    const Matrix gram = model.B.transpose() * model.B;
    const Matrix x_hat =
        gram.llt().solve(model.B.transpose() * out_panel.values);
    out.values = model.B * x_hat;
  }
  return out;
}

// Implied factor matrix: leading eigenvectors of omega^-1 in descending
// eigenvalue order. mean_one rescales each column to average exactly 1.
inline ImpliedFactorMatrix implied_factors(const PrecisionEstimate& omega,
                                           Index k,
                                           BetaNormalization normalization) {
  const Index p = omega.omega.rows();
  require(k >= 1 && k <= p, errc::invalid_argument,
          "implied factor count k must satisfy 1 <= k <= p");
  Eigen::PartialPivLU<Matrix> lu(omega.omega);
  require(lu.rcond() > 1e-12, errc::singular_omega,
          "omega is numerically singular, cannot invert");
  Matrix sigma = lu.solve(Matrix::Identity(p, p));
  sigma = ((sigma + sigma.transpose()) * 0.5).eval();

  const Index want = std::min(k + 1, p);
  const auto eig = top_eigenpairs(sigma, want, 1e-10, 10000, k);
  for (Index i = 0; i + 1 < want; ++i)
    require(eig.eigenvalues[i] - eig.eigenvalues[i + 1] > 1e-10,
            errc::tied_eigenvalues,
            "eigengap below 1e-10 at cut " + std::to_string(i + 1));
  // A non-PD omega (possible for CONCORD) can push leading eigenvalues of
  // omega^-1 negative; the implied factors are meaningless there.
  require(eig.eigenvalues[std::min(k, want) - 1] > 0.0, errc::singular_omega,
          "omega^-1 lacks k positive leading eigenvalues");

  ImpliedFactorMatrix implied;
  implied.asset_ids = omega.asset_ids;
  implied.eigenvalues = eig.eigenvalues.head(k);
  implied.B_imp = eig.vectors.leftCols(k);
  implied.normalization = normalization;
  if (normalization == BetaNormalization::mean_one) {
    for (Index c = 0; c < k; ++c) {
      const double mean = implied.B_imp.col(c).mean();
      // threshold sits above the eigensolver tolerance so a mean that is
      // zero up to iteration error is treated as zero
      require(std::abs(mean) > 1e-8, errc::zero_mean_eigenvector,
              "cannot mean-one normalize eigenvector " + std::to_string(c + 1) +
                  ": mean is zero");
      implied.B_imp.col(c) /= mean;
    }
  }
  return implied;
}

}  // namespace grmkit
