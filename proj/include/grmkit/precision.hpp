#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "grmkit/covariance.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/parallel.hpp"

namespace grmkit {

enum class Method { glasso, concord, pca_plugin, exact_inverse };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::glasso: return "glasso";
    case Method::concord: return "concord";
    case Method::pca_plugin: return "pca_plugin";
    case Method::exact_inverse: return "exact_inverse";
  }
  return "unknown";
}

struct PrecisionEstimate {
  std::vector<std::string> asset_ids;
  Matrix omega;  // p x p, symmetric, positive diagonal
  Method method = Method::exact_inverse;
  double lambda = 0.0;
  double frobenius_weight = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 500;
};

namespace detail {

inline double soft_threshold(double x, double thr) {
  if (x > thr) return x - thr;
  if (x < -thr) return x + thr;
  return 0.0;
}

inline void check_square_symmetric(const Matrix& s) {
  require(s.rows() == s.cols(), errc::dimension_mismatch,
          "covariance matrix must be square");
  require((s - s.transpose()).cwiseAbs().maxCoeff() <=
              1e-10 * std::max(1.0, s.cwiseAbs().maxCoeff()),
          errc::invalid_argument, "covariance matrix is not symmetric");
}

// Inverse of a symmetric matrix; falls back to LU when not positive definite.
inline std::optional<Matrix> symmetric_inverse(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-14)
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
  Eigen::PartialPivLU<Matrix> lu(m);
  if (lu.rcond() > 1e-14)
    return lu.solve(Matrix::Identity(m.rows(), m.cols()));
  return std::nullopt;
}

struct GlassoState {
  Matrix W;     // working covariance estimate
  Matrix Beta;  // column j holds the lasso coefficients of column j's subproblem
};

inline double glasso_kkt_residual(const Matrix& S, const Matrix& theta,
                                  const Matrix& sigma_hat, double lambda) {
  const Index p = S.rows();
  double r = 0.0;
  for (Index i = 0; i < p; ++i) {
    r = std::max(r, std::abs(S(i, i) + lambda - sigma_hat(i, i)));
    for (Index j = 0; j < i; ++j) {
      const double diff = S(i, j) - sigma_hat(i, j);
      if (theta(i, j) != 0.0)
        r = std::max(r, std::abs(diff + lambda * (theta(i, j) > 0 ? 1.0 : -1.0)));
      else
        r = std::max(r, std::max(0.0, std::abs(diff) - lambda));
    }
  }
  return r;
}

inline double glasso_objective(const Matrix& S, const Matrix& theta,
                               double lambda) {
  Eigen::LLT<Matrix> llt(theta);
  double logdet;
  if (llt.info() == Eigen::Success) {
    logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  } else {
    Eigen::PartialPivLU<Matrix> lu(theta);
    logdet = std::log(std::abs(lu.determinant()));
  }
  return -logdet + (S.cwiseProduct(theta)).sum() +
         lambda * theta.cwiseAbs().sum();
}

}  // namespace detail

// Graphical lasso: block coordinate descent over columns of the working
// covariance, lasso subproblems solved by coordinate descent. Convergence is
// declared on the max-norm KKT residual measured against the exact inverse of
// the assembled precision matrix.
inline PrecisionEstimate glasso(const CovarianceEstimate& cov, double lambda,
                                const SolverOptions& opts = {},
                                detail::GlassoState* state = nullptr) {
  require(lambda >= 0.0, errc::invalid_argument, "lambda must be nonnegative");
  detail::check_square_symmetric(cov.S);
  const Matrix& S = cov.S;
  const Index p = S.rows();

  PrecisionEstimate est;
  est.asset_ids = cov.asset_ids;
  est.method = Method::glasso;
  est.lambda = lambda;

  if (p == 1) {
    require(S(0, 0) + lambda > 0.0, errc::singular_input,
            "1x1 covariance plus lambda not positive");
    est.omega = Matrix::Constant(1, 1, 1.0 / (S(0, 0) + lambda));
    est.iterations = 1;
    est.converged = true;
    est.kkt_residual = 0.0;
    est.objective_trace.push_back(detail::glasso_objective(S, est.omega, lambda));
    return est;
  }

  if (lambda == 0.0) {
    Eigen::LLT<Matrix> llt(S);
    require(llt.info() == Eigen::Success && llt.rcond() > 1e-14,
            errc::singular_input,
            "lambda = 0 requires a positive definite covariance");
  }

  detail::GlassoState local;
  detail::GlassoState& st = state ? *state : local;
  if (st.W.rows() != p) {
    st.W = S;
    st.W.diagonal().array() += lambda;
    st.Beta = Matrix::Zero(p, p);
  } else {
    // warm start: keep off-diagonals, refresh the fixed diagonal
    st.W.diagonal() = S.diagonal().array() + lambda;
  }

  const double inner_tol = std::max(opts.tol * 1e-2, 1e-15);
  const int max_inner = 1000;
  Matrix theta = Matrix::Zero(p, p);
  double kkt = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < opts.max_iter; ++sweep) {
    for (Index j = 0; j < p; ++j) {
      Vector beta = st.Beta.col(j);
      beta[j] = 0.0;
      Vector u = st.W * beta;  // u_k = sum_l W(k,l) beta_l
      for (int pass = 0; pass < max_inner; ++pass) {
        double max_delta = 0.0;
        for (Index k = 0; k < p; ++k) {
          if (k == j) continue;
          const double grad = S(k, j) - (u[k] - st.W(k, k) * beta[k]);
          const double bk = detail::soft_threshold(grad, lambda) / st.W(k, k);
          const double delta = bk - beta[k];
          if (delta != 0.0) {
            beta[k] = bk;
            u += delta * st.W.col(k);
            max_delta = std::max(max_delta, std::abs(delta));
          }
        }
        if (max_delta <= inner_tol) break;
      }
      st.Beta.col(j) = beta;
      // w12 = W(-j,-j) beta(-j); row j of u carries the same product
      for (Index i = 0; i < p; ++i) {
        if (i == j) continue;
        st.W(i, j) = u[i];
        st.W(j, i) = u[i];
      }
    }

    // assemble the precision matrix from the column subproblems
    for (Index j = 0; j < p; ++j) {
      double quad = 0.0;
      for (Index i = 0; i < p; ++i)
        if (i != j) quad += st.W(i, j) * st.Beta(i, j);
      const double denom = st.W(j, j) - quad;
      require(denom > 0.0 && std::isfinite(denom), errc::not_converged,
              "glasso produced a non-positive residual variance");
      theta(j, j) = 1.0 / denom;
      for (Index i = 0; i < p; ++i)
        if (i != j) theta(i, j) = -st.Beta(i, j) * theta(j, j);
    }
    theta = ((theta + theta.transpose()) * 0.5).eval();

    const auto sigma_hat = detail::symmetric_inverse(theta);
    require(sigma_hat.has_value(), errc::not_converged,
            "glasso iterate is numerically singular");
    kkt = detail::glasso_kkt_residual(S, theta, *sigma_hat, lambda);
    est.objective_trace.push_back(detail::glasso_objective(S, theta, lambda));
    if (kkt <= opts.tol) {
      ++sweep;
      break;
    }
  }

  est.omega = theta;
  est.iterations = sweep;
  est.kkt_residual = kkt;
  est.converged = kkt <= opts.tol;
  require(est.converged, errc::not_converged,
          "glasso KKT residual " + std::to_string(kkt) + " > tol after " +
              std::to_string(sweep) + " sweeps");
  return est;
}

// CONCORD: cyclic coordinate-wise minimization of
//   -2 sum_i log(theta_ii) + tr(S Theta^2) + lambda ||Theta_offdiag||_1
//   + frobenius_weight ||Theta||_F^2
// Symmetric but not guaranteed positive definite.
inline PrecisionEstimate concord(const CovarianceEstimate& cov, double lambda,
                                 double frobenius_weight = 0.0,
                                 const SolverOptions& opts = {},
                                 const Matrix* warm = nullptr) {
  require(lambda >= 0.0, errc::invalid_argument, "lambda must be nonnegative");
  require(frobenius_weight >= 0.0, errc::invalid_argument,
          "frobenius_weight must be nonnegative");
  detail::check_square_symmetric(cov.S);
  const Matrix& S = cov.S;
  const Index p = S.rows();
  const double mu = frobenius_weight;

  PrecisionEstimate est;
  est.asset_ids = cov.asset_ids;
  est.method = Method::concord;
  est.lambda = lambda;
  est.frobenius_weight = mu;

  Matrix theta;
  if (warm && warm->rows() == p) {
    theta = *warm;
  } else {
    theta = Matrix::Zero(p, p);
    for (Index i = 0; i < p; ++i) {
      const double a = S(i, i) + mu;
      require(a > 0.0, errc::non_finite_objective,
              "objective unbounded: S_ii + frobenius_weight = 0 at i=" +
                  std::to_string(i));
      theta(i, i) = 1.0 / std::sqrt(a);
    }
  }

  auto objective = [&](const Matrix& th, const Matrix& sth) {
    double logpart = 0.0;
    for (Index i = 0; i < p; ++i) {
      if (!(th(i, i) > 0.0)) return std::numeric_limits<double>::infinity();
      logpart += std::log(th(i, i));
    }
    const double quad = (sth.cwiseProduct(th)).sum();  // tr(S Theta^2)
    const double l1 = th.cwiseAbs().sum() - th.diagonal().cwiseAbs().sum();
    const double frob = th.squaredNorm();
    return -2.0 * logpart + quad + lambda * l1 + mu * frob;
  };

  double kkt = std::numeric_limits<double>::infinity();
  int sweep = 0;
  for (; sweep < opts.max_iter; ++sweep) {
    Matrix stheta = S * theta;  // refreshed per sweep, updated in place below
    double max_delta = 0.0;

    for (Index i = 0; i < p; ++i) {
      for (Index j = i + 1; j < p; ++j) {
        const double x_old = theta(i, j);
        const double c = (stheta(i, j) - S(i, i) * x_old) +
                         (stheta(j, i) - S(j, j) * x_old);
        const double denom = S(i, i) + S(j, j) + 2.0 * mu;
        double x_new;
        if (denom > 0.0) {
          x_new = detail::soft_threshold(-c, lambda) / denom;
        } else {
          require(std::abs(c) <= lambda, errc::non_finite_objective,
                  "objective unbounded in off-diagonal coordinate");
          x_new = 0.0;
        }
        const double delta = x_new - x_old;
        if (delta != 0.0) {
          theta(i, j) = theta(j, i) = x_new;
          stheta.col(j) += delta * S.col(i);
          stheta.col(i) += delta * S.col(j);
          max_delta = std::max(max_delta, std::abs(delta));
        }
      }
    }
    for (Index i = 0; i < p; ++i) {
      const double y_old = theta(i, i);
      const double c = stheta(i, i) - S(i, i) * y_old;
      const double a = S(i, i) + mu;
      double y_new;
      if (a > 0.0) {
        y_new = (-c + std::sqrt(c * c + 4.0 * a)) / (2.0 * a);
      } else {
        require(c > 0.0, errc::non_finite_objective,
                "objective unbounded in diagonal coordinate " + std::to_string(i));
        y_new = 1.0 / c;
      }
      const double delta = y_new - y_old;
      if (delta != 0.0) {
        theta(i, i) = y_new;
        stheta.col(i) += delta * S.col(i);
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }

    require(theta.allFinite(), errc::non_finite_objective,
            "CONCORD iterate diverged to non-finite values");
    const double obj = objective(theta, stheta);
    require(std::isfinite(obj), errc::non_finite_objective,
            "CONCORD objective is not finite");
    est.objective_trace.push_back(obj);

    // stationarity residual over all coordinates
    kkt = 0.0;
    for (Index i = 0; i < p; ++i) {
      kkt = std::max(kkt, std::abs((S(i, i) + mu) * theta(i, i) +
                                   (stheta(i, i) - S(i, i) * theta(i, i)) -
                                   1.0 / theta(i, i)));
      for (Index j = i + 1; j < p; ++j) {
        const double x = theta(i, j);
        const double c = (stheta(i, j) - S(i, i) * x) +
                         (stheta(j, i) - S(j, j) * x);
        const double g = (S(i, i) + S(j, j) + 2.0 * mu) * x + c;
        if (x != 0.0)
          kkt = std::max(kkt, std::abs(g + lambda * (x > 0 ? 1.0 : -1.0)));
        else
          kkt = std::max(kkt, std::max(0.0, std::abs(c) - lambda));
      }
    }
    if (max_delta <= opts.tol && kkt <= opts.tol) {
      ++sweep;
      break;
    }
  }

  est.omega = theta;
  est.iterations = sweep;
  est.kkt_residual = kkt;
  est.converged = kkt <= opts.tol;
  require(est.converged, errc::not_converged,
          "CONCORD residual " + std::to_string(kkt) + " > tol after " +
              std::to_string(sweep) + " sweeps");
  return est;
}

inline PrecisionEstimate solve_precision(const CovarianceEstimate& cov,
                                         Method method, double lambda,
                                         const SolverOptions& opts = {},
                                         double frobenius_weight = 0.0) {
  switch (method) {
    case Method::glasso: return glasso(cov, lambda, opts);
    case Method::concord: return concord(cov, lambda, frobenius_weight, opts);
    default:
      fail(errc::unknown_kind, "solve_precision supports glasso and concord");
  }
}

// Largest off-diagonal |S_ij|: the smallest lambda with a fully sparse glasso
// solution. Grid descends log-spaced to lambda_max / 100.
inline std::vector<double> default_lambda_grid(const CovarianceEstimate& cov,
                                               int points = 20) {
  require(points >= 1, errc::invalid_argument, "grid needs at least one point");
  const Index p = cov.S.rows();
  double lmax = 0.0;
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < i; ++j) lmax = std::max(lmax, std::abs(cov.S(i, j)));
  if (lmax <= 0.0) lmax = 1.0;
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double ratio = std::log(1.0 / 100.0) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lmax * std::exp(ratio * i);
  return grid;
}

// One estimate per lambda, warm-started down the (descending) grid.
inline std::vector<PrecisionEstimate> lambda_path(
    const CovarianceEstimate& cov, Method method, const std::vector<double>& grid,
    const SolverOptions& opts = {}, double frobenius_weight = 0.0) {
  require(!grid.empty(), errc::invalid_argument, "lambda grid is empty");
  require(std::is_sorted(grid.rbegin(), grid.rend()), errc::invalid_argument,
          "lambda grid must be sorted descending");
  require(method == Method::glasso || method == Method::concord,
          errc::unknown_kind, "lambda_path supports glasso and concord");

  std::vector<PrecisionEstimate> path;
  path.reserve(grid.size());
  detail::GlassoState glasso_state;
  Matrix concord_warm;
  for (double lam : grid) {
    try {
      if (method == Method::glasso) {
        path.push_back(glasso(cov, lam, opts, &glasso_state));
      } else {
        const Matrix* warm = concord_warm.rows() ? &concord_warm : nullptr;
        path.push_back(concord(cov, lam, frobenius_weight, opts, warm));
        concord_warm = path.back().omega;
      }
    } catch (const Error& e) {
      fail(e.code(), "lambda=" + std::to_string(lam) + ": " + e.what());
    }
  }
  return path;
}

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> cv_errors;  // mean squared prediction error per lambda
};

// f-fold cross-validation scored by the GRM regression prediction error:
// fit omega on the training columns, form A = I - D.omega, and pool the
// squared error of A*y over every held-out (asset, time) cell.
inline CvResult cross_validate(const ReturnsPanel& panel, Method method,
                               const std::vector<double>& grid, int folds,
                               const SolverOptions& opts = {},
                               double frobenius_weight = 0.0,
                               unsigned threads = 1) {
  require(folds >= 2, errc::insufficient_data, "cross-validation needs >= 2 folds");
  require(panel.n() >= 2 * static_cast<Index>(folds), errc::insufficient_data,
          "cross-validation needs n >= 2*folds");
  require(!grid.empty(), errc::invalid_argument, "lambda grid is empty");

  const Index n = panel.n();
  const Index p = panel.p();
  // contiguous fold boundaries
  std::vector<Index> bounds(folds + 1);
  for (int f = 0; f <= folds; ++f)
    bounds[f] = (n * static_cast<Index>(f)) / folds;

  std::vector<std::vector<double>> fold_sse(
      folds, std::vector<double>(grid.size(), 0.0));

  parallel_for(static_cast<std::size_t>(folds), threads, [&](std::size_t f) {
    const Index lo = bounds[f];
    const Index hi = bounds[f + 1];
    const Index n_test = hi - lo;
    ReturnsPanel train;
    train.asset_ids = panel.asset_ids;
    train.centered = panel.centered;
    train.values.resize(p, n - n_test);
    train.values.leftCols(lo) = panel.values.leftCols(lo);
    train.values.rightCols(n - hi) = panel.values.rightCols(n - hi);
    for (Index j = 0; j < lo; ++j) train.timestamps.push_back(panel.timestamps[j]);
    for (Index j = hi; j < n; ++j) train.timestamps.push_back(panel.timestamps[j]);

    const auto cov = sample_covariance(train, Divisor::n);
    const auto path = lambda_path(cov, method, grid, opts, frobenius_weight);
    const Matrix test = panel.values.middleCols(lo, n_test);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Matrix& omega = path[g].omega;
      Matrix a = -omega;
      for (Index i = 0; i < p; ++i) {
        a.row(i) /= omega(i, i);
        a(i, i) = 0.0;
      }
      fold_sse[f][g] = (test - a * test).squaredNorm();
    }
  });

  CvResult result;
  result.cv_errors.assign(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sse = 0.0;
    for (int f = 0; f < folds; ++f) sse += fold_sse[f][g];
    result.cv_errors[g] = sse / (static_cast<double>(p) * static_cast<double>(n));
  }
  // grid descends, so scanning with strict less-than breaks ties toward
  // larger lambda (sparser models)
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (result.cv_errors[g] < result.cv_errors[best]) best = g;
  result.best_lambda = grid[best];
  return result;
}

// Zero-entry count g(omega) over the whole symmetric matrix, diagonal included.
inline long zero_count(const Matrix& omega) {
  long g = 0;
  for (Index i = 0; i < omega.rows(); ++i)
    for (Index j = 0; j < omega.cols(); ++j)
      if (omega(i, j) == 0.0) ++g;
  return g;
}

inline void validate_precision(const PrecisionEstimate& est) {
  const Index p = est.omega.rows();
  require(est.omega.cols() == p, errc::dimension_mismatch,
          "precision matrix must be square");
  require(static_cast<Index>(est.asset_ids.size()) == p, errc::dimension_mismatch,
          "asset id count does not match precision dimension");
  const double scale = std::max(1.0, est.omega.cwiseAbs().maxCoeff());
  require((est.omega - est.omega.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          errc::invalid_argument, "precision matrix not symmetric within 1e-10");
  for (Index i = 0; i < p; ++i)
    require(est.omega(i, i) > 0.0, errc::non_positive_diagonal,
            "precision diagonal must be strictly positive");
  if (est.method == Method::glasso) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(est.omega,
                                             Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() > 0.0, errc::invalid_argument,
            "glasso precision estimate must be positive definite");
  }
}

}  // namespace grmkit
