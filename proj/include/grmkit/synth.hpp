#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/rng.hpp"

namespace grmkit {

// Precision structures keep positive definiteness by diagonal dominance:
// omega_ii = 1 + sum_j |omega_ij|.
struct ChainStructure {};

struct BandedStructure {
  int width = 1;
};

struct RandomSparseStructure {
  double density = 0.1;
};

struct OneFactorStructure {
  Vector beta;
  double idio_var = 1.0;
  double factor_var = 1.0;
};

struct KFactorStructure {
  Matrix B;      // p x k exposures
  Matrix V;      // k x k factor covariance
  Vector delta;  // p idiosyncratic variances
};

using Structure = std::variant<ChainStructure, BandedStructure,
                               RandomSparseStructure, OneFactorStructure,
                               KFactorStructure>;

struct SyntheticSpec {
  Index p = 0;
  Index n = 0;
  Structure structure;
  std::uint64_t seed = 0;
};

struct GroundTruth {
  std::optional<Matrix> omega;
  std::optional<Matrix> B;
  std::optional<Matrix> V;
  std::optional<Vector> delta;
};

struct SyntheticMarket {
  ReturnsPanel panel;
  GroundTruth truth;
};

namespace detail {

// days since 1970-01-01 -> y-m-d (proleptic Gregorian; Hinnant's civil algorithm)
inline std::string civil_date(long days) {
  days += 719468;
  const long era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  const long year = y + (m <= 2);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04ld-%02u-%02u", year, m, d);
  return buf;
}

inline void diagonal_dominate(Matrix& omega) {
  for (Index i = 0; i < omega.rows(); ++i) {
    double row_sum = 0.0;
    for (Index j = 0; j < omega.cols(); ++j)
      if (j != i) row_sum += std::abs(omega(i, j));
    omega(i, i) = 1.0 + row_sum;
  }
}

inline Matrix chain_omega(Index p) {
  Matrix omega = Matrix::Zero(p, p);
  for (Index i = 0; i + 1 < p; ++i) omega(i, i + 1) = omega(i + 1, i) = -0.5;
  diagonal_dominate(omega);
  return omega;
}

// Couplings decay across the band and carry seeded random signs: sign
// frustration on the band loops keeps the covariance spectrum spread out
// instead of piling variance into a few smooth modes.
inline Matrix banded_omega(Index p, int width, std::uint64_t seed) {
  require(width >= 1, errc::invalid_argument, "band width must be >= 1");
  CounterRng rng(seed ^ 0xA5A5A5A5A5A5A5A5ULL);
  Matrix omega = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (int d = 1; d <= width && i + d < p; ++d) {
      const double sign = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
      omega(i, i + d) = omega(i + d, i) = sign * 2.0 / d;
    }
  diagonal_dominate(omega);
  return omega;
}

inline Matrix random_sparse_omega(Index p, double density, std::uint64_t seed) {
  require(density >= 0.0 && density <= 1.0, errc::invalid_argument,
          "density must lie in [0, 1]");
  CounterRng rng(seed ^ 0x5f3759df9e3779b9ULL);
  Matrix omega = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) {
      const double coin = rng.next_uniform();
      const double magnitude = 0.2 + 0.4 * rng.next_uniform();
      const double sign = rng.next_uniform() < 0.5 ? -1.0 : 1.0;
      if (coin < density) omega(i, j) = omega(j, i) = sign * magnitude;
    }
  diagonal_dominate(omega);
  return omega;
}

}  // namespace detail

// Gaussian market with the specified second-moment structure. The returned
// truth carries omega for sparse structures and (B, V, delta) for factor ones.
inline SyntheticMarket generate(const SyntheticSpec& spec) {
  require(spec.p >= 2, errc::invalid_argument, "spec needs p >= 2");
  require(spec.n >= 2, errc::invalid_argument, "spec needs n >= 2");
  const Index p = spec.p;
  const Index n = spec.n;

  SyntheticMarket market;
  Matrix chol_sigma;  // lower factor L with Sigma = L L^T

  if (const auto* chain = std::get_if<ChainStructure>(&spec.structure)) {
    (void)chain;
    market.truth.omega = detail::chain_omega(p);
  } else if (const auto* banded = std::get_if<BandedStructure>(&spec.structure)) {
    market.truth.omega = detail::banded_omega(p, banded->width, spec.seed);
  } else if (const auto* sparse =
                 std::get_if<RandomSparseStructure>(&spec.structure)) {
    market.truth.omega = detail::random_sparse_omega(p, sparse->density, spec.seed);
  } else if (const auto* one = std::get_if<OneFactorStructure>(&spec.structure)) {
    require(one->beta.size() == p, errc::dimension_mismatch,
            "one_factor beta length must equal p");
    require(one->idio_var > 0.0 && one->factor_var > 0.0,
            errc::not_positive_definite,
            "one_factor variances must be positive");
    market.truth.B = one->beta;
    market.truth.V = Matrix::Constant(1, 1, one->factor_var);
    market.truth.delta = Vector::Constant(p, one->idio_var);
  } else if (const auto* kf = std::get_if<KFactorStructure>(&spec.structure)) {
    require(kf->B.rows() == p, errc::dimension_mismatch,
            "k_factor B must have p rows");
    require(kf->V.rows() == kf->B.cols() && kf->V.cols() == kf->B.cols(),
            errc::dimension_mismatch, "k_factor V must be k x k");
    require(kf->delta.size() == p, errc::dimension_mismatch,
            "k_factor delta length must equal p");
    market.truth.B = kf->B;
    market.truth.V = kf->V;
    market.truth.delta = kf->delta;
  }

  if (market.truth.omega) {
    Eigen::LLT<Matrix> llt(*market.truth.omega);
    require(llt.info() == Eigen::Success, errc::not_positive_definite,
            "generated precision matrix is not positive definite");
    // Var(L^-T z) = (L L^T)^-1 = Omega^-1, so solve instead of inverting
    const Matrix l_omega = llt.matrixL();
    chol_sigma = l_omega.transpose()
                     .triangularView<Eigen::Upper>()
                     .solve(Matrix::Identity(p, p));
  } else {
    const Matrix sigma = *market.truth.B * *market.truth.V *
                             market.truth.B->transpose() +
                         Matrix(market.truth.delta->asDiagonal());
    Eigen::LLT<Matrix> llt(sigma);
    require(llt.info() == Eigen::Success, errc::not_positive_definite,
            "factor structure yields a non-PD covariance");
    chol_sigma = llt.matrixL();
  }

  CounterRng rng(spec.seed);
  Matrix z(p, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < p; ++i) z(i, j) = rng.next_normal();

  market.panel.values = chol_sigma * z;
  market.panel.centered = false;
  market.panel.asset_ids.reserve(p);
  for (Index i = 0; i < p; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "A%04ld", static_cast<long>(i + 1));
    market.panel.asset_ids.emplace_back(buf);
  }
  market.panel.timestamps.reserve(n);
  const long base = 10959;  // 2000-01-03
  for (Index j = 0; j < n; ++j)
    market.panel.timestamps.push_back(detail::civil_date(base + j));
  return market;
}

// Row-by-row least squares minimizer of E|Y - M Y|^2 over zero-diagonal M,
// solved by direct normal equations on Sigma_{-i,-i}. Oracle counterpart of
// build_grm: equals I - D.Omega up to numerical error.
inline Matrix brute_force_A(const Matrix& sigma) {
  const Index p = sigma.rows();
  require(sigma.cols() == p, errc::dimension_mismatch, "sigma must be square");
  Matrix a = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    Matrix s_rest(p - 1, p - 1);
    Vector s_cross(p - 1);
    Index r = 0;
    for (Index k = 0; k < p; ++k) {
      if (k == i) continue;
      s_cross[r] = sigma(k, i);
      Index c = 0;
      for (Index l = 0; l < p; ++l) {
        if (l == i) continue;
        s_rest(r, c++) = sigma(k, l);
      }
      ++r;
    }
    Eigen::LLT<Matrix> llt(s_rest);
    require(llt.info() == Eigen::Success && llt.rcond() > 1e-12,
            errc::singular_submatrix,
            "Sigma minor is singular for row " + std::to_string(i));
    const Vector coef = llt.solve(s_cross);
    Index c = 0;
    for (Index l = 0; l < p; ++l)
      if (l != i) a(i, l) = coef[c++];
  }
  return a;
}

struct CapmCheck {
  double w_beta = 0.0;       // w_m^T beta, equals 1 for the CAPM beta
  double max_offdiag = 0.0;  // largest off-diagonal |Var(Z_beta)| entry
  Vector beta;
  Matrix var_z;  // (I - beta w_m^T) Sigma (I - beta w_m^T)^T
};

inline Vector capm_beta(const Vector& w_m, const Matrix& sigma) {
  const double denom = w_m.dot(sigma * w_m);
  require(denom != 0.0, errc::degenerate_market,
          "market variance w_m^T Sigma w_m is zero");
  return sigma * w_m / denom;
}

// Numerical witness that the one-factor residual covariance is not diagonal:
// w_m^T beta = 1 and Var(Z_beta) has nonzero off-diagonal entries.
inline CapmCheck capm_residual_check(const Vector& beta, const Vector& w_m,
                                     const Matrix& sigma) {
  const Index p = sigma.rows();
  require(p >= 2, errc::degenerate_market,
          "a single-asset market has no cross terms");
  require(beta.size() == p && w_m.size() == p, errc::dimension_mismatch,
          "beta and w_m must have length p");
  require(w_m.norm() > 0.0, errc::degenerate_market, "w_m must be nonzero");
  require(w_m.dot(sigma * w_m) != 0.0, errc::degenerate_market,
          "market variance w_m^T Sigma w_m is zero");

  CapmCheck out;
  out.beta = beta;
  out.w_beta = w_m.dot(beta);
  const Matrix proj = Matrix::Identity(p, p) - beta * w_m.transpose();
  out.var_z = proj * sigma * proj.transpose();
  out.max_offdiag = 0.0;
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      if (i != j) out.max_offdiag = std::max(out.max_offdiag,
                                             std::abs(out.var_z(i, j)));
  return out;
}

}  // namespace grmkit
