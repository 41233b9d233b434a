#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "grmkit/errors.hpp"
#include "grmkit/factor.hpp"
#include "grmkit/panel.hpp"

namespace grmkit {

enum class BetaNorm { mean_one, unit, raw };

struct BetaVector {
  std::vector<std::string> asset_ids;
  Vector values;
  BetaNorm normalization = BetaNorm::raw;
  std::string source;
};

inline BetaVector make_beta(std::vector<std::string> asset_ids, Vector raw,
                            BetaNorm normalization, std::string source) {
  require(static_cast<Index>(asset_ids.size()) == raw.size(),
          errc::dimension_mismatch, "beta length does not match asset ids");
  BetaVector beta;
  beta.asset_ids = std::move(asset_ids);
  beta.source = std::move(source);
  beta.normalization = normalization;
  switch (normalization) {
    case BetaNorm::raw:
      beta.values = std::move(raw);
      break;
    case BetaNorm::unit: {
      const double nrm = raw.norm();
      require(nrm > 0.0, errc::zero_vector, "cannot unit-normalize a zero beta");
      beta.values = raw / nrm;
      break;
    }
    case BetaNorm::mean_one: {
      const double mean = raw.mean();
      require(std::abs(mean) > 1e-12, errc::zero_mean,
              "cannot mean-one normalize: beta mean is zero");
      beta.values = raw / mean;
      break;
    }
  }
  return beta;
}

// arccos of cosine similarity in degrees, in [0, 180]. Computed through
// atan2 of the unit-vector sum/difference, which stays accurate where acos
// loses digits (nearly parallel or antiparallel inputs).
inline double angle_degrees(const BetaVector& a, const BetaVector& b) {
  require(a.asset_ids == b.asset_ids, errc::dimension_mismatch,
          "beta vectors cover different asset sets");
  const double na = a.values.norm();
  const double nb = b.values.norm();
  require(na > 0.0 && nb > 0.0, errc::zero_vector,
          "angle undefined for a zero vector");
  const Vector u = a.values / na;
  const Vector v = b.values / nb;
  const double radians = 2.0 * std::atan2((u - v).norm(), (u + v).norm());
  return radians * 180.0 / 3.14159265358979323846;
}

// d_v = sqrt((1/p) sum_i (b_i / mean(b) - 1)^2)
inline double dispersion(const BetaVector& beta) {
  const double mean = beta.values.mean();
  require(mean != 0.0, errc::zero_mean, "dispersion undefined for a zero-mean beta");
  const double p = static_cast<double>(beta.values.size());
  return std::sqrt((beta.values.array() / mean - 1.0).square().sum() / p);
}

namespace detail {

inline double sample_variance(const Vector& series) {
  require(series.size() >= 2, errc::insufficient_data,
          "variance needs at least two observations");
  const double mean = series.mean();
  return (series.array() - mean).square().sum() /
         static_cast<double>(series.size() - 1);
}

}  // namespace detail

// sqrt(var(first factor row) * trading_days) as a percent per year.
inline double annualized_vol_exogenous(const Vector& factor_row,
                                       double trading_days = 252.0) {
  return std::sqrt(detail::sample_variance(factor_row) * trading_days) * 100.0;
}

// Projects in-sample returns onto beta and annualizes the variance of the
// recovered market series beta^T Y / (beta^T beta).
inline double annualized_vol_projected(const BetaVector& beta, const Matrix& y_in,
                                       double trading_days = 252.0) {
  require(beta.values.size() == y_in.rows(), errc::dimension_mismatch,
          "beta length does not match the panel");
  const double norm2 = beta.values.squaredNorm();
  require(norm2 > 0.0, errc::zero_beta, "projection undefined for a zero beta");
  const Vector series = (beta.values.transpose() * y_in).transpose() / norm2;
  return std::sqrt(detail::sample_variance(series) * trading_days) * 100.0;
}

struct BetaDiagnostics {
  double fraction_positive = 0.0;
  double fraction_within_band = 0.0;  // [0.5, 1.5], a reporting convention
};

inline BetaDiagnostics beta_diagnostics(const BetaVector& beta) {
  require(beta.normalization == BetaNorm::mean_one, errc::invalid_argument,
          "diagnostics expect a mean-one normalized beta");
  const Index p = beta.values.size();
  Index positive = 0;
  Index banded = 0;
  for (Index i = 0; i < p; ++i) {
    if (beta.values[i] > 0.0) ++positive;
    if (beta.values[i] >= 0.5 && beta.values[i] <= 1.5) ++banded;
  }
  return {static_cast<double>(positive) / static_cast<double>(p),
          static_cast<double>(banded) / static_cast<double>(p)};
}

}  // namespace grmkit
