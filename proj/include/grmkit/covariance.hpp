#pragma once

#include <string>
#include <vector>

#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"

namespace grmkit {

enum class Divisor { n, n_minus_1 };

struct CovarianceEstimate {
  std::vector<std::string> asset_ids;
  Matrix S;  // p x p, symmetric
  Divisor divisor = Divisor::n;
  Index sample_size = 0;
};

// S = (1/divisor) * sum_t (y_t - ybar)(y_t - ybar)^T over the n columns.
inline CovarianceEstimate sample_covariance(const ReturnsPanel& panel,
                                            Divisor divisor = Divisor::n) {
  require(panel.n() >= 2, errc::degenerate_sample,
          "sample covariance needs n >= 2, got n=" + std::to_string(panel.n()));
  const Matrix centered = panel.values.colwise() - panel.values.rowwise().mean();
  const double denom = divisor == Divisor::n
                           ? static_cast<double>(panel.n())
                           : static_cast<double>(panel.n() - 1);
  CovarianceEstimate cov;
  cov.asset_ids = panel.asset_ids;
  cov.S = (centered * centered.transpose()) / denom;
  cov.S = ((cov.S + cov.S.transpose()) * 0.5).eval();  // kill rounding skew
  cov.divisor = divisor;
  cov.sample_size = panel.n();
  return cov;
}

inline CovarianceEstimate covariance_from_matrix(Matrix S,
                                                 std::vector<std::string> ids = {},
                                                 Divisor divisor = Divisor::n,
                                                 Index sample_size = 0) {
  require(S.rows() == S.cols(), errc::dimension_mismatch,
          "covariance matrix must be square");
  if (ids.empty())
    for (Index i = 0; i < S.rows(); ++i) ids.push_back("A" + std::to_string(i + 1));
  require(static_cast<Index>(ids.size()) == S.rows(), errc::dimension_mismatch,
          "asset id count does not match covariance dimension");
  CovarianceEstimate cov;
  cov.asset_ids = std::move(ids);
  cov.S = std::move(S);
  cov.divisor = divisor;
  cov.sample_size = sample_size;
  return cov;
}

}  // namespace grmkit
