#include <grmkit/covariance.hpp>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "test_util.hpp"

using grmkit::Divisor;
using grmkit::Matrix;

namespace {

TEST(SampleCovariance, HandComputedTwoAssets) {
  Matrix values(2, 2);
  values << -1.0, 1.0, -1.0, 1.0;
  const auto panel = testutil::panel_from_matrix(values);
  const auto cov = grmkit::sample_covariance(panel, Divisor::n);
  Matrix expected(2, 2);
  expected << 1.0, 1.0, 1.0, 1.0;
  EXPECT_NEAR((cov.S - expected).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(SampleCovariance, SingleAssetUnbiased) {
  grmkit::ReturnsPanel panel;
  panel.asset_ids = {"A1"};
  panel.timestamps = {"2020-01-01", "2020-01-02"};
  panel.values.resize(1, 2);
  panel.values << -1.0, 1.0;
  const auto cov = grmkit::sample_covariance(panel, Divisor::n_minus_1);
  EXPECT_DOUBLE_EQ(cov.S(0, 0), 2.0);
}

TEST(SampleCovariance, ZeroPanel) {
  const auto panel = testutil::panel_from_matrix(Matrix::Zero(3, 5));
  const auto cov = grmkit::sample_covariance(panel);
  EXPECT_EQ(cov.S.cwiseAbs().maxCoeff(), 0.0);
}

TEST(SampleCovariance, DivisorRescaling) {
  grmkit::CounterRng rng(7);
  Matrix values(4, 9);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 9; ++j) values(i, j) = rng.next_normal();
  const auto panel = testutil::panel_from_matrix(values);
  const auto by_n = grmkit::sample_covariance(panel, Divisor::n);
  const auto unbiased = grmkit::sample_covariance(panel, Divisor::n_minus_1);
  const Matrix rescaled = by_n.S * (9.0 / 8.0);
  EXPECT_NEAR((rescaled - unbiased.S).cwiseAbs().maxCoeff(), 0.0, 1e-14);
}

TEST(SampleCovariance, PositiveSemidefinite) {
  grmkit::CounterRng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix values(6, 4);  // n < p forces rank deficiency
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 4; ++j) values(i, j) = rng.next_normal();
    const auto panel = testutil::panel_from_matrix(values);
    const auto cov = grmkit::sample_covariance(panel);
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov.S, Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(SampleCovariance, RejectsSingleObservation) {
  grmkit::ReturnsPanel panel;
  panel.asset_ids = {"A1", "A2"};
  panel.timestamps = {"2020-01-01"};
  panel.values = Matrix::Zero(2, 1);
  try {
    grmkit::sample_covariance(panel);
    FAIL() << "expected DegenerateSample";
  } catch (const grmkit::Error& e) {
    EXPECT_EQ(e.code(), grmkit::errc::degenerate_sample);
  }
}

}  // namespace
