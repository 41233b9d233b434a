#include <grmkit/grm.hpp>
#include <grmkit/synth.hpp>

#include <gtest/gtest.h>

#include "test_util.hpp"

using grmkit::Error;
using grmkit::Index;
using grmkit::Matrix;
using grmkit::Vector;
using grmkit::errc;

namespace {

grmkit::PrecisionEstimate precision_of(const Matrix& omega) {
  grmkit::PrecisionEstimate est;
  est.omega = omega;
  est.method = grmkit::Method::exact_inverse;
  est.converged = true;
  for (Index i = 0; i < omega.rows(); ++i)
    est.asset_ids.push_back("A" + std::to_string(i + 1));
  return est;
}

Matrix example_one_sigma() {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.5, 0.5, 1.0;
  return sigma;
}

TEST(BuildGrm, IdentityPrecision) {
  const auto grm = grmkit::build_grm(precision_of(Matrix::Identity(3, 3)));
  EXPECT_EQ(grm.A.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(grm.D.minCoeff(), 1.0);
  EXPECT_EQ(grm.D.maxCoeff(), 1.0);
}

TEST(BuildGrm, ExampleOneClosedForm) {
  const Matrix omega = example_one_sigma().inverse();
  const auto grm = grmkit::build_grm(precision_of(omega));
  EXPECT_NEAR(grm.A(0, 1), 0.5, 1e-12);
  EXPECT_NEAR(grm.A(1, 0), 0.5, 1e-12);
  EXPECT_EQ(grm.A(0, 0), 0.0);
  EXPECT_NEAR(grm.D[0], 0.75, 1e-12);
  EXPECT_NEAR(grm.D[1], 0.75, 1e-12);
}

TEST(BuildGrm, RejectsNonPositiveDiagonal) {
  Matrix omega = Matrix::Identity(2, 2);
  omega(0, 0) = 0.0;
  try {
    grmkit::build_grm(precision_of(omega));
    FAIL() << "expected NonPositiveDiagonal";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::non_positive_diagonal);
  }
}

TEST(BuildGrm, ReproducesIdentityAndPattern) {
  grmkit::CounterRng rng(12);
  const Matrix sigma = testutil::random_spd(6, rng);
  Matrix omega = sigma.inverse();
  omega(0, 2) = omega(2, 0) = 0.0;  // plant a zero
  const auto grm = grmkit::build_grm(precision_of(omega));
  const Matrix rebuilt =
      Matrix::Identity(6, 6) - grm.D.asDiagonal() * grm.omega_source.omega;
  Matrix expected = rebuilt;
  expected.diagonal().setZero();
  EXPECT_LE((grm.A - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(grm.A(0, 2), 0.0);
  EXPECT_EQ(grm.A(2, 0), 0.0);
}

TEST(DecomposeVariance, ExampleOne) {
  const Matrix sigma = example_one_sigma();
  const auto grm = grmkit::build_grm(precision_of(sigma.inverse()));
  const auto dec = grmkit::decompose_variance(
      grm, grmkit::covariance_from_matrix(sigma, grm.asset_ids));
  EXPECT_NEAR(dec.endogenous[0], 0.25, 1e-12);
  EXPECT_NEAR(dec.endogenous[1], 0.25, 1e-12);
  EXPECT_NEAR(dec.residual[0], 0.75, 1e-12);
  EXPECT_NEAR(dec.total[0], 1.0, 1e-12);
}

TEST(DecomposeVariance, IdentityOmegaHasNoEndogenousPart) {
  const auto grm = grmkit::build_grm(precision_of(Matrix::Identity(4, 4)));
  const auto dec = grmkit::decompose_variance(
      grm, grmkit::covariance_from_matrix(Matrix::Identity(4, 4), grm.asset_ids));
  EXPECT_EQ(dec.endogenous.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((dec.residual - dec.total).cwiseAbs().maxCoeff(), 0.0);
}

TEST(DecomposeVariance, ExactIdentityOnInversePair) {
  grmkit::CounterRng rng(7);
  const Matrix sigma = testutil::random_spd(5, rng);
  const auto grm = grmkit::build_grm(precision_of(sigma.inverse()));
  const auto dec = grmkit::decompose_variance(
      grm, grmkit::covariance_from_matrix(sigma, grm.asset_ids));
  for (Index i = 0; i < 5; ++i)
    EXPECT_NEAR(dec.total[i], dec.endogenous[i] + dec.residual[i], 1e-10);
}

TEST(ResidualCovariance, IdentityAndExampleOne) {
  const auto eye = grmkit::build_grm(precision_of(Matrix::Identity(3, 3)));
  EXPECT_LE((grmkit::residual_covariance(eye) - Matrix::Identity(3, 3))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);

  const auto grm = grmkit::build_grm(precision_of(example_one_sigma().inverse()));
  Matrix expected(2, 2);  // (1 - rho^2) [[s11, -s12], [-s12, s22]]
  expected << 0.75, -0.375, -0.375, 0.75;
  EXPECT_LE((grmkit::residual_covariance(grm) - expected).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_NE(grmkit::residual_covariance(grm)(0, 1), 0.0);  // never diagonal
}

TEST(EndogenousCovarianceIdentity, MatchesSigmaMinus2DPlusDOD) {
  grmkit::CounterRng rng(19);
  const Matrix sigma = testutil::random_spd(7, rng);
  const Matrix omega = sigma.inverse();
  const auto grm = grmkit::build_grm(precision_of(omega));
  const Matrix lhs = grm.A * sigma * grm.A.transpose();
  const Matrix rhs = sigma - 2.0 * Matrix(grm.D.asDiagonal()) +
                     grm.D.asDiagonal() * omega * grm.D.asDiagonal();
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Lemma1Uncorrelatedness, ResidualCovarianceWithReturnsIsDiagonal) {
  grmkit::CounterRng rng(3);
  for (Index p : {5, 20, 50}) {
    const Matrix sigma = testutil::random_spd(p, rng);
    const auto grm = grmkit::build_grm(precision_of(sigma.inverse()));
    // Cov(E, Y) = (I - A) Sigma must equal diag(D)
    const Matrix cov_ey = (Matrix::Identity(p, p) - grm.A) * sigma;
    double max_offdiag = 0.0;
    for (Index i = 0; i < p; ++i)
      for (Index j = 0; j < p; ++j)
        if (i != j) max_offdiag = std::max(max_offdiag, std::abs(cov_ey(i, j)));
    EXPECT_LE(max_offdiag, 1e-10);
    EXPECT_LE((cov_ey.diagonal() - grm.D).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Theorem1Optimality, BeatsRandomZeroDiagonalCompetitors) {
  grmkit::CounterRng rng(99);
  for (Index p : {2, 4, 6}) {
    const Matrix sigma = testutil::random_spd(p, rng);
    const auto grm = grmkit::build_grm(precision_of(sigma.inverse()));
    const Matrix ia = Matrix::Identity(p, p) - grm.A;
    const double best = (ia * sigma * ia.transpose()).trace();
    for (int trial = 0; trial < 200; ++trial) {
      Matrix m(p, p);
      for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j)
          m(i, j) = (i == j) ? 0.0 : grm.A(i, j) + 0.5 * rng.next_normal();
      const Matrix im = Matrix::Identity(p, p) - m;
      EXPECT_LE(best, (im * sigma * im.transpose()).trace() + 1e-12);
    }
  }
}

TEST(Predict, HandCases) {
  const auto zero = grmkit::build_grm(precision_of(Matrix::Identity(2, 2)));
  grmkit::Matrix values(2, 3);
  values << 0.1, -0.2, 0.3, 0.2, 0.1, -0.1;
  auto panel = testutil::panel_from_matrix(values);
  panel.centered = true;
  EXPECT_EQ(grmkit::predict(zero, panel).values.cwiseAbs().maxCoeff(), 0.0);

  const auto grm = grmkit::build_grm(precision_of(example_one_sigma().inverse()));
  grmkit::Matrix column(2, 1);
  column << 2.0, 4.0;
  auto one_col = testutil::panel_from_matrix(column);
  one_col.centered = true;
  const auto pred = grmkit::predict(grm, one_col);
  ASSERT_EQ(pred.n(), 1);
  EXPECT_NEAR(pred.values(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(pred.values(1, 0), 1.0, 1e-12);
}

TEST(ConditionalGrm, SingletonIsZero) {
  grmkit::CounterRng rng(4);
  const Matrix sigma = testutil::random_spd(4, rng);
  const auto sub = grmkit::conditional_grm(precision_of(sigma.inverse()), {2});
  EXPECT_EQ(sub.A.rows(), 1);
  EXPECT_EQ(sub.A(0, 0), 0.0);
}

TEST(ConditionalGrm, Theorem2BlockIdentity) {
  grmkit::CounterRng rng(31);
  const Matrix sigma = testutil::random_spd(6, rng);
  const auto omega = precision_of(sigma.inverse());
  const auto full = grmkit::build_grm(omega);
  const std::vector<Index> subset = {0, 1, 2};
  const auto sub = grmkit::conditional_grm(omega, subset);
  for (Index a = 0; a < 3; ++a)
    for (Index b = 0; b < 3; ++b)
      EXPECT_NEAR(sub.A(a, b), full.A(subset[a], subset[b]), 1e-12);
}

TEST(ConditionalGrm, BlockDiagonalDecouples) {
  grmkit::CounterRng rng(8);
  const Matrix s1 = testutil::random_spd(3, rng);
  const Matrix s2 = testutil::random_spd(2, rng);
  Matrix omega = Matrix::Zero(5, 5);
  omega.topLeftCorner(3, 3) = s1.inverse();
  omega.bottomRightCorner(2, 2) = s2.inverse();
  const auto sub = grmkit::conditional_grm(precision_of(omega), {0, 1, 2});
  const auto standalone =
      grmkit::build_grm(precision_of(Matrix(s1.inverse())));
  EXPECT_LE((sub.A - standalone.A).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ConditionalGrm, RejectsEmptyAndFullSubsets) {
  const auto omega = precision_of(Matrix::Identity(3, 3));
  EXPECT_THROW(grmkit::conditional_grm(omega, {}), Error);
  try {
    grmkit::conditional_grm(omega, {0, 1, 2});
    FAIL() << "expected FullSubset";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::full_subset);
  }
}

TEST(PartialPair, DiagonalSigmaHasNoPartialStructure) {
  Matrix sigma = Vector::LinSpaced(4, 1.0, 4.0).asDiagonal();
  const auto pc =
      grmkit::partial_pair(grmkit::covariance_from_matrix(sigma), 0, 1);
  EXPECT_EQ(pc.pi(0, 1), 0.0);
  EXPECT_EQ(pc.rho, 0.0);
  EXPECT_NEAR(pc.nu, 0.0, 1e-15);
}

TEST(PartialPair, MatchesPrecisionMatrixRoute) {
  grmkit::CounterRng rng(55);
  const Matrix sigma = testutil::random_spd(3, rng);
  const Matrix omega = sigma.inverse();
  const auto pc =
      grmkit::partial_pair(grmkit::covariance_from_matrix(sigma), 0, 1);
  const double expected = -omega(0, 1) / std::sqrt(omega(0, 0) * omega(1, 1));
  EXPECT_NEAR(pc.rho, expected, 1e-10);
}

TEST(PartialPair, NuIndependentOfPartner) {
  grmkit::CounterRng rng(77);
  const Matrix sigma = testutil::random_spd(5, rng);
  const auto cov = grmkit::covariance_from_matrix(sigma);
  const double nu_ref = grmkit::partial_pair(cov, 0, 1).nu;
  for (Index j = 2; j < 5; ++j)
    EXPECT_NEAR(grmkit::partial_pair(cov, 0, j).nu, nu_ref, 1e-10);
  // and it matches the endogenous variance from the decomposition
  const auto grm = grmkit::build_grm(precision_of(sigma.inverse()));
  const auto dec = grmkit::decompose_variance(
      grm, grmkit::covariance_from_matrix(sigma, grm.asset_ids));
  EXPECT_NEAR(nu_ref, dec.endogenous[0], 1e-10);
}

TEST(PartialPair, TwoAssetCaseUsesPlainCovariance) {
  const Matrix sigma = example_one_sigma();
  const auto pc =
      grmkit::partial_pair(grmkit::covariance_from_matrix(sigma), 0, 1);
  EXPECT_NEAR(pc.rho, 0.5, 1e-12);
  EXPECT_NEAR(pc.nu, 0.25, 1e-12);  // rho^2 sigma_11
}

}  // namespace
