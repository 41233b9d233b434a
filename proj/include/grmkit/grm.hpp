#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "grmkit/covariance.hpp"
#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/precision.hpp"

namespace grmkit {

// Endogenous representation Y = A Y + E with A = I - D.Omega, D = diag(Omega)^-1.
// A has an exactly zero diagonal and shares Omega's off-diagonal sparsity.
struct GrmModel {
  std::vector<std::string> asset_ids;
  Matrix A;         // p x p, zero diagonal
  Vector D;         // residual variances 1/omega_ii
  PrecisionEstimate omega_source;
};

struct VarianceDecomposition {
  std::vector<std::string> asset_ids;
  Vector total;       // sigma_ii
  Vector endogenous;  // Var(AY)_ii
  Vector residual;    // 1/omega_ii
};

struct PartialCovariance {
  Index i = 0;
  Index j = 0;
  Matrix pi;        // 2x2 partial covariance of the pair given the rest
  double rho = 0.0; // partial correlation
  double nu = 0.0;  // endogenous variance of asset i
};

inline GrmModel build_grm(const PrecisionEstimate& omega) {
  const Index p = omega.omega.rows();
  require(omega.omega.cols() == p, errc::dimension_mismatch,
          "precision matrix must be square");
  for (Index i = 0; i < p; ++i)
    require(omega.omega(i, i) > 0.0, errc::non_positive_diagonal,
            "omega diagonal must be strictly positive at index " +
                std::to_string(i));

  GrmModel grm;
  grm.asset_ids = omega.asset_ids;
  grm.omega_source = omega;
  grm.D.resize(p);
  grm.A.resize(p, p);
  for (Index i = 0; i < p; ++i) {
    grm.D[i] = 1.0 / omega.omega(i, i);
    for (Index j = 0; j < p; ++j)
      grm.A(i, j) = (i == j) ? 0.0 : -omega.omega(i, j) / omega.omega(i, i);
  }
  return grm;
}

// endogenous_i = (A Sigma A^T)_ii, residual_i = D_i, total_i = Sigma_ii.
// The identity total = endogenous + residual is exact when Sigma = Omega^-1.
inline VarianceDecomposition decompose_variance(const GrmModel& grm,
                                                const CovarianceEstimate& sigma) {
  require(sigma.S.rows() == grm.A.rows(), errc::dimension_mismatch,
          "covariance dimension does not match the model");
  VarianceDecomposition dec;
  dec.asset_ids = grm.asset_ids;
  dec.total = sigma.S.diagonal();
  dec.endogenous = (grm.A * sigma.S * grm.A.transpose()).diagonal();
  dec.residual = grm.D;
  return dec;
}

// Var(E) = D Omega D; off-diagonal (i,j) = omega_ij / (omega_ii omega_jj).
inline Matrix residual_covariance(const GrmModel& grm) {
  return grm.D.asDiagonal() * grm.omega_source.omega * grm.D.asDiagonal();
}

// Columnwise prediction Yhat = A Y. The output is not re-centered.
inline ReturnsPanel predict(const GrmModel& grm, const ReturnsPanel& panel) {
  require(panel.asset_ids == grm.asset_ids, errc::dimension_mismatch,
          "panel asset ids do not match the model");
  ReturnsPanel out;
  out.asset_ids = panel.asset_ids;
  out.timestamps = panel.timestamps;
  out.values = grm.A * panel.values;
  out.centered = false;
  return out;
}

// GRM of Y_I given Y_J, built from the I x I block of Omega. By the
// conditional representation this equals the I x I sub-block of the full A.
inline GrmModel conditional_grm(const PrecisionEstimate& omega,
                                const std::vector<Index>& subset) {
  const Index p = omega.omega.rows();
  require(!subset.empty(), errc::empty_subset, "conditioning subset is empty");
  require(static_cast<Index>(subset.size()) < p, errc::full_subset,
          "conditioning subset must be a proper subset");
  std::vector<bool> seen(p, false);
  for (Index idx : subset) {
    require(idx >= 0 && idx < p, errc::invalid_argument,
            "subset index out of range");
    require(!seen[idx], errc::invalid_argument,
            "subset index " + std::to_string(idx) + " repeated");
    seen[idx] = true;
  }

  const Index m = static_cast<Index>(subset.size());
  PrecisionEstimate block;
  block.method = omega.method;
  block.lambda = omega.lambda;
  block.frobenius_weight = omega.frobenius_weight;
  block.converged = omega.converged;
  block.omega.resize(m, m);
  for (Index a = 0; a < m; ++a) {
    block.asset_ids.push_back(omega.asset_ids[subset[a]]);
    for (Index b = 0; b < m; ++b)
      block.omega(a, b) = omega.omega(subset[a], subset[b]);
  }
  return build_grm(block);
}

// Partial covariance of the pair (i, j) given all remaining assets:
// Pi = Sigma_II - Sigma_IJ Sigma_JJ^-1 Sigma_JI, rho = pi_ij / sqrt(pi_ii pi_jj),
// nu = sigma_ii - pi_ii (1 - rho^2). For p = 2 the conditioning set is empty.
inline PartialCovariance partial_pair(const CovarianceEstimate& sigma, Index i,
                                      Index j) {
  const Matrix& S = sigma.S;
  const Index p = S.rows();
  require(i != j, errc::invalid_argument, "pair indices must differ");
  require(i >= 0 && i < p && j >= 0 && j < p, errc::invalid_argument,
          "pair index out of range");

  PartialCovariance pc;
  pc.i = i;
  pc.j = j;
  if (p == 2) {
    pc.pi = S;
    if (i == 1) pc.pi = pc.pi.reverse().eval();  // order (i, j)
  } else {
    std::vector<Index> rest;
    rest.reserve(p - 2);
    for (Index k = 0; k < p; ++k)
      if (k != i && k != j) rest.push_back(k);
    const Index m = static_cast<Index>(rest.size());
    Matrix s_jj(m, m), s_ij(2, m);
    for (Index a = 0; a < m; ++a) {
      s_ij(0, a) = S(i, rest[a]);
      s_ij(1, a) = S(j, rest[a]);
      for (Index b = 0; b < m; ++b) s_jj(a, b) = S(rest[a], rest[b]);
    }
    Eigen::LLT<Matrix> llt(s_jj);
    require(llt.info() == Eigen::Success && llt.rcond() > 1e-12,
            errc::singular_block,
            "conditioning block is numerically singular");
    Matrix s_ii(2, 2);
    s_ii << S(i, i), S(i, j), S(j, i), S(j, j);
    pc.pi = s_ii - s_ij * llt.solve(s_ij.transpose());
    pc.pi = ((pc.pi + pc.pi.transpose()) * 0.5).eval();
  }

  require(pc.pi(0, 0) > 0.0 && pc.pi(1, 1) > 0.0, errc::singular_block,
          "partial variances must be positive");
  pc.rho = pc.pi(0, 1) / std::sqrt(pc.pi(0, 0) * pc.pi(1, 1));
  pc.nu = S(i, i) - pc.pi(0, 0) * (1.0 - pc.rho * pc.rho);
  return pc;
}

}  // namespace grmkit
