#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "grmkit/errors.hpp"
#include "grmkit/panel.hpp"
#include "grmkit/rng.hpp"

namespace grmkit {

struct EigenPairs {
  Vector eigenvalues;  // algebraically largest first
  Matrix vectors;      // orthonormal columns, largest-magnitude entry positive
};

// Leading eigenpairs of a symmetric matrix by blocked power (subspace)
// iteration with Rayleigh-Ritz extraction. A diagonal shift of ||M||_inf
// makes the working matrix PSD, so dominance in the shifted matrix matches
// algebraic order in M. Ritz pairs from the converged invariant subspace are
// accurate even when eigenvalues inside the block are (near-)tied, which
// defeats one-vector-at-a-time deflation.
//
// Pairs beyond strict_k (default: all) tolerate residual non-convergence and
// report the final Ritz value; callers use them only as gap guards, where the
// value settles long before the vector can.
inline EigenPairs top_eigenpairs(const Matrix& m_sym, Index k,
                                 double tol = 1e-10, int max_iter = 10000,
                                 Index strict_k = -1) {
  const Index p = m_sym.rows();
  require(m_sym.cols() == p, errc::dimension_mismatch, "matrix must be square");
  require(k >= 1 && k <= p, errc::invalid_argument,
          "eigenpair count k must satisfy 1 <= k <= p");
  if (strict_k < 0) strict_k = k;

  const double shift = m_sym.cwiseAbs().rowwise().sum().maxCoeff();
  Matrix work = (m_sym + m_sym.transpose()) * 0.5;
  work.diagonal().array() += shift;
  const double scale = std::max(1.0, 2.0 * shift);

  CounterRng rng(0x9c0ffeeULL);  // fixed stream: deterministic start basis
  Matrix basis(p, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < p; ++i) basis(i, j) = rng.next_normal();
  basis = Eigen::HouseholderQR<Matrix>(basis).householderQ() *
          Matrix::Identity(p, k);

  Matrix ritz_vectors(p, k);
  Vector ritz_values(k);
  Vector residuals = Vector::Constant(k, std::numeric_limits<double>::infinity());
  for (int it = 0; it < max_iter; ++it) {
    const Matrix product = work * basis;
    // Rayleigh-Ritz on the current subspace
    const Matrix projected = basis.transpose() * product;
    Eigen::SelfAdjointEigenSolver<Matrix> small(
        ((projected + projected.transpose()) * 0.5).eval());
    require(small.info() == Eigen::Success, errc::not_converged,
            "projected eigenproblem failed");
    // descending order; residual reuses work*basis: work*x_j = product*u_j
    bool strict_ok = true;
    for (Index j = 0; j < k; ++j) {
      const Vector u = small.eigenvectors().col(k - 1 - j);
      ritz_values[j] = small.eigenvalues()[k - 1 - j];
      ritz_vectors.col(j) = basis * u;
      residuals[j] = (product * u - ritz_values[j] * ritz_vectors.col(j)).norm();
      if (j < strict_k && residuals[j] > tol * scale) strict_ok = false;
    }
    if (strict_ok) break;
    basis = Eigen::HouseholderQR<Matrix>(product).householderQ() *
            Matrix::Identity(p, k);
  }
  for (Index j = 0; j < strict_k; ++j)
    require(residuals[j] <= tol * scale, errc::tied_eigenvalues,
            "subspace iteration stalled at eigenpair " + std::to_string(j + 1) +
                " (near-degenerate spectrum)");

  EigenPairs out;
  out.eigenvalues = ritz_values.array() - shift;
  out.vectors = ritz_vectors;
  for (Index j = 0; j < k; ++j) {
    Index imax = 0;
    out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, j) < 0.0) out.vectors.col(j) = -out.vectors.col(j);
  }
  return out;
}

}  // namespace grmkit
