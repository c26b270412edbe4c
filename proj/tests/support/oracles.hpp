#pragma once

// Test-side oracles, independent of the library's solver paths.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

/// Number of eigenvalues of the symmetric-definite tridiagonal pencil (A, M)
/// below `shift`, by the LDL^T sign count of A - shift*M.
inline int sturm_count(const Eigen::VectorXd& a_diag, const Eigen::VectorXd& a_off,
                       const Eigen::VectorXd& m_diag, const Eigen::VectorXd& m_off,
                       double shift) {
  const int n = static_cast<int>(a_diag.size());
  int count = 0;
  double q = a_diag(0) - shift * m_diag(0);
  if (q == 0.0) q = -1e-300;
  if (q < 0) ++count;
  for (int i = 1; i < n; ++i) {
    const double e = a_off(i - 1) - shift * m_off(i - 1);
    double d = a_diag(i) - shift * m_diag(i) - e * e / q;
    if (d == 0.0) d = -1e-300;
    if (d < 0) ++count;
    q = d;
  }
  return count;
}

/// First `count` generalized eigenvalues (ascending) of a tridiagonal pencil
/// via Sturm bisection.
inline std::vector<double> tridiag_smallest_eigs(const Eigen::VectorXd& a_diag,
                                                 const Eigen::VectorXd& a_off,
                                                 const Eigen::VectorXd& m_diag,
                                                 const Eigen::VectorXd& m_off,
                                                 int count, double lo, double hi) {
  std::vector<double> eigs;
  for (int k = 1; k <= count; ++k) {
    double a = lo, b = hi;
    if (sturm_count(a_diag, a_off, m_diag, m_off, b) < k)
      throw std::runtime_error("bracket too small");
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (a + b);
      if (sturm_count(a_diag, a_off, m_diag, m_off, mid) >= k)
        b = mid;
      else
        a = mid;
      if (b - a <= 1e-13 * std::max(1.0, std::abs(b))) break;
    }
    eigs.push_back(0.5 * (a + b));
  }
  return eigs;
}

/// Extract tridiagonal bands; throws if the matrix has wider bandwidth.
inline void extract_tridiag(const Eigen::SparseMatrix<double>& m, Eigen::VectorXd& diag,
                            Eigen::VectorXd& off) {
  const int n = static_cast<int>(m.rows());
  diag = Eigen::VectorXd::Zero(n);
  off = Eigen::VectorXd::Zero(n - 1);
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
      if (it.row() == it.col())
        diag(it.row()) = it.value();
      else if (it.row() == it.col() + 1)
        off(it.col()) = it.value();
      else if (it.row() + 1 == it.col())
        off(it.row()) = it.value();
      else if (it.value() != 0.0)
        throw std::runtime_error("matrix is not tridiagonal");
    }
}

/// Exact propagator of  a'' + D a' + diag(lambda) a = 0  over time h, via the
/// complex eigendecomposition of the 2n x 2n companion matrix.
inline void exact_linear_step(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& D,
                              Eigen::VectorXd& a, Eigen::VectorXd& v, double h) {
  const int n = static_cast<int>(lambda.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  companion.topRightCorner(n, n).setIdentity();
  companion.bottomLeftCorner(n, n) = -Eigen::MatrixXd(lambda.asDiagonal());
  companion.bottomRightCorner(n, n) = -D;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
  if (es.info() != Eigen::Success) throw std::runtime_error("companion eigensolve failed");
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::VectorXcd mu = es.eigenvalues();
  Eigen::VectorXcd y(2 * n);
  y.head(n) = a.cast<std::complex<double>>();
  y.tail(n) = v.cast<std::complex<double>>();
  const Eigen::VectorXcd c = V.partialPivLu().solve(y);
  Eigen::VectorXcd propagated = Eigen::VectorXcd::Zero(2 * n);
  for (int j = 0; j < 2 * n; ++j)
    propagated += c(j) * std::exp(mu(j) * h) * V.col(j);
  a = propagated.head(n).real();
  v = propagated.tail(n).real();
}

}  // namespace oracles
