#include "wentzell/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "wentzell/detail/rng.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace wentzell {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(Triplets& trips, const std::array<int, 4>& nodes, int m,
             const Eigen::MatrixXd& el) {
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) trips.emplace_back(nodes[a], nodes[b], el(a, b));
}

Eigen::SparseMatrix<double> from_triplets(int n, const Triplets& trips) {
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

double sym_defect(const Eigen::SparseMatrix<double>& B) {
  Eigen::SparseMatrix<double> d = Eigen::SparseMatrix<double>(B.transpose()) - B;
  double num = 0.0, den = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      num = std::max(num, std::abs(it.value()));
  for (int k = 0; k < B.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(B, k); it; ++it)
      den = std::max(den, std::abs(it.value()));
  return den > 0 ? num / den : num;
}

/// Full dense generalized symmetric-definite eigensolve of (B, M), columns
/// M-orthonormal, ascending eigenvalues, deterministic sign convention.
EigenDecomposition dense_generalized_eig(const Eigen::SparseMatrix<double>& B,
                                         const Eigen::SparseMatrix<double>& M) {
  Eigen::MatrixXd Bd(B), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      Bd, Md, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw numeric_error("generalized eigensolve failed to converge");
  EigenDecomposition eig;
  eig.lambda = solver.eigenvalues();
  eig.modes = solver.eigenvectors();
  for (int j = 0; j < eig.modes.cols(); ++j) {
    const double scale = eig.modes.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < eig.modes.rows(); ++i) {
      if (std::abs(eig.modes(i, j)) > 1e-12 * scale) {
        if (eig.modes(i, j) < 0) eig.modes.col(j) *= -1.0;
        break;
      }
    }
  }
  return eig;
}

void check_residuals(const EigenDecomposition& eig,
                     const Eigen::SparseMatrix<double>& B,
                     const Eigen::SparseMatrix<double>& M) {
  for (int j = 0; j < eig.count(); ++j) {
    const Eigen::VectorXd mw = M * eig.modes.col(j);
    const double res = (B * eig.modes.col(j) - eig.lambda(j) * mw).norm();
    const double tol = 1e-9 * std::max(1.0, std::abs(eig.lambda(j))) * mw.norm();
    if (!(res <= std::max(tol, 1e-300)))
      throw numeric_error("eigenpair " + std::to_string(j) + " residual " +
                          std::to_string(res) + " exceeds tolerance " +
                          std::to_string(tol));
  }
}

/// M W sigma^p W^T M for the full decomposition of a PSD pencil.
Eigen::MatrixXd spectral_power(const EigenDecomposition& eig,
                               const Eigen::SparseMatrix<double>& M, double p) {
  Eigen::VectorXd powers(eig.count());
  for (int j = 0; j < eig.count(); ++j) {
    const double s = std::max(eig.lambda(j), 0.0);
    powers(j) = (s == 0.0 && p == 0.0) ? 1.0 : std::pow(s, p);
  }
  const Eigen::MatrixXd MW = M * eig.modes;
  Eigen::MatrixXd out = MW * powers.asDiagonal() * MW.transpose();
  return 0.5 * (out + out.transpose());
}

void validate_params(const FractionalParams& p) {
  if (!(p.theta >= 0.5 && p.theta <= 1.0))
    throw parameter_error("fractional.theta must lie in [0.5, 1] (got " +
                          std::to_string(p.theta) + ")");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0))
    throw parameter_error("fractional.alpha must lie in (0, 1] (got " +
                          std::to_string(p.alpha) + ")");
  if (!(p.omega > 0.0 && p.omega <= 1.0))
    throw parameter_error("fractional.omega must lie in (0, 1] (got " +
                          std::to_string(p.omega) + ")");
  if (p.realization == DampingRealization::SpectralR1 && p.alpha != 1.0)
    throw parameter_error("SpectralR1 damping requires alpha = 1");
}

}  // namespace

OperatorBlocks assemble_blocks(const Mesh& mesh) {
  const int nn = mesh.node_count();
  OperatorBlocks blocks;
  blocks.boundary_nodes = mesh.boundary_nodes;

  Triplets mb, kb, mg, kg;
  if (mesh.kind == GeometryKind::Interval) {
    for (const auto& cell : mesh.cells) {
      const double h = mesh.nodes(cell[1], 0) - mesh.nodes(cell[0], 0);
      Eigen::MatrixXd me(2, 2), ke(2, 2);
      me << 2, 1, 1, 2;
      me *= h / 6.0;
      ke << 1, -1, -1, 1;
      ke /= h;
      scatter(mb, cell, 2, me);
      scatter(kb, cell, 2, ke);
    }
    for (int node : mesh.boundary_nodes) mg.emplace_back(node, node, 1.0);
    // K_Gamma vanishes: the endpoints carry no surface Laplacian.
  } else {
    const double hx = mesh.nodes(1, 0) - mesh.nodes(0, 0);
    const double hy = mesh.nodes(mesh.nx, 1) - mesh.nodes(0, 1);
    Eigen::MatrixXd me(4, 4), kx(4, 4), ky(4, 4);
    me << 4, 2, 2, 1, 2, 4, 1, 2, 2, 1, 4, 2, 1, 2, 2, 4;
    me *= hx * hy / 36.0;
    kx << 2, -2, 1, -1, -2, 2, -1, 1, 1, -1, 2, -2, -1, 1, -2, 2;
    kx *= hy / (6.0 * hx);
    ky << 2, 1, -2, -1, 1, 2, -1, -2, -2, -1, 2, 1, -1, -2, 1, 2;
    ky *= hx / (6.0 * hy);
    const Eigen::MatrixXd ke = kx + ky;
    for (const auto& cell : mesh.cells) {
      scatter(mb, cell, 4, me);
      scatter(kb, cell, 4, ke);
    }
    // Two circles: P1 segments along each boundary layer.
    Eigen::MatrixXd ms(2, 2), ks(2, 2);
    ms << 2, 1, 1, 2;
    ms *= hx / 6.0;
    ks << 1, -1, -1, 1;
    ks /= hx;
    for (int side = 0; side < 2; ++side) {
      const int row = (side == 0 ? 0 : mesh.ny) * mesh.nx;
      for (int i = 0; i < mesh.nx; ++i) {
        const std::array<int, 4> seg = {row + i, row + (i + 1) % mesh.nx, -1, -1};
        scatter(mg, seg, 2, ms);
        scatter(kg, seg, 2, ks);
      }
    }
  }

  blocks.M_bulk = from_triplets(nn, mb);
  blocks.K_bulk = from_triplets(nn, kb);
  blocks.M_bdry = from_triplets(nn, mg);
  blocks.K_bdry = from_triplets(nn, kg);
  return blocks;
}

WentzellOperator assemble_wentzell(OperatorBlocks blocks) {
  for (const auto* b : {&blocks.M_bulk, &blocks.K_bulk, &blocks.M_bdry, &blocks.K_bdry})
    if (sym_defect(*b) > 1e-12)
      throw numeric_error("assembly integrity: block not symmetric (defect " +
                          std::to_string(sym_defect(*b)) + ")");

  WentzellOperator op;
  op.M = blocks.M_bulk + blocks.M_bdry;
  op.A = blocks.K_bulk + blocks.M_bulk + blocks.K_bdry + blocks.M_bdry;
  op.blocks = std::move(blocks);

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol(op.M);
  if (chol.info() != Eigen::Success)
    throw numeric_error("assembly integrity: composite mass not positive definite");
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> cholA(op.A);
  if (cholA.info() != Eigen::Success)
    throw numeric_error("assembly integrity: composite stiffness not positive definite");
  return op;
}

EigenDecomposition solve_eigenproblem(const WentzellOperator& op, int n) {
  if (n < 1 || n > op.size())
    throw parameter_error("eigenpair count " + std::to_string(n) +
                          " outside [1, " + std::to_string(op.size()) + "]");
  EigenDecomposition eig = dense_generalized_eig(op.A, op.M);
  eig.lambda.conservativeResize(n);
  eig.modes.conservativeResize(Eigen::NoChange, n);
  check_residuals(eig, op.A, op.M);
  return eig;
}

Eigen::VectorXd apply_fractional_power(const EigenDecomposition& eig,
                                       const Eigen::SparseMatrix<double>& M,
                                       double theta, const Eigen::VectorXd& x) {
  if (!(theta >= 0.0 && theta <= 1.0))
    throw parameter_error("fractional power exponent must lie in [0, 1] (got " +
                          std::to_string(theta) + ")");
  if (x.size() != M.rows())
    throw dimension_error("apply_fractional_power: vector length mismatch");
  const Eigen::VectorXd coeffs = eig.modes.transpose() * (M * x);
  Eigen::VectorXd scaled(coeffs.size());
  for (int j = 0; j < coeffs.size(); ++j)
    scaled(j) = std::pow(std::max(eig.lambda(j), 0.0), theta) * coeffs(j);
  return M * (eig.modes * scaled);
}

DampingMatrix build_damping_matrix(const WentzellOperator& op,
                                   const FractionalParams& params) {
  validate_params(params);
  const double exponent = params.exponent_convention == ExponentConvention::Theta
                              ? params.theta
                              : 2.0 * params.theta;
  DampingMatrix damping;
  damping.params = params;
  damping.mass_part = Eigen::MatrixXd(op.M);

  if (params.realization == DampingRealization::SpectralR1) {
    if (!op.eig || op.eig->count() < op.size())
      throw parameter_error(
          "SpectralR1 damping requires the complete (A, M) eigendecomposition");
    const Eigen::MatrixXd Atheta = spectral_power(*op.eig, op.M, exponent);
    damping.fractional_part = params.omega * (Atheta - damping.mass_part);
    damping.boundary_part = Eigen::MatrixXd::Zero(op.size(), op.size());
  } else {
    const EigenDecomposition beig = dense_generalized_eig(op.blocks.K_bulk, op.M);
    damping.fractional_part = params.omega * spectral_power(beig, op.M, exponent);
    damping.boundary_part =
        params.alpha * params.omega * Eigen::MatrixXd(op.blocks.K_bdry);
  }
  damping.total = damping.fractional_part + damping.boundary_part + damping.mass_part;
  damping.total = 0.5 * (damping.total + damping.total.transpose()).eval();
  return damping;
}

Eigen::VectorXd solve_wentzell_bvp(const OperatorBlocks& blocks,
                                   const Eigen::VectorXd& p1,
                                   const Eigen::VectorXd& p2) {
  const int nn = static_cast<int>(blocks.M_bulk.rows());
  const int nb = static_cast<int>(blocks.boundary_nodes.size());
  if (p1.size() != nn)
    throw dimension_error("solve_wentzell_bvp: bulk load length mismatch");
  if (p2.size() != nb)
    throw dimension_error("solve_wentzell_bvp: boundary load length mismatch");

  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(nn);
  for (int k = 0; k < nb; ++k) lifted(blocks.boundary_nodes[k]) = p2(k);
  const Eigen::VectorXd rhs = blocks.M_bulk * p1 + blocks.M_bdry * lifted;

  const Eigen::SparseMatrix<double> L = blocks.K_bulk + blocks.K_bdry + blocks.M_bdry;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
  if (solver.info() != Eigen::Success)
    throw numeric_error("boundary value problem: factorization failed");
  const Eigen::VectorXd u = solver.solve(rhs);
  const double rel =
      (L * u - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (rhs.norm() > 0 && rel > 1e-10)
    throw numeric_error("boundary value problem: relative residual " +
                        std::to_string(rel) + " exceeds 1e-10");
  return u;
}

Eigen::VectorXd isomorphism_probe(int size, std::uint64_t seed, int index) {
  if (index == 0) return Eigen::VectorXd::Ones(size);
  return detail::SplitMix(seed, static_cast<std::uint64_t>(index)).normal_vector(size);
}

double isomorphism_ratio(const WentzellOperator& op, const Eigen::VectorXd& U) {
  if (U.size() != op.size())
    throw dimension_error("isomorphism_ratio: vector length mismatch");
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass(op.M);
  const Eigen::VectorXd au = op.A * U;
  const Eigen::VectorXd y = mass.solve(au);
  const double image_sq = y.dot(au);  // ||M^{-1} A U||_M^2
  const double graph_sq = U.dot(op.M * U) + image_sq;
  if (!(graph_sq > 0.0))
    throw parameter_error("isomorphism_ratio: zero probe vector");
  return std::sqrt(image_sq / graph_sq);
}

IsomorphismReport estimate_isomorphism_constant(const WentzellOperator& op, int probes,
                                                std::uint64_t seed) {
  if (probes < 1) throw parameter_error("isomorphism probes must be >= 1");
  IsomorphismReport report;
  report.ratio_low = std::numeric_limits<double>::infinity();
  report.ratio_high = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double r = isomorphism_ratio(op, isomorphism_probe(op.size(), seed, i));
    report.ratio_low = std::min(report.ratio_low, r);
    report.ratio_high = std::max(report.ratio_high, r);
  }
  report.c_star = std::max(report.ratio_high, 1.0 / report.ratio_low);
  return report;
}

NormReport discrete_norms(const WentzellOperator& op, const Eigen::VectorXd& U,
                          const Eigen::VectorXd& V) {
  if (U.size() != op.size() || V.size() != op.size())
    throw dimension_error("discrete_norms: vector length mismatch");
  NormReport out;
  out.norm_X2_sq = V.dot(op.M * V);
  out.norm_V1_sq = U.dot(op.A * U);
  out.energy_pairing = U.dot(op.A * V);
  return out;
}

}  // namespace wentzell
