#include "doctest.h"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cmath>

#include "support/oracles.hpp"
#include "wentzell/detail/rng.hpp"
#include "wentzell/operators.hpp"

using namespace wentzell;

namespace {

Mesh make_interval(double L, int elements) {
  GeometrySpec spec;
  spec.kind = GeometryKind::Interval;
  spec.length = L;
  spec.bulk_elements = elements;
  return build_geometry(spec);
}

Mesh make_slab(double L, double ell, int nx, int ny) {
  GeometrySpec spec;
  spec.kind = GeometryKind::PeriodicSlab;
  spec.length = L;
  spec.circumference = ell;
  spec.periodic_points = nx;
  spec.bulk_elements = ny;
  return build_geometry(spec);
}

WentzellOperator make_operator(const Mesh& mesh) {
  return assemble_wentzell(assemble_blocks(mesh));
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

/// Smallest pencil eigenvalues via the test-side Sturm bisection oracle.
std::vector<double> sturm_eigs(const WentzellOperator& op, int count) {
  Eigen::VectorXd ad, ao, md, mo;
  oracles::extract_tridiag(op.A, ad, ao);
  oracles::extract_tridiag(op.M, md, mo);
  double hi = 10.0;
  for (int i = 0; i < ad.size(); ++i) hi = std::max(hi, 8.0 * ad(i) / md(i));
  return oracles::tridiag_smallest_eigs(ad, ao, md, mo, count, 0.0, hi);
}

}  // namespace

TEST_CASE("hand-assembled interval blocks, L=1 with two elements") {
  const Mesh mesh = make_interval(1.0, 2);
  const OperatorBlocks blocks = assemble_blocks(mesh);

  Eigen::MatrixXd k_expect(3, 3), m_expect(3, 3);
  k_expect << 2, -2, 0, -2, 4, -2, 0, -2, 2;
  m_expect << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  m_expect /= 12.0;
  CHECK(max_abs(Eigen::MatrixXd(blocks.K_bulk) - k_expect) < 1e-14);
  CHECK(max_abs(Eigen::MatrixXd(blocks.M_bulk) - m_expect) < 1e-14);

  // Counting measure on the two endpoints; no surface stiffness in 1-D.
  Eigen::MatrixXd mg(Eigen::MatrixXd(blocks.M_bdry));
  CHECK(mg(0, 0) == doctest::Approx(1.0));
  CHECK(mg(2, 2) == doctest::Approx(1.0));
  CHECK(mg.cwiseAbs().sum() == doctest::Approx(2.0));
  CHECK(Eigen::MatrixXd(blocks.K_bdry).cwiseAbs().sum() == 0.0);
}

TEST_CASE("block invariants: symmetry, stiffness kernels, definiteness") {
  for (const Mesh& mesh : {make_interval(1.0, 9), make_slab(1.0, 2.0, 8, 5)}) {
    const OperatorBlocks blocks = assemble_blocks(mesh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.node_count());
    CHECK((blocks.K_bulk * ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((blocks.K_bdry * ones).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto* b : {&blocks.M_bulk, &blocks.K_bulk, &blocks.M_bdry, &blocks.K_bdry}) {
      const Eigen::MatrixXd d(*b);
      CHECK(max_abs(d - d.transpose()) <= 1e-12 * std::max(1.0, max_abs(d)));
    }
    // M_bulk + M_bdry positive definite, each part PSD.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Eigen::MatrixXd(blocks.M_bulk + blocks.M_bdry));
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esb(Eigen::MatrixXd(blocks.M_bdry));
    CHECK(esb.eigenvalues().minCoeff() > -1e-13);
  }
}

TEST_CASE("composite operator: constants, symmetry, smallest eigenvalue 1") {
  for (const Mesh& mesh : {make_interval(1.0, 16), make_slab(1.0, 1.0, 8, 4)}) {
    const WentzellOperator op = make_operator(mesh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
    CHECK(((op.A - op.M) * ones).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd a(op.A);
    CHECK(max_abs(a - a.transpose()) <= 1e-12 * max_abs(a));

    const EigenDecomposition eig = solve_eigenproblem(op, 4);
    CHECK(std::abs(eig.lambda(0) - 1.0) < 1e-9);
    // Constant eigenvector, normalized in M.
    const Eigen::VectorXd w1 = eig.modes.col(0);
    CHECK((w1 - w1(0) * ones).cwiseAbs().maxCoeff() < 1e-9 * std::abs(w1(0)));
    CHECK(w1(0) > 0.0);  // sign convention
  }
}

TEST_CASE("dense eigensolve agrees with the Sturm bisection oracle") {
  const WentzellOperator op = make_operator(make_interval(1.0, 32));
  const EigenDecomposition eig = solve_eigenproblem(op, 6);
  const auto oracle = sturm_eigs(op, 6);
  for (int j = 0; j < 6; ++j)
    CHECK(eig.lambda(j) == doctest::Approx(oracle[j]).epsilon(1e-10));
}

TEST_CASE("Sturm oracle matches the closed-form P1 Neumann spectrum") {
  // Pure (K, M) pencil without boundary mass: mu_k = 6(1-cos k pi h)/(h^2(2+cos k pi h)).
  const int ne = 16;
  const Mesh mesh = make_interval(1.0, ne);
  const OperatorBlocks blocks = assemble_blocks(mesh);
  Eigen::VectorXd kd, ko, md, mo;
  oracles::extract_tridiag(blocks.K_bulk, kd, ko);
  oracles::extract_tridiag(blocks.M_bulk, md, mo);
  const auto eigs = oracles::tridiag_smallest_eigs(kd, ko, md, mo, 4, -1.0, 1e6);
  const double h = 1.0 / ne;
  for (int k = 1; k <= 3; ++k) {
    const double c = std::cos(k * M_PI * h);
    const double expect = 6.0 * (1.0 - c) / (h * h * (2.0 + c));
    CHECK(eigs[k] == doctest::Approx(expect).epsilon(1e-9));
  }
  CHECK(std::abs(eigs[0]) < 1e-9);
}

TEST_CASE("eigendecomposition contract: orthonormality, residual, ordering, signs") {
  const WentzellOperator op = make_operator(make_slab(1.0, 1.5, 8, 4));
  const int n = 12;
  const EigenDecomposition eig = solve_eigenproblem(op, n);
  const Eigen::MatrixXd gram = eig.modes.transpose() * op.M * eig.modes;
  CHECK(max_abs(gram - Eigen::MatrixXd::Identity(n, n)) < 1e-9);
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd mw = op.M * eig.modes.col(j);
    const double res = (op.A * eig.modes.col(j) - eig.lambda(j) * mw).norm();
    CHECK(res <= 1e-9 * eig.lambda(j) * mw.norm());
    if (j > 0) CHECK(eig.lambda(j) >= eig.lambda(j - 1));
    const double scale = eig.modes.col(j).cwiseAbs().maxCoeff();
    for (int i = 0; i < op.size(); ++i)
      if (std::abs(eig.modes(i, j)) > 1e-12 * scale) {
        CHECK(eig.modes(i, j) > 0.0);
        break;
      }
  }
  CHECK_THROWS_AS(solve_eigenproblem(op, op.size() + 1), parameter_error);
}

TEST_CASE("interval eigenvalues converge at second order to the fine-grid oracle") {
  // First five nonconstant modes against a 2048-element Sturm oracle.
  const auto oracle = sturm_eigs(make_operator(make_interval(1.0, 2048)), 6);
  std::array<std::vector<double>, 3> coarse;
  const int meshes[3] = {16, 32, 64};
  for (int m = 0; m < 3; ++m) {
    const auto eigs = sturm_eigs(make_operator(make_interval(1.0, meshes[m])), 6);
    coarse[m] = eigs;
  }
  for (int j = 1; j <= 5; ++j) {
    const double e0 = coarse[0][j] - oracle[j];
    const double e1 = coarse[1][j] - oracle[j];
    const double e2 = coarse[2][j] - oracle[j];
    const double order01 = std::log2(std::abs(e0 / e1));
    const double order12 = std::log2(std::abs(e1 / e2));
    CHECK(order01 >= 1.9);
    CHECK(order12 >= 1.9);
    CHECK(order01 <= 2.6);
  }
}

TEST_CASE("fractional power: integer endpoints, constants, monotonicity") {
  const Mesh mesh = make_interval(1.0, 24);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  detail::SplitMix rng(3, 5);
  const Eigen::VectorXd x = rng.normal_vector(op.size());

  const Eigen::VectorXd a1 = apply_fractional_power(*op.eig, op.M, 1.0, x);
  CHECK((a1 - op.A * x).norm() <= 1e-9 * (op.A * x).norm());
  const Eigen::VectorXd a0 = apply_fractional_power(*op.eig, op.M, 0.0, x);
  CHECK((a0 - op.M * x).norm() <= 1e-9 * (op.M * x).norm());

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
  for (double theta : {0.0, 0.3, 0.5, 0.75, 1.0}) {
    const Eigen::VectorXd r = apply_fractional_power(*op.eig, op.M, theta, ones);
    CHECK((r - op.M * ones).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Half-power semigroup through a mass solve.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass(op.M);
  const Eigen::VectorXd half = apply_fractional_power(*op.eig, op.M, 0.5, x);
  const Eigen::VectorXd twice =
      apply_fractional_power(*op.eig, op.M, 0.5, mass.solve(half));
  CHECK((twice - op.A * x).norm() <= 1e-8 * (op.A * x).norm());

  // theta1 < theta2 implies x^T A^theta1 x <= x^T A^theta2 x (Lambda >= 1).
  double prev = -1e300;
  for (double theta : {0.1, 0.4, 0.7, 1.0}) {
    const double form = x.dot(apply_fractional_power(*op.eig, op.M, theta, x));
    CHECK(form >= prev - 1e-10 * std::abs(form));
    prev = form;
  }
  CHECK_THROWS_AS(apply_fractional_power(*op.eig, op.M, 1.5, x), parameter_error);
  CHECK_THROWS_AS(apply_fractional_power(*op.eig, op.M, -0.1, x), parameter_error);
}

TEST_CASE("spectral calculus composition law on the full decomposition") {
  const Mesh mesh = make_interval(1.0, 16);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> mass(op.M);
  detail::SplitMix rng(11, 2);
  const Eigen::VectorXd x = rng.normal_vector(op.size());
  const double theta = 0.65;
  const Eigen::VectorXd part = apply_fractional_power(*op.eig, op.M, 1.0 - theta, x);
  const Eigen::VectorXd whole =
      apply_fractional_power(*op.eig, op.M, theta, mass.solve(part));
  CHECK((whole - op.A * x).norm() <= 1e-8 * (op.A * x).norm());
}

TEST_CASE("damping realizations coincide at theta=1, alpha=1") {
  const Mesh mesh = make_interval(1.0, 20);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  for (double omega : {1.0, 0.5, 0.1}) {
    FractionalParams r1{1.0, 1.0, omega, DampingRealization::SpectralR1,
                        ExponentConvention::Theta};
    FractionalParams r2{1.0, 1.0, omega, DampingRealization::BlockR2,
                        ExponentConvention::Theta};
    const DampingMatrix d1 = build_damping_matrix(op, r1);
    const DampingMatrix d2 = build_damping_matrix(op, r2);
    const Eigen::MatrixXd expect =
        omega * Eigen::MatrixXd(op.blocks.K_bulk + op.blocks.K_bdry) +
        Eigen::MatrixXd(op.M);
    CHECK(max_abs(d1.total - d2.total) <= 1e-9 * max_abs(expect));
    CHECK(max_abs(d1.total - expect) <= 1e-9 * max_abs(expect));
  }
}

TEST_CASE("damping: omega -> 0 limit collapses to the mass matrix") {
  const Mesh mesh = make_interval(1.0, 16);
  WentzellOperator op = make_operator(mesh);
  FractionalParams params{0.75, 0.5, 1e-12, DampingRealization::BlockR2,
                          ExponentConvention::Theta};
  const DampingMatrix d = build_damping_matrix(op, params);
  CHECK(max_abs(d.total - Eigen::MatrixXd(op.M)) <=
        1e-10 * max_abs(Eigen::MatrixXd(op.M)));
}

TEST_CASE("damping dominates the mass form across the parameter grid") {
  const Mesh mesh = make_interval(1.0, 20);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  for (double theta : {0.5, 0.75, 1.0})
    for (double alpha : {0.25, 0.5, 1.0})
      for (double omega : {0.1, 0.5, 1.0}) {
        FractionalParams params{theta, alpha, omega, DampingRealization::BlockR2,
                                ExponentConvention::Theta};
        const DampingMatrix d = build_damping_matrix(op, params);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
            d.total, Eigen::MatrixXd(op.M), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
        CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-9);
      }
  // SpectralR1 at alpha = 1 likewise.
  FractionalParams r1{0.75, 1.0, 0.5, DampingRealization::SpectralR1,
                      ExponentConvention::Theta};
  const DampingMatrix d = build_damping_matrix(op, r1);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      d.total, Eigen::MatrixXd(op.M), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  CHECK(es.eigenvalues().minCoeff() >= 1.0 - 1e-9);
}

TEST_CASE("damping parameter validation") {
  const Mesh mesh = make_interval(1.0, 8);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  FractionalParams bad{0.75, 0.5, 1.0, DampingRealization::SpectralR1,
                       ExponentConvention::Theta};
  CHECK_THROWS_AS(build_damping_matrix(op, bad), parameter_error);
  FractionalParams theta_low{0.3, 1.0, 1.0, DampingRealization::BlockR2,
                             ExponentConvention::Theta};
  CHECK_THROWS_AS(build_damping_matrix(op, theta_low), parameter_error);
  WentzellOperator truncated = make_operator(mesh);
  truncated.eig = solve_eigenproblem(truncated, 3);
  FractionalParams r1{0.75, 1.0, 1.0, DampingRealization::SpectralR1,
                      ExponentConvention::Theta};
  CHECK_THROWS_AS(build_damping_matrix(truncated, r1), parameter_error);
}

TEST_CASE("two_theta exponent convention doubles the spectral exponent") {
  const Mesh mesh = make_interval(1.0, 12);
  WentzellOperator op = make_operator(mesh);
  op.eig = solve_eigenproblem(op, op.size());
  FractionalParams doubled{0.5, 1.0, 1.0, DampingRealization::SpectralR1,
                           ExponentConvention::TwoTheta};
  FractionalParams plain{1.0, 1.0, 1.0, DampingRealization::SpectralR1,
                         ExponentConvention::Theta};
  const DampingMatrix a = build_damping_matrix(op, doubled);
  const DampingMatrix b = build_damping_matrix(op, plain);
  CHECK(max_abs(a.total - b.total) <= 1e-9 * max_abs(b.total));
}

TEST_CASE("boundary value problem: constants and zero data") {
  for (const Mesh& mesh : {make_interval(1.0, 12), make_slab(1.0, 1.0, 8, 4)}) {
    const OperatorBlocks blocks = assemble_blocks(mesh);
    const Eigen::VectorXd p1 = Eigen::VectorXd::Zero(mesh.node_count());
    const Eigen::VectorXd p2 = Eigen::VectorXd::Ones(mesh.boundary_count());
    const Eigen::VectorXd u = solve_wentzell_bvp(blocks, p1, p2);
    CHECK((u - Eigen::VectorXd::Ones(mesh.node_count())).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::VectorXd zero =
        solve_wentzell_bvp(blocks, p1, Eigen::VectorXd::Zero(mesh.boundary_count()));
    CHECK(zero.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("boundary value problem: single Fourier mode stays on its mode") {
  const int nx = 16, ny = 6;
  const Mesh mesh = make_slab(1.0, 2.0, nx, ny);
  const OperatorBlocks blocks = assemble_blocks(mesh);
  const int k = 3;
  Eigen::VectorXd p1(mesh.node_count());
  for (int i = 0; i < mesh.node_count(); ++i)
    p1(i) = std::sin(2.0 * M_PI * k * mesh.nodes(i, 0) / 2.0) *
            (1.0 + mesh.nodes(i, 1));
  const Eigen::VectorXd u =
      solve_wentzell_bvp(blocks, p1, Eigen::VectorXd::Zero(mesh.boundary_count()));

  const double scale = u.cwiseAbs().maxCoeff();
  for (int j = 0; j <= ny; ++j) {
    for (int m = 0; m <= nx / 2; ++m) {
      if (m == k) continue;
      double re = 0.0, im = 0.0;
      for (int i = 0; i < nx; ++i) {
        re += u(j * nx + i) * std::cos(2.0 * M_PI * m * i / nx);
        im += u(j * nx + i) * std::sin(2.0 * M_PI * m * i / nx);
      }
      CHECK(std::hypot(re, im) <= 1e-10 * nx * scale);
    }
  }
}

TEST_CASE("boundary value problem: discrete maximum principle probe") {
  const Mesh mesh = make_interval(1.0, 32);
  const OperatorBlocks blocks = assemble_blocks(mesh);
  detail::SplitMix rng(17, 0);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::VectorXd p1 = rng.normal_vector(mesh.node_count()).cwiseAbs();
    const Eigen::VectorXd p2 = rng.normal_vector(mesh.boundary_count()).cwiseAbs();
    const Eigen::VectorXd u = solve_wentzell_bvp(blocks, p1, p2);
    CHECK(u.minCoeff() >= -1e-10);
  }
}

TEST_CASE("bvp rejects mismatched load lengths") {
  const Mesh mesh = make_interval(1.0, 8);
  const OperatorBlocks blocks = assemble_blocks(mesh);
  CHECK_THROWS_AS(solve_wentzell_bvp(blocks, Eigen::VectorXd::Zero(3),
                                     Eigen::VectorXd::Zero(2)),
                  dimension_error);
  CHECK_THROWS_AS(solve_wentzell_bvp(blocks, Eigen::VectorXd::Zero(9),
                                     Eigen::VectorXd::Zero(3)),
                  dimension_error);
}

TEST_CASE("isomorphism report: envelope and probe contracts") {
  const WentzellOperator op = make_operator(make_interval(1.0, 16));
  const double constant_ratio = isomorphism_ratio(op, Eigen::VectorXd::Ones(op.size()));
  CHECK(std::isfinite(constant_ratio));
  CHECK(constant_ratio > 0.0);

  const IsomorphismReport one = estimate_isomorphism_constant(op, 1, 42);
  CHECK(one.ratio_low == doctest::Approx(constant_ratio));
  CHECK(one.ratio_high == doctest::Approx(constant_ratio));

  const IsomorphismReport ten = estimate_isomorphism_constant(op, 10, 42);
  const IsomorphismReport hundred = estimate_isomorphism_constant(op, 100, 42);
  CHECK(hundred.ratio_low <= ten.ratio_low + 1e-15);
  CHECK(hundred.ratio_high >= ten.ratio_high - 1e-15);
  CHECK(ten.c_star >= 1.0);

  // Extremes bracket any re-submitted individual probe.
  for (int i = 0; i < 10; ++i) {
    const double r = isomorphism_ratio(op, isomorphism_probe(op.size(), 42, i));
    CHECK(r >= ten.ratio_low - 1e-15);
    CHECK(r <= ten.ratio_high + 1e-15);
  }
  CHECK_THROWS_AS(estimate_isomorphism_constant(op, 0, 1), parameter_error);
}

TEST_CASE("discrete norms: constants, zeros, quadratic scaling") {
  const WentzellOperator op = make_operator(make_interval(1.0, 10));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
  const NormReport r = discrete_norms(op, ones, ones);
  CHECK(r.norm_X2_sq == doctest::Approx(3.0).epsilon(1e-12));   // 1 bulk + 2 boundary
  CHECK(r.norm_V1_sq == doctest::Approx(3.0).epsilon(1e-12));   // gradients vanish
  CHECK(r.energy_pairing == doctest::Approx(3.0).epsilon(1e-12));

  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(op.size());
  const NormReport z = discrete_norms(op, zeros, zeros);
  CHECK(z.norm_X2_sq == 0.0);
  CHECK(z.norm_V1_sq == 0.0);

  detail::SplitMix rng(5, 9);
  const Eigen::VectorXd u = rng.normal_vector(op.size());
  const NormReport a = discrete_norms(op, u, u);
  const NormReport b = discrete_norms(op, (2.0 * u).eval(), (2.0 * u).eval());
  CHECK(b.norm_X2_sq == doctest::Approx(4.0 * a.norm_X2_sq).epsilon(1e-12));
  CHECK(b.norm_V1_sq == doctest::Approx(4.0 * a.norm_V1_sq).epsilon(1e-12));
  CHECK_THROWS_AS(discrete_norms(op, Eigen::VectorXd::Zero(3), zeros), dimension_error);
}
