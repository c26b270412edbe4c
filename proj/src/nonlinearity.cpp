#include "wentzell/nonlinearity.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wentzell/detail/rng.hpp"

namespace wentzell {

namespace {

double leading_exponent(const std::vector<PowerTerm>& terms) {
  double p = 2.0;
  for (const auto& t : terms)
    if (t.c != 0.0) p = std::max(p, t.p);
  return p;
}

double leading_coefficient(const std::vector<PowerTerm>& terms, double p) {
  double c = 0.0;
  for (const auto& t : terms)
    if (t.c != 0.0 && std::abs(t.p - p) <= 1e-12) c += t.c;
  return c;
}

double eval_terms(const std::vector<PowerTerm>& terms, const SinTerm& sin_term,
                  double s, int derivative) {
  double out = 0.0;
  for (const auto& t : terms) {
    if (t.c == 0.0) continue;
    const double a = std::abs(s);
    switch (derivative) {
      case -1:  // antiderivative, zero at the origin
        out += t.c * std::pow(a, t.p) / t.p;
        break;
      case 0:
        out += t.c * (a == 0.0 ? 0.0 : std::pow(a, t.p - 2.0) * s);
        break;
      case 1:
        // pow(0, 0) == 1 covers the linear term at the origin.
        out += t.c * (t.p - 1.0) * std::pow(a, t.p - 2.0);
        break;
    }
  }
  if (sin_term.c != 0.0) {
    switch (derivative) {
      case -1:
        out += sin_term.c * (1.0 - std::cos(sin_term.k * s)) / sin_term.k;
        break;
      case 0:
        out += sin_term.c * std::sin(sin_term.k * s);
        break;
      case 1:
        out += sin_term.c * sin_term.k * std::cos(sin_term.k * s);
        break;
    }
  }
  return out;
}

}  // namespace

void NonlinearitySpec::infer_leading() {
  r1 = leading_exponent(f_terms);
  r2 = leading_exponent(g_terms);
  c_f = leading_coefficient(f_terms, r1);
  c_g = leading_coefficient(g_terms, r2);
}

double eval_nonlinearity(const NonlinearitySpec& spec, double s,
                         NonlinearityPart which) {
  switch (which) {
    case NonlinearityPart::F:
      return eval_terms(spec.f_terms, spec.f_sin, s, 0);
    case NonlinearityPart::FPrime:
      return eval_terms(spec.f_terms, spec.f_sin, s, 1);
    case NonlinearityPart::FTilde:
      return eval_terms(spec.f_terms, spec.f_sin, s, -1);
    case NonlinearityPart::G:
      return eval_terms(spec.g_terms, spec.g_sin, s, 0);
    case NonlinearityPart::GPrime:
      return eval_terms(spec.g_terms, spec.g_sin, s, 1);
    case NonlinearityPart::GTilde:
      return eval_terms(spec.g_terms, spec.g_sin, s, -1);
  }
  return 0.0;
}

std::vector<double> log_grid(double lo, double hi, int points_per_sign,
                             bool both_signs) {
  if (!(lo > 0.0) || !(hi > lo) || points_per_sign < 2)
    throw parameter_error("log_grid requires 0 < lo < hi and >= 2 points");
  std::vector<double> grid;
  grid.reserve(static_cast<size_t>(points_per_sign) * (both_signs ? 2 : 1));
  const double step = std::log(hi / lo) / (points_per_sign - 1);
  for (int i = 0; i < points_per_sign; ++i) {
    const double s = lo * std::exp(i * step);
    grid.push_back(s);
    if (both_signs) grid.push_back(-s);
  }
  return grid;
}

SignGrowthReport check_sign_growth(const NonlinearitySpec& spec,
                                   const std::vector<double>& grid) {
  if (grid.empty()) throw parameter_error("check_sign_growth: empty grid");
  SignGrowthReport rep;
  rep.min_f_over_s = std::numeric_limits<double>::infinity();
  rep.min_g_prime = std::numeric_limits<double>::infinity();
  rep.max_f_growth_ratio = 0.0;
  rep.max_g_growth_ratio = 0.0;
  for (double s : grid) {
    if (s == 0.0) continue;
    const double f = eval_nonlinearity(spec, s, NonlinearityPart::F);
    const double g = eval_nonlinearity(spec, s, NonlinearityPart::G);
    const double gp = eval_nonlinearity(spec, s, NonlinearityPart::GPrime);
    rep.min_f_over_s = std::min(rep.min_f_over_s, f / s);
    rep.min_g_prime = std::min(rep.min_g_prime, gp);
    rep.max_f_growth_ratio = std::max(
        rep.max_f_growth_ratio, std::abs(f) / (1.0 + std::pow(std::abs(s), spec.r1 - 1.0)));
    rep.max_g_growth_ratio = std::max(
        rep.max_g_growth_ratio, std::abs(g) / (1.0 + std::pow(std::abs(s), spec.r2 - 1.0)));
  }
  rep.sign_f_ok = rep.min_f_over_s > -spec.M1;
  rep.sign_g_ok = rep.min_g_prime >= -spec.M2;
  rep.growth_f_ok = rep.max_f_growth_ratio <= spec.ell1;
  rep.growth_g_ok = rep.max_g_growth_ratio <= spec.ell2;
  return rep;
}

BalanceReport check_balance(const NonlinearitySpec& spec, double volume,
                            double surface, double poincare, double omega,
                            const std::vector<double>& grid) {
  if (!(spec.epsilon > 0.0) || spec.epsilon >= omega)
    throw parameter_error("balance requires \"epsilon in (0, omega)\"; got epsilon = " +
                          std::to_string(spec.epsilon) + ", omega = " +
                          std::to_string(omega));
  const double exponent_floor = std::max(spec.r2, 2.0 * (spec.r2 - 1.0));
  if (spec.r1 < exponent_floor - 1e-12)
    throw parameter_error("balance requires r1 >= max{r2, 2(r2-1)}; got r1 = " +
                          std::to_string(spec.r1) + " < " +
                          std::to_string(exponent_floor));
  if (!(poincare > 0.0)) throw parameter_error("balance requires C_Omega > 0");
  if (grid.empty()) throw parameter_error("check_balance: empty grid");

  const double ratio = surface / volume;
  const double penalty =
      poincare * poincare * surface * surface / (4.0 * spec.epsilon * volume * volume);

  auto numerator = [&](double s) {
    const double f = eval_nonlinearity(spec, s, NonlinearityPart::F);
    const double g = eval_nonlinearity(spec, s, NonlinearityPart::G);
    const double gp = eval_nonlinearity(spec, s, NonlinearityPart::GPrime);
    const double flux = gp * s + g;
    return f * s + ratio * g * s - penalty * flux * flux;
  };

  BalanceReport rep;
  rep.probe_min = std::numeric_limits<double>::infinity();
  rep.probe_max = 0.0;
  rep.liminf_estimate = std::numeric_limits<double>::infinity();
  rep.probes.reserve(grid.size());
  for (double s : grid) {
    const double q = numerator(s) / std::pow(std::abs(s), spec.r1);
    rep.probes.emplace_back(s, q);
    rep.probe_min = std::min(rep.probe_min, std::abs(s));
    rep.probe_max = std::max(rep.probe_max, std::abs(s));
    rep.liminf_estimate = std::min(rep.liminf_estimate, q);
  }

  // Closed-form admissibility scenarios. Scenario 1: bulk dissipation beats
  // boundary anti-dissipation on exponents alone. Scenario 2: the critical
  // case r1 = 2(r2-1) with a coefficient threshold. Scenario 3: sublinear.
  rep.scenarios[0] = spec.c_f > 0.0 && spec.c_g < 0.0 &&
                     spec.r1 > exponent_floor + 1e-12;
  const double s2_threshold =
      (poincare * surface * spec.c_g * spec.r2 / volume) *
      (poincare * surface * spec.c_g * spec.r2 / volume) / (4.0 * spec.epsilon);
  rep.scenarios[1] = spec.r2 > 2.0 + 1e-12 &&
                     std::abs(spec.r1 - 2.0 * (spec.r2 - 1.0)) <= 1e-12 &&
                     spec.c_f > s2_threshold;
  const double s3_threshold = (poincare * surface * spec.c_g / volume) *
                              (poincare * surface * spec.c_g / volume) / spec.epsilon;
  rep.scenarios[2] = std::abs(spec.r1 - 2.0) <= 1e-12 &&
                     std::abs(spec.r2 - 2.0) <= 1e-12 &&
                     spec.c_f + ratio * spec.c_g > s3_threshold;

  double outer_min = std::numeric_limits<double>::infinity();
  for (const auto& [s, q] : rep.probes)
    if (std::abs(s) >= rep.probe_max / 10.0) outer_min = std::min(outer_min, q);

  const bool any_scenario = rep.scenarios[0] || rep.scenarios[1] || rep.scenarios[2];
  if (rep.liminf_estimate > 0.0 && any_scenario && outer_min > 1e-6)
    rep.verdict = BalanceVerdict::Satisfied;
  else if (outer_min <= 0.0)
    rep.verdict = BalanceVerdict::Violated;
  else
    rep.verdict = BalanceVerdict::Inconclusive;

  // Fit the pointwise lower bound  numerator(s) >= delta |s|^r1 - C_delta on
  // the probe grid extended by a linear sweep of the compact range.
  rep.fitted_margin = 0.5 * std::max(outer_min, 0.0);
  double offset = 0.0;
  auto account = [&](double s) {
    const double gap = rep.fitted_margin * std::pow(std::abs(s), spec.r1) - numerator(s);
    offset = std::max(offset, gap);
  };
  for (const auto& [s, q] : rep.probes) account(s);
  const int compact_samples = 400;
  for (int i = 0; i <= compact_samples; ++i) {
    const double s = rep.probe_min * i / compact_samples;
    account(s);
    account(-s);
  }
  rep.fitted_offset = offset;
  return rep;
}

double estimate_poincare_constant(const Mesh& mesh, const OperatorBlocks& blocks) {
  const int nn = mesh.node_count();
  const Eigen::SparseMatrix<double> M = blocks.M_bulk + blocks.M_bdry;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nn);
  const Eigen::VectorXd b = (blocks.M_bdry * ones) / mesh.surface;  // trace mean
  const Eigen::VectorXd m_ones = M * ones;
  const double m_total = ones.dot(m_ones);

  auto apply_P = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd w = v - ones * b.dot(v);
    Eigen::VectorXd z = blocks.M_bulk * w;
    z -= b * z.sum();
    return z;
  };
  auto deflate = [&](Eigen::VectorXd& v) { v -= ones * (m_ones.dot(v) / m_total); };

  // Pinned factorization of K_bulk: drop node 0, solve, zero-extend. The
  // compatible right-hand sides produced by apply_P make the full system hold.
  Eigen::SparseMatrix<double> kred(nn - 1, nn - 1);
  {
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < blocks.K_bulk.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(blocks.K_bulk, k); it; ++it)
        if (it.row() > 0 && it.col() > 0)
          trips.emplace_back(it.row() - 1, it.col() - 1, it.value());
    kred.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> stiff(kred);
  if (stiff.info() != Eigen::Success)
    throw numeric_error("poincare estimate: stiffness factorization failed");
  auto solve_K = [&](const Eigen::VectorXd& r) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(nn);
    x.tail(nn - 1) = stiff.solve(r.tail(nn - 1));
    return x;
  };

  Eigen::VectorXd v = mesh.nodes.col(mesh.kind == GeometryKind::Interval ? 0 : 1);
  deflate(v);
  v /= std::sqrt(v.dot(blocks.K_bulk * v));

  double rq = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const Eigen::VectorXd pv = apply_P(v);
    const double rq_new = v.dot(pv) / v.dot(blocks.K_bulk * v);
    Eigen::VectorXd x = solve_K(pv);
    deflate(x);
    const double knorm = std::sqrt(x.dot(blocks.K_bulk * x));
    if (!(knorm > 0.0)) throw numeric_error("poincare estimate: iteration collapsed");
    v = x / knorm;
    if (iter > 0 && std::abs(rq_new - rq) <= 1e-13 * std::max(rq_new, 1e-30)) {
      rq = rq_new;
      break;
    }
    rq = rq_new;
  }
  return std::sqrt(rq);
}

BoundaryProbeReport probe_boundary_interior_inequality(const Mesh& mesh,
                                                       const OperatorBlocks& blocks,
                                                       double eps, double s,
                                                       int samples,
                                                       std::uint64_t seed) {
  if (!(s > 1.0)) throw parameter_error("boundary probe requires s > 1");
  if (!(eps > 0.0)) throw parameter_error("boundary probe requires eps > 0");
  if (samples < 1) throw parameter_error("boundary probe requires samples >= 1");

  const double gamma = std::max(s, 2.0 * (s - 1.0));
  BoundaryProbeReport rep;
  rep.epsilon = eps;
  rep.s = s;
  rep.gamma = gamma;
  rep.samples = samples;

  const int nn = mesh.node_count();
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd u;
    if (i == 0) {
      u = Eigen::VectorXd::Ones(nn);
    } else {
      detail::SplitMix rng(seed, static_cast<std::uint64_t>(i));
      const double amplitude = std::pow(10.0, 2.0 * rng.next_uniform() - 1.0);
      u = amplitude * rng.normal_vector(nn);
    }
    const Eigen::VectorXd btrace = mesh.boundary_quad.interp * mesh.trace(u);
    double lhs = 0.0;
    for (int q = 0; q < btrace.size(); ++q)
      lhs += mesh.boundary_quad.weights(q) * std::pow(std::abs(btrace(q)), s);
    const double grad_sq = u.dot(blocks.K_bulk * u);
    const Eigen::VectorXd bulkvals = mesh.bulk_quad.interp * u;
    double bulk = 0.0;
    for (int q = 0; q < bulkvals.size(); ++q)
      bulk += mesh.bulk_quad.weights(q) * std::pow(std::abs(bulkvals(q)), gamma);
    const double required = (lhs - eps * grad_sq) / (bulk + 1.0);
    rep.c_eps = std::max(rep.c_eps, required);
  }
  return rep;
}

}  // namespace wentzell
