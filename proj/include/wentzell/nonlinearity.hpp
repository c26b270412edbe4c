#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "wentzell/operators.hpp"

namespace wentzell {

/// Signed power term c*|s|^{p-2}*s with p >= 2; odd in s, antiderivative
/// c*|s|^p / p.
struct PowerTerm {
  double c = 0.0;
  double p = 2.0;
};

/// Bounded Lipschitz perturbation c*sin(k*s).
struct SinTerm {
  double c = 0.0;
  double k = 1.0;
};

/// Closed-form nonlinearity pair (f, g) with the structural constants the
/// admissibility conditions consume: leading exponents r1, r2, leading
/// coefficients c_f, c_g, sign constants M1, M2, growth constants l1, l2, and
/// the balance margin epsilon (required < omega).
struct NonlinearitySpec {
  std::vector<PowerTerm> f_terms;
  std::vector<PowerTerm> g_terms;
  SinTerm f_sin;
  SinTerm g_sin;
  double r1 = 2.0;
  double r2 = 2.0;
  double c_f = 0.0;
  double c_g = 0.0;
  double M1 = 1.0;
  double M2 = 1.0;
  double ell1 = 1.0;
  double ell2 = 1.0;
  double epsilon = 0.5;

  /// Fill r1/r2/c_f/c_g from the highest-exponent term when unset (c == 0).
  void infer_leading();
};

enum class NonlinearityPart { F, FPrime, FTilde, G, GPrime, GTilde };

double eval_nonlinearity(const NonlinearitySpec& spec, double s, NonlinearityPart which);

/// Log-spaced probe grid on [lo, hi]; mirrored to negative values when
/// both_signs is set.
std::vector<double> log_grid(double lo, double hi, int points_per_sign,
                             bool both_signs);

struct SignGrowthReport {
  double min_f_over_s = 0.0;
  double min_g_prime = 0.0;
  double max_f_growth_ratio = 0.0;
  double max_g_growth_ratio = 0.0;
  bool sign_f_ok = false;
  bool sign_g_ok = false;
  bool growth_f_ok = false;
  bool growth_g_ok = false;

  bool all_ok() const { return sign_f_ok && sign_g_ok && growth_f_ok && growth_g_ok; }
};

SignGrowthReport check_sign_growth(const NonlinearitySpec& spec,
                                   const std::vector<double>& grid);

enum class BalanceVerdict { Satisfied, Violated, Inconclusive };

struct BalanceReport {
  double liminf_estimate = 0.0;  // min of the balance quotient over the grid
  double probe_min = 0.0;        // [S_min, S_max] of |s|
  double probe_max = 0.0;
  std::array<bool, 3> scenarios = {false, false, false};
  BalanceVerdict verdict = BalanceVerdict::Inconclusive;
  double fitted_margin = 0.0;    // delta
  double fitted_offset = 0.0;    // C_delta
  std::vector<std::pair<double, double>> probes;  // (s, quotient)
};

/// Evaluates the balance quotient
///   [f(s)s + (|G|/|O|) g(s)s - (C^2|G|^2/(4 eps |O|^2)) |g'(s)s + g(s)|^2] / |s|^r1
/// over the grid and the three closed-form admissibility scenarios.
BalanceReport check_balance(const NonlinearitySpec& spec, double volume,
                            double surface, double poincare, double omega,
                            const std::vector<double>& grid);

/// Largest Rayleigh quotient ||u - <u>_Gamma||_{L2(Omega)} / ||grad u||_{L2(Omega)}
/// over nonconstant discrete fields; deterministic deflated power iteration.
double estimate_poincare_constant(const Mesh& mesh, const OperatorBlocks& blocks);

struct BoundaryProbeReport {
  double c_eps = 0.0;
  double epsilon = 0.0;
  double s = 0.0;
  double gamma = 0.0;  // max(s, 2(s-1))
  int samples = 0;
};

/// Smallest C_eps making  ||u||^s_{Ls(Gamma)} <= eps ||grad u||^2 + C_eps (||u||^g_{Lg(Omega)} + 1)
/// hold over `samples` random discrete fields (prefix-stable in the sample count).
BoundaryProbeReport probe_boundary_interior_inequality(const Mesh& mesh,
                                                       const OperatorBlocks& blocks,
                                                       double eps, double s,
                                                       int samples,
                                                       std::uint64_t seed);

}  // namespace wentzell
