#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wentzell/dynamics.hpp"
#include "wentzell/geometry.hpp"
#include "wentzell/nonlinearity.hpp"
#include "wentzell/operators.hpp"

namespace wentzell {

struct FieldRecipe {
  enum class Kind { Zero, Constant, Gaussian, Cosine };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  double center_x = 0.0;  // gaussian
  double center_y = 0.0;
  double width = 0.1;
  int k_x = 1;  // cosine mode counts
  int k_y = 0;
};

struct ModalImpulse {
  int index = 1;  // 1-based mode number
  double amplitude = 0.0;
  double velocity = 0.0;
};

struct InitialData {
  std::vector<ModalImpulse> modes;
  FieldRecipe u0;
  FieldRecipe v0;
};

struct TimeParams {
  double T = 1.0;
  double dt = 1e-3;
  int sample_stride = 1;
};

struct GalerkinParams {
  int n = 8;
  std::vector<int> convergence;
};

struct CheckToggles {
  bool sign_growth = true;
  bool balance = true;
  bool energy_monotone = true;
  bool energy_identity = true;
  bool weak_residual = false;
  bool apriori_bound = true;
  bool maximum_principle = true;  // bvp command, nonnegative loads only
  double identity_tol = 1e-6;
  double monotone_tol = 1e-10;
  double weak_residual_tol = 1e-6;
  int weak_residual_modes = 4;
};

struct ProbeParams {
  int isomorphism_probes = 10;
  double boundary_eps = 0.5;
  double boundary_s = 2.0;
  int boundary_samples = 32;
};

struct BalanceGrid {
  double s_min = 1e2;
  double s_max = 1e6;
  int points = 240;  // per sign
};

struct BvpLoads {
  FieldRecipe p1;
  FieldRecipe p2;
};

struct OutputParams {
  std::string directory = "out";
  bool dump_matrices = false;
};

struct RunConfig {
  int schema_version = 1;
  GeometrySpec geometry;
  FractionalParams fractional;
  NonlinearitySpec nonlinearity;
  InitialData initial;
  TimeParams time;
  GalerkinParams galerkin;
  CheckToggles checks;
  ProbeParams probes;
  BalanceGrid balance_grid;
  BvpLoads bvp;
  OutputParams output;
  std::uint64_t seed = 0;

  /// Canonical serialized form with all defaults applied; hash of this string
  /// is the input digest.
  std::string canonical() const;
  std::string digest() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

/// Sample a closed-form field at arbitrary coordinates (rows of `points`).
Eigen::VectorXd sample_field(const FieldRecipe& recipe, const GeometrySpec& geom,
                             const Eigen::MatrixX2d& points);

}  // namespace wentzell
