#include "wentzell/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wentzell/io.hpp"

namespace wentzell {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw config_error("config error at `" + path + "`: " + what);
}

const json* maybe(const json& node, const std::string& key) {
  auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

double get_number(const json& node, const std::string& path, double fallback) {
  if (node.is_null()) return fallback;
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

double require_number(const json& parent, const std::string& key,
                      const std::string& path) {
  const json* n = maybe(parent, key);
  if (!n) fail(path, "missing required field");
  if (!n->is_number()) fail(path, "expected a number");
  return n->get<double>();
}

int get_int(const json& node, const std::string& path, int fallback) {
  if (node.is_null()) return fallback;
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<int>();
}

bool get_bool(const json& node, const std::string& path, bool fallback) {
  if (node.is_null()) return fallback;
  if (!node.is_boolean()) fail(path, "expected a boolean");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& path,
                       const std::string& fallback) {
  if (node.is_null()) return fallback;
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

json at_or_null(const json& parent, const std::string& key) {
  const json* n = maybe(parent, key);
  return n ? *n : json();
}

GeometrySpec parse_geometry(const json& node) {
  GeometrySpec spec;
  if (node.is_null()) fail("geometry", "missing required section");
  const std::string kind = get_string(at_or_null(node, "kind"), "geometry.kind",
                                      "interval");
  if (kind == "interval")
    spec.kind = GeometryKind::Interval;
  else if (kind == "periodic_slab")
    spec.kind = GeometryKind::PeriodicSlab;
  else
    fail("geometry.kind", "expected \"interval\" or \"periodic_slab\"");
  spec.length = get_number(at_or_null(node, "length"), "geometry.length", 1.0);
  spec.circumference = get_number(at_or_null(node, "circumference"),
                                  "geometry.circumference", 1.0);
  spec.bulk_elements =
      get_int(at_or_null(node, "bulk_elements"), "geometry.bulk_elements", 64);
  spec.periodic_points =
      get_int(at_or_null(node, "periodic_points"), "geometry.periodic_points", 16);
  if (!(spec.length > 0.0)) fail("geometry.length", "must be positive");
  if (spec.kind == GeometryKind::PeriodicSlab && !(spec.circumference > 0.0))
    fail("geometry.circumference", "must be positive");
  if (spec.bulk_elements < 2) fail("geometry.bulk_elements", "must be >= 2");
  if (spec.kind == GeometryKind::PeriodicSlab) {
    const int p = spec.periodic_points;
    if (p < 4 || (p & (p - 1)) != 0)
      fail("geometry.periodic_points", "must be a power of two >= 4");
  }
  return spec;
}

FractionalParams parse_fractional(const json& node) {
  FractionalParams params;
  if (node.is_null()) return params;
  params.theta = get_number(at_or_null(node, "theta"), "fractional.theta", 0.5);
  if (!(params.theta >= 0.5 && params.theta <= 1.0))
    fail("fractional.theta", "must lie in [0.5, 1] (theta = 1 is the classical "
                             "strongly damped limit); got " +
                                 format_double(params.theta));
  params.alpha = get_number(at_or_null(node, "alpha"), "fractional.alpha", 1.0);
  if (!(params.alpha > 0.0 && params.alpha <= 1.0))
    fail("fractional.alpha", "must lie in (0, 1]");
  params.omega = get_number(at_or_null(node, "omega"), "fractional.omega", 1.0);
  if (!(params.omega > 0.0 && params.omega <= 1.0))
    fail("fractional.omega", "must lie in (0, 1]");
  const std::string realization = get_string(at_or_null(node, "realization"),
                                             "fractional.realization", "block_r2");
  if (realization == "block_r2")
    params.realization = DampingRealization::BlockR2;
  else if (realization == "spectral_r1")
    params.realization = DampingRealization::SpectralR1;
  else
    fail("fractional.realization", "expected \"block_r2\" or \"spectral_r1\"");
  const std::string convention =
      get_string(at_or_null(node, "exponent_convention"),
                 "fractional.exponent_convention", "theta");
  if (convention == "theta")
    params.exponent_convention = ExponentConvention::Theta;
  else if (convention == "two_theta")
    params.exponent_convention = ExponentConvention::TwoTheta;
  else
    fail("fractional.exponent_convention", "expected \"theta\" or \"two_theta\"");
  if (params.realization == DampingRealization::SpectralR1 && params.alpha != 1.0)
    fail("fractional.alpha", "spectral_r1 realization requires alpha = 1");
  return params;
}

std::vector<PowerTerm> parse_terms(const json& node, const std::string& path) {
  std::vector<PowerTerm> terms;
  if (node.is_null()) return terms;
  if (!node.is_array()) fail(path, "expected an array of {c, p} terms");
  int i = 0;
  for (const auto& item : node) {
    const std::string ipath = path + "[" + std::to_string(i++) + "]";
    PowerTerm term;
    term.c = require_number(item, "c", ipath + ".c");
    term.p = require_number(item, "p", ipath + ".p");
    if (!(term.p >= 2.0)) fail(ipath + ".p", "power terms require p >= 2");
    terms.push_back(term);
  }
  return terms;
}

SinTerm parse_sin(const json& node, const std::string& path) {
  SinTerm term;
  if (node.is_null()) return term;
  term.c = get_number(at_or_null(node, "c"), path + ".c", 0.0);
  term.k = get_number(at_or_null(node, "k"), path + ".k", 1.0);
  if (term.c != 0.0 && term.k == 0.0) fail(path + ".k", "must be nonzero");
  return term;
}

NonlinearitySpec parse_nonlinearity(const json& node, double omega) {
  NonlinearitySpec spec;
  if (node.is_null()) {
    spec.epsilon = 0.5 * omega;
    return spec;
  }
  spec.f_terms = parse_terms(at_or_null(node, "f_terms"), "nonlinearity.f_terms");
  spec.g_terms = parse_terms(at_or_null(node, "g_terms"), "nonlinearity.g_terms");
  spec.f_sin = parse_sin(at_or_null(node, "f_sin"), "nonlinearity.f_sin");
  spec.g_sin = parse_sin(at_or_null(node, "g_sin"), "nonlinearity.g_sin");

  NonlinearitySpec inferred = spec;
  inferred.infer_leading();
  spec.r1 = get_number(at_or_null(node, "r1"), "nonlinearity.r1", inferred.r1);
  spec.r2 = get_number(at_or_null(node, "r2"), "nonlinearity.r2", inferred.r2);
  spec.c_f = get_number(at_or_null(node, "c_f"), "nonlinearity.c_f", inferred.c_f);
  spec.c_g = get_number(at_or_null(node, "c_g"), "nonlinearity.c_g", inferred.c_g);
  if (!(spec.r1 >= 2.0)) fail("nonlinearity.r1", "must be >= 2");
  if (!(spec.r2 >= 2.0)) fail("nonlinearity.r2", "must be >= 2");
  spec.M1 = get_number(at_or_null(node, "M1"), "nonlinearity.M1", 1.0);
  spec.M2 = get_number(at_or_null(node, "M2"), "nonlinearity.M2", 1.0);
  if (spec.M1 < 0.0) fail("nonlinearity.M1", "must be nonnegative");
  if (spec.M2 < 0.0) fail("nonlinearity.M2", "must be nonnegative");
  spec.ell1 = get_number(at_or_null(node, "ell1"), "nonlinearity.ell1", 1.0);
  spec.ell2 = get_number(at_or_null(node, "ell2"), "nonlinearity.ell2", 1.0);
  if (!(spec.ell1 > 0.0)) fail("nonlinearity.ell1", "must be positive");
  if (!(spec.ell2 > 0.0)) fail("nonlinearity.ell2", "must be positive");
  spec.epsilon =
      get_number(at_or_null(node, "epsilon"), "nonlinearity.epsilon", 0.5 * omega);
  if (!(spec.epsilon > 0.0) || spec.epsilon >= omega)
    fail("nonlinearity.epsilon",
         "violates the constraint \"epsilon in (0, omega)\": epsilon = " +
             format_double(spec.epsilon) + ", omega = " + format_double(omega));
  return spec;
}

FieldRecipe parse_field(const json& node, const std::string& path) {
  FieldRecipe recipe;
  if (node.is_null()) return recipe;
  const std::string kind = get_string(at_or_null(node, "kind"), path + ".kind", "zero");
  if (kind == "zero") {
    recipe.kind = FieldRecipe::Kind::Zero;
  } else if (kind == "constant") {
    recipe.kind = FieldRecipe::Kind::Constant;
    recipe.amplitude = require_number(node, "amplitude", path + ".amplitude");
  } else if (kind == "gaussian") {
    recipe.kind = FieldRecipe::Kind::Gaussian;
    recipe.amplitude = require_number(node, "amplitude", path + ".amplitude");
    recipe.center_x = get_number(at_or_null(node, "center_x"), path + ".center_x", 0.0);
    recipe.center_y = get_number(at_or_null(node, "center_y"), path + ".center_y", 0.0);
    recipe.width = get_number(at_or_null(node, "width"), path + ".width", 0.1);
    if (!(recipe.width > 0.0)) fail(path + ".width", "must be positive");
  } else if (kind == "cosine") {
    recipe.kind = FieldRecipe::Kind::Cosine;
    recipe.amplitude = require_number(node, "amplitude", path + ".amplitude");
    recipe.k_x = get_int(at_or_null(node, "k_x"), path + ".k_x", 1);
    recipe.k_y = get_int(at_or_null(node, "k_y"), path + ".k_y", 0);
  } else {
    fail(path + ".kind", "expected \"zero\", \"constant\", \"gaussian\" or \"cosine\"");
  }
  return recipe;
}

InitialData parse_initial(const json& node) {
  InitialData data;
  if (node.is_null()) return data;
  const json modes = at_or_null(node, "modes");
  if (!modes.is_null()) {
    if (!modes.is_array()) fail("initial.modes", "expected an array");
    int i = 0;
    for (const auto& item : modes) {
      const std::string path = "initial.modes[" + std::to_string(i++) + "]";
      ModalImpulse imp;
      imp.index = get_int(at_or_null(item, "index"), path + ".index", 1);
      if (imp.index < 1) fail(path + ".index", "mode index is 1-based");
      imp.amplitude = get_number(at_or_null(item, "amplitude"), path + ".amplitude", 0.0);
      imp.velocity = get_number(at_or_null(item, "velocity"), path + ".velocity", 0.0);
      data.modes.push_back(imp);
    }
  }
  data.u0 = parse_field(at_or_null(node, "u0"), "initial.u0");
  data.v0 = parse_field(at_or_null(node, "v0"), "initial.v0");
  return data;
}

}  // namespace

std::string RunConfig::canonical() const {
  json j;
  j["schema_version"] = schema_version;
  j["geometry"] = {
      {"kind", geometry.kind == GeometryKind::Interval ? "interval" : "periodic_slab"},
      {"length", geometry.length},
      {"circumference", geometry.circumference},
      {"bulk_elements", geometry.bulk_elements},
      {"periodic_points", geometry.periodic_points}};
  j["fractional"] = {
      {"theta", fractional.theta},
      {"alpha", fractional.alpha},
      {"omega", fractional.omega},
      {"realization", fractional.realization == DampingRealization::BlockR2
                          ? "block_r2"
                          : "spectral_r1"},
      {"exponent_convention",
       fractional.exponent_convention == ExponentConvention::Theta ? "theta"
                                                                   : "two_theta"}};
  json fterms = json::array(), gterms = json::array();
  for (const auto& t : nonlinearity.f_terms) fterms.push_back({{"c", t.c}, {"p", t.p}});
  for (const auto& t : nonlinearity.g_terms) gterms.push_back({{"c", t.c}, {"p", t.p}});
  j["nonlinearity"] = {{"f_terms", fterms},
                       {"g_terms", gterms},
                       {"f_sin", {{"c", nonlinearity.f_sin.c}, {"k", nonlinearity.f_sin.k}}},
                       {"g_sin", {{"c", nonlinearity.g_sin.c}, {"k", nonlinearity.g_sin.k}}},
                       {"r1", nonlinearity.r1},
                       {"r2", nonlinearity.r2},
                       {"c_f", nonlinearity.c_f},
                       {"c_g", nonlinearity.c_g},
                       {"M1", nonlinearity.M1},
                       {"M2", nonlinearity.M2},
                       {"ell1", nonlinearity.ell1},
                       {"ell2", nonlinearity.ell2},
                       {"epsilon", nonlinearity.epsilon}};
  auto field = [](const FieldRecipe& r) {
    json f;
    switch (r.kind) {
      case FieldRecipe::Kind::Zero:
        f["kind"] = "zero";
        break;
      case FieldRecipe::Kind::Constant:
        f["kind"] = "constant";
        f["amplitude"] = r.amplitude;
        break;
      case FieldRecipe::Kind::Gaussian:
        f["kind"] = "gaussian";
        f["amplitude"] = r.amplitude;
        f["center_x"] = r.center_x;
        f["center_y"] = r.center_y;
        f["width"] = r.width;
        break;
      case FieldRecipe::Kind::Cosine:
        f["kind"] = "cosine";
        f["amplitude"] = r.amplitude;
        f["k_x"] = r.k_x;
        f["k_y"] = r.k_y;
        break;
    }
    return f;
  };
  json impulses = json::array();
  for (const auto& m : initial.modes)
    impulses.push_back(
        {{"index", m.index}, {"amplitude", m.amplitude}, {"velocity", m.velocity}});
  j["initial"] = {{"modes", impulses}, {"u0", field(initial.u0)}, {"v0", field(initial.v0)}};
  j["time"] = {{"T", time.T}, {"dt", time.dt}, {"sample_stride", time.sample_stride}};
  j["galerkin"] = {{"n", galerkin.n}, {"convergence", galerkin.convergence}};
  j["checks"] = {{"sign_growth", checks.sign_growth},
                 {"balance", checks.balance},
                 {"energy_monotone", checks.energy_monotone},
                 {"energy_identity", checks.energy_identity},
                 {"weak_residual", checks.weak_residual},
                 {"apriori_bound", checks.apriori_bound},
                 {"maximum_principle", checks.maximum_principle},
                 {"identity_tol", checks.identity_tol},
                 {"monotone_tol", checks.monotone_tol},
                 {"weak_residual_tol", checks.weak_residual_tol},
                 {"weak_residual_modes", checks.weak_residual_modes}};
  j["probes"] = {{"isomorphism_probes", probes.isomorphism_probes},
                 {"boundary_eps", probes.boundary_eps},
                 {"boundary_s", probes.boundary_s},
                 {"boundary_samples", probes.boundary_samples}};
  j["balance_grid"] = {{"s_min", balance_grid.s_min},
                       {"s_max", balance_grid.s_max},
                       {"points", balance_grid.points}};
  j["bvp"] = {{"p1", field(bvp.p1)}, {"p2", field(bvp.p2)}};
  j["output"] = {{"directory", output.directory},
                 {"dump_matrices", output.dump_matrices}};
  j["seed"] = seed;
  return j.dump();
}

std::string RunConfig::digest() const { return hex64(fnv1a64(canonical())); }

RunConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const nlohmann::json::parse_error& err) {
    throw config_error(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) throw config_error("config root must be a JSON object");

  RunConfig config;
  config.schema_version =
      get_int(at_or_null(root, "schema_version"), "schema_version", 1);
  if (config.schema_version != 1)
    fail("schema_version", "unsupported version " +
                               std::to_string(config.schema_version));
  config.geometry = parse_geometry(at_or_null(root, "geometry"));
  config.fractional = parse_fractional(at_or_null(root, "fractional"));
  config.nonlinearity =
      parse_nonlinearity(at_or_null(root, "nonlinearity"), config.fractional.omega);
  config.initial = parse_initial(at_or_null(root, "initial"));

  const json time = at_or_null(root, "time");
  if (time.is_null()) fail("time", "missing required section");
  config.time.T = get_number(at_or_null(time, "T"), "time.T", 1.0);
  config.time.dt = get_number(at_or_null(time, "dt"), "time.dt", 1e-3);
  config.time.sample_stride =
      get_int(at_or_null(time, "sample_stride"), "time.sample_stride", 1);
  if (!(config.time.T > 0.0)) fail("time.T", "must be positive");
  if (!(config.time.dt > 0.0)) fail("time.dt", "must be positive");
  if (!(config.time.dt < config.time.T)) fail("time.dt", "must be smaller than time.T");
  if (config.time.sample_stride < 1) fail("time.sample_stride", "must be >= 1");

  const json galerkin = at_or_null(root, "galerkin");
  config.galerkin.n = get_int(at_or_null(galerkin, "n"), "galerkin.n", 8);
  if (config.galerkin.n < 1) fail("galerkin.n", "must be >= 1");
  const json conv = at_or_null(galerkin, "convergence");
  if (!conv.is_null()) {
    if (!conv.is_array()) fail("galerkin.convergence", "expected an array");
    for (const auto& v : conv) {
      if (!v.is_number_integer()) fail("galerkin.convergence", "expected integers");
      config.galerkin.convergence.push_back(v.get<int>());
    }
    for (size_t i = 0; i + 1 < config.galerkin.convergence.size(); ++i)
      if (config.galerkin.convergence[i + 1] < config.galerkin.convergence[i])
        fail("galerkin.convergence", "dimensions must be nondecreasing");
  }

  const json checks = at_or_null(root, "checks");
  config.checks.sign_growth =
      get_bool(at_or_null(checks, "sign_growth"), "checks.sign_growth", true);
  config.checks.balance = get_bool(at_or_null(checks, "balance"), "checks.balance", true);
  config.checks.energy_monotone = get_bool(at_or_null(checks, "energy_monotone"),
                                           "checks.energy_monotone", true);
  config.checks.energy_identity = get_bool(at_or_null(checks, "energy_identity"),
                                           "checks.energy_identity", true);
  config.checks.weak_residual =
      get_bool(at_or_null(checks, "weak_residual"), "checks.weak_residual", false);
  config.checks.apriori_bound =
      get_bool(at_or_null(checks, "apriori_bound"), "checks.apriori_bound", true);
  config.checks.maximum_principle = get_bool(at_or_null(checks, "maximum_principle"),
                                             "checks.maximum_principle", true);
  config.checks.identity_tol =
      get_number(at_or_null(checks, "identity_tol"), "checks.identity_tol", 1e-6);
  config.checks.monotone_tol =
      get_number(at_or_null(checks, "monotone_tol"), "checks.monotone_tol", 1e-10);
  config.checks.weak_residual_tol = get_number(at_or_null(checks, "weak_residual_tol"),
                                               "checks.weak_residual_tol", 1e-6);
  config.checks.weak_residual_modes = get_int(at_or_null(checks, "weak_residual_modes"),
                                              "checks.weak_residual_modes", 4);

  const json probes = at_or_null(root, "probes");
  config.probes.isomorphism_probes = get_int(at_or_null(probes, "isomorphism_probes"),
                                             "probes.isomorphism_probes", 10);
  config.probes.boundary_eps =
      get_number(at_or_null(probes, "boundary_eps"), "probes.boundary_eps", 0.5);
  config.probes.boundary_s =
      get_number(at_or_null(probes, "boundary_s"), "probes.boundary_s", 2.0);
  config.probes.boundary_samples = get_int(at_or_null(probes, "boundary_samples"),
                                           "probes.boundary_samples", 32);
  if (config.probes.isomorphism_probes < 1)
    fail("probes.isomorphism_probes", "must be >= 1");
  if (!(config.probes.boundary_s > 1.0)) fail("probes.boundary_s", "must exceed 1");
  if (!(config.probes.boundary_eps > 0.0)) fail("probes.boundary_eps", "must be positive");
  if (config.probes.boundary_samples < 1) fail("probes.boundary_samples", "must be >= 1");

  const json bal = at_or_null(root, "balance_grid");
  config.balance_grid.s_min =
      get_number(at_or_null(bal, "s_min"), "balance_grid.s_min", 1e2);
  config.balance_grid.s_max =
      get_number(at_or_null(bal, "s_max"), "balance_grid.s_max", 1e6);
  config.balance_grid.points = get_int(at_or_null(bal, "points"), "balance_grid.points", 240);
  if (!(config.balance_grid.s_min > 0.0) ||
      !(config.balance_grid.s_max > config.balance_grid.s_min))
    fail("balance_grid", "requires 0 < s_min < s_max");
  if (config.balance_grid.points < 200) fail("balance_grid.points", "must be >= 200");

  const json bvp = at_or_null(root, "bvp");
  if (!bvp.is_null()) {
    config.bvp.p1 = parse_field(at_or_null(bvp, "p1"), "bvp.p1");
    config.bvp.p2 = parse_field(at_or_null(bvp, "p2"), "bvp.p2");
  }

  const json output = at_or_null(root, "output");
  config.output.directory =
      get_string(at_or_null(output, "directory"), "output.directory", "out");
  config.output.dump_matrices =
      get_bool(at_or_null(output, "dump_matrices"), "output.dump_matrices", false);

  const json seed = at_or_null(root, "seed");
  if (!seed.is_null()) {
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
      fail("seed", "expected a nonnegative integer");
    config.seed = seed.get<std::uint64_t>();
  }
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

Eigen::VectorXd sample_field(const FieldRecipe& recipe, const GeometrySpec& geom,
                             const Eigen::MatrixX2d& points) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(points.rows());
  switch (recipe.kind) {
    case FieldRecipe::Kind::Zero:
      break;
    case FieldRecipe::Kind::Constant:
      out.setConstant(recipe.amplitude);
      break;
    case FieldRecipe::Kind::Gaussian:
      for (int i = 0; i < points.rows(); ++i) {
        const double dx = points(i, 0) - recipe.center_x;
        const double dy = points(i, 1) - recipe.center_y;
        out(i) = recipe.amplitude *
                 std::exp(-(dx * dx + dy * dy) / (2.0 * recipe.width * recipe.width));
      }
      break;
    case FieldRecipe::Kind::Cosine:
      for (int i = 0; i < points.rows(); ++i) {
        if (geom.kind == GeometryKind::Interval) {
          out(i) = recipe.amplitude *
                   std::cos(recipe.k_x * M_PI * points(i, 0) / geom.length);
        } else {
          out(i) = recipe.amplitude *
                   std::cos(2.0 * M_PI * recipe.k_x * points(i, 0) / geom.circumference) *
                   std::cos(recipe.k_y * M_PI * points(i, 1) / geom.length);
        }
      }
      break;
  }
  return out;
}

}  // namespace wentzell
