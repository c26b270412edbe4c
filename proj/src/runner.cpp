#include "wentzell/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "json.hpp"
#include "wentzell/io.hpp"

namespace wentzell {

namespace {

using json = nlohmann::ordered_json;

struct Workspace {
  RunConfig config;
  std::string out_dir;
  Mesh mesh;
  WentzellOperator op;
  RunSummary summary;

  void check(const std::string& name, bool passed, const std::string& detail) {
    summary.checks.push_back({name, passed, detail});
  }
  void scalar(const std::string& name, double v) { summary.scalars.emplace_back(name, v); }
  void label(const std::string& name, const std::string& v) {
    summary.labels.emplace_back(name, v);
  }
  void artifact(const std::string& name, const std::string& content) {
    write_text_file(out_dir + "/" + name, content);
    summary.artifacts.push_back(name);
  }
};

Eigen::VectorXd nodal_field(const Workspace& ws, const FieldRecipe& recipe) {
  return sample_field(recipe, ws.config.geometry, ws.mesh.nodes);
}

Eigen::VectorXd boundary_field(const Workspace& ws, const FieldRecipe& recipe) {
  Eigen::MatrixX2d pts(ws.mesh.boundary_count(), 2);
  for (int k = 0; k < ws.mesh.boundary_count(); ++k)
    pts.row(k) = ws.mesh.nodes.row(ws.mesh.boundary_nodes[k]);
  return sample_field(recipe, ws.config.geometry, pts);
}

State initial_state(Workspace& ws, int n) {
  const Eigen::VectorXd u0 = nodal_field(ws, ws.config.initial.u0);
  const Eigen::VectorXd v0 = nodal_field(ws, ws.config.initial.v0);
  State state = project_initial_data(ws.op, u0, v0, n);
  for (const auto& imp : ws.config.initial.modes) {
    if (imp.index > n)
      throw config_error("initial.modes: index " + std::to_string(imp.index) +
                         " exceeds galerkin.n = " + std::to_string(n));
    state.a(imp.index - 1) += imp.amplitude;
    state.a_dot(imp.index - 1) += imp.velocity;
  }
  return state;
}

std::string eigs_csv(const EigenDecomposition& eig) {
  std::string csv = "index,lambda";
  for (int i = 0; i < eig.modes.rows(); ++i) csv += ",node_" + std::to_string(i);
  csv += "\n";
  for (int j = 0; j < eig.count(); ++j) {
    csv += std::to_string(j + 1) + "," + format_double(eig.lambda(j));
    for (int i = 0; i < eig.modes.rows(); ++i)
      csv += "," + format_double(eig.modes(i, j));
    csv += "\n";
  }
  return csv;
}

std::string trajectory_csv(const TrajectoryRecord& record, int n) {
  std::string csv = "t,E,kinetic,elastic,pot_bulk,pot_bdry,dissipation,identity_residual";
  for (int k = 1; k <= n; ++k) csv += ",a_" + std::to_string(k);
  csv += "\n";
  for (size_t j = 0; j < record.times.size(); ++j) {
    const EnergyReport& e = record.energy[j];
    csv += format_double(record.times[j]) + "," + format_double(e.total) + "," +
           format_double(e.kinetic) + "," + format_double(e.elastic) + "," +
           format_double(e.potential_bulk) + "," + format_double(e.potential_boundary) +
           "," + format_double(e.dissipation_accumulated) + "," +
           format_double(e.identity_residual);
    for (int k = 0; k < n; ++k) csv += "," + format_double(record.states[j].a(k));
    csv += "\n";
  }
  return csv;
}

json balance_json(const BalanceReport& rep, const SignGrowthReport& sg, double c_omega,
                  const NonlinearitySpec& nl) {
  json j;
  j["poincare_constant"] = c_omega;
  j["liminf_estimate"] = rep.liminf_estimate;
  j["probe_range"] = {rep.probe_min, rep.probe_max};
  j["scenario_results"] = {rep.scenarios[0], rep.scenarios[1], rep.scenarios[2]};
  switch (rep.verdict) {
    case BalanceVerdict::Satisfied: j["verdict"] = "satisfied"; break;
    case BalanceVerdict::Violated: j["verdict"] = "violated"; break;
    case BalanceVerdict::Inconclusive: j["verdict"] = "inconclusive"; break;
  }
  j["fitted_margin"] = rep.fitted_margin;
  j["fitted_offset"] = rep.fitted_offset;
  j["sign_growth"] = {{"min_f_over_s", sg.min_f_over_s},
                      {"min_g_prime", sg.min_g_prime},
                      {"max_f_growth_ratio", sg.max_f_growth_ratio},
                      {"max_g_growth_ratio", sg.max_g_growth_ratio},
                      {"sign_f_ok", sg.sign_f_ok},
                      {"sign_g_ok", sg.sign_g_ok},
                      {"growth_f_ok", sg.growth_f_ok},
                      {"growth_g_ok", sg.growth_g_ok}};
  j["parameters"] = {{"r1", nl.r1},   {"r2", nl.r2},   {"c_f", nl.c_f},
                     {"c_g", nl.c_g}, {"M1", nl.M1},   {"M2", nl.M2},
                     {"ell1", nl.ell1}, {"ell2", nl.ell2}, {"epsilon", nl.epsilon}};
  return j;
}

struct BalanceOutcome {
  BalanceReport report;
  SignGrowthReport sign_growth;
  double c_omega = 0.0;
};

BalanceOutcome run_balance_checks(Workspace& ws) {
  BalanceOutcome out;
  out.c_omega = estimate_poincare_constant(ws.mesh, ws.op.blocks);
  const auto sign_grid = log_grid(1.0, ws.config.balance_grid.s_max, 200, true);
  out.sign_growth = check_sign_growth(ws.config.nonlinearity, sign_grid);
  const auto balance_grid =
      log_grid(ws.config.balance_grid.s_min, ws.config.balance_grid.s_max,
               ws.config.balance_grid.points, true);
  out.report = check_balance(ws.config.nonlinearity, ws.mesh.volume, ws.mesh.surface,
                             out.c_omega, ws.config.fractional.omega, balance_grid);

  ws.scalar("C_Omega", out.c_omega);
  ws.scalar("balance_liminf_estimate", out.report.liminf_estimate);
  ws.scalar("balance_fitted_offset", out.report.fitted_offset);
  const char* verdict = out.report.verdict == BalanceVerdict::Satisfied ? "satisfied"
                        : out.report.verdict == BalanceVerdict::Violated ? "violated"
                                                                         : "inconclusive";
  ws.label("balance_verdict", verdict);

  if (ws.config.checks.sign_growth)
    ws.check("sign_growth", out.sign_growth.all_ok(),
             "min f(s)/s = " + format_double(out.sign_growth.min_f_over_s) +
                 ", min g' = " + format_double(out.sign_growth.min_g_prime));
  if (ws.config.checks.balance)
    ws.check("balance", out.report.verdict == BalanceVerdict::Satisfied,
             std::string("verdict ") + verdict + ", liminf estimate " +
                 format_double(out.report.liminf_estimate));

  json bj = balance_json(out.report, out.sign_growth, out.c_omega, ws.config.nonlinearity);
  ws.artifact("balance.json", bj.dump(2) + "\n");

  std::string csv = "s,quotient\n";
  for (const auto& [s, q] : out.report.probes)
    csv += format_double(s) + "," + format_double(q) + "\n";
  ws.artifact("balance_probes.csv", csv);

  PlotSeries pos, neg;
  pos.label = "s > 0";
  neg.label = "s < 0";
  for (const auto& [s, q] : out.report.probes) {
    if (s > 0) {
      pos.x.push_back(std::log10(s));
      pos.y.push_back(q);
    } else {
      neg.x.push_back(std::log10(-s));
      neg.y.push_back(q);
    }
  }
  auto sort_series = [](PlotSeries& p) {
    std::vector<size_t> idx(p.x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return p.x[a] < p.x[b]; });
    PlotSeries sorted;
    sorted.label = p.label;
    for (size_t i : idx) {
      sorted.x.push_back(p.x[i]);
      sorted.y.push_back(p.y[i]);
    }
    p = sorted;
  };
  sort_series(pos);
  sort_series(neg);
  ws.artifact("balance.svg", svg_plot("balance quotient", "log10 |s|", "quotient",
                                      {pos, neg}));
  return out;
}

void cmd_eig(Workspace& ws) {
  const int n = std::min(ws.config.galerkin.n, ws.op.size());
  const EigenDecomposition eig = solve_eigenproblem(ws.op, n);
  ws.scalar("lambda_1", eig.lambda(0));
  ws.scalar("lambda_n", eig.lambda(n - 1));
  ws.check("lambda1_anchor", std::abs(eig.lambda(0) - 1.0) <= 1e-9,
           "lambda_1 = " + format_double(eig.lambda(0)));
  const Eigen::MatrixXd gram =
      eig.modes.transpose() * ws.op.M * eig.modes -
      Eigen::MatrixXd::Identity(n, n);
  const double ortho = gram.cwiseAbs().maxCoeff();
  ws.check("m_orthonormal", ortho <= 1e-9, "max |W^T M W - I| = " + format_double(ortho));
  ws.artifact("eigs.csv", eigs_csv(eig));
  ws.artifact("eigs.svg",
              svg_plot("eigenvalue staircase", "index", "lambda",
                       {staircase("lambda", eig.lambda)}));
  if (ws.config.output.dump_matrices) {
    ws.artifact("A.coo", coordinate_format(ws.op.A));
    ws.artifact("M.coo", coordinate_format(ws.op.M));
    const DampingMatrix damping = [&] {
      if (ws.config.fractional.realization == DampingRealization::SpectralR1) {
        WentzellOperator full = ws.op;
        full.eig = solve_eigenproblem(ws.op, ws.op.size());
        return build_damping_matrix(full, ws.config.fractional);
      }
      return build_damping_matrix(ws.op, ws.config.fractional);
    }();
    ws.artifact("D.coo", coordinate_format(damping.total));
  }
}

void cmd_simulate(Workspace& ws) {
  ws.op.eig = solve_eigenproblem(ws.op, ws.op.size());
  if (ws.config.galerkin.n > ws.op.size())
    throw config_error("galerkin.n = " + std::to_string(ws.config.galerkin.n) +
                       " exceeds the number of unknowns " +
                       std::to_string(ws.op.size()));
  const int n = ws.config.galerkin.n;
  const DampingMatrix damping = build_damping_matrix(ws.op, ws.config.fractional);
  const ModalSystem system =
      build_modal_system(ws.mesh, ws.op, damping, ws.config.nonlinearity, n);

  std::optional<BalanceOutcome> balance;
  if (ws.config.checks.balance || ws.config.checks.sign_growth ||
      ws.config.checks.apriori_bound)
    balance = run_balance_checks(ws);

  const State start = initial_state(ws, n);
  const TrajectoryRecord record = integrate(system, start, ws.config.time.T,
                                            ws.config.time.dt,
                                            ws.config.time.sample_stride);

  ws.scalar("E0", record.initial_energy);
  ws.scalar("E_final", record.energy.back().total);
  ws.scalar("max_identity_residual", record.max_identity_residual);
  ws.scalar("max_energy_increase", record.max_energy_increase);
  ws.scalar("newton_iterations", static_cast<double>(record.stats.newton_iterations));
  ws.scalar("step_rejections", static_cast<double>(record.stats.step_rejections));

  if (ws.config.checks.energy_identity)
    ws.check("energy_identity",
             record.max_identity_residual <= ws.config.checks.identity_tol,
             "max residual " + format_double(record.max_identity_residual) +
                 " vs tol " + format_double(ws.config.checks.identity_tol));
  if (ws.config.checks.energy_monotone)
    ws.check("energy_monotone",
             record.max_energy_increase <= ws.config.checks.monotone_tol,
             "max sample-to-sample increase " +
                 format_double(record.max_energy_increase));
  if (ws.config.checks.apriori_bound && balance &&
      balance->report.verdict == BalanceVerdict::Satisfied) {
    bool ok = true;
    double worst = -1e300;
    for (size_t j = 0; j < record.energy.size(); ++j) {
      const EnergyReport& e = record.energy[j];
      const double bound = record.initial_energy +
                           2.0 * balance->report.fitted_offset * record.times[j] + 1e-8;
      const double excess = e.kinetic + e.elastic - bound;
      worst = std::max(worst, excess);
      if (excess > 0) ok = false;
    }
    ws.check("apriori_bound", ok,
             "max (kinetic+elastic) - bound = " + format_double(worst));
  }
  if (ws.config.checks.weak_residual) {
    const int m = std::min(ws.config.checks.weak_residual_modes, n);
    const WeakResidualReport weak = verify_weak_residual(record, system, m);
    const double max_res = weak.max_abs.maxCoeff();
    ws.scalar("weak_residual_max", max_res);
    ws.check("weak_residual", max_res <= ws.config.checks.weak_residual_tol,
             "max residual over " + std::to_string(m) + " test modes = " +
                 format_double(max_res));
  }

  ws.artifact("trajectory.csv", trajectory_csv(record, n));
  PlotSeries energy_series, kinetic_series, elastic_series;
  energy_series.label = "E";
  kinetic_series.label = "kinetic";
  elastic_series.label = "elastic";
  for (size_t j = 0; j < record.times.size(); ++j) {
    energy_series.x.push_back(record.times[j]);
    energy_series.y.push_back(record.energy[j].total);
    kinetic_series.x.push_back(record.times[j]);
    kinetic_series.y.push_back(record.energy[j].kinetic);
    elastic_series.x.push_back(record.times[j]);
    elastic_series.y.push_back(record.energy[j].elastic);
  }
  ws.artifact("energy.svg", svg_plot("energy decay", "t", "energy",
                                     {energy_series, kinetic_series, elastic_series}));
}

void cmd_balance(Workspace& ws) {
  BalanceOutcome out = run_balance_checks(ws);
  const BoundaryProbeReport probe = probe_boundary_interior_inequality(
      ws.mesh, ws.op.blocks, ws.config.probes.boundary_eps, ws.config.probes.boundary_s,
      ws.config.probes.boundary_samples, ws.config.seed);
  ws.scalar("boundary_probe_c_eps", probe.c_eps);
  ws.scalar("boundary_probe_eps", probe.epsilon);
  ws.scalar("boundary_probe_gamma", probe.gamma);
  (void)out;
}

void cmd_poincare(Workspace& ws) {
  const double c_omega = estimate_poincare_constant(ws.mesh, ws.op.blocks);
  ws.scalar("C_Omega", c_omega);
  ws.check("poincare_positive", c_omega > 0.0, "C_Omega = " + format_double(c_omega));
}

void cmd_bvp(Workspace& ws) {
  const Eigen::VectorXd p1 = nodal_field(ws, ws.config.bvp.p1);
  const Eigen::VectorXd p2 = boundary_field(ws, ws.config.bvp.p2);
  const Eigen::VectorXd u = solve_wentzell_bvp(ws.op.blocks, p1, p2);

  const Eigen::SparseMatrix<double> L =
      ws.op.blocks.K_bulk + ws.op.blocks.K_bdry + ws.op.blocks.M_bdry;
  const Eigen::VectorXd rhs = ws.op.blocks.M_bulk * p1 + ws.op.blocks.M_bdry * ws.mesh.lift(p2);
  const double rel = (L * u - rhs).norm() / std::max(rhs.norm(), 1e-300);
  ws.scalar("bvp_residual", rel);
  ws.check("bvp_residual", rel <= 1e-10, "relative residual " + format_double(rel));

  if (ws.config.checks.maximum_principle && p1.minCoeff() >= 0.0 &&
      p2.minCoeff() >= 0.0) {
    const double umin = u.minCoeff();
    ws.scalar("bvp_min", umin);
    ws.check("maximum_principle", umin >= -1e-10, "min U = " + format_double(umin));
  }

  const IsomorphismReport iso = estimate_isomorphism_constant(
      ws.op, ws.config.probes.isomorphism_probes, ws.config.seed);
  ws.scalar("isomorphism_ratio_low", iso.ratio_low);
  ws.scalar("isomorphism_ratio_high", iso.ratio_high);
  ws.scalar("isomorphism_c_star", iso.c_star);

  std::string csv = "x,y,u\n";
  for (int i = 0; i < ws.mesh.node_count(); ++i)
    csv += format_double(ws.mesh.nodes(i, 0)) + "," + format_double(ws.mesh.nodes(i, 1)) +
           "," + format_double(u(i)) + "\n";
  ws.artifact("bvp.csv", csv);
}

void cmd_converge(Workspace& ws) {
  if (ws.config.galerkin.convergence.empty())
    throw config_error("galerkin.convergence: list required for the converge command");
  const int n_max = *std::max_element(ws.config.galerkin.convergence.begin(),
                                      ws.config.galerkin.convergence.end());
  if (n_max > ws.op.size())
    throw config_error("galerkin.convergence exceeds the number of unknowns");
  ws.op.eig = solve_eigenproblem(ws.op, ws.op.size());
  const DampingMatrix damping = build_damping_matrix(ws.op, ws.config.fractional);

  Eigen::VectorXd u0 = nodal_field(ws, ws.config.initial.u0);
  Eigen::VectorXd v0 = nodal_field(ws, ws.config.initial.v0);
  // Modal impulses are realized through the reference modes so every
  // truncation sees the same nodal data.
  for (const auto& imp : ws.config.initial.modes) {
    if (imp.index > n_max)
      throw config_error("initial.modes: index exceeds the largest study dimension");
    u0 += imp.amplitude * ws.op.eig->modes.col(imp.index - 1);
    v0 += imp.velocity * ws.op.eig->modes.col(imp.index - 1);
  }

  const ConvergenceTable table = convergence_study(
      ws.mesh, ws.op, damping, ws.config.nonlinearity, u0, v0,
      ws.config.galerkin.convergence, ws.config.time.T, ws.config.time.dt,
      ws.config.time.sample_stride);

  std::string csv = "n,distance_to_reference,E0,E_final,max_identity_residual\n";
  for (const auto& row : table.rows)
    csv += std::to_string(row.n) + "," + format_double(row.distance_to_reference) + "," +
           format_double(row.initial_energy) + "," + format_double(row.final_energy) +
           "," + format_double(row.max_identity_residual) + "\n";
  ws.artifact("convergence.csv", csv);
  ws.scalar("reference_n", table.reference_n);
  for (const auto& row : table.rows)
    ws.scalar("distance_n" + std::to_string(row.n), row.distance_to_reference);
}

json summary_json(const RunSummary& summary) {
  json j;
  j["command"] = summary.command;
  j["input_digest"] = summary.input_digest;
  j["seed"] = summary.seed;
  json checks = json::array();
  for (const auto& c : summary.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  json scalars;
  for (const auto& [k, v] : summary.scalars) scalars[k] = v;
  j["scalars"] = scalars;
  json labels;
  for (const auto& [k, v] : summary.labels) labels[k] = v;
  j["labels"] = labels;
  j["artifacts"] = summary.artifacts;
  j["ok"] = summary.ok();
  return j;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "eig") return Command::Eig;
  if (name == "simulate") return Command::Simulate;
  if (name == "balance") return Command::Balance;
  if (name == "poincare") return Command::Poincare;
  if (name == "bvp") return Command::Bvp;
  if (name == "converge") return Command::Converge;
  throw config_error("unknown command: " + name);
}

std::string command_name(Command cmd) {
  switch (cmd) {
    case Command::Eig: return "eig";
    case Command::Simulate: return "simulate";
    case Command::Balance: return "balance";
    case Command::Poincare: return "poincare";
    case Command::Bvp: return "bvp";
    case Command::Converge: return "converge";
  }
  return "?";
}

RunSummary run(const RunConfig& config, Command command,
               const std::optional<std::string>& out_dir,
               const std::optional<std::uint64_t>& seed_override) {
  Workspace ws;
  ws.config = config;
  if (seed_override) ws.config.seed = *seed_override;
  ws.out_dir = out_dir.value_or(ws.config.output.directory);
  std::filesystem::create_directories(ws.out_dir);

  ws.summary.command = command_name(command);
  ws.summary.input_digest = ws.config.digest();
  ws.summary.seed = ws.config.seed;

  // Echo the fully resolved configuration (defaults applied) next to the data.
  ws.artifact("config_resolved.json", json::parse(ws.config.canonical()).dump(2) + "\n");

  ws.mesh = build_geometry(ws.config.geometry);
  ws.op = assemble_wentzell(assemble_blocks(ws.mesh));

  switch (command) {
    case Command::Eig: cmd_eig(ws); break;
    case Command::Simulate: cmd_simulate(ws); break;
    case Command::Balance: cmd_balance(ws); break;
    case Command::Poincare: cmd_poincare(ws); break;
    case Command::Bvp: cmd_bvp(ws); break;
    case Command::Converge: cmd_converge(ws); break;
  }

  write_text_file(ws.out_dir + "/summary.json", summary_json(ws.summary).dump(2) + "\n");
  ws.summary.artifacts.push_back("summary.json");
  return ws.summary;
}

}  // namespace wentzell
