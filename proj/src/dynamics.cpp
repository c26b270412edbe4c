#include "wentzell/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <string>

namespace wentzell {

namespace {

void check_state_dims(const ModalSystem& system, const State& state,
                      const char* where) {
  if (state.a.size() != system.n || state.a_dot.size() != system.n)
    throw dimension_error(std::string(where) + ": state length does not match n = " +
                          std::to_string(system.n));
}

Eigen::VectorXd apply_pointwise(const NonlinearitySpec& spec,
                                const Eigen::VectorXd& values, NonlinearityPart part) {
  Eigen::VectorXd out(values.size());
  for (int q = 0; q < values.size(); ++q)
    out(q) = eval_nonlinearity(spec, values(q), part);
  return out;
}

}  // namespace

ModalSystem build_modal_system(const Mesh& mesh, const WentzellOperator& op,
                               const DampingMatrix& damping,
                               const NonlinearitySpec& nonlin, int n) {
  if (!op.eig)
    throw parameter_error("build_modal_system: eigendecomposition not computed");
  if (n < 1 || n > op.eig->count())
    throw parameter_error("build_modal_system: n = " + std::to_string(n) +
                          " outside [1, " + std::to_string(op.eig->count()) + "]");

  ModalSystem system;
  system.n = n;
  system.lambda = op.eig->lambda.head(n);
  system.modes = op.eig->modes.leftCols(n);
  system.damping = system.modes.transpose() * damping.total * system.modes;
  system.damping = 0.5 * (system.damping + system.damping.transpose()).eval();
  system.diss_fractional =
      system.modes.transpose() * damping.fractional_part * system.modes;
  system.diss_boundary =
      system.modes.transpose() * damping.boundary_part * system.modes;
  system.bulk_table = mesh.bulk_quad.interp * system.modes;
  Eigen::MatrixXd traces(mesh.boundary_count(), n);
  for (int j = 0; j < n; ++j) traces.col(j) = mesh.trace(system.modes.col(j));
  system.bdry_table = mesh.boundary_quad.interp * traces;
  system.bulk_weights = mesh.bulk_quad.weights;
  system.bdry_weights = mesh.boundary_quad.weights;
  system.nonlin = nonlin;
  return system;
}

State project_initial_data(const WentzellOperator& op, const Eigen::VectorXd& u0,
                           const Eigen::VectorXd& v0, int n) {
  if (!op.eig)
    throw parameter_error("project_initial_data: eigendecomposition not computed");
  if (n < 1 || n > op.eig->count())
    throw parameter_error("project_initial_data: n outside the available modes");
  if (u0.size() != op.size() || v0.size() != op.size())
    throw dimension_error("project_initial_data: field length mismatch");
  State state;
  const auto modes = op.eig->modes.leftCols(n);
  state.a = modes.transpose() * (op.M * u0);
  state.a_dot = modes.transpose() * (op.M * v0);
  state.t = 0.0;
  return state;
}

Eigen::VectorXd nonlinear_force(const ModalSystem& system, const Eigen::VectorXd& a) {
  if (a.size() != system.n) throw dimension_error("nonlinear_force: length mismatch");
  const Eigen::VectorXd u_bulk = system.bulk_table * a;
  const Eigen::VectorXd u_bdry = system.bdry_table * a;
  if (!u_bulk.allFinite() || !u_bdry.allFinite() ||
      std::max(u_bulk.cwiseAbs().maxCoeff(), u_bdry.cwiseAbs().maxCoeff()) >
          kAmplitudeLimit)
    throw numeric_error("nonlinear_force: non-finite or overflowing amplitude " +
                        std::to_string(std::max(u_bulk.cwiseAbs().maxCoeff(),
                                                u_bdry.cwiseAbs().maxCoeff())));
  const Eigen::VectorXd fb =
      apply_pointwise(system.nonlin, u_bulk, NonlinearityPart::F);
  const Eigen::VectorXd gb =
      apply_pointwise(system.nonlin, u_bdry, NonlinearityPart::G);
  if (!fb.allFinite() || !gb.allFinite())
    throw numeric_error("nonlinear_force: nonlinearity overflow at amplitude " +
                        std::to_string(u_bulk.cwiseAbs().maxCoeff()));
  return system.bulk_table.transpose() * system.bulk_weights.cwiseProduct(fb) +
         system.bdry_table.transpose() * system.bdry_weights.cwiseProduct(gb);
}

Eigen::MatrixXd nonlinear_force_jacobian(const ModalSystem& system,
                                         const Eigen::VectorXd& a) {
  if (a.size() != system.n)
    throw dimension_error("nonlinear_force_jacobian: length mismatch");
  const Eigen::VectorXd fb = apply_pointwise(
      system.nonlin, (system.bulk_table * a).eval(), NonlinearityPart::FPrime);
  const Eigen::VectorXd gb = apply_pointwise(
      system.nonlin, (system.bdry_table * a).eval(), NonlinearityPart::GPrime);
  return system.bulk_table.transpose() *
             system.bulk_weights.cwiseProduct(fb).asDiagonal() * system.bulk_table +
         system.bdry_table.transpose() *
             system.bdry_weights.cwiseProduct(gb).asDiagonal() * system.bdry_table;
}

std::pair<double, double> potential_integrals(const ModalSystem& system,
                                              const Eigen::VectorXd& a) {
  if (a.size() != system.n)
    throw dimension_error("potential_integrals: length mismatch");
  const Eigen::VectorXd fb = apply_pointwise(
      system.nonlin, (system.bulk_table * a).eval(), NonlinearityPart::FTilde);
  const Eigen::VectorXd gb = apply_pointwise(
      system.nonlin, (system.bdry_table * a).eval(), NonlinearityPart::GTilde);
  return {system.bulk_weights.dot(fb), system.bdry_weights.dot(gb)};
}

State step(const ModalSystem& system, const State& state, double dt,
           SolverStats* stats) {
  check_state_dims(system, state, "step");
  if (!(dt != 0.0) || !std::isfinite(dt)) throw parameter_error("step: invalid dt");
  const int n = system.n;

  // Explicit predictor, then Newton on the midpoint residual in (a+, v+).
  Eigen::VectorXd a_new = state.a + dt * state.a_dot;
  Eigen::VectorXd v_new =
      state.a_dot - dt * (system.damping * state.a_dot +
                          system.lambda.cwiseProduct(state.a) +
                          nonlinear_force(system, state.a));

  const int max_iter = 50;
  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd a_mid = 0.5 * (state.a + a_new);
    const Eigen::VectorXd v_mid = 0.5 * (state.a_dot + v_new);
    const Eigen::VectorXd force = nonlinear_force(system, a_mid);

    Eigen::VectorXd res(2 * n);
    res.head(n) = a_new - state.a - dt * v_mid;
    res.tail(n) = v_new - state.a_dot +
                  dt * (system.damping * v_mid +
                        system.lambda.cwiseProduct(a_mid) + force);
    // Tolerance relative to the state scale keeps decayed trajectories as
    // accurate as the initial transient.
    const double scale =
        std::max({state.a.cwiseAbs().maxCoeff(), state.a_dot.cwiseAbs().maxCoeff(),
                  a_new.cwiseAbs().maxCoeff(), v_new.cwiseAbs().maxCoeff(), 1e-30});
    if (res.cwiseAbs().maxCoeff() <= 1e-11 * scale) {
      converged = true;
      if (stats) stats->newton_iterations += iter;
      if (stats) stats->max_newton_iterations = std::max(stats->max_newton_iterations, iter);
      break;
    }

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    jac.topLeftCorner(n, n).setIdentity();
    jac.topRightCorner(n, n) = -0.5 * dt * Eigen::MatrixXd::Identity(n, n);
    jac.bottomLeftCorner(n, n) =
        0.5 * dt * (Eigen::MatrixXd(system.lambda.asDiagonal()) +
                    nonlinear_force_jacobian(system, a_mid));
    jac.bottomRightCorner(n, n) =
        Eigen::MatrixXd::Identity(n, n) + 0.5 * dt * system.damping;

    const Eigen::VectorXd delta = jac.partialPivLu().solve(res);
    if (!delta.allFinite())
      throw step_error("step: Newton update not finite at t = " +
                       std::to_string(state.t));
    a_new -= delta.head(n);
    v_new -= delta.tail(n);
  }
  if (!converged)
    throw step_error("step: Newton failed to reach 1e-11 within 50 iterations at t = " +
                     std::to_string(state.t));
  if (stats) ++stats->steps;

  State out;
  out.a = std::move(a_new);
  out.a_dot = std::move(v_new);
  out.t = state.t + dt;
  return out;
}

EnergyReport compute_energy(const ModalSystem& system, const State& state,
                            const EnergyReport* previous) {
  check_state_dims(system, state, "compute_energy");
  EnergyReport rep;
  rep.time = state.t;
  rep.kinetic = state.a_dot.squaredNorm();
  rep.elastic = state.a.dot(system.lambda.cwiseProduct(state.a));
  const auto [pot_bulk, pot_bdry] = potential_integrals(system, state.a);
  rep.potential_bulk = 2.0 * pot_bulk;
  rep.potential_boundary = 2.0 * pot_bdry;
  rep.total = rep.kinetic + rep.elastic + rep.potential_bulk + rep.potential_boundary;
  rep.dissipation_rate =
      2.0 * (state.a_dot.dot(system.diss_fractional * state.a_dot) +
             state.a_dot.dot(system.diss_boundary * state.a_dot) +
             state.a_dot.squaredNorm());
  if (previous) {
    rep.dissipation_accumulated =
        previous->dissipation_accumulated +
        0.5 * (state.t - previous->time) *
            (previous->dissipation_rate + rep.dissipation_rate);
    rep.initial_energy = previous->initial_energy;
  } else {
    rep.dissipation_accumulated = 0.0;
    rep.initial_energy = rep.total;
  }
  rep.identity_residual =
      std::abs(rep.total + rep.dissipation_accumulated - rep.initial_energy);
  return rep;
}

TrajectoryRecord integrate(const ModalSystem& system, const State& initial, double T,
                           double dt, int sample_stride) {
  check_state_dims(system, initial, "integrate");
  if (!(T > 0.0)) throw parameter_error("integrate: T must be positive");
  if (!(dt > 0.0)) throw parameter_error("integrate: dt must be positive");
  if (sample_stride < 1) throw parameter_error("integrate: sample_stride must be >= 1");

  TrajectoryRecord record;
  State current = initial;
  EnergyReport chain = compute_energy(system, current);
  record.initial_energy = chain.total;
  record.times.push_back(current.t);
  record.states.push_back(current);
  record.energy.push_back(chain);

  const long long nsteps = std::max<long long>(1, std::llround(T / dt));
  double last_sampled_energy = chain.total;

  // One nominal step; on Newton failure retry with halved substeps (depth <= 3).
  auto advance = [&](auto&& self, const State& from, double h, int depth) -> State {
    try {
      State next = step(system, from, h, &record.stats);
      chain = compute_energy(system, next, &chain);
      record.max_identity_residual =
          std::max(record.max_identity_residual, chain.identity_residual);
      return next;
    } catch (const step_error& err) {
      if (depth >= 3)
        throw integration_error("integration failed at t = " +
                                std::to_string(from.t) + ": " + err.what());
      ++record.stats.step_rejections;
      State half = self(self, from, 0.5 * h, depth + 1);
      return self(self, half, 0.5 * h, depth + 1);
    }
  };

  for (long long k = 1; k <= nsteps; ++k) {
    const double amp = std::max(current.a.cwiseAbs().maxCoeff(),
                                current.a_dot.cwiseAbs().maxCoeff());
    if (amp > kAmplitudeLimit)
      throw integration_error("blow-up diagnostic: modal amplitude " +
                              std::to_string(amp) + " at t = " +
                              std::to_string(current.t));
    current = advance(advance, current, dt, 0);
    if (k % sample_stride == 0 || k == nsteps) {
      record.times.push_back(current.t);
      record.states.push_back(current);
      record.energy.push_back(chain);
      if (chain.total > last_sampled_energy + 1e-10) record.energy_monotone = false;
      record.max_energy_increase =
          std::max(record.max_energy_increase, chain.total - last_sampled_energy);
      last_sampled_energy = chain.total;
    }
  }
  return record;
}

WeakResidualReport verify_weak_residual(const TrajectoryRecord& record,
                                        const ModalSystem& system, int m) {
  if (m < 1 || m > system.n)
    throw parameter_error("verify_weak_residual: test modes m = " + std::to_string(m) +
                          " outside [1, n = " + std::to_string(system.n) + "]");
  const int intervals = static_cast<int>(record.states.size()) - 1;
  WeakResidualReport rep;
  rep.series.resize(std::max(intervals, 0), m);
  rep.max_abs = Eigen::VectorXd::Zero(m);
  for (int j = 0; j < intervals; ++j) {
    const State& lo = record.states[j];
    const State& hi = record.states[j + 1];
    const double h = record.times[j + 1] - record.times[j];
    const Eigen::VectorXd a_mid = 0.5 * (lo.a + hi.a);
    const Eigen::VectorXd v_mid = 0.5 * (lo.a_dot + hi.a_dot);
    const Eigen::VectorXd rhs_v =
        -(system.damping * v_mid + system.lambda.cwiseProduct(a_mid) +
          nonlinear_force(system, a_mid));
    for (int k = 0; k < m; ++k) {
      const double quotient =
          ((hi.a(k) + hi.a_dot(k)) - (lo.a(k) + lo.a_dot(k))) / h;
      const double residual = quotient - (v_mid(k) + rhs_v(k));
      rep.series(j, k) = residual;
      rep.max_abs(k) = std::max(rep.max_abs(k), std::abs(residual));
    }
  }
  return rep;
}

ConvergenceTable convergence_study(const Mesh& mesh, const WentzellOperator& op,
                                   const DampingMatrix& damping,
                                   const NonlinearitySpec& nonlin,
                                   const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                   const std::vector<int>& dims, double T, double dt,
                                   int sample_stride) {
  if (dims.empty()) throw parameter_error("convergence_study: empty dimension list");
  for (size_t i = 1; i < dims.size(); ++i)
    if (dims[i] < dims[i - 1])
      throw parameter_error("convergence_study: dimensions must be nondecreasing");

  const int n_ref = dims.back();
  auto run_one = [&](int n) {
    const ModalSystem system = build_modal_system(mesh, op, damping, nonlin, n);
    const State start = project_initial_data(op, u0, v0, n);
    return integrate(system, start, T, dt, sample_stride);
  };

  int cap = 1;
  if (const char* env = std::getenv("WENTZELL_THREADS")) {
    cap = std::max(1, std::atoi(env));
  }
  std::vector<TrajectoryRecord> records(dims.size());
  if (cap <= 1) {
    for (size_t i = 0; i < dims.size(); ++i) records[i] = run_one(dims[i]);
  } else {
    std::vector<std::future<TrajectoryRecord>> jobs(dims.size());
    size_t next = 0;
    while (next < dims.size()) {
      const size_t batch = std::min<size_t>(cap, dims.size() - next);
      for (size_t b = 0; b < batch; ++b)
        jobs[next + b] = std::async(std::launch::async, run_one, dims[next + b]);
      for (size_t b = 0; b < batch; ++b) records[next + b] = jobs[next + b].get();
      next += batch;
    }
  }

  const ModalSystem reference = build_modal_system(mesh, op, damping, nonlin, n_ref);
  const double r1 = nonlin.r1;
  auto distance = [&](const TrajectoryRecord& a, const TrajectoryRecord& b) {
    double worst = 0.0;
    for (size_t j = 0; j < a.states.size(); ++j) {
      Eigen::VectorXd da = Eigen::VectorXd::Zero(n_ref);
      Eigen::VectorXd dv = Eigen::VectorXd::Zero(n_ref);
      da.head(a.states[j].a.size()) = a.states[j].a;
      dv.head(a.states[j].a_dot.size()) = a.states[j].a_dot;
      da -= b.states[j].a;
      dv -= b.states[j].a_dot;
      const Eigen::VectorXd du = reference.bulk_table * da;
      double lr = 0.0;
      for (int q = 0; q < du.size(); ++q)
        lr += reference.bulk_weights(q) * std::pow(std::abs(du(q)), r1);
      const double d2 = da.dot(reference.lambda.cwiseProduct(da)) + dv.squaredNorm() +
                        std::pow(lr, 2.0 / r1);
      worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
  };

  ConvergenceTable table;
  table.reference_n = n_ref;
  for (size_t i = 0; i < dims.size(); ++i) {
    ConvergenceRow row;
    row.n = dims[i];
    row.distance_to_reference = distance(records[i], records.back());
    row.initial_energy = records[i].initial_energy;
    row.final_energy = records[i].energy.back().total;
    row.max_identity_residual = records[i].max_identity_residual;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace wentzell
