#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "wentzell/nonlinearity.hpp"
#include "wentzell/operators.hpp"

namespace wentzell {

/// Amplitudes beyond this abort integration with a blow-up diagnostic.
inline constexpr double kAmplitudeLimit = 1e8;

/// Truncated modal system  a'' + D a' + Lambda a + N(a) = 0  over the first n
/// (A, M) eigenmodes. The damping split mirrors the three dissipation
/// channels; the modal mass form is the identity by M-orthonormality.
struct ModalSystem {
  int n = 0;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd damping;           // W^T D W
  Eigen::MatrixXd diss_fractional;   // modal omega-fractional channel
  Eigen::MatrixXd diss_boundary;     // modal alpha*omega surface channel
  Eigen::MatrixXd modes;             // nodal mode columns (node_count x n)
  Eigen::MatrixXd bulk_table;        // mode values at bulk quadrature points
  Eigen::MatrixXd bdry_table;        // mode values at boundary quadrature points
  Eigen::VectorXd bulk_weights;
  Eigen::VectorXd bdry_weights;
  NonlinearitySpec nonlin;
};

struct State {
  Eigen::VectorXd a;
  Eigen::VectorXd a_dot;
  double t = 0.0;
};

struct EnergyReport {
  double time = 0.0;
  double total = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double potential_bulk = 0.0;
  double potential_boundary = 0.0;
  double dissipation_rate = 0.0;         // instantaneous integrand of (twice) the
                                         // three dissipation quadratic forms
  double dissipation_accumulated = 0.0;  // trapezoid in time along the chain
  double initial_energy = 0.0;
  double identity_residual = 0.0;        // |E + accumulated - E(0)|
};

struct SolverStats {
  long long newton_iterations = 0;
  int max_newton_iterations = 0;
  long long steps = 0;
  long long step_rejections = 0;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<EnergyReport> energy;
  SolverStats stats;
  double initial_energy = 0.0;
  double max_identity_residual = 0.0;
  double max_energy_increase = 0.0;  // over recorded samples
  bool energy_monotone = true;       // within 1e-10, sample-to-sample
};

ModalSystem build_modal_system(const Mesh& mesh, const WentzellOperator& op,
                               const DampingMatrix& damping,
                               const NonlinearitySpec& nonlin, int n);

/// M-orthogonal projection of nodal data onto the first n modes.
State project_initial_data(const WentzellOperator& op, const Eigen::VectorXd& u0,
                           const Eigen::VectorXd& v0, int n);

Eigen::VectorXd nonlinear_force(const ModalSystem& system, const Eigen::VectorXd& a);
Eigen::MatrixXd nonlinear_force_jacobian(const ModalSystem& system,
                                         const Eigen::VectorXd& a);

/// Quadrature values of (integral of F_tilde(u), integral of G_tilde(trace u));
/// nonlinear_force is the exact modal gradient of their sum.
std::pair<double, double> potential_integrals(const ModalSystem& system,
                                              const Eigen::VectorXd& a);

/// One implicit-midpoint step; Newton tolerance 1e-11, max 50 iterations.
State step(const ModalSystem& system, const State& state, double dt,
           SolverStats* stats = nullptr);

EnergyReport compute_energy(const ModalSystem& system, const State& state,
                            const EnergyReport* previous = nullptr);

TrajectoryRecord integrate(const ModalSystem& system, const State& initial, double T,
                           double dt, int sample_stride = 1);

struct WeakResidualReport {
  Eigen::MatrixXd series;   // one row per sample interval, one column per mode
  Eigen::VectorXd max_abs;  // per test mode
};

/// Difference quotient of the modal pairing across each recorded sample
/// interval minus the system right side at the averaged state, for test
/// functions drawn from the first m modes.
WeakResidualReport verify_weak_residual(const TrajectoryRecord& record,
                                        const ModalSystem& system, int m);

struct ConvergenceRow {
  int n = 0;
  double distance_to_reference = 0.0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_identity_residual = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  int reference_n = 0;
};

/// Integrates the same initial data at each Galerkin dimension and reports the
/// sup-in-time discrete phase-space distance to the largest-dimension run.
/// Jobs fan out over threads capped by WENTZELL_THREADS; results are merged in
/// list order.
ConvergenceTable convergence_study(const Mesh& mesh, const WentzellOperator& op,
                                   const DampingMatrix& damping,
                                   const NonlinearitySpec& nonlin,
                                   const Eigen::VectorXd& u0, const Eigen::VectorXd& v0,
                                   const std::vector<int>& dims, double T, double dt,
                                   int sample_stride = 1);

}  // namespace wentzell
