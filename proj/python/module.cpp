#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wentzell/runner.hpp"

namespace py = pybind11;
using namespace wentzell;

PYBIND11_MODULE(_wentzell, m) {
  m.doc() = "Strongly damped wave equation with dynamic Wentzell boundary "
            "conditions: assembly, spectra, fractional damping, balance checks "
            "and Galerkin time integration";

  py::register_exception<error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<parameter_error>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<dimension_error>(m, "DimensionError", PyExc_ValueError);

  py::enum_<GeometryKind>(m, "GeometryKind")
      .value("Interval", GeometryKind::Interval)
      .value("PeriodicSlab", GeometryKind::PeriodicSlab);
  py::enum_<Region>(m, "Region")
      .value("Bulk", Region::Bulk)
      .value("Boundary", Region::Boundary);
  py::enum_<DampingRealization>(m, "DampingRealization")
      .value("SpectralR1", DampingRealization::SpectralR1)
      .value("BlockR2", DampingRealization::BlockR2);
  py::enum_<ExponentConvention>(m, "ExponentConvention")
      .value("Theta", ExponentConvention::Theta)
      .value("TwoTheta", ExponentConvention::TwoTheta);
  py::enum_<NonlinearityPart>(m, "NonlinearityPart")
      .value("F", NonlinearityPart::F)
      .value("FPrime", NonlinearityPart::FPrime)
      .value("FTilde", NonlinearityPart::FTilde)
      .value("G", NonlinearityPart::G)
      .value("GPrime", NonlinearityPart::GPrime)
      .value("GTilde", NonlinearityPart::GTilde);
  py::enum_<BalanceVerdict>(m, "BalanceVerdict")
      .value("Satisfied", BalanceVerdict::Satisfied)
      .value("Violated", BalanceVerdict::Violated)
      .value("Inconclusive", BalanceVerdict::Inconclusive);

  py::class_<GeometrySpec>(m, "GeometrySpec")
      .def(py::init<>())
      .def_readwrite("kind", &GeometrySpec::kind)
      .def_readwrite("length", &GeometrySpec::length)
      .def_readwrite("circumference", &GeometrySpec::circumference)
      .def_readwrite("bulk_elements", &GeometrySpec::bulk_elements)
      .def_readwrite("periodic_points", &GeometrySpec::periodic_points);

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("nodes", [](const Mesh& mesh) { return mesh.nodes; })
      .def_property_readonly("boundary_nodes",
                             [](const Mesh& mesh) { return mesh.boundary_nodes; })
      .def_property_readonly("volume", [](const Mesh& mesh) { return mesh.volume; })
      .def_property_readonly("surface", [](const Mesh& mesh) { return mesh.surface; })
      .def("node_count", &Mesh::node_count)
      .def("boundary_count", &Mesh::boundary_count)
      .def("trace", &Mesh::trace)
      .def("lift", &Mesh::lift);

  m.def("build_geometry", &build_geometry);
  m.def("compute_measures", &compute_measures);
  m.def("quadrature_integrate", &quadrature_integrate);

  py::class_<OperatorBlocks>(m, "OperatorBlocks")
      .def_property_readonly("M_bulk",
                             [](const OperatorBlocks& b) { return Eigen::MatrixXd(b.M_bulk); })
      .def_property_readonly("K_bulk",
                             [](const OperatorBlocks& b) { return Eigen::MatrixXd(b.K_bulk); })
      .def_property_readonly("M_bdry",
                             [](const OperatorBlocks& b) { return Eigen::MatrixXd(b.M_bdry); })
      .def_property_readonly("K_bdry",
                             [](const OperatorBlocks& b) { return Eigen::MatrixXd(b.K_bdry); });

  py::class_<EigenDecomposition>(m, "EigenDecomposition")
      .def_property_readonly("eigenvalues",
                             [](const EigenDecomposition& e) { return e.lambda; })
      .def_property_readonly("modes", [](const EigenDecomposition& e) { return e.modes; })
      .def("count", &EigenDecomposition::count);

  py::class_<WentzellOperator>(m, "WentzellOperator")
      .def_property_readonly("A",
                             [](const WentzellOperator& op) { return Eigen::MatrixXd(op.A); })
      .def_property_readonly("M",
                             [](const WentzellOperator& op) { return Eigen::MatrixXd(op.M); })
      .def_property_readonly("blocks",
                             [](const WentzellOperator& op) { return op.blocks; })
      .def_property_readonly("eig",
                             [](const WentzellOperator& op) { return op.eig; })
      .def("size", &WentzellOperator::size)
      .def("compute_eigendecomposition",
           [](WentzellOperator& op, int n) {
             op.eig = solve_eigenproblem(op, n <= 0 ? op.size() : n);
             return *op.eig;
           },
           py::arg("n") = 0);

  m.def("assemble_blocks", &assemble_blocks);
  m.def("assemble_wentzell", &assemble_wentzell);
  m.def("solve_eigenproblem", &solve_eigenproblem);
  m.def("apply_fractional_power",
        [](const EigenDecomposition& eig, const WentzellOperator& op, double theta,
           const Eigen::VectorXd& x) {
          return apply_fractional_power(eig, op.M, theta, x);
        });

  py::class_<FractionalParams>(m, "FractionalParams")
      .def(py::init<>())
      .def_readwrite("theta", &FractionalParams::theta)
      .def_readwrite("alpha", &FractionalParams::alpha)
      .def_readwrite("omega", &FractionalParams::omega)
      .def_readwrite("realization", &FractionalParams::realization)
      .def_readwrite("exponent_convention", &FractionalParams::exponent_convention);

  py::class_<DampingMatrix>(m, "DampingMatrix")
      .def_readonly("total", &DampingMatrix::total)
      .def_readonly("fractional_part", &DampingMatrix::fractional_part)
      .def_readonly("boundary_part", &DampingMatrix::boundary_part)
      .def_readonly("mass_part", &DampingMatrix::mass_part);

  m.def("build_damping_matrix", &build_damping_matrix);
  m.def("solve_wentzell_bvp", &solve_wentzell_bvp);

  py::class_<IsomorphismReport>(m, "IsomorphismReport")
      .def_readonly("ratio_low", &IsomorphismReport::ratio_low)
      .def_readonly("ratio_high", &IsomorphismReport::ratio_high)
      .def_readonly("c_star", &IsomorphismReport::c_star);
  m.def("estimate_isomorphism_constant", &estimate_isomorphism_constant);
  m.def("isomorphism_ratio", &isomorphism_ratio);

  py::class_<NormReport>(m, "NormReport")
      .def_readonly("norm_X2_sq", &NormReport::norm_X2_sq)
      .def_readonly("norm_V1_sq", &NormReport::norm_V1_sq)
      .def_readonly("energy_pairing", &NormReport::energy_pairing);
  m.def("discrete_norms", &discrete_norms);

  py::class_<PowerTerm>(m, "PowerTerm")
      .def(py::init<>())
      .def(py::init([](double c, double p) { return PowerTerm{c, p}; }))
      .def_readwrite("c", &PowerTerm::c)
      .def_readwrite("p", &PowerTerm::p);
  py::class_<SinTerm>(m, "SinTerm")
      .def(py::init<>())
      .def_readwrite("c", &SinTerm::c)
      .def_readwrite("k", &SinTerm::k);

  py::class_<NonlinearitySpec>(m, "NonlinearitySpec")
      .def(py::init<>())
      .def_readwrite("f_terms", &NonlinearitySpec::f_terms)
      .def_readwrite("g_terms", &NonlinearitySpec::g_terms)
      .def_readwrite("f_sin", &NonlinearitySpec::f_sin)
      .def_readwrite("g_sin", &NonlinearitySpec::g_sin)
      .def_readwrite("r1", &NonlinearitySpec::r1)
      .def_readwrite("r2", &NonlinearitySpec::r2)
      .def_readwrite("c_f", &NonlinearitySpec::c_f)
      .def_readwrite("c_g", &NonlinearitySpec::c_g)
      .def_readwrite("M1", &NonlinearitySpec::M1)
      .def_readwrite("M2", &NonlinearitySpec::M2)
      .def_readwrite("ell1", &NonlinearitySpec::ell1)
      .def_readwrite("ell2", &NonlinearitySpec::ell2)
      .def_readwrite("epsilon", &NonlinearitySpec::epsilon)
      .def("infer_leading", &NonlinearitySpec::infer_leading);

  m.def("eval_nonlinearity", &eval_nonlinearity);
  m.def("log_grid", &log_grid);

  py::class_<SignGrowthReport>(m, "SignGrowthReport")
      .def_readonly("min_f_over_s", &SignGrowthReport::min_f_over_s)
      .def_readonly("min_g_prime", &SignGrowthReport::min_g_prime)
      .def_readonly("max_f_growth_ratio", &SignGrowthReport::max_f_growth_ratio)
      .def_readonly("max_g_growth_ratio", &SignGrowthReport::max_g_growth_ratio)
      .def_readonly("sign_f_ok", &SignGrowthReport::sign_f_ok)
      .def_readonly("sign_g_ok", &SignGrowthReport::sign_g_ok)
      .def_readonly("growth_f_ok", &SignGrowthReport::growth_f_ok)
      .def_readonly("growth_g_ok", &SignGrowthReport::growth_g_ok)
      .def("all_ok", &SignGrowthReport::all_ok);
  m.def("check_sign_growth", &check_sign_growth);

  py::class_<BalanceReport>(m, "BalanceReport")
      .def_readonly("liminf_estimate", &BalanceReport::liminf_estimate)
      .def_readonly("probe_min", &BalanceReport::probe_min)
      .def_readonly("probe_max", &BalanceReport::probe_max)
      .def_readonly("scenarios", &BalanceReport::scenarios)
      .def_readonly("verdict", &BalanceReport::verdict)
      .def_readonly("fitted_margin", &BalanceReport::fitted_margin)
      .def_readonly("fitted_offset", &BalanceReport::fitted_offset)
      .def_readonly("probes", &BalanceReport::probes);
  m.def("check_balance", &check_balance, py::arg("spec"), py::arg("volume"),
        py::arg("surface"), py::arg("poincare"), py::arg("omega"), py::arg("grid"));

  m.def("estimate_poincare_constant", &estimate_poincare_constant);

  py::class_<BoundaryProbeReport>(m, "BoundaryProbeReport")
      .def_readonly("c_eps", &BoundaryProbeReport::c_eps)
      .def_readonly("epsilon", &BoundaryProbeReport::epsilon)
      .def_readonly("s", &BoundaryProbeReport::s)
      .def_readonly("gamma", &BoundaryProbeReport::gamma)
      .def_readonly("samples", &BoundaryProbeReport::samples);
  m.def("probe_boundary_interior_inequality", &probe_boundary_interior_inequality);

  py::class_<ModalSystem>(m, "ModalSystem")
      .def_readonly("n", &ModalSystem::n)
      .def_property_readonly("stiffness", [](const ModalSystem& s) { return s.lambda; })
      .def_readonly("damping", &ModalSystem::damping)
      .def_readonly("modes", &ModalSystem::modes);

  py::class_<State>(m, "State")
      .def(py::init<>())
      .def_readwrite("a", &State::a)
      .def_readwrite("a_dot", &State::a_dot)
      .def_readwrite("t", &State::t);

  py::class_<EnergyReport>(m, "EnergyReport")
      .def_readonly("time", &EnergyReport::time)
      .def_readonly("total", &EnergyReport::total)
      .def_readonly("kinetic", &EnergyReport::kinetic)
      .def_readonly("elastic", &EnergyReport::elastic)
      .def_readonly("potential_bulk", &EnergyReport::potential_bulk)
      .def_readonly("potential_boundary", &EnergyReport::potential_boundary)
      .def_readonly("dissipation_accumulated", &EnergyReport::dissipation_accumulated)
      .def_readonly("identity_residual", &EnergyReport::identity_residual);

  py::class_<SolverStats>(m, "SolverStats")
      .def_readonly("newton_iterations", &SolverStats::newton_iterations)
      .def_readonly("max_newton_iterations", &SolverStats::max_newton_iterations)
      .def_readonly("steps", &SolverStats::steps)
      .def_readonly("step_rejections", &SolverStats::step_rejections);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("times", &TrajectoryRecord::times)
      .def_readonly("states", &TrajectoryRecord::states)
      .def_readonly("energy", &TrajectoryRecord::energy)
      .def_readonly("stats", &TrajectoryRecord::stats)
      .def_readonly("initial_energy", &TrajectoryRecord::initial_energy)
      .def_readonly("max_identity_residual", &TrajectoryRecord::max_identity_residual)
      .def_readonly("max_energy_increase", &TrajectoryRecord::max_energy_increase)
      .def_readonly("energy_monotone", &TrajectoryRecord::energy_monotone);

  m.def("build_modal_system", &build_modal_system);
  m.def("project_initial_data", &project_initial_data);
  m.def("nonlinear_force", &nonlinear_force);
  m.def("potential_integrals", &potential_integrals);
  m.def("step",
        [](const ModalSystem& system, const State& state, double dt) {
          return step(system, state, dt);
        });
  m.def("compute_energy",
        [](const ModalSystem& system, const State& state) {
          return compute_energy(system, state);
        });
  m.def("integrate", &integrate, py::arg("system"), py::arg("initial"), py::arg("T"),
        py::arg("dt"), py::arg("sample_stride") = 1);

  py::class_<WeakResidualReport>(m, "WeakResidualReport")
      .def_readonly("series", &WeakResidualReport::series)
      .def_readonly("max_abs", &WeakResidualReport::max_abs);
  m.def("verify_weak_residual", &verify_weak_residual);

  py::class_<ConvergenceRow>(m, "ConvergenceRow")
      .def_readonly("n", &ConvergenceRow::n)
      .def_readonly("distance_to_reference", &ConvergenceRow::distance_to_reference)
      .def_readonly("initial_energy", &ConvergenceRow::initial_energy)
      .def_readonly("final_energy", &ConvergenceRow::final_energy)
      .def_readonly("max_identity_residual", &ConvergenceRow::max_identity_residual);
  py::class_<ConvergenceTable>(m, "ConvergenceTable")
      .def_readonly("rows", &ConvergenceTable::rows)
      .def_readonly("reference_n", &ConvergenceTable::reference_n);
  m.def("convergence_study", &convergence_study, py::arg("mesh"), py::arg("op"),
        py::arg("damping"), py::arg("nonlin"), py::arg("u0"), py::arg("v0"),
        py::arg("dims"), py::arg("T"), py::arg("dt"), py::arg("sample_stride") = 1);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readonly("seed", &RunConfig::seed)
      .def("digest", &RunConfig::digest)
      .def("canonical", &RunConfig::canonical);
  m.def("parse_config", &parse_config);
  m.def("parse_config_text", &parse_config_text);

  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("passed", &CheckResult::passed)
      .def_readonly("detail", &CheckResult::detail);
  py::class_<RunSummary>(m, "RunSummary")
      .def_readonly("command", &RunSummary::command)
      .def_readonly("input_digest", &RunSummary::input_digest)
      .def_readonly("seed", &RunSummary::seed)
      .def_readonly("checks", &RunSummary::checks)
      .def_readonly("scalars", &RunSummary::scalars)
      .def_readonly("labels", &RunSummary::labels)
      .def_readonly("artifacts", &RunSummary::artifacts)
      .def("ok", &RunSummary::ok);
  m.def("run",
        [](const RunConfig& config, const std::string& command,
           const std::optional<std::string>& out,
           const std::optional<std::uint64_t>& seed) {
          return run(config, parse_command(command), out, seed);
        },
        py::arg("config"), py::arg("command"), py::arg("out") = std::nullopt,
        py::arg("seed") = std::nullopt);
}
