#include "conic_palm/analysis.hpp"
#include "conic_palm/cli.hpp"
#include "conic_palm/errors.hpp"
#include "conic_palm/problem_io.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace conic_palm;

namespace {

py::object to_python(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

RunConfig make_config(const std::string& schedule, double c, double rho, double c_max,
                      double sigma, double theta, double eps_max, double alpha, double tol,
                      int max_outer) {
  RunConfig cfg;
  switch (schedule_kind_from_string(schedule)) {
    case ScheduleKind::kConstant:
      cfg.schedule = PenaltySchedule::constant(c);
      break;
    case ScheduleKind::kGeometric:
      cfg.schedule = PenaltySchedule::geometric(c, rho, c_max);
      break;
    case ScheduleKind::kUnbounded:
      cfg.schedule = PenaltySchedule::unbounded(c, rho);
      break;
  }
  cfg.eps = {sigma, theta, eps_max};
  cfg.alpha = alpha;
  cfg.stop_tol = tol;
  cfg.max_outer = max_outer;
  return cfg;
}

template <class Runner>
auto bind_runner(Runner runner) {
  return [runner](const ProblemInstance& p, const Vector& x0, const Vector& lam0,
                  const std::string& schedule, double c, double rho, double c_max, double sigma,
                  double theta, double eps_max, double alpha, double tol, int max_outer) {
    const auto cfg = make_config(schedule, c, rho, c_max, sigma, theta, eps_max, alpha, tol,
                                 max_outer);
    py::gil_scoped_release release;
    return runner(p, x0, lam0, cfg);
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Inexact proximal augmented Lagrangian method for conic programs";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<LookupError>(m, "UnknownProblemError", PyExc_KeyError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<RegistryIntegrityError>(m, "RegistryIntegrityError",
                                                 PyExc_RuntimeError);

  py::enum_<ConeKind>(m, "ConeKind")
      .value("ZERO", ConeKind::kZero)
      .value("NONNEG", ConeKind::kNonneg)
      .value("NONPOS", ConeKind::kNonpos)
      .value("SOC", ConeKind::kSecondOrder)
      .value("PSD", ConeKind::kPsd);

  py::class_<PrimitiveCone>(m, "PrimitiveCone")
      .def(py::init([](ConeKind kind, int dim) { return PrimitiveCone{kind, dim}; }),
           py::arg("kind"), py::arg("dim"))
      .def_readonly("kind", &PrimitiveCone::kind)
      .def_readonly("dim", &PrimitiveCone::dim)
      .def_property_readonly("vector_length", &PrimitiveCone::vector_length);

  py::class_<ConeSpec>(m, "ConeSpec")
      .def(py::init<std::vector<PrimitiveCone>>(), py::arg("blocks"))
      .def_property_readonly("blocks", &ConeSpec::blocks)
      .def_property_readonly("total_dim", &ConeSpec::total_dim)
      .def("to_dict", [](const ConeSpec& c) { return to_python(to_json(c)); })
      .def("__repr__", [](const ConeSpec& c) { return "ConeSpec(" + to_json(c).dump() + ")"; });

  m.def("project", [](const ConeSpec& c, const Vector& y) { return project(c, y); });
  m.def("dist_sq", [](const ConeSpec& c, const Vector& y) { return dist_sq(c, y); });
  m.def("proj_generalized_jacobian",
        [](const ConeSpec& c, const Vector& y) { return proj_generalized_jacobian(c, y); });
  m.def("normal_cone_gap", [](const ConeSpec& c, const Vector& y, const Vector& lam) {
    return normal_cone_gap(c, y, lam);
  });

  py::class_<ReferenceSolution>(m, "ReferenceSolution")
      .def_readonly("x_bar", &ReferenceSolution::x_bar)
      .def_readonly("lambda_bar", &ReferenceSolution::lambda_bar)
      .def_readonly("sosc_holds", &ReferenceSolution::sosc_holds)
      .def("dist_to_multiplier_set", [](const ReferenceSolution& r, const Vector& lam) {
        return dist_to_multiplier_set(lam, r.multiplier_set);
      });

  py::class_<ProblemInstance>(m, "Problem")
      .def_readonly("name", &ProblemInstance::name)
      .def_readonly("n", &ProblemInstance::n)
      .def_readonly("m", &ProblemInstance::m)
      .def_readonly("cone", &ProblemInstance::cone)
      .def_readonly("reference", &ProblemInstance::reference)
      .def_readonly("default_x0", &ProblemInstance::default_x0)
      .def_readonly("default_lam0", &ProblemInstance::default_lam0)
      .def("f", [](const ProblemInstance& p, const Vector& x) { return p.f_value(x); })
      .def("grad_f", [](const ProblemInstance& p, const Vector& x) { return p.f_grad(x); })
      .def("g", [](const ProblemInstance& p, const Vector& x) { return p.g_value(x); })
      .def("jac_g", [](const ProblemInstance& p, const Vector& x) { return p.g_jac(x); })
      .def("to_dict", [](const ProblemInstance& p) { return to_python(serialize_problem(p)); })
      .def("__repr__", [](const ProblemInstance& p) {
        return "Problem(name='" + p.name + "', n=" + std::to_string(p.n) +
               ", m=" + std::to_string(p.m) + ")";
      });

  m.def("registry_names", &registry_names);
  m.def("registry_get", &registry_get, py::arg("name"));
  m.def("parse_problem",
        [](const std::string& text) { return parse_problem(text); }, py::arg("document"));
  m.def("load_problem_file", &load_problem_file, py::arg("path"));

  py::class_<AugLagEval>(m, "AugLagEval")
      .def_readonly("value", &AugLagEval::value)
      .def_readonly("grad_x", &AugLagEval::grad_x)
      .def_readonly("grad_lambda", &AugLagEval::grad_lambda)
      .def_readonly("shifted_point", &AugLagEval::shifted_point)
      .def_readonly("projected_point", &AugLagEval::projected_point);

  m.def("aug_lagrangian", &aug_lagrangian, py::arg("problem"), py::arg("x"), py::arg("lam"),
        py::arg("c"));
  m.def("lagrangian_grad_x", &lagrangian_grad_x, py::arg("problem"), py::arg("x"),
        py::arg("lam"));
  m.def("kkt_residual", &kkt_residual, py::arg("problem"), py::arg("x"), py::arg("lam"));
  m.def("multiplier_update", &multiplier_update, py::arg("problem"), py::arg("x"),
        py::arg("lam"), py::arg("c"));

  py::class_<SubproblemResult>(m, "SubproblemResult")
      .def_readonly("x", &SubproblemResult::x)
      .def_readonly("grad_norm", &SubproblemResult::grad_norm)
      .def_readonly("iterations", &SubproblemResult::iterations)
      .def_readonly("objective", &SubproblemResult::objective)
      .def_property_readonly("status", [](const SubproblemResult& r) {
        return std::string(to_string(r.status));
      });

  m.def(
      "solve_subproblem",
      [](const ProblemInstance& p, const Vector& lam, double c, const Vector& v, double eps,
         std::optional<Vector> x_init, int max_iterations) {
        SubsolverLimits limits;
        limits.max_iterations = max_iterations;
        return solve_subproblem(p, lam, c, v, eps, x_init.value_or(v), limits);
      },
      py::arg("problem"), py::arg("lam"), py::arg("c"), py::arg("v"), py::arg("eps"),
      py::arg("x_init") = py::none(), py::arg("max_iterations") = 200);

  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("k", &TraceRecord::k)
      .def_readonly("x", &TraceRecord::x)
      .def_readonly("lam", &TraceRecord::lam)
      .def_readonly("c", &TraceRecord::c)
      .def_readonly("eps", &TraceRecord::eps)
      .def_readonly("r", &TraceRecord::r)
      .def_readonly("step_norm", &TraceRecord::step_norm)
      .def_readonly("accepted", &TraceRecord::accepted)
      .def_readonly("terminal", &TraceRecord::terminal)
      .def_readonly("inner_iterations", &TraceRecord::inner_iterations)
      .def_readonly("dist_primal", &TraceRecord::dist_primal)
      .def_readonly("dist_dual", &TraceRecord::dist_dual)
      .def_readonly("dist_pd", &TraceRecord::dist_pd);

  py::class_<Trace>(m, "Trace")
      .def_readonly("method", &Trace::method)
      .def_readonly("records", &Trace::records)
      .def_readonly("message", &Trace::message)
      .def_property_readonly("status",
                             [](const Trace& t) { return std::string(to_string(t.status)); })
      .def("to_csv", [](const Trace& t) {
        std::ostringstream out;
        write_trace_csv(t, out);
        return out.str();
      })
      .def("__len__", [](const Trace& t) { return t.records.size(); });

  const auto run_args = [] {
    return std::make_tuple(py::arg("problem"), py::arg("x0"), py::arg("lam0"),
                           py::arg("schedule") = "geometric", py::arg("c") = 10.0,
                           py::arg("rho") = 2.0, py::arg("c_max") = 1e6,
                           py::arg("sigma") = 1.0, py::arg("theta") = 0.5,
                           py::arg("eps_max") = 1e-2, py::arg("alpha") = 1e3,
                           py::arg("tol") = 1e-10, py::arg("max_outer") = 100);
  };
  std::apply([&](auto... a) { m.def("run_palm", bind_runner(run_palm), a...); }, run_args());
  std::apply([&](auto... a) { m.def("run_alm", bind_runner(run_alm), a...); }, run_args());

  m.def("eps_rule", [](double sigma, double theta, double eps_max, double t) {
    return eps_rule(EpsRule{sigma, theta, eps_max}, t);
  }, py::arg("sigma"), py::arg("theta"), py::arg("eps_max"), py::arg("t"));

  m.def("estimate_rates", [](const Trace& t) { return to_python(to_json(estimate_rates(t))); },
        py::arg("trace"));
  m.def("estimate_rates_from",
        [](const std::vector<double>& d, double floor) {
          return to_python(to_json(estimate_rates(d, floor)));
        },
        py::arg("distances"), py::arg("floor") = 0.0);

  m.def("check_quadratic_growth",
        [](const ProblemInstance& p, const std::vector<double>& c_list, double radius,
           int samples, double kappa, std::uint64_t seed) {
          return to_python(to_json(check_quadratic_growth(p, c_list, radius, samples, kappa, seed)));
        },
        py::arg("problem"), py::arg("c_list"), py::arg("radius") = 0.02,
        py::arg("samples") = 200, py::arg("kappa") = 0.0, py::arg("seed") = 1);
  m.def("check_error_bound",
        [](const ProblemInstance& p, double radius, int samples, std::uint64_t seed) {
          return to_python(to_json(check_error_bound(p, radius, samples, seed)));
        },
        py::arg("problem"), py::arg("radius") = 0.05, py::arg("samples") = 200,
        py::arg("seed") = 1);
  m.def("check_step_error_bound",
        [](const ProblemInstance& p, const std::vector<double>& c_list, double radius,
           int samples, std::uint64_t seed) {
          return to_python(to_json(check_step_error_bound(p, c_list, radius, samples, seed)));
        },
        py::arg("problem"), py::arg("c_list"), py::arg("radius") = 0.02,
        py::arg("samples") = 200, py::arg("seed") = 1);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a conic-palm command; returns (exit_code, stdout, stderr).");
}
