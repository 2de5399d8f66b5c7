#include "pertproj/commands.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pertproj;

namespace {

Method parse_method(const std::string& s) {
    if (s == "simultaneous" || s == "sp") return Method::simultaneous;
    if (s == "cyclic" || s == "cp") return Method::cyclic;
    throw ConfigError("unknown method '" + s + "'");
}

PerturbationKind parse_kind(const std::string& s) {
    if (s == "none") return PerturbationKind::none;
    if (s == "heavy_ball" || s == "hb") return PerturbationKind::heavy_ball;
    if (s == "surrogate" || s == "sc") return PerturbationKind::surrogate;
    throw ConfigError("unknown perturbation '" + s + "'");
}

PerturbationScheme parse_scheme(const std::string& s) {
    if (s == "outer") return PerturbationScheme::outer;
    if (s == "inner") return PerturbationScheme::inner;
    throw ConfigError("unknown scheme '" + s + "'");
}

py::dict result_dict(const FeasibilityResult& r) {
    std::vector<double> measure, ip;
    std::vector<bool> perturbed;
    for (const IterationRecord& rec : r.trace) {
        measure.push_back(rec.stop_measure);
        ip.push_back(rec.inner_product);
        perturbed.push_back(rec.perturbed);
    }
    py::dict d;
    d["status"] = to_string(r.status);
    d["iterations"] = r.iterations;
    d["perturbations"] = r.perturbations;
    d["x"] = r.x_final;
    d["stop_measure"] = measure;
    d["inner_product"] = ip;
    d["perturbed"] = perturbed;
    return d;
}

SolverConfig make_config(const std::string& method, double lambda, const std::string& perturbation,
                         const std::string& scheme, double lambda_hb, double eps_min, double eps_max,
                         std::optional<double> sc_step, std::uint64_t max_iterations, double tolerance) {
    SolverConfig cfg;
    cfg.method = parse_method(method);
    cfg.lambda = constant_relaxation(lambda);
    cfg.perturbation.kind = parse_kind(perturbation);
    cfg.perturbation.scheme = parse_scheme(scheme);
    cfg.perturbation.lambda_hb = lambda_hb;
    cfg.perturbation.eps_min = eps_min;
    cfg.perturbation.eps_max = eps_max;
    cfg.perturbation.sc_step = sc_step;
    cfg.max_iterations = max_iterations;
    cfg.tolerance = tolerance;
    return cfg;
}

DoseFunctionSpec make_spec(const std::string& role, const std::string& structure, double threshold, double p) {
    if (role == "upper_tail") return DoseFunctionSpec::upper_tail(structure, threshold);
    if (role == "lower_tail") return DoseFunctionSpec::lower_tail(structure, threshold);
    if (role == "eud") return DoseFunctionSpec::eud(structure, p);
    if (role == "conformity") return DoseFunctionSpec::conformity(structure, p, threshold);
    throw ConfigError("unknown dose function '" + role + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Perturbed projection methods";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("build_linear_problem",
          [](double alpha_deg, double beta_deg, double delta_x3) {
              const LinearSystem s = build_linear_problem(alpha_deg, beta_deg, delta_x3);
              return py::make_tuple(s.A, s.b);
          },
          py::arg("alpha_deg") = kReproAlphaDeg, py::arg("beta_deg") = kReproBetaDeg,
          py::arg("delta_x3") = kReproDeltaX3, "Cone system A x <= b as (A, b).");
    m.def("extend_linear_problem",
          [](const Matrix& A, const Vector& b) {
              const LinearSystem s = extend_linear_problem(LinearSystem{A, b});
              return py::make_tuple(s.A, s.b);
          },
          py::arg("A"), py::arg("b"));

    m.def("solve_linear",
          [](const Matrix& A, const Vector& b, const Vector& x0, const std::string& method, double lambda,
             const std::string& perturbation, const std::string& scheme, double lambda_hb, double eps_min,
             double eps_max, std::optional<double> sc_step, std::uint64_t max_iterations, double tolerance,
             std::optional<std::vector<std::size_t>> control) {
              SolverConfig cfg = make_config(method, lambda, perturbation, scheme, lambda_hb, eps_min, eps_max,
                                             sc_step, max_iterations, tolerance);
              cfg.record_iterates = false;
              if (control) cfg.control = ControlSequence::explicit_list(*control, static_cast<std::size_t>(A.rows()));
              const FeasibilityResult r = solve_cfp(to_feasibility_problem(LinearSystem{A, b}), x0, cfg);
              return result_dict(r);
          },
          py::arg("A"), py::arg("b"), py::arg("x0"), py::arg("method") = "simultaneous", py::arg("lam") = 1.9,
          py::arg("perturbation") = "none", py::arg("scheme") = "outer", py::arg("lambda_hb") = 8.0,
          py::arg("eps_min") = 1e-6, py::arg("eps_max") = 6e-2, py::arg("sc_step") = py::none(),
          py::arg("max_iterations") = 100000, py::arg("tolerance") = 1e-10, py::arg("control") = py::none(),
          "Solve A x <= b; control is a 1-based visiting order for the cyclic method.");

    m.def("reproduce_table",
          [](const std::string& id) {
              const TableReport r = reproduce_table(parse_table_id(id));
              py::list rows;
              for (const TableRow& row : r.rows) {
                  py::dict d;
                  d["variant"] = row.variant.name;
                  d["measured"] = row.result.iterations;
                  d["reference"] = row.variant.reference_iterations;
                  d["match"] = row.match;
                  rows.append(d);
              }
              py::dict out;
              out["rows"] = rows;
              out["ordering_ok"] = r.ordering_ok;
              out["passed"] = r.passed();
              return out;
          },
          py::arg("table"), "table1, table2, table3 or cp_lambda1.");

    m.def("normalized_inner_product", &normalized_inner_product, py::arg("p_prev"), py::arg("p_cur"));
    m.def("condition_c", py::overload_cast<const Vector&, const Vector&, double, double>(&condition_c),
          py::arg("p_prev"), py::arg("p_cur"), py::arg("eps_min"), py::arg("eps_max"));
    m.def("heavy_ball_direction", &heavy_ball_direction, py::arg("p_prev"), py::arg("p_cur"));
    m.def("surrogate_direction",
          [](const Vector& p_prev, const Vector& p_cur) {
              const SurrogateDirection s = surrogate_direction(p_prev, p_cur);
              return py::make_tuple(s.direction, s.step_length);
          },
          py::arg("p_prev"), py::arg("p_cur"), "(direction, step_length)");

    py::class_<Disk>(m, "Disk")
        .def(py::init([](double cx, double cy, double r) { return Disk{cx, cy, r}; }), py::arg("cx"), py::arg("cy"),
             py::arg("r"))
        .def_readwrite("cx", &Disk::cx)
        .def_readwrite("cy", &Disk::cy)
        .def_readwrite("r", &Disk::r);

    py::class_<PhantomConfig>(m, "PhantomConfig")
        .def(py::init<>())
        .def_static("parse", &parse_phantom_config, py::arg("text"))
        .def("format", &format_phantom_config)
        .def_readwrite("grid_size", &PhantomConfig::grid_size)
        .def_readwrite("beams", &PhantomConfig::beams)
        .def_readwrite("beamlets_per_beam", &PhantomConfig::beamlets_per_beam)
        .def_readwrite("mu", &PhantomConfig::mu)
        .def_readwrite("sigma", &PhantomConfig::sigma)
        .def_readwrite("field_width", &PhantomConfig::field_width)
        .def_readwrite("body_radius", &PhantomConfig::body_radius)
        .def_readwrite("noise", &PhantomConfig::noise)
        .def_readwrite("seed", &PhantomConfig::seed)
        .def_readwrite("tumor", &PhantomConfig::tumor)
        .def_readwrite("myelon", &PhantomConfig::myelon)
        .def_readwrite("left_parotis", &PhantomConfig::left_parotis)
        .def_readwrite("right_parotis", &PhantomConfig::right_parotis);

    py::class_<DoseModel, std::shared_ptr<DoseModel>>(m, "DoseModel")
        .def_readonly("P", &DoseModel::P)
        .def_readonly("grid_size", &DoseModel::grid_size)
        .def_property_readonly("structures",
                               [](const DoseModel& d) {
                                   py::dict out;
                                   for (const Structure& s : d.structures) out[py::str(s.name)] = s.voxels;
                                   return out;
                               })
        .def("dose", &DoseModel::dose, py::arg("x"))
        .def_static("load", [](const std::filesystem::path& dir) { return std::make_shared<DoseModel>(load_dose_model(dir)); },
                    py::arg("dir"))
        .def("save", [](const DoseModel& d, const std::filesystem::path& dir) { save_dose_model(d, dir); },
             py::arg("dir"));

    m.def("build_phantom", [](const PhantomConfig& cfg) { return std::make_shared<DoseModel>(build_phantom(cfg)); },
          py::arg("config") = PhantomConfig{});

    m.def("dose_function",
          [](const std::string& role, const std::string& structure, const std::shared_ptr<DoseModel>& model,
             const Vector& x, double threshold, double p) {
              const Evaluation e = dose_function_eval(make_spec(role, structure, threshold, p), *model, x);
              return py::make_tuple(e.value, e.subgradient);
          },
          py::arg("role"), py::arg("structure"), py::arg("model"), py::arg("x"), py::arg("threshold") = 0.0,
          py::arg("p") = 2.0, "(value, gradient) of upper_tail, lower_tail, eud or conformity.");

    m.def("imrt_values",
          [](const std::shared_ptr<DoseModel>& model, const Vector& x) {
              const OptimizationProblem prob = build_imrt_problem(model);
              std::vector<double> g;
              for (const ConvexConstraint& c : prob.constraints) g.push_back(eval_constraint(c, x).value);
              return py::make_tuple(eval_constraint(prob.objective, x).value, g);
          },
          py::arg("model"), py::arg("x"), "(objective, constraint values) of the default IMRT problem.");

    m.def("run_imrt_level_set",
          [](const std::shared_ptr<DoseModel>& model, const std::string& method, const std::string& perturbation,
             double lambda, double lambda_hb, double eps_min, double eps_max, std::optional<double> sc_step,
             std::uint64_t max_iterations, double level_eps, std::size_t max_levels) {
              SolverConfig cfg = make_config(method, lambda, perturbation, "outer", lambda_hb, eps_min, eps_max,
                                             sc_step, max_iterations, 1e-6);
              cfg.record_iterates = false;
              LevelSetOptions opts;
              opts.max_levels = max_levels;
              const OptimizationProblem prob = build_imrt_problem(model);
              LevelSetResult r;
              {
                  py::gil_scoped_release release;
                  r = run_level_set(prob, Vector::Zero(prob.dimension()), cfg, LevelRule::multiplicative(level_eps), opts);
              }
              py::list levels;
              for (const LevelRecord& l : r.levels) {
                  py::dict d;
                  d["t"] = l.t;
                  d["status"] = to_string(l.result.status);
                  d["iterations"] = l.result.iterations;
                  d["perturbations"] = l.result.perturbations;
                  levels.append(d);
              }
              py::dict out;
              out["x_star"] = r.x_star;
              out["f_star"] = r.f_star;
              out["solved_levels"] = r.solved_levels;
              out["total_iterations"] = r.total_iterations();
              out["terminated_by"] = to_string(r.terminated_by);
              out["levels"] = levels;
              return out;
          },
          py::arg("model"), py::arg("method") = "simultaneous", py::arg("perturbation") = "none",
          py::arg("lam") = 1.9, py::arg("lambda_hb") = 1.0, py::arg("eps_min") = 1e-8, py::arg("eps_max") = 0.034,
          py::arg("sc_step") = 1.0, py::arg("max_iterations") = 1000, py::arg("level_eps") = 0.01,
          py::arg("max_levels") = 200);

    m.def("run_spec",
          [](const std::filesystem::path& spec, const std::filesystem::path& out) {
              CommandOptions opts;
              opts.out = out;
              const RunOutcome r = cmd_run(spec, opts);
              py::dict d;
              if (r.cfp) {
                  d["status"] = to_string(r.cfp->status);
                  d["iterations"] = r.cfp->iterations;
                  d["x"] = r.cfp->x_final;
              }
              if (r.levelset) {
                  d["f_star"] = r.levelset->f_star;
                  d["iterations"] = r.levelset->total_iterations();
                  d["x"] = r.levelset->x_star;
              }
              return d;
          },
          py::arg("spec"), py::arg("out"), "Run an experiment file, writing the usual CSV outputs to `out`.");
}
