#include "pertproj/commands.hpp"

#include "pertproj/io.hpp"
#include "pertproj/linear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace pertproj {

namespace fs = std::filesystem;

const char* to_string(ExperimentSpec::Problem p) {
    switch (p) {
        case ExperimentSpec::Problem::linear4: return "linear4";
        case ExperimentSpec::Problem::linear8: return "linear8";
        case ExperimentSpec::Problem::imrt_phantom: return "imrt_phantom";
        case ExperimentSpec::Problem::custom: return "custom";
    }
    return "?";
}

namespace {

std::string ip_field(double ip) { return std::isnan(ip) ? std::string() : format_double(ip); }

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::vector<std::size_t> parse_index_list(const KeyValue& kv) {
    std::vector<std::size_t> out;
    for (const std::string& item : split_csv_line(kv.value)) {
        const std::int64_t v = parse_int(KeyValue{kv.key, item, kv.line});
        if (v < 1) fail_at(kv, "indices are 1-based");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& text, const fs::path& base_dir) {
    const std::vector<KeyValue> kvs = parse_key_values(text);
    if (kvs.empty()) throw ConfigError("experiment spec is empty");

    ExperimentSpec spec;
    std::optional<ExperimentSpec::Mode> mode;
    std::optional<std::string> phantom_path;
    bool have_problem = false;
    PerturbationConfig& pc = spec.solver.perturbation;

    for (const KeyValue& kv : kvs) {
        const std::string& k = kv.key;
        const std::string& v = kv.value;
        if (k == "problem") {
            if (v == "linear4") spec.problem = ExperimentSpec::Problem::linear4;
            else if (v == "linear8") spec.problem = ExperimentSpec::Problem::linear8;
            else if (v == "imrt_phantom") spec.problem = ExperimentSpec::Problem::imrt_phantom;
            else if (v == "custom") spec.problem = ExperimentSpec::Problem::custom;
            else fail_at(kv, "unknown problem '" + v + "'");
            have_problem = true;
        } else if (k == "mode") {
            if (v == "cfp") mode = ExperimentSpec::Mode::cfp;
            else if (v == "levelset") mode = ExperimentSpec::Mode::levelset;
            else fail_at(kv, "expected cfp or levelset");
        } else if (k == "alpha") spec.alpha_deg = parse_double(kv);
        else if (k == "beta") spec.beta_deg = parse_double(kv);
        else if (k == "delta_x3") spec.delta_x3 = parse_double(kv);
        else if (k == "phantom") phantom_path = v;
        else if (k == "model_dir") spec.model_dir = resolve(base_dir, v);
        else if (k == "method") {
            if (v == "simultaneous" || v == "sp") spec.solver.method = Method::simultaneous;
            else if (v == "cyclic" || v == "cp") spec.solver.method = Method::cyclic;
            else fail_at(kv, "expected simultaneous or cyclic");
        } else if (k == "control") {
            if (v != "cyclic") spec.control = parse_index_list(kv);
        } else if (k == "weights") {
            if (v == "violated") spec.solver.weights = Weights::violated();
            else if (v == "uniform") spec.solver.weights = Weights::uniform();
            else {
                try {
                    spec.solver.weights = Weights::fixed(parse_double_list(kv));
                } catch (const ConfigError& e) {
                    fail_at(kv, e.what());
                }
            }
        } else if (k == "lambda") {
            const double lam = parse_double(kv);
            if (!(lam > 0.0 && lam < 2.0)) fail_at(kv, "relaxation must lie in (0, 2)");
            spec.solver.lambda = constant_relaxation(lam);
        } else if (k == "perturbation") {
            if (v == "none") pc.kind = PerturbationKind::none;
            else if (v == "heavy_ball" || v == "hb") pc.kind = PerturbationKind::heavy_ball;
            else if (v == "surrogate" || v == "sc") pc.kind = PerturbationKind::surrogate;
            else fail_at(kv, "expected none, heavy_ball or surrogate");
        } else if (k == "scheme") {
            if (v == "outer") pc.scheme = PerturbationScheme::outer;
            else if (v == "inner") pc.scheme = PerturbationScheme::inner;
            else fail_at(kv, "expected outer or inner");
        } else if (k == "eps_min") pc.eps_min = parse_double(kv);
        else if (k == "eps_max") pc.eps_max = parse_double(kv);
        else if (k == "lambda_hb") pc.lambda_hb = parse_double(kv);
        else if (k == "k_cap") pc.k_cap = parse_u64(kv);
        else if (k == "sc_step") pc.sc_step = parse_double(kv);
        else if (k == "max_iterations") spec.solver.max_iterations = parse_u64(kv);
        else if (k == "stop_rule") {
            if (v == "violation_sup") spec.solver.stop_rule = StopRule::violation_sup;
            else if (v == "residual_sup") spec.solver.stop_rule = StopRule::residual_sup;
            else fail_at(kv, "expected violation_sup or residual_sup");
        } else if (k == "tolerance") spec.solver.tolerance = parse_double(kv);
        else if (k == "cp_skip_satisfied") spec.solver.cp_skip_satisfied = parse_bool(kv);
        else if (k == "x0") {
            const std::vector<double> x = parse_double_list(kv);
            spec.x0 = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
        } else if (k == "level_rule") {
            if (v == "additive") spec.level_rule.kind = LevelRule::Kind::additive;
            else if (v == "multiplicative") spec.level_rule.kind = LevelRule::Kind::multiplicative;
            else fail_at(kv, "expected additive or multiplicative");
        } else if (k == "level_eps") spec.level_rule.eps = parse_double_list(kv);
        else if (k == "max_levels") spec.level_options.max_levels = parse_u64(kv);
        else if (k == "cold_start") spec.level_options.cold_start = parse_bool(kv);
        else if (k == "total_iteration_cap") spec.level_options.total_iteration_cap = parse_u64(kv);
        else if (k == "reference") {
            try {
                spec.reference = parse_table_id(v);
            } catch (const ConfigError& e) {
                fail_at(kv, e.what());
            }
        } else if (k == "export_model") spec.export_model = parse_bool(kv);
        else fail_at(kv, "unknown key");
    }

    if (!have_problem) throw ConfigError("missing key 'problem'");
    const bool linear = spec.problem == ExperimentSpec::Problem::linear4 ||
                        spec.problem == ExperimentSpec::Problem::linear8;
    spec.mode = mode.value_or(linear ? ExperimentSpec::Mode::cfp : ExperimentSpec::Mode::levelset);
    if (linear && spec.mode == ExperimentSpec::Mode::levelset) {
        throw ConfigError("linear problems have no objective; use mode = cfp");
    }
    if (phantom_path) {
        if (spec.problem != ExperimentSpec::Problem::imrt_phantom) {
            throw ConfigError("'phantom' only applies to problem = imrt_phantom");
        }
        spec.phantom = parse_phantom_config(read_text_file(resolve(base_dir, *phantom_path)));
    }
    if (spec.problem == ExperimentSpec::Problem::custom && spec.model_dir.empty()) {
        throw ConfigError("problem = custom needs model_dir");
    }
    if (!spec.control.empty() && spec.mode == ExperimentSpec::Mode::levelset) {
        throw ConfigError("an explicit control order is not supported with mode = levelset");
    }
    spec.solver.validate();
    spec.level_rule.validate();
    return spec;
}

TableReport cmd_reproduce(TableId id, const CommandOptions& opts) {
    fs::create_directories(opts.out);
    const TableReport report = reproduce_table(id, true, std::max(1u, opts.threads));
    const std::string name = to_string(id);

    CsvWriter table(opts.out / (name + ".csv"), {"variant", "K_measured", "K_paper", "match"});
    for (const TableRow& r : report.rows) {
        table.row({r.variant.name, r.solved ? std::to_string(r.result.iterations) : std::string("unsolved"),
                   std::to_string(r.variant.reference_iterations), r.match ? "1" : "0"});
    }

    const FeasibilityProblem fp = to_feasibility_problem(reproduction_system(id));
    CsvWriter trace(opts.out / (name + "_trace.csv"),
                    {"variant", "k", "stop_measure", "residual_norm", "inner_product", "perturbed"});
    for (const TableRow& r : report.rows) {
        for (const IterationRecord& rec : r.result.trace) {
            // ||max{0, Ax - b}||_2
            double residual = 0.0;
            for (const Evaluation& e : evaluate_all(fp, rec.x)) residual += std::pow(std::max(0.0, e.value), 2);
            trace.row({r.variant.name, std::to_string(rec.k), format_double(rec.stop_measure),
                       format_double(std::sqrt(residual)), ip_field(rec.inner_product), rec.perturbed ? "1" : "0"});
        }
    }

    write_text(opts.out / (name + "_plot.txt"),
               "source: " + name + "_trace.csv\n"
               "one line per variant (group by column 'variant')\n"
               "x axis: k (iteration)\n"
               "y axis: residual_norm = ||max{0, Ax - b}||_2, log scale\n"
               "markers: rows with perturbed = 1\n");
    return report;
}

namespace {

struct BuiltProblem {
    std::optional<FeasibilityProblem> fp;          // linear problems
    std::optional<OptimizationProblem> problem;    // dose problems
    std::shared_ptr<const DoseModel> model;
};

BuiltProblem build_problem(const ExperimentSpec& spec, const CommandOptions& opts) {
    BuiltProblem b;
    switch (spec.problem) {
        case ExperimentSpec::Problem::linear4:
        case ExperimentSpec::Problem::linear8: {
            LinearSystem sys = build_linear_problem(spec.alpha_deg, spec.beta_deg, spec.delta_x3);
            if (spec.problem == ExperimentSpec::Problem::linear8) sys = extend_linear_problem(sys);
            b.fp = to_feasibility_problem(sys);
            return b;
        }
        case ExperimentSpec::Problem::imrt_phantom: {
            PhantomConfig pcfg = spec.phantom;
            if (opts.seed) pcfg.seed = *opts.seed;
            b.model = std::make_shared<const DoseModel>(build_phantom(pcfg));
            fs::create_directories(opts.out / "model");
            write_text(opts.out / "model" / "phantom.cfg", format_phantom_config(pcfg));
            if (spec.export_model) save_dose_model(*b.model, opts.out / "model");
            break;
        }
        case ExperimentSpec::Problem::custom:
            b.model = std::make_shared<const DoseModel>(load_dose_model(spec.model_dir));
            break;
    }
    b.problem = build_imrt_problem(b.model);
    if (spec.mode == ExperimentSpec::Mode::cfp) b.fp = FeasibilityProblem(b.problem->constraints, true);
    return b;
}

void write_solution(const fs::path& path, const Vector& x) {
    CsvWriter w(path, {"x"});
    for (Eigen::Index i = 0; i < x.size(); ++i) w.row({format_double(x[i])});
}

}  // namespace

RunOutcome cmd_run(const ExperimentSpec& spec, const CommandOptions& opts) {
    fs::create_directories(opts.out);
    const BuiltProblem built = build_problem(spec, opts);
    const Eigen::Index n = built.fp ? built.fp->dimension() : built.problem->dimension();

    Vector x0;
    if (spec.x0) {
        x0 = *spec.x0;
        require_dimension(x0, n, "x0");
    } else if (spec.problem == ExperimentSpec::Problem::linear4 || spec.problem == ExperimentSpec::Problem::linear8) {
        x0 = reproduction_start();
    } else {
        x0 = Vector::Zero(n);
    }

    SolverConfig cfg = spec.solver;
    const bool levelset = spec.mode == ExperimentSpec::Mode::levelset;
    if (!spec.control.empty()) cfg.control = ControlSequence::explicit_list(spec.control, built.fp->size());
    // The objective column needs the iterates.
    cfg.record_iterates = true;

    RunOutcome outcome;
    CsvWriter trace(opts.out / "trace.csv",
                    {"k", "stop_measure", "objective_if_levelset", "inner_product", "perturbed", "level_index"});
    CsvWriter summary(opts.out / "summary.csv",
                      {"level_index", "t", "status", "iterations", "perturbations", "objective"});
    CsvWriter result(opts.out / "result.csv", {"key", "value"});
    result.row({"problem", to_string(spec.problem)});
    if (spec.reference) result.row({"reference", to_string(*spec.reference)});

    auto emit_trace = [&](const FeasibilityResult& r, std::uint64_t offset, std::size_t level) {
        for (const IterationRecord& rec : r.trace) {
            const std::string f =
                levelset ? format_double(eval_constraint(built.problem->objective, rec.x).value) : std::string();
            trace.row({std::to_string(offset + rec.k), format_double(rec.stop_measure), f, ip_field(rec.inner_product),
                       rec.perturbed ? "1" : "0", std::to_string(level)});
        }
    };

    if (!levelset) {
        FeasibilityResult r = solve_cfp(*built.fp, x0, cfg);
        emit_trace(r, 0, 1);
        summary.row({"1", "", to_string(r.status), std::to_string(r.iterations), std::to_string(r.perturbations), ""});
        result.row({"status", to_string(r.status)});
        result.row({"iterations", std::to_string(r.iterations)});
        result.row({"perturbations", std::to_string(r.perturbations)});
        write_solution(opts.out / "solution.csv", r.x_final);
        outcome.cfp = std::move(r);
    } else {
        LevelSetResult r = run_level_set(*built.problem, x0, cfg, spec.level_rule, spec.level_options);
        std::uint64_t offset = 0;
        std::uint64_t perturbations = 0;
        for (std::size_t s = 0; s < r.levels.size(); ++s) {
            const FeasibilityResult& lr = r.levels[s].result;
            emit_trace(lr, offset, s + 1);
            const std::optional<double>& t = r.levels[s].t;
            const double f = eval_constraint(built.problem->objective, lr.x_final).value;
            summary.row({std::to_string(s + 1), t ? format_double(*t) : std::string(), to_string(lr.status),
                         std::to_string(lr.iterations), std::to_string(lr.perturbations), format_double(f)});
            offset += lr.iterations;
            perturbations += lr.perturbations;
        }
        result.row({"f_star", format_double(r.f_star)});
        result.row({"solved_levels", std::to_string(r.solved_levels)});
        result.row({"total_iterations", std::to_string(r.total_iterations())});
        result.row({"perturbations", std::to_string(perturbations)});
        result.row({"terminated_by", to_string(r.terminated_by)});
        write_solution(opts.out / "solution.csv", r.x_star);
        outcome.levelset = std::move(r);
    }

    write_text(opts.out / "trace_plot.txt",
               "source: trace.csv\n"
               "x axis: k (cumulative over levels; a level's first row repeats the previous level's last point)\n"
               "y axis: stop_measure, log scale; or objective_if_levelset for level-set runs\n"
               "markers: rows with perturbed = 1\n"
               "level boundaries: changes in level_index\n");
    return outcome;
}

RunOutcome cmd_run(const fs::path& spec_path, const CommandOptions& opts) {
    return cmd_run(parse_experiment_spec(read_text_file(spec_path), spec_path.parent_path()), opts);
}

std::vector<DvhCurve> compute_dvh(const DoseModel& model, const Vector& x, double bin_width) {
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be positive");
    const Vector d = model.dose(x);
    double max_dose = 0.0;
    for (const auto& s : model.structures) {
        for (Eigen::Index v : s.voxels) max_dose = std::max(max_dose, d[v]);
    }
    const auto bins = static_cast<std::size_t>(std::floor(max_dose / bin_width)) + 1;
    std::vector<DvhCurve> out;
    for (const auto& s : model.structures) {
        DvhCurve c{s.name, {}, {}};
        std::vector<double> ds;
        for (Eigen::Index v : s.voxels) ds.push_back(d[v]);
        std::sort(ds.begin(), ds.end());
        for (std::size_t b = 0; b < bins; ++b) {
            const double level = static_cast<double>(b) * bin_width;
            const auto above = ds.end() - std::lower_bound(ds.begin(), ds.end(), level);
            c.dose.push_back(level);
            c.volume_fraction.push_back(ds.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(ds.size()));
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<DvhCurve> cmd_dvh(const fs::path& solution, const fs::path& model_dir, const CommandOptions& opts) {
    DoseModel model = load_dose_model(model_dir);
    const Matrix sol = read_numeric_csv(solution);
    if (sol.cols() != 1) throw ConfigError(solution.string() + ": expected a single column");
    const Vector x = sol.col(0);
    require_dimension(x, model.P.cols(), "solution");

    fs::create_directories(opts.out);
    const std::vector<DvhCurve> curves = compute_dvh(model, x);
    CsvWriter w(opts.out / "dvh.csv", {"structure", "dose", "volume_fraction"});
    for (const DvhCurve& c : curves) {
        for (std::size_t i = 0; i < c.dose.size(); ++i) {
            w.row({c.structure, format_double(c.dose[i]), format_double(c.volume_fraction[i])});
        }
    }
    write_text(opts.out / "dvh_plot.txt",
               "source: dvh.csv\n"
               "one curve per structure (group by column 'structure')\n"
               "x axis: dose\n"
               "y axis: volume_fraction in [0, 1], share of voxels receiving at least that dose\n");
    return curves;
}

std::vector<PerturbedIndex> read_perturbed_indices(const fs::path& trace) {
    std::istringstream in(read_text_file(trace));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(trace.string() + ": empty file");
    const std::vector<std::string> header = split_csv_line(line);
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto k_col = column("k");
    const auto p_col = column("perturbed");
    if (!k_col || !p_col) throw ConfigError(trace.string() + ": needs columns k and perturbed");
    const auto v_col = column("variant");

    std::string fallback = trace.stem().string();
    if (fallback == "trace" && trace.has_parent_path()) {
        fallback = fs::absolute(trace).parent_path().filename().string();
    }

    std::vector<PerturbedIndex> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != header.size()) {
            throw ConfigError(trace.string() + ": line " + std::to_string(lineno) + ": ragged row");
        }
        if (f[*p_col] != "1") continue;
        const std::uint64_t k = parse_u64(KeyValue{"k", f[*k_col], lineno});
        out.push_back(PerturbedIndex{v_col ? f[*v_col] : fallback, k});
    }
    return out;
}

std::vector<PerturbedIndex> cmd_pert_indices(const std::vector<fs::path>& traces, const CommandOptions& opts) {
    std::vector<PerturbedIndex> all;
    for (const fs::path& t : traces) {
        std::vector<PerturbedIndex> rows = read_perturbed_indices(t);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    fs::create_directories(opts.out);
    CsvWriter w(opts.out / "pert_indices.csv", {"variant", "k"});
    for (const PerturbedIndex& r : all) w.row({r.variant, std::to_string(r.k)});
    return all;
}

}  // namespace pertproj
