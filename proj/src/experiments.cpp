#include "pertproj/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>

namespace pertproj {

TableId parse_table_id(const std::string& s) {
    if (s == "table1") return TableId::table1;
    if (s == "table2") return TableId::table2;
    if (s == "table3") return TableId::table3;
    if (s == "cp_lambda1") return TableId::cp_lambda1;
    throw ConfigError("unknown table id '" + s + "'");
}

const char* to_string(TableId id) {
    switch (id) {
        case TableId::table1: return "table1";
        case TableId::table2: return "table2";
        case TableId::table3: return "table3";
        case TableId::cp_lambda1: return "cp_lambda1";
    }
    return "?";
}

LinearSystem reproduction_system(TableId id) {
    LinearSystem sys = build_linear_problem(kReproAlphaDeg, kReproBetaDeg, kReproDeltaX3);
    return id == TableId::table3 ? extend_linear_problem(sys) : sys;
}

Vector reproduction_start() { return Vector{{15.0, 0.0, 0.0}}; }

std::vector<TableVariant> table_variants(TableId id) {
    const char* m = id == TableId::table1 ? "SP" : "CP";
    auto row = [&](const std::string& suffix, PerturbationKind kind, double hb, std::uint64_t k) {
        return TableVariant{std::string(m) + suffix, kind, hb, k};
    };
    using K = PerturbationKind;
    switch (id) {
        case TableId::table1:
            return {row("", K::none, 0, 449), row("+HB8", K::heavy_ball, 8, 58),
                    row("+HB80", K::heavy_ball, 80, 17), row("+HB800", K::heavy_ball, 800, 4),
                    row("+SC", K::surrogate, 0, 4)};
        case TableId::table2:
            return {row("", K::none, 0, 20), row("+HB8", K::heavy_ball, 8, 34),
                    row("+HB80", K::heavy_ball, 80, 26), row("+HB800", K::heavy_ball, 800, 9),
                    row("+SC", K::surrogate, 0, 4)};
        case TableId::table3:
            return {row("", K::none, 0, 32), row("+HB8", K::heavy_ball, 8, 29),
                    row("+HB80", K::heavy_ball, 80, 20), row("+HB800", K::heavy_ball, 800, 7),
                    row("+SC", K::surrogate, 0, 3)};
        case TableId::cp_lambda1:
            return {TableVariant{"CP(lambda=1)", K::none, 0, 1917}};
    }
    return {};
}

SolverConfig table_solver_config(TableId id, const TableVariant& v) {
    SolverConfig cfg;
    cfg.method = id == TableId::table1 ? Method::simultaneous : Method::cyclic;
    cfg.weights = Weights::violated();
    cfg.cp_skip_satisfied = true;
    cfg.lambda = constant_relaxation(id == TableId::cp_lambda1 ? 1.0 : 1.9);
    cfg.stop_rule = StopRule::violation_sup;
    cfg.tolerance = 1e-10;
    cfg.max_iterations = 100000;
    cfg.perturbation.kind = v.kind;
    cfg.perturbation.scheme = PerturbationScheme::outer;
    cfg.perturbation.eps_min = 1e-6;
    cfg.perturbation.eps_max = 6e-2;
    cfg.perturbation.lambda_hb = v.lambda_hb;
    return cfg;
}

bool within_table_tolerance(std::uint64_t measured, std::uint64_t reference) {
    const double diff = std::abs(static_cast<double>(measured) - static_cast<double>(reference));
    return diff <= std::max(0.1 * static_cast<double>(reference), 2.0);
}

bool TableReport::passed() const {
    if (!ordering_ok) return false;
    for (const auto& r : rows) {
        if (!r.match) return false;
    }
    return true;
}

TableRow run_table_variant(TableId id, const TableVariant& v, bool record_iterates) {
    const FeasibilityProblem fp = to_feasibility_problem(reproduction_system(id));
    SolverConfig cfg = table_solver_config(id, v);
    cfg.record_iterates = record_iterates;
    TableRow row;
    row.variant = v;
    row.result = solve_cfp(fp, reproduction_start(), cfg);
    row.solved = row.result.status == SolveStatus::solved;
    row.match = row.solved && within_table_tolerance(row.result.iterations, v.reference_iterations);
    return row;
}

TableReport grade_table(TableId id, std::vector<TableRow> rows) {
    TableReport report{id, std::move(rows), true};
    if (id == TableId::table1 && report.rows.size() == 5) {
        // SP > SP+HB8 > SP+HB80 >= SP+SC
        const auto k = [&](std::size_t i) { return report.rows[i].result.iterations; };
        report.ordering_ok = k(0) > k(1) && k(1) > k(2) && k(2) >= k(4);
    }
    return report;
}

TableReport reproduce_table(TableId id, bool record_iterates, unsigned threads) {
    const std::vector<TableVariant> variants = table_variants(id);
    std::vector<TableRow> rows(variants.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < variants.size(); ++i) rows[i] = run_table_variant(id, variants[i], record_iterates);
        return grade_table(id, std::move(rows));
    }
    // Rows land in variant order whatever the completion order.
    for (std::size_t start = 0; start < variants.size(); start += threads) {
        std::vector<std::future<TableRow>> batch;
        for (std::size_t i = start; i < std::min<std::size_t>(variants.size(), start + threads); ++i) {
            batch.push_back(std::async(std::launch::async, run_table_variant, id, variants[i], record_iterates));
        }
        for (std::size_t j = 0; j < batch.size(); ++j) rows[start + j] = batch[j].get();
    }
    return grade_table(id, std::move(rows));
}

}  // namespace pertproj
