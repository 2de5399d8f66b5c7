#include "pertproj/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace pertproj;

namespace {

void print_report(const TableReport& report) {
    for (const TableRow& r : report.rows) {
        std::cout << r.variant.name << ": K=" << (r.solved ? std::to_string(r.result.iterations) : "unsolved")
                  << " reference=" << r.variant.reference_iterations << (r.match ? "" : "  MISMATCH") << "\n";
    }
    if (!report.ordering_ok) std::cout << "ordering SP > SP+HB8 > SP+HB80 >= SP+SC violated\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perturbed subgradient projection methods"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string out = ".";
    std::uint64_t seed = 0;
    app.add_option("--out", out, "Output directory")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", seed, "Phantom seed override");
    app.add_option("--threads", opts.threads, "Concurrent table variants")->capture_default_str()->check(CLI::PositiveNumber);

    std::string table;
    auto* reproduce = app.add_subcommand("reproduce", "Rerun a reference table and grade it");
    reproduce->add_option("table", table, "table1, table2, table3 or cp_lambda1")->required();

    std::string spec_path;
    auto* run = app.add_subcommand("run", "Run an experiment spec file");
    run->add_option("spec", spec_path)->required()->check(CLI::ExistingFile);

    std::string solution, model_dir;
    auto* dvh = app.add_subcommand("dvh", "Dose volume histograms of a solution");
    dvh->add_option("solution", solution)->required()->check(CLI::ExistingFile);
    dvh->add_option("model_dir", model_dir)->required()->check(CLI::ExistingDirectory);

    std::vector<std::string> traces;
    auto* pert = app.add_subcommand("pert-indices", "Perturbed iteration indices from traces");
    pert->add_option("trace", traces)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opts.out = out;
    if (*seed_opt) opts.seed = seed;

    try {
        if (*reproduce) {
            const TableReport report = cmd_reproduce(parse_table_id(table), opts);
            print_report(report);
            return report.passed() ? 0 : 1;
        }
        if (*run) {
            const RunOutcome r = cmd_run(std::filesystem::path(spec_path), opts);
            if (r.cfp) {
                std::cout << "status " << to_string(r.cfp->status) << ", " << r.cfp->iterations << " iterations, "
                          << r.cfp->perturbations << " perturbed\n";
            } else {
                std::cout << "f* = " << r.levelset->f_star << " after " << r.levelset->solved_levels << " levels, "
                          << r.levelset->total_iterations() << " iterations (" << to_string(r.levelset->terminated_by)
                          << ")\n";
            }
            return 0;
        }
        if (*dvh) {
            cmd_dvh(solution, model_dir, opts);
            return 0;
        }
        std::vector<std::filesystem::path> paths(traces.begin(), traces.end());
        cmd_pert_indices(paths, opts);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
