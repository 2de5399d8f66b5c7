#pragma once

#include "pertproj/experiments.hpp"
#include "pertproj/imrt.hpp"
#include "pertproj/levelset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pertproj {

struct CommandOptions {
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;  // overrides the phantom seed
    unsigned threads = 1;
};

/// A `key = value` experiment file, see README for the keys.
struct ExperimentSpec {
    enum class Problem { linear4, linear8, imrt_phantom, custom };
    enum class Mode { cfp, levelset };

    Problem problem = Problem::linear4;
    Mode mode = Mode::cfp;
    double alpha_deg = kReproAlphaDeg;
    double beta_deg = kReproBetaDeg;
    double delta_x3 = kReproDeltaX3;
    PhantomConfig phantom;
    std::filesystem::path model_dir;  // custom only
    SolverConfig solver;
    std::vector<std::size_t> control;  // 1-based explicit order, empty: cyclic
    LevelRule level_rule = LevelRule::multiplicative(0.01);
    LevelSetOptions level_options;
    std::optional<Vector> x0;
    std::optional<TableId> reference;
    bool export_model = false;
};

const char* to_string(ExperimentSpec::Problem p);

/// Relative paths inside the spec resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& text, const std::filesystem::path& base_dir = {});

/// Writes <id>.csv, <id>_trace.csv and <id>_plot.txt under opts.out.
TableReport cmd_reproduce(TableId id, const CommandOptions& opts);

struct RunOutcome {
    std::optional<FeasibilityResult> cfp;
    std::optional<LevelSetResult> levelset;
};

/// Writes trace.csv, summary.csv, result.csv, solution.csv and trace_plot.txt.
RunOutcome cmd_run(const ExperimentSpec& spec, const CommandOptions& opts);
RunOutcome cmd_run(const std::filesystem::path& spec_path, const CommandOptions& opts);

struct DvhCurve {
    std::string structure;
    std::vector<double> dose;             // bin lower edges 0, w, 2w, ...
    std::vector<double> volume_fraction;  // |{i : d_i >= dose}| / |O|
};

/// Bins of width `bin_width` from 0 up to the largest dose over all structures.
std::vector<DvhCurve> compute_dvh(const DoseModel& model, const Vector& x, double bin_width = 0.5);

/// Writes dvh.csv and dvh_plot.txt.
std::vector<DvhCurve> cmd_dvh(const std::filesystem::path& solution, const std::filesystem::path& model_dir,
                              const CommandOptions& opts);

struct PerturbedIndex {
    std::string variant;
    std::uint64_t k = 0;
};

/// Rows of every trace with perturbed = 1. The variant comes from a `variant`
/// column when present, otherwise from the file name (or its directory for trace.csv).
std::vector<PerturbedIndex> read_perturbed_indices(const std::filesystem::path& trace);

/// Writes pert_indices.csv.
std::vector<PerturbedIndex> cmd_pert_indices(const std::vector<std::filesystem::path>& traces,
                                             const CommandOptions& opts);

}  // namespace pertproj
