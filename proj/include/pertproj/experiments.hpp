#pragma once

#include "pertproj/linear.hpp"
#include "pertproj/solver.hpp"

#include <string>
#include <vector>

namespace pertproj {

enum class TableId { table1, table2, table3, cp_lambda1 };

TableId parse_table_id(const std::string& s);
const char* to_string(TableId id);

struct TableVariant {
    std::string name;  // e.g. "SP+HB80"
    PerturbationKind kind = PerturbationKind::none;
    double lambda_hb = 0.0;
    std::uint64_t reference_iterations = 0;
};

struct TableRow {
    TableVariant variant;
    FeasibilityResult result;
    bool solved = false;
    bool match = false;
};

struct TableReport {
    TableId id;
    std::vector<TableRow> rows;
    bool ordering_ok = true;  // only constrained for table1
    [[nodiscard]] bool passed() const;
};

/// Cone angle used for the reproduction runs. The zigzag the tables describe
/// (SP alternating between rows {1,4} and {2,3} from x0 = (15,0,0)) needs the
/// narrow side of the cone along x1, i.e. delta_x1 ~ 10.1 and delta_x2 ~ 17.5.
inline constexpr double kReproAlphaDeg = 60.0;
inline constexpr double kReproBetaDeg = 5.0;
inline constexpr double kReproDeltaX3 = 100.0;

LinearSystem reproduction_system(TableId id);
Vector reproduction_start();
std::vector<TableVariant> table_variants(TableId id);
/// Solver settings for one variant: lambda, control, stop rule and window of the tables.
SolverConfig table_solver_config(TableId id, const TableVariant& v);

/// |measured - reference| <= max(10% of reference, 2).
bool within_table_tolerance(std::uint64_t measured, std::uint64_t reference);

TableRow run_table_variant(TableId id, const TableVariant& v, bool record_iterates = false);
/// Attaches the ordering check (table1 only) to solved rows.
TableReport grade_table(TableId id, std::vector<TableRow> rows);
/// Runs every variant, up to `threads` at a time.
TableReport reproduce_table(TableId id, bool record_iterates = false, unsigned threads = 1);

}  // namespace pertproj
