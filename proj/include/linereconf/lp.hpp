#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace linereconf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, GreaterEqual, Equal };

/// Minimization LP: min c.x + offset subject to rows and lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
    struct Row {
        std::vector<std::pair<int, double>> coeffs;
        RowSense sense = RowSense::LessEqual;
        double rhs = 0.0;
    };

    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Row> rows;
    double objective_offset = 0.0;

    int add_variable(double lb, double ub, double c = 0.0);
    void add_row(std::vector<std::pair<int, double>> coeffs, RowSense sense, double rhs);
    std::size_t num_variables() const { return cost.size(); }

    double objective(const std::vector<double>& x) const;
    // Largest bound or row violation of x.
    double max_violation(const std::vector<double>& x) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

// Dense two-phase primal simplex with bounded variables. Throws
// NumericalFailure when the final point breaks feasibility by more than 1e-7
// or the iteration limit is hit.
LpResult lp_solve(const LinearProgram& lp);

struct MilpModel {
    LinearProgram lp;
    std::vector<bool> integer;  // per variable

    int add_variable(double lb, double ub, double c, bool is_integer);
};

struct MilpOptions {
    long max_nodes = 1'000'000;
    double integrality_tolerance = 1e-6;
    // Known feasible point used as the initial incumbent.
    std::optional<std::vector<double>> incumbent;
};

struct MilpResult {
    bool feasible = false;
    std::vector<double> x;
    double objective = 0.0;
    long nodes = 0;
};

// Best-first branch-and-bound over the integer variables using lp_solve for
// relaxations. Branches on the most fractional variable (ties: lowest index).
// Throws HitNodeLimit rather than returning a non-proven solution.
MilpResult milp_solve(const MilpModel& model, const MilpOptions& options = {});

}  // namespace linereconf
