#include <algorithm>
#include <cmath>
#include <set>

#include "linereconf/error.hpp"
#include "optimizer_detail.hpp"

namespace linereconf {

namespace {

using Terms = std::vector<std::pair<int, double>>;

constexpr double kMinShare = 1e-3;

// Indicator of agent k holding a share of operation j: either a fixed 0/1
// (outside the scope) or a binary model variable.
struct Support {
    int var = -1;
    int constant = 0;
};

}  // namespace

Solution solve_reconfig(const ReconfigProblem& p, const MilpOptions& options) {
    detail::Stopwatch clock;
    p.check();
    const InitProblem& b = p.base;
    const Weights& w = b.weights;
    const std::size_t n = b.operations.size();
    const std::set<std::size_t> scope(p.disturbed_ops.begin(), p.disturbed_ops.end());
    const auto& x0 = p.original;

    std::set<std::size_t> sharing{p.disturbed};
    sharing.insert(p.adjacent.begin(), p.adjacent.end());

    // Unused agents that are exact twins are interchangeable; more than
    // |J_D| of one class can never be used, so extra copies are dropped.
    std::vector<std::size_t> unused;
    std::vector<std::vector<std::size_t>> twin_groups;
    for (const auto k : p.unused) {
        bool any = false;
        for (const auto j : p.disturbed_ops) any = any || b.capable(k, j);
        if (!any) continue;
        auto g = std::find_if(twin_groups.begin(), twin_groups.end(),
                              [&](const auto& grp) { return b.times[grp.front()] == b.times[k]; });
        if (g == twin_groups.end()) {
            twin_groups.push_back({k});
        } else if (g->size() < p.disturbed_ops.size()) {
            g->push_back(k);
        } else {
            continue;
        }
        unused.push_back(k);
    }
    std::vector<std::size_t> movable(sharing.begin(), sharing.end());
    movable.insert(movable.end(), unused.begin(), unused.end());
    std::sort(movable.begin(), movable.end());

    auto busy = [&](std::size_t k) {
        double t = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (!scope.count(j) && x0.fraction(b.agents[k], j) > 0.5) t += *b.times[k][j];
        return t;
    };
    double lower = 0.0;
    for (const auto k : p.line) lower = std::max(lower, busy(k));
    double upper = lower + 1.0;
    for (const auto k : sharing) upper += busy(k);
    for (const auto j : p.disturbed_ops)
        for (const auto k : movable)
            if (b.capable(k, j)) upper += *b.times[k][j];

    MilpModel m;
    const int t = m.add_variable(lower, upper, w.c_t, false);
    const int fixed_agents = static_cast<int>(p.line.size() + p.adjacent.size());
    m.lp.objective_offset = w.c_z * fixed_agents;

    std::map<std::size_t, std::map<std::size_t, int>> share;  // share[k][j]
    std::map<std::size_t, std::map<std::size_t, int>> held;   // support indicator var
    for (const auto j : p.disturbed_ops) {
        if (!b.capable(p.disturbed, j)) m.lp.objective_offset += w.c_x;
        for (const auto k : movable) {
            if (!b.capable(k, j)) continue;
            const bool fractional = p.allow_sharing && sharing.count(k);
            // |w - x0| is linear because x0 is known: 1 - w on the agent's
            // own operations, w elsewhere.
            const double penalty = k == p.disturbed ? -w.c_x : w.c_x;
            if (k == p.disturbed) m.lp.objective_offset += w.c_x;
            const int v = m.add_variable(0.0, 1.0, penalty, !fractional);
            share[k][j] = v;
            if (fractional) {
                const int s = m.add_variable(0.0, 1.0, 0.0, true);
                m.lp.add_row({{v, 1.0}, {s, -1.0}}, RowSense::LessEqual, 0.0);
                // A held operation carries a real share, otherwise dropping
                // it could split the agent's block.
                m.lp.add_row({{v, 1.0}, {s, -kMinShare}}, RowSense::GreaterEqual, 0.0);
                held[k][j] = s;
            } else {
                held[k][j] = v;
            }
        }
    }
    for (const auto j : p.disturbed_ops) {
        Terms row;
        for (const auto k : movable)
            if (share[k].count(j)) row.push_back({share[k][j], 1.0});
        if (row.empty())
            throw Error(ErrorKind::Infeasible, "no agent in scope can perform " + b.operations[j] +
                                                   "; check if more agents are available");
        m.lp.add_row(std::move(row), RowSense::Equal, 1.0);
    }

    std::map<std::size_t, int> used;  // agents that may end up idle
    for (const auto k : movable) {
        const double fixed = busy(k);
        const bool has_fixed = fixed > 0.0;
        Terms time_row{{t, 1.0}};
        for (const auto& [j, v] : share[k]) time_row.push_back({v, -*b.times[k][j]});
        m.lp.add_row(std::move(time_row), RowSense::GreaterEqual, fixed);
        if (!has_fixed) {
            const int u = m.add_variable(0.0, 1.0, w.c_z, true);
            used[k] = u;
            for (const auto& [j, s] : held[k]) m.lp.add_row({{s, 1.0}, {u, -1.0}}, RowSense::LessEqual, 0.0);
        }
        // Contiguous runs along the whole line: at most two for agents that
        // may share, one otherwise.
        std::vector<Support> sigma(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (scope.count(j)) {
                const auto it = held[k].find(j);
                if (it != held[k].end()) sigma[j].var = it->second;
            } else {
                sigma[j].constant = x0.fraction(b.agents[k], j) > 0.5 ? 1 : 0;
            }
        }
        int constant_runs = 0;
        Terms runs;
        for (std::size_t j = 0; j < n; ++j) {
            const Support prev = j > 0 ? sigma[j - 1] : Support{};
            const Support cur = sigma[j];
            if (cur.var < 0 && prev.var < 0) {
                constant_runs += std::max(0, cur.constant - prev.constant);
                continue;
            }
            // y >= sigma_j - sigma_{j-1}
            const int y = m.add_variable(0.0, 1.0, 0.0, false);
            Terms start{{y, 1.0}};
            double rhs = 0.0;
            if (cur.var >= 0) start.push_back({cur.var, -1.0});
            else rhs += cur.constant;
            if (prev.var >= 0) start.push_back({prev.var, 1.0});
            else rhs -= prev.constant;
            m.lp.add_row(std::move(start), RowSense::GreaterEqual, rhs);
            runs.push_back({y, 1.0});
        }
        const int cap = sharing.count(k) ? 2 : 1;
        if (!runs.empty()) m.lp.add_row(std::move(runs), RowSense::LessEqual, cap - constant_runs);
        else if (constant_runs > cap)
            throw Error(ErrorKind::Infeasible, b.agents[k] + " already exceeds its block limit");
    }
    for (const auto& grp : twin_groups)
        for (std::size_t i = 1; i < grp.size(); ++i)
            m.lp.add_row({{used[grp[i]], 1.0}, {used[grp[i - 1]], -1.0}}, RowSense::LessEqual, 0.0);

    // The original plan is a feasible starting incumbent when the disturbed
    // agent is still capable of all its operations.
    MilpOptions opts = options;
    bool keeps_capability = true;
    for (const auto j : p.disturbed_ops) keeps_capability = keeps_capability && b.capable(p.disturbed, j);
    if (keeps_capability && !opts.incumbent) {
        std::vector<double> x(m.lp.num_variables(), 0.0);
        for (const auto j : p.disturbed_ops) {
            x[share[p.disturbed][j]] = 1.0;
            x[held[p.disturbed][j]] = 1.0;
        }
        if (used.count(p.disturbed)) x[used[p.disturbed]] = 1.0;
        double tmax = lower;
        for (const auto k : movable) {
            double tk = busy(k);
            if (k == p.disturbed)
                for (const auto j : p.disturbed_ops) tk += *b.times[k][j];
            tmax = std::max(tmax, tk);
        }
        x[t] = tmax;
        // Run-start variables follow from the supports; solve the LP with
        // all binaries fixed to obtain them consistently.
        LinearProgram fixed_lp = m.lp;
        for (std::size_t v = 0; v < x.size(); ++v) {
            if (m.integer[v] || static_cast<int>(v) == t) {
                fixed_lp.lower[v] = x[v];
                fixed_lp.upper[v] = x[v];
            }
        }
        for (const auto& [k, row] : share)
            for (const auto& [j, v] : row) fixed_lp.lower[v] = fixed_lp.upper[v] = x[v];
        const auto r = lp_solve(fixed_lp);
        if (r.status == LpStatus::Optimal) opts.incumbent = r.x;
    }

    const auto r = milp_solve(m, opts);
    if (!r.feasible) throw Error(ErrorKind::Infeasible, "no feasible reconfiguration in scope");

    Solution sol;
    sol.assignment = x0;
    bool fractional = false;
    for (const auto j : p.disturbed_ops) {
        sol.assignment.clear(j);
        double total = 0.0;
        std::vector<std::pair<std::size_t, double>> parts;
        for (const auto k : movable) {
            const auto it = share[k].find(j);
            if (it == share[k].end()) continue;
            double v = r.x[it->second];
            if (v < 1e-9) continue;
            if (v > 1.0 - 1e-9) v = 1.0;
            parts.push_back({k, v});
            total += v;
        }
        for (const auto& [k, v] : parts) {
            const double f = v / total;
            fractional = fractional || std::abs(f - 1.0) > kFractionTolerance;
            sol.assignment.assign(j, b.agents[k], f);
        }
    }
    if (fractional) sol.assignment.set_fractional_scope(scope);
    const auto problems = reconfig_constraint_violations(p, sol.assignment);
    if (!problems.empty())
        throw Error(ErrorKind::NumericalFailure, "reconfiguration broke a constraint: " + problems.front());
    detail::summarize(b, sol);
    sol.adjustment = adjustment(sol.assignment, x0);
    sol.objective = reconfig_objective(p, sol.assignment);
    sol.nodes = r.nodes;
    sol.seconds = clock.seconds();
    return sol;
}

}  // namespace linereconf
