#include <algorithm>
#include <cmath>
#include <queue>

#include "linereconf/error.hpp"
#include "linereconf/lp.hpp"

namespace linereconf {

int MilpModel::add_variable(double lb, double ub, double c, bool is_integer) {
    integer.push_back(is_integer);
    return lp.add_variable(lb, ub, c);
}

namespace {

struct Node {
    double bound = 0.0;
    long id = 0;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct WorseBound {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        return a.id > b.id;
    }
};

bool integral_point(const MilpModel& model, const std::vector<double>& x, double tol) {
    for (std::size_t j = 0; j < x.size(); ++j)
        if (model.integer[j] && std::abs(x[j] - std::round(x[j])) > tol) return false;
    return true;
}

}  // namespace

MilpResult milp_solve(const MilpModel& model, const MilpOptions& options) {
    if (model.integer.size() != model.lp.num_variables())
        throw Error(ErrorKind::InvalidArgument, "integer flags do not match variable count");
    MilpResult best;
    double incumbent = kInfinity;
    if (options.incumbent) {
        const auto& x = *options.incumbent;
        if (x.size() != model.lp.num_variables() || model.lp.max_violation(x) > 1e-9 ||
            !integral_point(model, x, 1e-9))
            throw Error(ErrorKind::InvalidArgument, "supplied incumbent is not feasible");
        best.feasible = true;
        best.x = x;
        best.objective = model.lp.objective(x);
        incumbent = best.objective;
    }
    auto prunable = [&](double bound) {
        return bound >= incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
    };

    std::priority_queue<Node, std::vector<Node>, WorseBound> open;
    long next_id = 0;
    open.push({-kInfinity, next_id++, model.lp.lower, model.lp.upper});
    LinearProgram relaxed = model.lp;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (prunable(node.bound)) continue;
        if (++best.nodes > options.max_nodes)
            throw Error(ErrorKind::HitNodeLimit,
                        "branch-and-bound exceeded " + std::to_string(options.max_nodes) + " nodes");

        relaxed.lower = node.lower;
        relaxed.upper = node.upper;
        const LpResult lp = lp_solve(relaxed);
        if (lp.status == LpStatus::Infeasible) continue;
        if (lp.status == LpStatus::Unbounded)
            throw Error(ErrorKind::InvalidArgument, "MILP relaxation is unbounded");
        if (prunable(lp.objective)) continue;

        // Most fractional integer variable; ties go to the lowest index.
        int branch = -1;
        double best_frac = options.integrality_tolerance;
        for (std::size_t j = 0; j < lp.x.size(); ++j) {
            if (!model.integer[j]) continue;
            const double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
            const double dist = std::min(frac, 0.5);
            if (dist > best_frac + 1e-12) {
                best_frac = dist;
                branch = static_cast<int>(j);
            }
        }
        if (branch < 0) {
            std::vector<double> x = lp.x;
            for (std::size_t j = 0; j < x.size(); ++j)
                if (model.integer[j]) x[j] = std::round(x[j]);
            const double obj = model.lp.objective(x);
            if (obj < incumbent) {
                incumbent = obj;
                best.feasible = true;
                best.x = std::move(x);
                best.objective = obj;
            }
            continue;
        }
        const double v = lp.x[branch];
        Node down{lp.objective, next_id++, node.lower, node.upper};
        down.upper[branch] = std::floor(v);
        Node up{lp.objective, next_id++, std::move(node.lower), std::move(node.upper)};
        up.lower[branch] = std::ceil(v);
        open.push(std::move(down));
        open.push(std::move(up));
    }
    return best;
}

}  // namespace linereconf
