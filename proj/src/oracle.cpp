// Exhaustive reference solvers used to cross-check the optimizers on small
// instances. They share only the problem definitions with the solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>

#include "linereconf/error.hpp"
#include "optimizer_detail.hpp"

namespace linereconf {

namespace {

constexpr std::size_t kMaxOps = 10;
constexpr std::size_t kMaxAgents = 6;
// Smallest share a split operation may give either agent.
constexpr double kMinShare = 1e-3;

void require_small(const InitProblem& p) {
    if (p.operations.size() > kMaxOps || p.agents.size() > kMaxAgents)
        throw Error(ErrorKind::TooLarge, "brute force is limited to 10 operations and 6 agents");
}

}  // namespace

Solution brute_force_oracle(const InitProblem& p) {
    detail::Stopwatch clock;
    require_small(p);
    p.check();
    const std::size_t n = p.operations.size();
    const std::size_t K = p.agents.size();
    bool found = false;
    double best_obj = 0.0;
    int best_agents = 0;
    std::vector<std::pair<std::size_t, std::size_t>> best_blocks;
    std::vector<std::size_t> best_owner;
    long visited = 0;

    // A cut mask chooses where blocks end; agents are then matched to blocks.
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<std::pair<std::size_t, std::size_t>> blocks;
        std::size_t start = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == n - 1 || (mask >> j & 1u)) {
                blocks.push_back({start, j});
                start = j + 1;
            }
        }
        if (blocks.size() > K) continue;
        std::vector<std::size_t> owner(blocks.size());
        std::vector<bool> taken(K, false);
        std::function<void(std::size_t, double)> assign = [&](std::size_t b, double worst) {
            if (b == blocks.size()) {
                ++visited;
                const int agents = static_cast<int>(blocks.size());
                const double obj = p.weights.c_t * worst + p.weights.c_z * agents;
                const double tol = 1e-9 * std::max(1.0, std::abs(best_obj));
                if (!found || obj < best_obj - tol || (obj <= best_obj + tol && agents < best_agents)) {
                    found = true;
                    best_obj = obj;
                    best_agents = agents;
                    best_blocks = blocks;
                    best_owner = owner;
                }
                return;
            }
            for (std::size_t k = 0; k < K; ++k) {
                if (taken[k]) continue;
                double t = 0.0;
                bool ok = true;
                for (std::size_t j = blocks[b].first; j <= blocks[b].second && ok; ++j) {
                    ok = p.capable(k, j);
                    if (ok) t += *p.times[k][j];
                }
                if (!ok) continue;
                taken[k] = true;
                owner[b] = k;
                assign(b + 1, std::max(worst, t));
                taken[k] = false;
            }
        };
        assign(0, 0.0);
    }
    if (!found) throw Error(ErrorKind::Infeasible, "no feasible initial configuration");
    Solution s;
    s.assignment = LineConfiguration(p.operations);
    for (std::size_t b = 0; b < best_blocks.size(); ++b)
        for (std::size_t j = best_blocks[b].first; j <= best_blocks[b].second; ++j)
            s.assignment.assign(j, p.agents[best_owner[b]], 1.0);
    detail::summarize(p, s);
    s.objective = best_obj;
    s.nodes = visited;
    s.seconds = clock.seconds();
    return s;
}

namespace {

// Minimizes c_t * max(C, t_d(w), t_a(w)) + c_x * 2 * sum(1 - w_i) over the
// box [eps, 1 - eps]^f for f <= 2 split operations. The function is linear on each
// cell of the arrangement formed by the breakpoint planes and the box faces,
// so a minimum sits on one of the arrangement's vertices.
struct SplitProblem {
    double c_t = 0.0, c_x = 0.0, C = 0.0;
    double alpha_d = 0.0, alpha_a = 0.0;  // times excluding the split ops
    std::vector<double> e_d, e_a;          // expected times on split ops

    double value(const std::vector<double>& w) const {
        double td = alpha_d, ta = alpha_a, pen = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            td += e_d[i] * w[i];
            ta += e_a[i] * (1.0 - w[i]);
            pen += 2.0 * (1.0 - w[i]);
        }
        return c_t * std::max({C, td, ta}) + c_x * pen;
    }

    std::pair<double, std::vector<double>> minimize() const {
        const std::size_t f = e_d.size();
        struct Plane {
            std::vector<double> a;
            double b;
        };
        std::vector<Plane> planes;
        double sum_a = 0.0;
        for (const double e : e_a) sum_a += e;
        std::vector<double> a_eq(f), a_d(f), a_a(f);
        for (std::size_t i = 0; i < f; ++i) {
            a_eq[i] = e_d[i] + e_a[i];
            a_d[i] = e_d[i];
            a_a[i] = -e_a[i];
        }
        planes.push_back({a_eq, alpha_a + sum_a - alpha_d});
        planes.push_back({a_d, C - alpha_d});
        planes.push_back({a_a, C - alpha_a - sum_a});
        for (std::size_t i = 0; i < f; ++i) {
            std::vector<double> unit(f, 0.0);
            unit[i] = 1.0;
            planes.push_back({unit, kMinShare});
            planes.push_back({unit, 1.0 - kMinShare});
        }
        std::vector<std::vector<double>> points;
        if (f == 0) points.push_back({});
        if (f == 1) {
            for (const auto& pl : planes)
                if (std::abs(pl.a[0]) > 1e-15) points.push_back({pl.b / pl.a[0]});
        }
        if (f == 2) {
            for (std::size_t x = 0; x < planes.size(); ++x) {
                for (std::size_t y = x + 1; y < planes.size(); ++y) {
                    const auto& P = planes[x];
                    const auto& Q = planes[y];
                    const double det = P.a[0] * Q.a[1] - P.a[1] * Q.a[0];
                    if (std::abs(det) < 1e-12) continue;
                    points.push_back({(P.b * Q.a[1] - P.a[1] * Q.b) / det,
                                      (P.a[0] * Q.b - P.b * Q.a[0]) / det});
                }
            }
        }
        std::pair<double, std::vector<double>> best{kInfinity, {}};
        for (auto& pt : points) {
            bool inside = true;
            for (auto& v : pt) {
                if (v < kMinShare - 1e-12 || v > 1.0 - kMinShare + 1e-12) inside = false;
                v = std::clamp(v, kMinShare, 1.0 - kMinShare);
            }
            if (!inside) continue;
            const double val = value(pt);
            if (val < best.first) best = {val, pt};
        }
        return best;
    }
};

}  // namespace

Solution brute_force_oracle(const ReconfigProblem& p) {
    detail::Stopwatch clock;
    const InitProblem& b = p.base;
    require_small(b);
    p.check();
    if (p.allow_sharing && p.adjacent.size() > 1)
        throw Error(ErrorKind::TooLarge, "brute force with sharing supports one adjacent agent");
    const std::size_t n = b.operations.size();
    const Weights& w = b.weights;
    const std::size_t d = p.disturbed;
    const std::set<std::size_t> scope(p.disturbed_ops.begin(), p.disturbed_ops.end());
    const bool can_split = p.allow_sharing && p.adjacent.size() == 1;
    const std::size_t a = can_split ? p.adjacent.front() : 0;

    // Candidate holders for scoped ops: the disturbed agent, adjacent agents
    // and unused agents. kSplit marks an op shared between d and a.
    constexpr std::size_t kSplit = static_cast<std::size_t>(-1);
    std::vector<std::size_t> candidates{d};
    for (const auto k : p.adjacent) candidates.push_back(k);
    for (const auto k : p.unused) candidates.push_back(k);
    std::vector<std::vector<std::size_t>> options;
    for (const auto j : p.disturbed_ops) {
        std::vector<std::size_t> opts;
        for (const auto k : candidates)
            if (b.capable(k, j)) opts.push_back(k);
        if (can_split && b.capable(d, j) && b.capable(a, j)) opts.push_back(kSplit);
        options.push_back(std::move(opts));
    }

    // Holder per op for everything outside the scope.
    std::vector<std::size_t> fixed_holder(n, kSplit);
    for (std::size_t j = 0; j < n; ++j) {
        if (scope.count(j)) continue;
        const auto& sh = p.original.shares(j);
        fixed_holder[j] = static_cast<std::size_t>(
            std::find(b.agents.begin(), b.agents.end(), sh.front().agent) - b.agents.begin());
    }

    bool found = false;
    double best_obj = kInfinity;
    std::vector<std::size_t> best_labels;
    std::vector<double> best_split;
    long visited = 0;
    std::vector<std::size_t> labels(p.disturbed_ops.size());

    auto evaluate = [&]() {
        ++visited;
        std::vector<std::size_t> split_ops;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == kSplit) split_ops.push_back(i);
        if (split_ops.size() > 2) return;
        // Support per agent along the line and the block limits.
        std::vector<std::vector<bool>> holds(b.agents.size(), std::vector<bool>(n, false));
        for (std::size_t j = 0; j < n; ++j)
            if (!scope.count(j)) holds[fixed_holder[j]][j] = true;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const std::size_t j = p.disturbed_ops[i];
            if (labels[i] == kSplit) {
                holds[d][j] = holds[a][j] = true;
            } else {
                holds[labels[i]][j] = true;
            }
        }
        const std::set<std::size_t> sharing_agents = [&] {
            std::set<std::size_t> s{d};
            s.insert(p.adjacent.begin(), p.adjacent.end());
            return s;
        }();
        int agents = 0;
        for (std::size_t k = 0; k < b.agents.size(); ++k) {
            int runs = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (holds[k][j] && (j == 0 || !holds[k][j - 1])) ++runs;
            if (runs > (sharing_agents.count(k) ? 2 : 1)) return;
            if (runs > 0) ++agents;
        }
        // Whole-op loads.
        std::vector<double> load(b.agents.size(), 0.0);
        double base_adjust = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (!scope.count(j)) load[fixed_holder[j]] += *b.times[fixed_holder[j]][j];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == kSplit) continue;
            const std::size_t j = p.disturbed_ops[i];
            load[labels[i]] += *b.times[labels[i]][j];
            if (labels[i] != d) base_adjust += 2.0;
        }
        SplitProblem sp;
        sp.c_t = w.c_t;
        sp.c_x = w.c_x;
        for (std::size_t k = 0; k < b.agents.size(); ++k)
            if (k != d && !(can_split && k == a)) sp.C = std::max(sp.C, load[k]);
        sp.alpha_d = load[d];
        sp.alpha_a = can_split ? load[a] : 0.0;
        for (const auto i : split_ops) {
            const std::size_t j = p.disturbed_ops[i];
            sp.e_d.push_back(*b.times[d][j]);
            sp.e_a.push_back(*b.times[a][j]);
        }
        const auto [val, split] = sp.minimize();
        if (!std::isfinite(val)) return;
        const double obj = val + w.c_z * agents + w.c_x * base_adjust;
        if (!found || obj < best_obj - 1e-12) {
            found = true;
            best_obj = obj;
            best_labels = labels;
            best_split = split;
        }
    };

    std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
        if (i == labels.size()) {
            evaluate();
            return;
        }
        for (const auto k : options[i]) {
            labels[i] = k;
            enumerate(i + 1);
        }
    };
    enumerate(0);
    if (!found) throw Error(ErrorKind::Infeasible, "no feasible reconfiguration in scope");

    Solution s;
    s.assignment = p.original;
    std::size_t next_split = 0;
    bool fractional = false;
    for (std::size_t i = 0; i < best_labels.size(); ++i) {
        const std::size_t j = p.disturbed_ops[i];
        s.assignment.clear(j);
        if (best_labels[i] != kSplit) {
            s.assignment.assign(j, b.agents[best_labels[i]], 1.0);
            continue;
        }
        const double share = best_split[next_split++];
        s.assignment.assign(j, b.agents[d], share);
        s.assignment.assign(j, b.agents[a], 1.0 - share);
        fractional = true;
    }
    if (fractional) s.assignment.set_fractional_scope(scope);
    detail::summarize(b, s);
    s.adjustment = adjustment(s.assignment, p.original);
    s.objective = best_obj;
    s.nodes = visited;
    s.seconds = clock.seconds();
    return s;
}

}  // namespace linereconf
