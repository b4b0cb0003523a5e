// Exact solver for the initial line configuration.
//
// Every agent takes at most one contiguous block, so a solution is a
// partition of the operation sequence into blocks, each owned by a distinct
// capable agent. For a fixed cap T on block time, the fewest agents N(T)
// that cover the line is found by a breadth-first search over states
// (next operation, agents used per twin class). Agents with identical
// capabilities and times are interchangeable, which collapses the search.
// From a state, taking the longest feasible block for a class dominates any
// shorter block for the same class, so each state has at most one successor
// per class.
//
// N(T) is non-increasing in T and the optimal T for a given N is always a
// block sum, so the Pareto front of (bottleneck, agents) is traced by
// binary search over the sorted block sums. The weighted optimum is the
// front point with the lowest objective; equal objectives prefer fewer agents.

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>

#include "linereconf/error.hpp"
#include "optimizer_detail.hpp"

namespace linereconf {

namespace {

struct FrontPoint {
    double bottleneck = 0.0;
    int agents = 0;
};

class InitSearch {
public:
    explicit InitSearch(const InitProblem& p) : p_(p) {
        p_.check();
        n_ = p.operations.size();
        // Twin classes in order of their first member.
        for (std::size_t k = 0; k < p.agents.size(); ++k) {
            bool placed = false;
            for (auto& cls : classes_) {
                if (p.times[cls.front()] == p.times[k]) {
                    cls.push_back(k);
                    placed = true;
                    break;
                }
            }
            if (!placed) classes_.push_back({k});
        }
        // cum_[g][j] holds running block sums starting at j while the class
        // stays capable.
        cum_.resize(classes_.size(), std::vector<std::vector<double>>(n_));
        std::vector<double> all;
        for (std::size_t g = 0; g < classes_.size(); ++g) {
            const auto& row = p.times[classes_[g].front()];
            for (std::size_t j = 0; j < n_; ++j) {
                double s = 0.0;
                for (std::size_t l = j; l < n_ && row[l]; ++l) {
                    s += *row[l];
                    cum_[g][j].push_back(s);
                    all.push_back(s);
                }
            }
        }
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        candidates_ = std::move(all);
    }

    // Smallest number of blocks with every block time <= cap (INT_MAX when
    // impossible). When `blocks` is given, it receives (class, first, last)
    // for an optimal cover.
    int min_blocks(double cap, std::vector<std::tuple<std::size_t, std::size_t, std::size_t>>* blocks) {
        struct State {
            std::size_t pos;
            std::vector<unsigned char> used;
            int parent;
            std::size_t cls;
        };
        std::vector<State> states;
        std::vector<std::vector<int>> by_pos(n_ + 1);
        auto dominated = [&](std::size_t pos, const std::vector<unsigned char>& used) {
            for (std::size_t q = pos; q <= n_; ++q) {
                for (const int idx : by_pos[q]) {
                    const auto& o = states[idx].used;
                    bool le = true;
                    for (std::size_t g = 0; g < used.size() && le; ++g) le = o[g] <= used[g];
                    if (le) return true;
                }
            }
            return false;
        };
        states.push_back({0, std::vector<unsigned char>(classes_.size(), 0), -1, 0});
        by_pos[0].push_back(0);
        std::vector<int> frontier{0};
        int layer = 0;
        while (!frontier.empty()) {
            ++layer;
            std::vector<int> next;
            for (const int si : frontier) {
                for (std::size_t g = 0; g < classes_.size(); ++g) {
                    const State cur = states[si];
                    if (cur.used[g] >= classes_[g].size()) continue;
                    const auto& c = cum_[g][cur.pos];
                    const auto len = std::upper_bound(c.begin(), c.end(), cap) - c.begin();
                    if (len == 0) continue;
                    const std::size_t pos = cur.pos + static_cast<std::size_t>(len);
                    auto used = cur.used;
                    ++used[g];
                    ++nodes_;
                    if (pos == n_) {
                        if (blocks) {
                            blocks->clear();
                            blocks->emplace_back(g, cur.pos, pos - 1);
                            for (int s = si; states[s].parent >= 0; s = states[s].parent) {
                                const auto& st = states[s];
                                blocks->emplace_back(st.cls, states[st.parent].pos, st.pos - 1);
                            }
                            std::reverse(blocks->begin(), blocks->end());
                        }
                        return layer;
                    }
                    if (dominated(pos, used)) continue;
                    states.push_back({pos, std::move(used), si, g});
                    by_pos[pos].push_back(static_cast<int>(states.size()) - 1);
                    next.push_back(static_cast<int>(states.size()) - 1);
                }
            }
            frontier = std::move(next);
        }
        return INT_MAX;
    }

    std::vector<FrontPoint> front() {
        std::map<std::size_t, int> memo;
        auto n_at = [&](std::size_t i) {
            const auto it = memo.find(i);
            if (it != memo.end()) return it->second;
            return memo[i] = min_blocks(candidates_[i], nullptr);
        };
        // First candidate that admits any cover (feasibility is monotone in T).
        std::size_t lo = 0, hi = candidates_.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (n_at(mid) < INT_MAX) hi = mid;
            else lo = mid + 1;
        }
        if (lo == candidates_.size())
            throw Error(ErrorKind::Infeasible,
                        "no assignment gives every agent a single contiguous block; "
                        "check if more agents are available");
        const std::size_t floor = lo;
        const int most = n_at(floor);
        const int fewest = n_at(candidates_.size() - 1);
        std::vector<FrontPoint> out;
        for (int n = fewest; n <= most; ++n) {
            std::size_t a = floor, b = candidates_.size() - 1;
            while (a < b) {
                const std::size_t mid = (a + b) / 2;
                if (n_at(mid) <= n) b = mid;
                else a = mid + 1;
            }
            if (n_at(a) == n) out.push_back({candidates_[a], n});
        }
        return out;
    }

    Solution realize(double cap) {
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> blocks;
        if (min_blocks(cap, &blocks) == INT_MAX)
            throw Error(ErrorKind::NumericalFailure, "front point could not be realized");
        Solution s;
        s.assignment = LineConfiguration(p_.operations);
        std::vector<std::size_t> taken(classes_.size(), 0);
        for (const auto& [g, first, last] : blocks) {
            const std::string& agent = p_.agents[classes_[g][taken[g]++]];
            for (std::size_t j = first; j <= last; ++j) s.assignment.assign(j, agent, 1.0);
        }
        detail::summarize(p_, s);
        s.objective = p_.weights.c_t * s.bottleneck + p_.weights.c_z * s.agents_used;
        s.nodes = nodes_;
        return s;
    }

    long nodes() const { return nodes_; }

private:
    const InitProblem& p_;
    std::size_t n_ = 0;
    std::vector<std::vector<std::size_t>> classes_;
    std::vector<std::vector<std::vector<double>>> cum_;
    std::vector<double> candidates_;
    long nodes_ = 0;
};

const FrontPoint& pick(const std::vector<FrontPoint>& front, double c_t, double c_z) {
    const FrontPoint* best = &front.front();
    double best_obj = c_t * best->bottleneck + c_z * best->agents;
    for (const auto& pt : front) {
        const double obj = c_t * pt.bottleneck + c_z * pt.agents;
        const double tol = 1e-9 * std::max(1.0, std::abs(best_obj));
        if (obj < best_obj - tol || (obj <= best_obj + tol && pt.agents < best->agents)) {
            best = &pt;
            best_obj = obj;
        }
    }
    return *best;
}

}  // namespace

Solution solve_init(const InitProblem& p) {
    detail::Stopwatch clock;
    InitSearch search(p);
    const auto front = search.front();
    const auto& pt = pick(front, p.weights.c_t, p.weights.c_z);
    Solution s = search.realize(pt.bottleneck);
    s.seconds = clock.seconds();
    return s;
}

std::vector<ParetoPoint> sweep_pareto_rows(const InitProblem& p, const std::vector<double>& grid) {
    InitSearch search(p);
    const auto front = search.front();
    std::map<std::pair<double, int>, Solution> cache;
    std::vector<ParetoPoint> rows;
    for (const double c_t : grid) {
        if (c_t < 0.0 || c_t > 1.0) throw Error(ErrorKind::InvalidArgument, "c_t must lie in [0, 1]");
        const auto& pt = pick(front, c_t, 1.0 - c_t);
        const auto key = std::make_pair(pt.bottleneck, pt.agents);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, search.realize(pt.bottleneck)).first;
        ParetoPoint row{c_t, pt.bottleneck, pt.agents, it->second};
        row.solution.objective = c_t * pt.bottleneck + (1.0 - c_t) * pt.agents;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ParetoPoint> sweep_pareto(const InitProblem& p, const std::vector<double>& grid) {
    std::vector<ParetoPoint> out;
    for (auto& row : sweep_pareto_rows(p, grid)) {
        if (!out.empty() && out.back().bottleneck == row.bottleneck && out.back().agents == row.agents)
            continue;
        out.push_back(std::move(row));
    }
    return out;
}

Solution solve_init_milp(const InitProblem& p, const MilpOptions& options) {
    detail::Stopwatch clock;
    p.check();
    const std::size_t n = p.operations.size();
    MilpModel m;
    double horizon = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double worst = 0.0;
        for (std::size_t k = 0; k < p.agents.size(); ++k)
            if (p.capable(k, j)) worst = std::max(worst, *p.times[k][j]);
        horizon += worst;
    }
    const int t = m.add_variable(0.0, horizon, p.weights.c_t, false);
    std::vector<std::vector<int>> x(p.agents.size(), std::vector<int>(n, -1));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < p.agents.size(); ++k)
            if (p.capable(k, j)) x[k][j] = m.add_variable(0.0, 1.0, 0.0, true);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::pair<int, double>> row;
        for (std::size_t k = 0; k < p.agents.size(); ++k)
            if (x[k][j] >= 0) row.push_back({x[k][j], 1.0});
        m.lp.add_row(std::move(row), RowSense::Equal, 1.0);
    }
    for (std::size_t k = 0; k < p.agents.size(); ++k) {
        std::vector<std::pair<int, double>> time_row{{t, 1.0}};
        std::vector<std::pair<int, double>> z_row;
        const int z = m.add_variable(0.0, 1.0, p.weights.c_z, false);
        z_row.push_back({z, 1.0});
        for (std::size_t j = 0; j < n; ++j) {
            if (x[k][j] < 0) continue;
            time_row.push_back({x[k][j], -*p.times[k][j]});
            // y >= x_j - x_{j-1} marks the start of a block.
            const int y = m.add_variable(0.0, 1.0, 0.0, false);
            std::vector<std::pair<int, double>> start{{y, 1.0}, {x[k][j], -1.0}};
            if (j > 0 && x[k][j - 1] >= 0) start.push_back({x[k][j - 1], 1.0});
            m.lp.add_row(std::move(start), RowSense::GreaterEqual, 0.0);
            z_row.push_back({y, -1.0});
        }
        m.lp.add_row(std::move(time_row), RowSense::GreaterEqual, 0.0);
        m.lp.add_row(std::move(z_row), RowSense::GreaterEqual, 0.0);
    }
    const auto r = milp_solve(m, options);
    if (!r.feasible) throw Error(ErrorKind::Infeasible, "no feasible initial configuration");
    Solution s;
    s.assignment = LineConfiguration(p.operations);
    for (std::size_t k = 0; k < p.agents.size(); ++k)
        for (std::size_t j = 0; j < n; ++j)
            if (x[k][j] >= 0 && r.x[x[k][j]] > 0.5) s.assignment.assign(j, p.agents[k], 1.0);
    detail::summarize(p, s);
    s.objective = init_objective(p, s.assignment);
    s.nodes = r.nodes;
    s.seconds = clock.seconds();
    return s;
}

}  // namespace linereconf
