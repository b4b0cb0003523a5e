#include <algorithm>
#include <cmath>
#include <set>

#include "linereconf/error.hpp"
#include "optimizer_detail.hpp"

namespace linereconf {

namespace detail {

std::map<std::string, std::size_t> agent_index(const InitProblem& p) {
    std::map<std::string, std::size_t> out;
    for (std::size_t k = 0; k < p.agents.size(); ++k) out[p.agents[k]] = k;
    return out;
}

int runs_of(const LineConfiguration& c, const std::string& agent) {
    int runs = 0;
    bool prev = false;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const bool here = c.fraction(agent, j) > kFractionTolerance;
        if (here && !prev) ++runs;
        prev = here;
    }
    return runs;
}

std::map<std::string, double> busy_times(const InitProblem& p, const LineConfiguration& c) {
    const auto index = agent_index(p);
    std::map<std::string, double> out;
    for (std::size_t j = 0; j < c.size(); ++j) {
        for (const auto& s : c.shares(j)) {
            const auto it = index.find(s.agent);
            if (it == index.end()) throw Error(ErrorKind::UnknownEntity, "unknown agent " + s.agent);
            const auto& t = p.times[it->second][j];
            if (!t)
                throw Error(ErrorKind::NoCapability,
                            s.agent + " cannot perform " + p.operations[j]);
            out[s.agent] += *t * s.fraction;
        }
    }
    return out;
}

void summarize(const InitProblem& p, Solution& s) {
    s.station_times = busy_times(p, s.assignment);
    s.usage.clear();
    s.bottleneck = 0.0;
    for (const auto& [agent, t] : s.station_times) {
        s.usage[agent] = runs_of(s.assignment, agent);
        s.bottleneck = std::max(s.bottleneck, t);
    }
    s.agents_used = static_cast<int>(s.station_times.size());
}

}  // namespace detail

Weights Weights::reconfig_defaults(double c_t, double c_z) {
    Weights w{c_t, c_z, 0.0};
    double smallest = kInfinity;
    if (c_t > 0.0) smallest = std::min(smallest, c_t);
    if (c_z > 0.0) smallest = std::min(smallest, c_z);
    w.c_x = std::isfinite(smallest) ? 0.001 * smallest : 0.001;
    return w;
}

InitProblem InitProblem::from_graph(const CapabilityGraph& g, Weights w) {
    g.check_consistency();
    InitProblem p;
    p.operations = g.operation_names();
    p.agents = g.agent_names();
    p.weights = w;
    for (const auto& a : p.agents) {
        p.agent_types.push_back(g.agent_type(a));
        std::vector<std::optional<double>> row(p.operations.size());
        for (std::size_t j = 0; j < p.operations.size(); ++j) {
            if (!g.has_all_needs(EntityId::agent(a), EntityId::operation(p.operations[j]))) continue;
            const TimeModel* m = g.find_time_model(a, p.operations[j]);
            if (!m)
                throw Error(ErrorKind::MissingTimeModel,
                            "no time model for " + a + " on " + p.operations[j]);
            row[j] = m->expected();
        }
        p.times.push_back(std::move(row));
    }
    p.check();
    return p;
}

void InitProblem::check() const {
    if (weights.c_t < 0.0 || weights.c_z < 0.0 || weights.c_x < 0.0 ||
        weights.c_t + weights.c_z <= 0.0)
        throw Error(ErrorKind::InvalidArgument, "weights must be non-negative with c_t + c_z > 0");
    if (operations.empty()) throw Error(ErrorKind::InvalidArgument, "no operations");
    if (times.size() != agents.size())
        throw Error(ErrorKind::InvalidArgument, "time table does not match the agent list");
    for (std::size_t j = 0; j < operations.size(); ++j) {
        bool any = false;
        for (std::size_t k = 0; k < agents.size(); ++k) {
            if (times[k].size() != operations.size())
                throw Error(ErrorKind::InvalidArgument, "time table does not match the operation list");
            if (times[k][j]) {
                any = true;
                if (!(*times[k][j] > 0.0))
                    throw Error(ErrorKind::NonPositiveDuration,
                                "non-positive expected time for " + agents[k] + " on " + operations[j]);
            }
        }
        if (!any)
            throw Error(ErrorKind::Infeasible, "no agent can perform " + operations[j] +
                                                   "; check if more agents are available");
    }
}

ReconfigProblem ReconfigProblem::from_graph(const CapabilityGraph& g, const LineConfiguration& original,
                                            const std::string& disturbed_agent, Weights w,
                                            bool allow_sharing,
                                            std::optional<std::vector<std::string>> adjacent_agents,
                                            int radius) {
    ReconfigProblem p;
    // The base problem checks every op has some capable agent; the original
    // assignment is checked separately so a lost capability is still allowed.
    p.base = InitProblem::from_graph(g, w);
    p.original = original;
    p.allow_sharing = allow_sharing;
    if (original.operations() != p.base.operations)
        throw Error(ErrorKind::InvalidConfiguration, "configuration operations differ from the graph");
    if (!original.is_integral())
        throw Error(ErrorKind::InvalidConfiguration, "the original configuration must be integral");
    const auto index = detail::agent_index(p.base);
    auto lookup = [&](const std::string& a) {
        const auto it = index.find(a);
        if (it == index.end()) throw Error(ErrorKind::UnknownEntity, "unknown agent " + a);
        return it->second;
    };
    p.disturbed = lookup(disturbed_agent);
    for (const auto j : original.ops_of(disturbed_agent)) p.disturbed_ops.push_back(j);
    if (p.disturbed_ops.empty())
        throw Error(ErrorKind::InvalidArgument, disturbed_agent + " is not used by the configuration");

    std::set<std::size_t> adjacent;
    if (adjacent_agents) {
        for (const auto& a : *adjacent_agents) {
            const auto k = lookup(a);
            if (k == p.disturbed) continue;
            if (original.ops_of(a).empty())
                throw Error(ErrorKind::InvalidArgument, "adjacent agent " + a + " is not on the line");
            adjacent.insert(k);
        }
    } else {
        const auto view = derive_stations(original);
        std::vector<std::size_t> own;
        for (std::size_t s = 0; s < view.stations.size(); ++s)
            if (view.stations[s].agent == disturbed_agent) own.push_back(s);
        for (std::size_t s = 0; s < view.stations.size(); ++s) {
            for (const auto d : own) {
                const long dist = std::labs(static_cast<long>(s) - static_cast<long>(d));
                if (dist <= radius && view.stations[s].agent != disturbed_agent)
                    adjacent.insert(lookup(view.stations[s].agent));
            }
        }
    }
    p.adjacent.assign(adjacent.begin(), adjacent.end());
    const auto used = original.agents_used();
    const std::set<std::string> used_set(used.begin(), used.end());
    for (std::size_t k = 0; k < p.base.agents.size(); ++k) {
        if (k == p.disturbed || adjacent.count(k)) continue;
        (used_set.count(p.base.agents[k]) ? p.line : p.unused).push_back(k);
    }
    p.check();
    return p;
}

void ReconfigProblem::check() const {
    base.check();
    if (!(base.weights.c_x > 0.0))
        throw Error(ErrorKind::InvalidArgument, "reconfiguration needs c_x > 0");
    double smallest = kInfinity;
    if (base.weights.c_t > 0.0) smallest = std::min(smallest, base.weights.c_t);
    if (base.weights.c_z > 0.0) smallest = std::min(smallest, base.weights.c_z);
    if (base.weights.c_x > 0.01 * smallest + 1e-15)
        throw Error(ErrorKind::InvalidArgument,
                    "c_x must be at most 0.01 * min(c_t, c_z) so adjustment only breaks ties");
    if (disturbed >= base.agents.size())
        throw Error(ErrorKind::InvalidArgument, "disturbed agent index out of range");
    // Fixed assignments of the line agents must remain capable.
    std::set<std::size_t> scope(disturbed_ops.begin(), disturbed_ops.end());
    for (std::size_t j = 0; j < original.size(); ++j) {
        if (scope.count(j)) continue;
        for (const auto& s : original.shares(j)) {
            const auto idx = std::find(base.agents.begin(), base.agents.end(), s.agent);
            if (idx == base.agents.end())
                throw Error(ErrorKind::UnknownEntity, "unknown agent " + s.agent);
            if (!base.capable(static_cast<std::size_t>(idx - base.agents.begin()), j))
                throw Error(ErrorKind::Infeasible,
                            s.agent + " can no longer perform " + base.operations[j] +
                                " outside the reconfiguration scope");
        }
    }
}

double init_objective(const InitProblem& p, const LineConfiguration& c) {
    const auto busy = detail::busy_times(p, c);
    double bottleneck = 0.0;
    int runs = 0;
    for (const auto& [agent, t] : busy) {
        bottleneck = std::max(bottleneck, t);
        runs += detail::runs_of(c, agent);
    }
    return p.weights.c_t * bottleneck + p.weights.c_z * runs;
}

double reconfig_objective(const ReconfigProblem& p, const LineConfiguration& c) {
    const auto busy = detail::busy_times(p.base, c);
    double bottleneck = 0.0;
    for (const auto& [agent, t] : busy) bottleneck = std::max(bottleneck, t);
    const auto& w = p.base.weights;
    return w.c_t * bottleneck + w.c_z * static_cast<double>(busy.size()) +
           w.c_x * adjustment(c, p.original);
}

namespace {

void check_common(const InitProblem& p, const LineConfiguration& c, std::vector<std::string>& out) {
    if (c.operations() != p.operations) {
        out.push_back("operation sequence differs from the problem");
        return;
    }
    const auto index = detail::agent_index(p);
    for (std::size_t j = 0; j < c.size(); ++j) {
        double sum = 0.0;
        for (const auto& s : c.shares(j)) {
            sum += s.fraction;
            const auto it = index.find(s.agent);
            if (it == index.end()) {
                out.push_back("unknown agent " + s.agent);
                continue;
            }
            if (!p.capable(it->second, j))
                out.push_back(s.agent + " is not capable of " + p.operations[j]);
            if (s.fraction < -kFractionTolerance || s.fraction > 1.0 + kFractionTolerance)
                out.push_back("fraction out of range on " + p.operations[j]);
        }
        if (std::abs(sum - 1.0) > 1e-6) out.push_back(p.operations[j] + " is not fully assigned");
    }
}

}  // namespace

std::vector<std::string> init_constraint_violations(const InitProblem& p, const LineConfiguration& c) {
    std::vector<std::string> out;
    check_common(p, c, out);
    if (!out.empty()) return out;
    if (!c.is_integral()) out.push_back("initial configuration must be integral");
    for (const auto& a : c.agents_used())
        if (detail::runs_of(c, a) > 1) out.push_back(a + " holds a non-contiguous block");
    return out;
}

std::vector<std::string> reconfig_constraint_violations(const ReconfigProblem& p,
                                                        const LineConfiguration& c) {
    std::vector<std::string> out;
    check_common(p.base, c, out);
    if (!out.empty()) return out;
    const std::set<std::size_t> scope(p.disturbed_ops.begin(), p.disturbed_ops.end());
    std::set<std::string> sharing;
    sharing.insert(p.base.agents[p.disturbed]);
    for (const auto k : p.adjacent) sharing.insert(p.base.agents[k]);
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!scope.count(j)) {
            if (c.shares(j) != p.original.shares(j))
                out.push_back(p.base.operations[j] + " lies outside the scope but was changed");
            continue;
        }
        for (const auto& s : c.shares(j)) {
            const bool fractional = std::abs(s.fraction - 1.0) > kFractionTolerance;
            if (fractional && (!p.allow_sharing || !sharing.count(s.agent)))
                out.push_back("fractional share of " + p.base.operations[j] + " held by " + s.agent);
        }
    }
    for (const auto& a : c.agents_used()) {
        const int runs = detail::runs_of(c, a);
        const int cap = sharing.count(a) ? 2 : 1;
        if (runs > cap)
            out.push_back(a + " holds " + std::to_string(runs) + " separate blocks (limit " +
                          std::to_string(cap) + ")");
    }
    return out;
}

std::string_view to_string(ReconfigMode m) {
    switch (m) {
    case ReconfigMode::Unchanged: return "unchanged";
    case ReconfigMode::PlanSwitch: return "plan_switch";
    case ReconfigMode::ConfigurationSwitch: return "configuration_switch";
    }
    return "unknown";
}

ReconfigMode classify(const LineConfiguration& original, const LineConfiguration& updated) {
    auto a = original.agents_used();
    auto b = updated.agents_used();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) return ReconfigMode::ConfigurationSwitch;
    for (std::size_t j = 0; j < original.size(); ++j)
        if (original.shares(j) != updated.shares(j)) return ReconfigMode::PlanSwitch;
    return ReconfigMode::Unchanged;
}

}  // namespace linereconf
