#pragma once

// Test-only builders: small capability graphs and random optimizer instances.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "linereconf/capability_graph.hpp"
#include "linereconf/optimizer.hpp"

namespace fixtures {

using namespace linereconf;

struct AgentSpec {
    std::string name;
    std::string type;
    // times[j] set iff the agent can perform op j.
    std::vector<std::optional<double>> times;
};

// Each op j needs capability "Skill_j"; an agent has the skills of the ops it
// can perform and a constant time model for each of them.
inline CapabilityGraph make_graph(const std::vector<std::string>& ops, const std::vector<AgentSpec>& agents) {
    CapabilityGraph g;
    for (std::size_t j = 0; j < ops.size(); ++j) {
        g.add_entity(EntityId::operation(ops[j]));
        g.add_entity(EntityId::capability("Skill_" + ops[j]));
        g.add_triple({EntityId::operation(ops[j]), Predicate::Needs, EntityId::capability("Skill_" + ops[j])});
        if (j > 0)
            g.add_triple({EntityId::operation(ops[j - 1]), Predicate::Precedes, EntityId::operation(ops[j])});
    }
    for (const auto& a : agents) {
        g.add_entity(EntityId::agent(a.name), a.type);
        for (std::size_t j = 0; j < ops.size(); ++j) {
            if (!a.times[j]) continue;
            g.add_triple({EntityId::agent(a.name), Predicate::Has, EntityId::capability("Skill_" + ops[j])});
            g.set_time_model(a.name, ops[j], TimeModel::constant(*a.times[j]));
        }
    }
    g.check_consistency();
    return g;
}

inline std::vector<std::string> op_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < n; ++j) out.push_back("Op" + std::to_string(j + 1));
    return out;
}

inline InitProblem random_init(std::mt19937_64& rng, std::size_t max_ops, std::size_t max_agents) {
    std::uniform_int_distribution<std::size_t> nops(1, max_ops), nag(1, max_agents);
    std::uniform_int_distribution<int> t(1, 24);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    InitProblem p;
    p.operations = op_names(nops(rng));
    const std::size_t K = nag(rng);
    const double density = 0.3 + 0.6 * u(rng);
    for (std::size_t k = 0; k < K; ++k) {
        p.agents.push_back("A" + std::to_string(k));
        p.agent_types.push_back("T");
        std::vector<std::optional<double>> row(p.operations.size());
        for (auto& v : row)
            if (u(rng) < density) v = t(rng) / 2.0;
        p.times.push_back(row);
    }
    // Every op needs someone, and a full single-agent cover keeps it feasible.
    for (std::size_t j = 0; j < p.operations.size(); ++j)
        if (!p.times[0][j]) p.times[0][j] = t(rng) / 2.0;
    // Occasionally duplicate an agent to exercise twin handling.
    if (K >= 2 && u(rng) < 0.4) p.times[1] = p.times[0];
    const double c_t = std::uniform_int_distribution<int>(0, 10)(rng) / 10.0;
    p.weights = {c_t, 1.0 - c_t, 0.0};
    return p;
}

// A random original plan of contiguous blocks, then a disturbance on one used
// agent. With sharing, at most one adjacent agent (the oracle's limit).
inline ReconfigProblem random_reconfig(std::mt19937_64& rng, bool sharing) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> t(1, 16);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const std::size_t K = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const std::size_t blocks = std::uniform_int_distribution<std::size_t>(1, std::min(n, K))(rng);
    std::vector<std::size_t> cuts;  // block start indices
    std::vector<std::size_t> pos(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) pos[i] = i + 1;
    std::shuffle(pos.begin(), pos.end(), rng);
    cuts.push_back(0);
    for (std::size_t b = 1; b < blocks; ++b) cuts.push_back(pos[b - 1]);
    std::sort(cuts.begin(), cuts.end());

    ReconfigProblem p;
    p.base.operations = op_names(n);
    const double density = 0.2 + 0.5 * u(rng);
    for (std::size_t k = 0; k < K; ++k) {
        p.base.agents.push_back("A" + std::to_string(k));
        p.base.agent_types.push_back("T");
        std::vector<std::optional<double>> row(n);
        for (auto& v : row)
            if (u(rng) < density) v = t(rng);
        p.base.times.push_back(row);
    }
    if (K >= 4 && u(rng) < 0.5) p.base.times[K - 1] = p.base.times[K - 2];
    p.original = LineConfiguration(p.base.operations);
    for (std::size_t b = 0; b < cuts.size(); ++b) {
        const std::size_t end = b + 1 < cuts.size() ? cuts[b + 1] : n;
        for (std::size_t j = cuts[b]; j < end; ++j) {
            if (!p.base.times[b][j]) p.base.times[b][j] = t(rng);
            p.original.assign(j, p.base.agents[b], 1.0);
        }
    }
    p.disturbed = std::uniform_int_distribution<std::size_t>(0, cuts.size() - 1)(rng);
    const double factor = std::vector<double>{1.0, 1.5, 2.0, 3.0}[rng() % 4];
    for (auto& v : p.base.times[p.disturbed])
        if (v) *v *= factor;
    p.disturbed_ops = p.original.ops_of(p.base.agents[p.disturbed]);
    std::vector<std::size_t> used_others;
    for (std::size_t b = 0; b < cuts.size(); ++b)
        if (b != p.disturbed) used_others.push_back(b);
    std::shuffle(used_others.begin(), used_others.end(), rng);
    const std::size_t n_adj = std::min<std::size_t>(used_others.size(), sharing ? rng() % 2 + (u(rng) < 0.8) : rng() % 3);
    for (std::size_t i = 0; i < used_others.size(); ++i)
        (i < std::min<std::size_t>(n_adj, sharing ? 1 : 2) ? p.adjacent : p.line).push_back(used_others[i]);
    std::sort(p.adjacent.begin(), p.adjacent.end());
    std::sort(p.line.begin(), p.line.end());
    for (std::size_t k = cuts.size(); k < K; ++k) p.unused.push_back(k);
    p.allow_sharing = sharing;
    const double c_t = std::uniform_int_distribution<int>(1, 9)(rng) / 10.0;
    p.base.weights = Weights::reconfig_defaults(c_t, 1.0 - c_t);
    return p;
}

}  // namespace fixtures
