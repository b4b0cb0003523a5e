#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linereconf/capability_graph.hpp"
#include "linereconf/line_model.hpp"
#include "linereconf/lp.hpp"

namespace linereconf {

struct Weights {
    double c_t = 0.6;  // bottleneck time
    double c_z = 0.4;  // agents used
    double c_x = 0.0;  // adjustment to the original plan (reconfiguration only)

    // c_x = 0.001 * min positive(c_t, c_z).
    static Weights reconfig_defaults(double c_t, double c_z);
};

/// Operations J, agents K, capability sets J_k and expected times E(T_kj).
struct InitProblem {
    std::vector<std::string> operations;
    std::vector<std::string> agents;
    std::vector<std::string> agent_types;
    // times[k][j] is set iff agent k can perform operation j.
    std::vector<std::vector<std::optional<double>>> times;
    Weights weights;

    static InitProblem from_graph(const CapabilityGraph& g, Weights w);

    bool capable(std::size_t k, std::size_t j) const { return times[k][j].has_value(); }
    // Throws Infeasible / InvalidArgument when the problem invariants fail.
    void check() const;
};

/// Scoped reconfiguration around one disturbed agent.
struct ReconfigProblem {
    InitProblem base;  // times already reflect the disturbance
    LineConfiguration original;
    std::size_t disturbed = 0;            // K_D (agent index)
    std::vector<std::size_t> adjacent;    // K_A
    std::vector<std::size_t> line;        // K_L
    std::vector<std::size_t> unused;      // K_U
    std::vector<std::size_t> disturbed_ops;  // J_D
    bool allow_sharing = true;

    // K_A defaults to the agents of stations within `radius` of the disturbed
    // agent's station; pass `adjacent_agents` to override.
    static ReconfigProblem from_graph(const CapabilityGraph& g, const LineConfiguration& original,
                                      const std::string& disturbed_agent, Weights w,
                                      bool allow_sharing = true,
                                      std::optional<std::vector<std::string>> adjacent_agents = {},
                                      int radius = 2);

    void check() const;
};

struct Solution {
    LineConfiguration assignment;
    std::map<std::string, int> usage;             // contiguous runs per used agent
    std::map<std::string, double> station_times;  // expected busy time per used agent
    double bottleneck = 0.0;
    int agents_used = 0;
    double adjustment = 0.0;
    double objective = 0.0;
    long nodes = 0;
    double seconds = 0.0;
};

// Objective of an arbitrary configuration under the problem's weights.
double init_objective(const InitProblem& p, const LineConfiguration& c);
double reconfig_objective(const ReconfigProblem& p, const LineConfiguration& c);

// Independent constraint checks (assignment, capability, contiguity, scope).
std::vector<std::string> init_constraint_violations(const InitProblem& p, const LineConfiguration& c);
std::vector<std::string> reconfig_constraint_violations(const ReconfigProblem& p,
                                                        const LineConfiguration& c);

Solution solve_init(const InitProblem& p);
// The same problem as an explicit MILP solved by branch-and-bound. Exact but
// only practical for small instances.
Solution solve_init_milp(const InitProblem& p, const MilpOptions& options = {});

struct ParetoPoint {
    double c_t = 0.0;
    double bottleneck = 0.0;
    int agents = 0;
    Solution solution;
};

// One optimum per c_t in the grid (c_z = 1 - c_t), deduplicated by
// (bottleneck, agents) keeping the first grid value of each plateau.
std::vector<ParetoPoint> sweep_pareto(const InitProblem& p, const std::vector<double>& grid);
// Same, without deduplication: one row per grid value.
std::vector<ParetoPoint> sweep_pareto_rows(const InitProblem& p, const std::vector<double>& grid);

Solution solve_reconfig(const ReconfigProblem& p, const MilpOptions& options = {});

enum class ReconfigMode { Unchanged, PlanSwitch, ConfigurationSwitch };
std::string_view to_string(ReconfigMode m);
ReconfigMode classify(const LineConfiguration& original, const LineConfiguration& updated);

// Exhaustive enumeration. Init: |J| <= 10 and |K| <= 6. Reconfiguration
// additionally needs at most one adjacent agent when sharing is allowed.
Solution brute_force_oracle(const InitProblem& p);
Solution brute_force_oracle(const ReconfigProblem& p);

}  // namespace linereconf
