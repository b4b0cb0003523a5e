#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linereconf/capability_graph.hpp"
#include "linereconf/line_model.hpp"
#include "linereconf/monitor.hpp"
#include "linereconf/optimizer.hpp"
#include "linereconf/selector.hpp"
#include "linereconf/simulator.hpp"

namespace linereconf {

struct WeightSet {
    std::string label;
    Weights weights;
};

// Everything `run-scenario` needs, with paths already resolved against the
// scenario file's directory.
struct ScenarioSpec {
    std::filesystem::path graph;
    std::optional<std::filesystem::path> config;   // solved from init_weights when absent
    std::optional<std::filesystem::path> samples;  // no log means no trigger
    Weights init_weights;
    MonitorThresholds monitor;
    std::vector<WeightSet> weight_sets;
    std::optional<std::vector<std::string>> adjacent;
    int radius = 2;
    bool allow_sharing = true;
    SelectionPolicy policy;
    double horizon = 16 * 3600.0;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    std::optional<int> default_buffer;
    std::map<std::size_t, int> buffers;  // station slot -> capacity
};

ScenarioSpec parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
ScenarioSpec load_scenario(const std::filesystem::path& path);

// Scales the time models of each scenario's agent. Empty affected_ops means
// every operation the agent has a time model for.
CapabilityGraph apply_disturbances(const CapabilityGraph& g, const std::vector<DisturbanceScenario>& scenarios);

// Per-operation disturbances of the trigger's agent, as estimated by a monitor
// that has seen the whole log. Operations whose stream has too few samples
// after its onset take the trigger's multiplier if the trigger names them and
// are left out otherwise. Onsets are 0: the plans are compared in the
// disturbed steady state.
std::vector<DisturbanceScenario> estimated_disturbances(const Monitor& m, const LineConfiguration& c,
                                                        const DisturbanceEvent& trigger);

// One row of the summary: a configuration and how it simulated.
struct PlanResult {
    std::string label;
    LineConfiguration config;
    std::string mode;  // "original", "unchanged", "plan_switch", "configuration_switch"
    std::optional<Solution> solution;
    double expected_bottleneck = 0.0;
    Replication sim;
    std::optional<Comparison> vs_disturbed;  // cycle times against the disturbed original
};

struct ScenarioResult {
    LineConfiguration original;
    std::vector<DisturbanceEvent> events;
    std::optional<DisturbanceEvent> trigger;
    std::vector<DisturbanceScenario> disturbances;
    std::vector<PlanResult> rows;
    std::vector<Candidate> candidates;
    std::vector<std::size_t> candidate_rows;  // row index of each candidate
    Selection selection;
    std::size_t chosen_row = 0;
};

ScenarioResult run_scenario(const ScenarioSpec& spec);

// CSV `config,agents,bottleneck_s,throughput`; the bottleneck is the mean
// simulated one and the throughput the mean over replications.
std::string summary_csv(const ScenarioResult& r);
std::string decision_to_json(const ScenarioResult& r);
// decision.json, summary.csv, chosen_config.json and one config per row.
void write_scenario_outputs(const ScenarioResult& r, const std::filesystem::path& dir);

}  // namespace linereconf
