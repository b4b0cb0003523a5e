#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "linereconf/capability_graph.hpp"
#include "linereconf/line_model.hpp"

namespace linereconf {

// A minority share of one operation, executed by `recipient` for a random
// fraction of parts instead of the station's own agent.
struct SharingRoute {
    std::size_t op = 0;
    std::string donor;
    std::string recipient;
    double fraction = 0.0;
};

struct SimModel {
    LineConfiguration config;
    StationView view;
    std::map<std::pair<std::string, std::string>, TimeModel> times;  // (agent, op)
    std::vector<DisturbanceScenario> scenarios;
    std::vector<SharingRoute> routes;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    bool record_trace = false;
};

enum class EventKind { PartEnter, OpStart, OpFinish, PartDepart, BufferFull, BufferFree };

std::string_view to_string(EventKind kind);

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::PartEnter;
    std::size_t station = 0;  // buffer slot index for buffer events
    long part = 0;
    std::string agent;

    friend bool operator==(const Event&, const Event&) = default;
};

struct StationStats {
    std::string agent;
    std::size_t first_op = 0;
    std::size_t last_op = 0;
    std::size_t parts = 0;
    double mean_time = 0.0;  // processing time per part, waits excluded
    double max_time = 0.0;

    friend bool operator==(const StationStats&, const StationStats&) = default;
};

struct BufferStats {
    int capacity = 1;
    double mean_occupancy = 0.0;  // time-weighted over the horizon
    int max_occupancy = 0;

    friend bool operator==(const BufferStats&, const BufferStats&) = default;
};

struct SimReport {
    std::uint64_t seed = 0;
    double horizon = 0.0;
    // Completed cycles: parts leaving the last station after the first one.
    std::size_t throughput = 0;
    std::size_t parts_entered = 0;
    std::size_t parts_departed = 0;
    std::size_t work_in_process = 0;
    double bottleneck = 0.0;  // largest mean station time
    std::vector<StationStats> stations;
    std::vector<BufferStats> buffers;
    std::map<std::string, double> op_mean_times;
    std::map<std::string, std::map<std::string, std::size_t>> op_executions;  // op -> agent -> count
    // Intervals between successive departures from the last station.
    std::vector<double> cycle_times;
    double cycle_time_mean = 0.0;
    double cycle_time_p95 = 0.0;
    double lead_time_mean = 0.0;  // line entry to departure
    std::vector<Event> trace;

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

SimModel build_sim(const LineConfiguration& c, const CapabilityGraph& g,
                   const std::vector<DisturbanceScenario>& scenarios, double horizon, std::uint64_t seed);

SimReport run(const SimModel& m);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct Replication {
    std::vector<SimReport> runs;
    MetricSummary throughput;
    MetricSummary bottleneck;
    MetricSummary cycle_time;
};

// Run i uses seed base_seed + i. Runs execute on up to `threads` workers
// (0 picks the hardware concurrency).
Replication replicate(const SimModel& m, std::size_t n, std::uint64_t base_seed, unsigned threads = 0);

struct Comparison {
    double t = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    double mean_difference = 0.0;  // mean(a) - mean(b)
};

// Welch's two-sided t-test on the cycle-time samples of two reports.
Comparison compare_reports(const SimReport& a, const SimReport& b);
Comparison welch_test(const std::vector<double>& a, const std::vector<double>& b);

std::string report_to_json(const SimReport& r);
std::string trace_to_csv(const std::vector<Event>& trace);

}  // namespace linereconf
