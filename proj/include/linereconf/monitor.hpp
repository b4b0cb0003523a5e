#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linereconf/capability_graph.hpp"
#include "linereconf/line_model.hpp"

namespace linereconf {

struct MonitorThresholds {
    double k = 3.0;            // z multiplier on sigma0 / sqrt(W)
    std::size_t window = 10;   // W, samples per window
    std::size_t persistence = 1;  // D, consecutive breaching windows

    void check() const;
};

struct BaselineStats {
    double mean = 0.0;
    double sd = 0.0;
    TimeModel model = TimeModel::constant(1.0);
};

// Detection state of one (agent, op) stream. Samples are grouped into
// consecutive non-overlapping windows of W; each full window is tested once.
struct StreamState {
    BaselineStats baseline;
    std::vector<double> window;
    std::size_t samples_seen = 0;
    std::size_t windows_seen = 0;
    std::size_t breaches = 0;  // consecutive breaching windows so far
    std::size_t events = 0;
    std::size_t speedups = 0;  // windows significantly below baseline (logged only)
    // First sample of the window being filled and of the current breach run.
    std::size_t window_start_index = 0;
    double window_start_time = 0.0;
    std::size_t run_start_index = 0;
    double run_start_time = 0.0;
    double run_sum = 0.0;  // samples of completed breaching windows in the run
    // Samples since the onset of the first event on this stream.
    std::optional<std::size_t> onset_index;
    double onset_time = 0.0;
    double post_onset_sum = 0.0;
    std::size_t post_onset_count = 0;
    std::optional<double> multiplier;  // estimate at the latest event
};

struct DisturbanceEvent {
    std::string agent;
    std::vector<std::string> ops;
    double multiplier = 1.0;
    std::size_t onset_index = 0;  // index of the first sample of the breach run, per stream
    double onset = 0.0;           // timestamp of that sample
    bool line_impacting = false;

    DisturbanceScenario to_scenario() const { return {agent, multiplier, ops, onset}; }
};

struct Sample {
    double timestamp = 0.0;
    std::string agent;
    std::string op;
    double duration = 0.0;
};

class Monitor {
public:
    // Baselines come from every (agent, op) time model in the graph; the
    // configuration provides the station times used for line impact.
    Monitor(const CapabilityGraph& g, LineConfiguration current, MonitorThresholds t = {});

    std::optional<DisturbanceEvent> ingest(const std::string& agent, const std::string& op, double duration,
                                           double timestamp = std::numeric_limits<double>::quiet_NaN());

    const StreamState& stream(const std::string& agent, const std::string& op) const;
    const MonitorThresholds& thresholds() const { return t_; }

    // Baseline model with its mean scaled by the post-onset mean / mu0; the
    // coefficient of variation is kept.
    TimeModel updated_model(const std::string& agent, const std::string& op) const;

private:
    StreamState& find(const std::string& agent, const std::string& op);
    double projected_station_time(const std::string& agent) const;

    MonitorThresholds t_;
    LineConfiguration config_;
    std::map<std::pair<std::string, std::string>, StreamState> streams_;
    std::map<std::string, double> expected_;  // current station time per agent
    double bottleneck_ = 0.0;
};

// Monte-Carlo events per full window on an undisturbed stream drawn from
// `baseline`. Requires n_samples >= 10 W.
double false_positive_rate(const TimeModel& baseline, const MonitorThresholds& t, std::size_t n_samples,
                           std::uint64_t seed = 1);

std::vector<Sample> parse_sample_log(std::string_view csv_text);
std::vector<Sample> load_sample_log(const std::filesystem::path& path);

// Feeds samples in order and returns every emitted event.
std::vector<DisturbanceEvent> replay(Monitor& m, const std::vector<Sample>& samples);

std::string event_to_json(const DisturbanceEvent& e);
// Reads one event, or a list of events from which the first line-impacting
// one (else the first) is taken.
DisturbanceEvent parse_event(std::string_view json_text);

}  // namespace linereconf
