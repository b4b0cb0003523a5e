#include "linereconf/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

void MonitorThresholds::check() const {
    // k = 0 is accepted: it turns the rule into a plain "above the mean" test,
    // which is useful as a calibration reference.
    if (!(k >= 0.0) || !std::isfinite(k)) throw Error(ErrorKind::InvalidArgument, "monitor k must be >= 0");
    if (window < 2) throw Error(ErrorKind::InvalidArgument, "monitor window must be >= 2");
    if (persistence < 1) throw Error(ErrorKind::InvalidArgument, "monitor persistence must be >= 1");
}

namespace {

// Pushes one sample and evaluates the window once it is full. Returns true
// when the stream emits an event. Shared by Monitor and the false-positive
// estimator so both apply the same rule.
bool push_sample(StreamState& s, const MonitorThresholds& t, double duration, double timestamp) {
    const std::size_t index = s.samples_seen++;
    if (s.window.empty()) {
        s.window_start_index = index;
        s.window_start_time = timestamp;
    }
    s.window.push_back(duration);
    if (s.onset_index) {
        s.post_onset_sum += duration;
        ++s.post_onset_count;
    }
    if (s.window.size() < t.window) return false;

    double sum = 0.0;
    for (const double v : s.window) sum += v;
    const double mean = sum / static_cast<double>(s.window.size());
    s.window.clear();
    ++s.windows_seen;
    const double margin = t.k * s.baseline.sd / std::sqrt(static_cast<double>(t.window));
    // A relative slack keeps a stream sitting exactly on a deterministic
    // baseline from breaching through summation rounding.
    const double slack = 1e-9 * s.baseline.mean;
    if (mean < s.baseline.mean - margin - slack) ++s.speedups;
    if (!(mean > s.baseline.mean + margin + slack)) {
        s.breaches = 0;
        s.run_sum = 0.0;
        return false;
    }
    if (s.breaches++ == 0) {
        s.run_start_index = s.window_start_index;
        s.run_start_time = s.window_start_time;
        s.run_sum = 0.0;
    }
    if (s.breaches < t.persistence) {
        s.run_sum += sum;
        return false;
    }
    ++s.events;
    s.multiplier = mean / s.baseline.mean;
    if (!s.onset_index) {
        s.onset_index = s.run_start_index;
        s.onset_time = s.run_start_time;
        s.post_onset_sum = s.run_sum + sum;
        s.post_onset_count = index + 1 - s.run_start_index;
    }
    s.breaches = 0;
    s.run_sum = 0.0;
    return true;
}

}  // namespace

Monitor::Monitor(const CapabilityGraph& g, LineConfiguration current, MonitorThresholds t)
    : t_(t), config_(std::move(current)) {
    t_.check();
    for (const auto& [key, model] : g.time_models()) {
        StreamState s;
        s.baseline = {model.expected(), model.stddev(), model};
        streams_.emplace(key, std::move(s));
    }
    expected_ = expected_station_times(config_, g);
    for (const auto& [agent, time] : expected_) bottleneck_ = std::max(bottleneck_, time);
}

StreamState& Monitor::find(const std::string& agent, const std::string& op) {
    const auto it = streams_.find({agent, op});
    if (it == streams_.end()) throw Error(ErrorKind::UnknownPair, "no baseline for " + agent + " on " + op);
    return it->second;
}

const StreamState& Monitor::stream(const std::string& agent, const std::string& op) const {
    const auto it = streams_.find({agent, op});
    if (it == streams_.end()) throw Error(ErrorKind::UnknownPair, "no baseline for " + agent + " on " + op);
    return it->second;
}

double Monitor::projected_station_time(const std::string& agent) const {
    double total = 0.0;
    for (const auto j : config_.ops_of(agent)) {
        const auto& op = config_.operations()[j];
        const auto it = streams_.find({agent, op});
        if (it == streams_.end()) continue;
        const double factor = it->second.multiplier.value_or(1.0);
        total += it->second.baseline.mean * config_.fraction(agent, j) * factor;
    }
    return total;
}

std::optional<DisturbanceEvent> Monitor::ingest(const std::string& agent, const std::string& op, double duration,
                                                double timestamp) {
    if (!(duration > 0.0) || !std::isfinite(duration))
        throw Error(ErrorKind::NonPositiveDuration, "sample for " + agent + " on " + op + " must be > 0");
    auto& s = find(agent, op);
    if (std::isnan(timestamp)) timestamp = static_cast<double>(s.samples_seen);
    if (!push_sample(s, t_, duration, timestamp)) return std::nullopt;

    DisturbanceEvent e;
    e.agent = agent;
    e.multiplier = *s.multiplier;
    e.onset_index = *s.onset_index;
    e.onset = s.onset_time;
    // Every operation of this agent whose stream has already flagged a
    // slow-down is part of the disturbance.
    for (const auto j : config_.ops_of(agent)) {
        const auto& name = config_.operations()[j];
        const auto it = streams_.find({agent, name});
        if (it != streams_.end() && it->second.multiplier) e.ops.push_back(name);
    }
    if (std::find(e.ops.begin(), e.ops.end(), op) == e.ops.end()) e.ops.push_back(op);
    e.line_impacting = projected_station_time(agent) > bottleneck_ * (1.0 + 1e-9);
    return e;
}

TimeModel Monitor::updated_model(const std::string& agent, const std::string& op) const {
    const auto& s = stream(agent, op);
    if (!s.onset_index || s.post_onset_count < t_.window)
        throw Error(ErrorKind::InsufficientSamples,
                    "need at least " + std::to_string(t_.window) + " samples after the onset for " + agent +
                        " on " + op);
    const double multiplier = s.post_onset_sum / static_cast<double>(s.post_onset_count) / s.baseline.mean;
    return s.baseline.model.scaled(multiplier);
}

double false_positive_rate(const TimeModel& baseline, const MonitorThresholds& t, std::size_t n_samples,
                           std::uint64_t seed) {
    t.check();
    if (n_samples < 10 * t.window)
        throw Error(ErrorKind::InvalidArgument, "false-positive estimate needs at least 10 windows of samples");
    StreamState s;
    s.baseline = {baseline.expected(), baseline.stddev(), baseline};
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n_samples; ++i) push_sample(s, t, baseline.sample(rng), static_cast<double>(i));
    return static_cast<double>(s.events) / static_cast<double>(s.windows_seen);
}

std::vector<Sample> parse_sample_log(std::string_view csv_text) {
    std::istringstream in{std::string(csv_text)};
    std::string line;
    auto trim = [](std::string x) {
        const auto b = x.find_first_not_of(" \t\r");
        const auto e = x.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : x.substr(b, e - b + 1);
    };
    std::size_t lineno = 0;
    bool header = false;
    std::vector<Sample> out;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) cells.push_back(trim(cell));
        const std::string where = "sample log:" + std::to_string(lineno);
        if (!header) {
            if (cells != std::vector<std::string>{"timestamp_s", "agent", "op", "duration_s"})
                throw Error(ErrorKind::Parse, where + ": expected header timestamp_s,agent,op,duration_s");
            header = true;
            continue;
        }
        if (cells.size() != 4) throw Error(ErrorKind::Parse, where + ": expected 4 fields");
        Sample s;
        try {
            std::size_t used = 0;
            s.timestamp = std::stod(cells[0], &used);
            if (used != cells[0].size()) throw std::invalid_argument("timestamp");
            s.duration = std::stod(cells[3], &used);
            if (used != cells[3].size()) throw std::invalid_argument("duration");
        } catch (const std::exception&) {
            throw Error(ErrorKind::Parse, where + ": malformed number");
        }
        s.agent = cells[1];
        s.op = cells[2];
        out.push_back(std::move(s));
    }
    if (!header) throw Error(ErrorKind::Parse, "sample log: missing header");
    return out;
}

std::vector<Sample> load_sample_log(const std::filesystem::path& path) {
    return parse_sample_log(detail::read_text_file(path));
}

std::vector<DisturbanceEvent> replay(Monitor& m, const std::vector<Sample>& samples) {
    std::vector<DisturbanceEvent> events;
    for (const auto& s : samples)
        if (auto e = m.ingest(s.agent, s.op, s.duration, s.timestamp)) events.push_back(std::move(*e));
    return events;
}

std::string event_to_json(const DisturbanceEvent& e) {
    detail::json doc{{"agent", e.agent},
                     {"ops", e.ops},
                     {"multiplier", e.multiplier},
                     {"onset", e.onset},
                     {"onset_index", e.onset_index},
                     {"line_impacting", e.line_impacting}};
    return doc.dump(1) + "\n";
}

DisturbanceEvent parse_event(std::string_view json_text) {
    using detail::json;
    json doc = detail::parse_json_text(json_text, "event");
    if (doc.is_array()) {
        if (doc.empty()) throw Error(ErrorKind::InvalidArgument, "event list is empty");
        json pick = doc.front();
        for (const auto& e : doc)
            if (e.is_object() && e.value("line_impacting", false)) {
                pick = e;
                break;
            }
        doc = pick;
    }
    detail::check_keys(doc, {"agent", "ops", "multiplier", "onset", "onset_index", "line_impacting"}, "event");
    DisturbanceEvent e;
    e.agent = detail::get_field<std::string>(doc, "agent", "event");
    e.multiplier = detail::get_field<double>(doc, "multiplier", "event");
    if (doc.contains("ops")) e.ops = detail::get_field<std::vector<std::string>>(doc, "ops", "event");
    if (doc.contains("onset")) e.onset = detail::get_field<double>(doc, "onset", "event");
    if (doc.contains("onset_index")) e.onset_index = detail::get_field<std::size_t>(doc, "onset_index", "event");
    if (doc.contains("line_impacting")) e.line_impacting = detail::get_field<bool>(doc, "line_impacting", "event");
    if (!(e.multiplier > 0.0) || !std::isfinite(e.multiplier))
        throw Error(ErrorKind::Parse, "event: multiplier must be positive");
    return e;
}

}  // namespace linereconf
