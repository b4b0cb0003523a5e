#include "linereconf/scenario.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <set>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

namespace {

using detail::json;

Weights parse_weights(const json& j, const std::string& where, bool reconfig) {
    Weights w;
    w.c_t = detail::get_field<double>(j, "c_t", where);
    w.c_z = detail::get_field<double>(j, "c_z", where);
    if (reconfig) {
        w = j.contains("c_x") ? Weights{w.c_t, w.c_z, detail::get_field<double>(j, "c_x", where)}
                              : Weights::reconfig_defaults(w.c_t, w.c_z);
    }
    if (w.c_t < 0.0 || w.c_z < 0.0 || w.c_x < 0.0)
        throw Error(ErrorKind::Parse, where + ": weights must be non-negative");
    return w;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Runs one pipeline stage, naming it in any error it raises.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + " stage: " + e.message());
    }
}

json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"sd", s.sd}}; }

}  // namespace

ScenarioSpec parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json doc = detail::parse_json_text(json_text, "scenario");
    detail::check_keys(doc,
                       {"graph", "config", "samples", "init_weights", "monitor", "weight_sets", "adjacent",
                        "radius", "allow_sharing", "policy", "horizon_s", "seed", "replications",
                        "default_buffer", "buffers"},
                       "scenario");
    ScenarioSpec s;
    auto path = [&](const char* key) { return base_dir / detail::get_field<std::string>(doc, key, "scenario"); };
    s.graph = path("graph");
    if (doc.contains("config")) s.config = path("config");
    if (doc.contains("samples")) s.samples = path("samples");
    if (doc.contains("init_weights")) s.init_weights = parse_weights(doc.at("init_weights"), "scenario.init_weights", false);
    if (doc.contains("monitor")) {
        const auto& m = doc.at("monitor");
        detail::check_keys(m, {"k", "window", "persistence"}, "scenario.monitor");
        if (m.contains("k")) s.monitor.k = detail::get_field<double>(m, "k", "scenario.monitor");
        if (m.contains("window")) s.monitor.window = detail::get_field<std::size_t>(m, "window", "scenario.monitor");
        if (m.contains("persistence"))
            s.monitor.persistence = detail::get_field<std::size_t>(m, "persistence", "scenario.monitor");
        s.monitor.check();
    }
    std::set<std::string> labels{"original", "original_disturbed"};
    if (doc.contains("weight_sets")) {
        const auto& sets = doc.at("weight_sets");
        if (!sets.is_array()) throw Error(ErrorKind::Parse, "scenario: 'weight_sets' must be a list");
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const std::string where = "scenario.weight_sets[" + std::to_string(i) + "]";
            detail::check_keys(sets[i], {"label", "c_t", "c_z", "c_x"}, where);
            WeightSet ws{detail::get_field<std::string>(sets[i], "label", where), parse_weights(sets[i], where, true)};
            if (!labels.insert(ws.label).second)
                throw Error(ErrorKind::Parse, where + ": label '" + ws.label + "' is reserved or repeated");
            s.weight_sets.push_back(std::move(ws));
        }
    }
    if (doc.contains("adjacent")) s.adjacent = detail::get_field<std::vector<std::string>>(doc, "adjacent", "scenario");
    if (doc.contains("radius")) s.radius = detail::get_field<int>(doc, "radius", "scenario");
    if (doc.contains("allow_sharing")) s.allow_sharing = detail::get_field<bool>(doc, "allow_sharing", "scenario");
    if (doc.contains("policy")) s.policy = parse_policy(doc.at("policy").dump());
    if (doc.contains("horizon_s")) s.horizon = detail::get_field<double>(doc, "horizon_s", "scenario");
    if (doc.contains("seed")) s.seed = detail::get_field<std::uint64_t>(doc, "seed", "scenario");
    if (doc.contains("replications"))
        s.replications = detail::get_field<std::size_t>(doc, "replications", "scenario");
    if (doc.contains("default_buffer")) s.default_buffer = detail::get_field<int>(doc, "default_buffer", "scenario");
    if (doc.contains("buffers")) {
        const auto& buffers = doc.at("buffers");
        for (std::size_t i = 0; i < buffers.size(); ++i) {
            const std::string where = "scenario.buffers[" + std::to_string(i) + "]";
            detail::check_keys(buffers[i], {"after_station_index", "capacity"}, where);
            s.buffers[detail::get_field<std::size_t>(buffers[i], "after_station_index", where)] =
                detail::get_field<int>(buffers[i], "capacity", where);
        }
    }
    if (!(s.horizon > 0.0)) throw Error(ErrorKind::Parse, "scenario: horizon_s must be positive");
    if (s.replications < 1) throw Error(ErrorKind::Parse, "scenario: replications must be >= 1");
    if (s.radius < 0) throw Error(ErrorKind::Parse, "scenario: radius must be >= 0");
    return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    return parse_scenario(detail::read_text_file(path), path.parent_path());
}

CapabilityGraph apply_disturbances(const CapabilityGraph& g, const std::vector<DisturbanceScenario>& scenarios) {
    CapabilityGraph out = g;
    for (const auto& s : scenarios) {
        if (!(s.time_multiplier > 0.0))
            throw Error(ErrorKind::InvalidArgument, "disturbance multiplier must be positive");
        if (!g.contains(EntityId::agent(s.agent))) throw Error(ErrorKind::UnknownEntity, "unknown agent " + s.agent);
        for (const auto& [key, model] : g.time_models()) {
            if (key.first != s.agent) continue;
            const bool hit = s.affected_ops.empty() ||
                             std::find(s.affected_ops.begin(), s.affected_ops.end(), key.second) != s.affected_ops.end();
            if (!hit) continue;
            const auto current = *out.find_time_model(key.first, key.second);
            out = update_time_model(out, EntityId::agent(key.first), EntityId::operation(key.second),
                                    current.scaled(s.time_multiplier));
        }
    }
    return out;
}

std::vector<DisturbanceScenario> estimated_disturbances(const Monitor& m, const LineConfiguration& c,
                                                        const DisturbanceEvent& trigger) {
    std::vector<DisturbanceScenario> out;
    for (const auto j : c.ops_of(trigger.agent)) {
        const auto& op = c.operations()[j];
        const auto& s = m.stream(trigger.agent, op);
        if (s.onset_index && s.post_onset_count >= m.thresholds().window) {
            const double mult = s.post_onset_sum / static_cast<double>(s.post_onset_count) / s.baseline.mean;
            out.push_back({trigger.agent, mult, {op}, 0.0});
        } else if (std::find(trigger.ops.begin(), trigger.ops.end(), op) != trigger.ops.end()) {
            out.push_back({trigger.agent, trigger.multiplier, {op}, 0.0});
        }
    }
    return out;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
    ScenarioResult r;
    const auto g = stage("load", [&] { return load_graph(spec.graph); });
    r.original = stage("init", [&] {
        auto c = spec.config ? load_configuration(*spec.config)
                             : solve_init(InitProblem::from_graph(g, spec.init_weights)).assignment;
        if (spec.default_buffer) c.set_default_buffer_capacity(*spec.default_buffer);
        for (const auto& [slot, cap] : spec.buffers) c.set_buffer_capacity(slot, cap);
        return c;
    });

    auto simulate = [&](PlanResult& row, const CapabilityGraph& times, const std::vector<DisturbanceScenario>& sc) {
        stage("simulate", [&] {
            row.expected_bottleneck = bottleneck_time(row.config, times);
            row.sim = replicate(build_sim(row.config, g, sc, spec.horizon, spec.seed), spec.replications, spec.seed);
        });
    };

    PlanResult original{"original", r.original, "original", std::nullopt, 0.0, {}, std::nullopt};
    simulate(original, g, {});
    r.rows.push_back(std::move(original));

    if (spec.samples) {
        stage("monitor", [&] {
            Monitor monitor(g, r.original, spec.monitor);
            r.events = replay(monitor, load_sample_log(*spec.samples));
            for (const auto& e : r.events)
                if (e.line_impacting) {
                    r.trigger = e;
                    break;
                }
            if (r.trigger) r.disturbances = estimated_disturbances(monitor, r.original, *r.trigger);
        });
    }

    auto as_is = [&](double bottleneck) {
        Solution s;
        s.assignment = r.original;
        s.agents_used = static_cast<int>(r.original.agents_used().size());
        s.bottleneck = bottleneck;
        return s;
    };
    if (!r.trigger) {
        r.candidates.push_back(make_candidate("original", as_is(r.rows[0].expected_bottleneck), r.rows[0].sim));
        r.candidate_rows.push_back(0);
        r.selection = stage("select", [&] { return select(r.candidates, spec.policy); });
        return r;
    }

    const auto disturbed_graph = stage("reconfigure", [&] { return apply_disturbances(g, r.disturbances); });
    PlanResult disturbed{"original_disturbed", r.original, "original", std::nullopt, 0.0, {}, std::nullopt};
    simulate(disturbed, disturbed_graph, r.disturbances);
    r.rows.push_back(std::move(disturbed));
    const std::size_t disturbed_row = r.rows.size() - 1;
    r.candidates.push_back(make_candidate("original_disturbed", as_is(r.rows[disturbed_row].expected_bottleneck),
                                          r.rows[disturbed_row].sim));
    r.candidate_rows.push_back(disturbed_row);

    for (const auto& ws : spec.weight_sets) {
        Solution sol = stage("reconfigure", [&] {
            const auto problem = ReconfigProblem::from_graph(disturbed_graph, r.original, r.trigger->agent,
                                                             ws.weights, spec.allow_sharing, spec.adjacent, spec.radius);
            return solve_reconfig(problem);
        });
        sol.assignment.set_default_buffer_capacity(r.original.default_buffer_capacity());
        for (const auto& [slot, cap] : r.original.buffer_overrides()) sol.assignment.set_buffer_capacity(slot, cap);
        PlanResult row{ws.label, sol.assignment, std::string(to_string(classify(r.original, sol.assignment))),
                       sol, 0.0, {}, std::nullopt};
        simulate(row, disturbed_graph, r.disturbances);
        row.vs_disturbed = stage("simulate", [&] {
            return compare_reports(r.rows[disturbed_row].sim.runs.front(), row.sim.runs.front());
        });
        r.candidates.push_back(make_candidate(ws.label, sol, row.sim));
        r.rows.push_back(std::move(row));
        r.candidate_rows.push_back(r.rows.size() - 1);
    }
    r.selection = stage("select", [&] { return select(r.candidates, spec.policy); });
    r.chosen_row = r.candidate_rows[r.selection.chosen];
    return r;
}

std::string summary_csv(const ScenarioResult& r) {
    std::string out = "config,agents,bottleneck_s,throughput\n";
    for (const auto& row : r.rows)
        out += row.label + "," + std::to_string(row.config.agents_used().size()) + "," +
               fixed(row.sim.bottleneck.mean, 2) + "," + fixed(row.sim.throughput.mean, 1) + "\n";
    return out;
}

std::string decision_to_json(const ScenarioResult& r) {
    json doc;
    doc["chosen"] = r.rows[r.chosen_row].label;
    doc["mode"] = r.rows[r.chosen_row].mode;
    doc["trigger"] = r.trigger ? json::parse(event_to_json(*r.trigger)) : json(nullptr);
    doc["events"] = r.events.size();
    doc["disturbances"] = json::array();
    for (const auto& d : r.disturbances)
        doc["disturbances"].push_back({{"agent", d.agent}, {"ops", d.affected_ops}, {"multiplier", d.time_multiplier}});
    doc["plans"] = json::array();
    for (const auto& row : r.rows) {
        json p{{"label", row.label},
               {"mode", row.mode},
               {"agents", row.config.agents_used().size()},
               {"expected_bottleneck_s", row.expected_bottleneck},
               {"replications", row.sim.runs.size()},
               {"throughput", summary_json(row.sim.throughput)},
               {"bottleneck_s", summary_json(row.sim.bottleneck)},
               {"cycle_time_s", summary_json(row.sim.cycle_time)}};
        if (row.solution)
            p["solve"] = {{"objective", row.solution->objective},
                          {"bottleneck", row.solution->bottleneck},
                          {"agents_used", row.solution->agents_used},
                          {"adjustment", row.solution->adjustment},
                          {"nodes", row.solution->nodes},
                          {"seconds", row.solution->seconds}};
        if (row.vs_disturbed)
            p["welch_vs_disturbed"] = {{"t", row.vs_disturbed->t},
                                       {"dof", row.vs_disturbed->dof},
                                       {"p_value", row.vs_disturbed->p_value},
                                       {"mean_difference", row.vs_disturbed->mean_difference}};
        doc["plans"].push_back(std::move(p));
    }
    doc["selection"] = json::parse(selection_to_json(r.selection, r.candidates));
    return doc.dump(1) + "\n";
}

void write_scenario_outputs(const ScenarioResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    detail::write_text_file(dir / "decision.json", decision_to_json(r));
    detail::write_text_file(dir / "summary.csv", summary_csv(r));
    save_configuration(r.rows[r.chosen_row].config, dir / "chosen_config.json");
    for (const auto& row : r.rows)
        if (row.solution) save_configuration(row.config, dir / ("config_" + row.label + ".json"));
}

}  // namespace linereconf
