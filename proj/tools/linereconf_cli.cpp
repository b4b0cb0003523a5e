// Command-line front end. Each subcommand is a thin shell over one library
// call; exit codes are 0 ok, 2 input error, 3 infeasible, 4 internal error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "linereconf/capability_graph.hpp"
#include "linereconf/error.hpp"
#include "linereconf/line_model.hpp"
#include "linereconf/monitor.hpp"
#include "linereconf/optimizer.hpp"
#include "linereconf/scenario.hpp"
#include "linereconf/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace linereconf;

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Infeasible:
    case ErrorKind::NoFeasibleCandidate:
        return 3;
    case ErrorKind::HitNodeLimit:
    case ErrorKind::NumericalFailure:
        return 4;
    default:
        return 2;
    }
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out << text;
}

std::vector<double> split_numbers(const std::string& s, char sep) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error(ErrorKind::Parse, "not a number: '" + part + "' in '" + s + "'");
        }
    }
    return out;
}

Weights init_weights(const std::string& s) {
    const auto v = split_numbers(s, ',');
    if (v.size() != 2) throw Error(ErrorKind::Parse, "--weights expects ct,cz");
    return {v[0], v[1], 0.0};
}

Weights reconfig_weights(const std::string& s) {
    const auto v = split_numbers(s, ',');
    if (v.size() == 2) return Weights::reconfig_defaults(v[0], v[1]);
    if (v.size() == 3) return {v[0], v[1], v[2]};
    throw Error(ErrorKind::Parse, "--weights expects ct,cz[,cx]");
}

// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& s) {
    if (s.find(':') == std::string::npos) return split_numbers(s, ',');
    const auto v = split_numbers(s, ':');
    if (v.size() != 3 || !(v[2] > 0.0) || v[1] < v[0]) throw Error(ErrorKind::Parse, "--grid expects lo:hi:step");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((v[1] - v[0]) / v[2] + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((v[0] + static_cast<double>(i) * v[2]) * 1e12) / 1e12);
    return out;
}

DisturbanceScenario parse_disturb(const std::string& s) {
    const auto a = s.find(':');
    const auto b = s.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
        throw Error(ErrorKind::Parse, "--disturb expects agent:multiplier:onset, got '" + s + "'");
    const auto nums = split_numbers(s.substr(a + 1), ':');
    return {s.substr(0, a), nums.at(0), {}, nums.at(1)};
}

json solution_stats(const Solution& s) {
    return {{"objective", s.objective}, {"bottleneck", s.bottleneck}, {"agents_used", s.agents_used},
            {"adjustment", s.adjustment}, {"nodes", s.nodes}, {"seconds", s.seconds}};
}

std::string fmt(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Manufacturing line configuration, monitoring and reconfiguration"};
    app.require_subcommand(1);

    std::string graph, config, out, out_dir, weights = "0.6,0.4", grid = "0:1:0.05", samples, trigger, scenario,
                                                 trace, stats;
    std::vector<std::string> weight_sets, disturb, adjacent;
    bool no_sharing = false, already_disturbed = false;
    double hours = 16.0;
    std::uint64_t seed = 1;
    std::size_t reps = 1;
    int radius = 2;
    MonitorThresholds thresholds;

    auto* init = app.add_subcommand("init", "Solve the initial line configuration");
    init->add_option("--graph", graph, "Capability graph JSON")->required();
    init->add_option("--weights", weights, "c_t,c_z")->capture_default_str();
    init->add_option("--out", out, "Configuration file to write")->required();
    init->add_option("--stats", stats, "Solve statistics JSON (default: stdout)");

    auto* pareto = app.add_subcommand("pareto", "Sweep c_t with c_z = 1 - c_t");
    pareto->add_option("--graph", graph, "Capability graph JSON")->required();
    pareto->add_option("--grid", grid, "lo:hi:step or a comma list")->capture_default_str();
    pareto->add_option("--out", out, "CSV c_t,bottleneck_s,agents")->required();

    auto* monitor = app.add_subcommand("monitor", "Replay a sample log and report disturbance triggers");
    monitor->add_option("--graph", graph, "Capability graph JSON")->required();
    monitor->add_option("--config", config, "Current configuration")->required();
    monitor->add_option("--samples", samples, "CSV timestamp_s,agent,op,duration_s")->required();
    monitor->add_option("--out", out, "Events JSON list")->required();
    std::string updated_graph;
    monitor->add_option("--updated-graph", updated_graph,
                        "Graph with re-estimated time models (default: <out>.graph.json when events fire)");
    monitor->add_option("--k", thresholds.k, "Threshold in baseline standard errors")->capture_default_str();
    monitor->add_option("--window", thresholds.window, "Samples per window")->capture_default_str();
    monitor->add_option("--persistence", thresholds.persistence, "Consecutive breaching windows")
        ->capture_default_str();

    auto* reconf = app.add_subcommand("reconfigure", "Reconfigure around a triggered disturbance");
    reconf->add_option("--graph", graph, "Capability graph JSON")->required();
    reconf->add_option("--config", config, "Current configuration")->required();
    reconf->add_option("--trigger", trigger, "Trigger event JSON (or a list of events)")->required();
    reconf->add_option("--weights", weight_sets, "c_t,c_z[,c_x]; repeat for several weight sets")->required();
    reconf->add_flag("--no-sharing", no_sharing, "Forbid fractional assignments");
    reconf->add_flag("--already-disturbed", already_disturbed,
                     "The graph already holds the disturbed time models (e.g. from monitor); do not rescale");
    reconf->add_option("--adjacent", adjacent, "Adjacent agents (default: stations within --radius)")->delimiter(',');
    reconf->add_option("--radius", radius, "Station radius for default adjacency")->capture_default_str();
    reconf->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* sim = app.add_subcommand("simulate", "Simulate a configuration");
    sim->add_option("--graph", graph, "Capability graph JSON")->required();
    sim->add_option("--config", config, "Configuration")->required();
    sim->add_option("--disturb", disturb, "agent:multiplier:onset_s; repeatable");
    sim->add_option("--hours", hours, "Horizon in hours")->capture_default_str();
    sim->add_option("--seed", seed, "Base seed")->capture_default_str();
    sim->add_option("--reps", reps, "Replications (seeds seed, seed+1, ...)")->capture_default_str();
    sim->add_option("--out", out, "Report JSON")->required();
    sim->add_option("--trace", trace, "Event trace CSV of the first run");

    auto* run = app.add_subcommand("run-scenario", "Run the whole pipeline from a scenario file");
    run->add_option("--scenario", scenario, "Scenario JSON")->required();
    run->add_option("--out-dir", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*init) {
            const auto g = load_graph(graph);
            const auto s = solve_init(InitProblem::from_graph(g, init_weights(weights)));
            write_file(out, configuration_to_json(s.assignment));
            const auto text = solution_stats(s).dump(1) + "\n";
            if (stats.empty()) std::cout << text;
            else write_file(stats, text);
        } else if (*pareto) {
            const auto g = load_graph(graph);
            const auto rows = sweep_pareto_rows(InitProblem::from_graph(g, {}), parse_grid(grid));
            std::string csv = "c_t,bottleneck_s,agents\n";
            for (const auto& r : rows) csv += fmt(r.c_t, 2) + "," + fmt(r.bottleneck, 4) + "," + std::to_string(r.agents) + "\n";
            write_file(out, csv);
        } else if (*monitor) {
            const auto g = load_graph(graph);
            const auto c = load_configuration(config);
            thresholds.check();
            Monitor m(g, c, thresholds);
            const auto events = replay(m, load_sample_log(samples));
            json list = json::array();
            for (const auto& e : events) list.push_back(json::parse(event_to_json(e)));
            write_file(out, list.dump(1) + "\n");
            std::optional<DisturbanceEvent> first;
            for (const auto& e : events)
                if (e.line_impacting && !first) first = e;
            if (!first && !events.empty()) first = events.front();
            if (first) {
                const auto updated = apply_disturbances(g, estimated_disturbances(m, c, *first));
                const fs::path target = updated_graph.empty() ? fs::path(out + ".graph.json") : fs::path(updated_graph);
                write_file(target, graph_to_json(updated));
            }
            std::cout << events.size() << " event(s)";
            if (first) std::cout << "; first trigger " << first->agent << " x" << fmt(first->multiplier, 3)
                                 << (first->line_impacting ? " (line impacting)" : "");
            std::cout << "\n";
        } else if (*reconf) {
            const auto g = load_graph(graph);
            const auto c = load_configuration(config);
            std::ifstream in(trigger, std::ios::binary);
            if (!in) throw Error(ErrorKind::Parse, "cannot open " + trigger);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto event = parse_event(ss.str());
            const auto disturbed = already_disturbed ? g : apply_disturbances(g, {event.to_scenario()});
            std::optional<std::vector<std::string>> adj;
            if (!adjacent.empty()) adj = adjacent;
            json summary = json::array();
            std::map<std::string, bool> written;
            for (const auto& w : weight_sets) {
                const auto p = ReconfigProblem::from_graph(disturbed, c, event.agent, reconfig_weights(w), !no_sharing,
                                                           adj, radius);
                const auto s = solve_reconfig(p);
                const std::string mode(to_string(classify(c, s.assignment)));
                json row = solution_stats(s);
                row["weights"] = w;
                row["mode"] = mode;
                if (!written[mode]) {
                    write_file(fs::path(out_dir) / (mode + ".json"), configuration_to_json(s.assignment));
                    written[mode] = true;
                    row["file"] = mode + ".json";
                }
                summary.push_back(std::move(row));
            }
            write_file(fs::path(out_dir) / "reconfigure.json", summary.dump(1) + "\n");
        } else if (*sim) {
            const auto g = load_graph(graph);
            const auto c = load_configuration(config);
            std::vector<DisturbanceScenario> scenarios;
            for (const auto& d : disturb) scenarios.push_back(parse_disturb(d));
            if (reps < 1) throw Error(ErrorKind::InvalidArgument, "--reps must be >= 1");
            auto model = build_sim(c, g, scenarios, hours * 3600.0, seed);
            model.record_trace = !trace.empty();
            if (reps == 1) {
                const auto r = linereconf::run(model);
                write_file(out, report_to_json(r));
                if (!trace.empty()) write_file(trace, trace_to_csv(r.trace));
            } else {
                const auto rep = replicate(model, reps, seed);
                json doc{{"replications", reps},
                         {"throughput", {{"mean", rep.throughput.mean}, {"sd", rep.throughput.sd}}},
                         {"bottleneck_s", {{"mean", rep.bottleneck.mean}, {"sd", rep.bottleneck.sd}}},
                         {"cycle_time_s", {{"mean", rep.cycle_time.mean}, {"sd", rep.cycle_time.sd}}},
                         {"runs", json::array()}};
                for (const auto& r : rep.runs) doc["runs"].push_back(json::parse(report_to_json(r)));
                write_file(out, doc.dump(1) + "\n");
                if (!trace.empty()) write_file(trace, trace_to_csv(rep.runs.front().trace));
            }
        } else if (*run) {
            const auto result = run_scenario(load_scenario(scenario));
            write_scenario_outputs(result, out_dir);
            std::cout << summary_csv(result);
            std::cout << "chosen: " << result.rows[result.chosen_row].label << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
