// Python bindings. Graphs and configurations are opaque handles; results come
// back as plain dicts and lists so they are easy to inspect from a notebook.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "json.hpp"
#include "linereconf/capability_graph.hpp"
#include "linereconf/error.hpp"
#include "linereconf/line_model.hpp"
#include "linereconf/monitor.hpp"
#include "linereconf/optimizer.hpp"
#include "linereconf/scenario.hpp"
#include "linereconf/simulator.hpp"

namespace py = pybind11;
using namespace linereconf;

namespace {

// nlohmann -> Python via the json module keeps the binding small.
py::object to_py(const std::string& json_text) { return py::module_::import("json").attr("loads")(json_text); }

py::dict solution_dict(const Solution& s) {
    py::dict d;
    d["config"] = s.assignment;
    d["objective"] = s.objective;
    d["bottleneck"] = s.bottleneck;
    d["agents_used"] = s.agents_used;
    d["adjustment"] = s.adjustment;
    d["nodes"] = s.nodes;
    d["seconds"] = s.seconds;
    d["station_times"] = s.station_times;
    return d;
}

std::vector<DisturbanceScenario> to_scenarios(const std::vector<std::tuple<std::string, double, double>>& ds) {
    std::vector<DisturbanceScenario> out;
    for (const auto& [agent, mult, onset] : ds) out.push_back({agent, mult, {}, onset});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Line configuration, disturbance monitoring, reconfiguration and simulation";

    static py::exception<Error> error(m, "LineReconfError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            // The kind is attached so callers can branch without parsing the message.
            py::object exc = py::reinterpret_borrow<py::object>(error)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<CapabilityGraph>(m, "CapabilityGraph")
        .def_static("parse", [](const std::string& text) { return parse_graph(text); })
        .def_static("load", [](const std::filesystem::path& p) { return load_graph(p); })
        .def("to_json", [](const CapabilityGraph& g) { return graph_to_json(g); })
        .def("save", [](const CapabilityGraph& g, const std::filesystem::path& p) { save_graph(g, p); })
        .def("expected_time",
             [](const CapabilityGraph& g, const std::string& agent, const std::string& op) {
                 return g.operation_time(EntityId::agent(agent), EntityId::operation(op)).expected();
             })
        .def("disturbed", [](const CapabilityGraph& g, const std::string& agent, double multiplier,
                             std::vector<std::string> ops) {
            return apply_disturbances(g, {{agent, multiplier, std::move(ops), 0.0}});
        }, py::arg("agent"), py::arg("multiplier"), py::arg("ops") = std::vector<std::string>{});

    py::class_<LineConfiguration>(m, "LineConfiguration")
        .def_static("parse", [](const std::string& text) { return parse_configuration(text); })
        .def_static("load", [](const std::filesystem::path& p) { return load_configuration(p); })
        .def("to_json", [](const LineConfiguration& c) { return configuration_to_json(c); })
        .def("save", [](const LineConfiguration& c, const std::filesystem::path& p) { save_configuration(c, p); })
        .def("agents_used", &LineConfiguration::agents_used)
        .def("__len__", &LineConfiguration::size)
        .def("__eq__", [](const LineConfiguration& a, const LineConfiguration& b) { return a == b; });

    m.def("bottleneck_time", &bottleneck_time, py::arg("config"), py::arg("graph"));
    m.def("station_times", &expected_station_times, py::arg("config"), py::arg("graph"));

    m.def("solve_init", [](const CapabilityGraph& g, double c_t, double c_z) {
        return solution_dict(solve_init(InitProblem::from_graph(g, {c_t, c_z, 0.0})));
    }, py::arg("graph"), py::arg("c_t") = 0.6, py::arg("c_z") = 0.4);

    m.def("pareto", [](const CapabilityGraph& g, const std::vector<double>& grid) {
        py::list out;
        for (const auto& p : sweep_pareto_rows(InitProblem::from_graph(g, {}), grid))
            out.append(py::make_tuple(p.c_t, p.bottleneck, p.agents));
        return out;
    }, py::arg("graph"), py::arg("grid"), "One (c_t, bottleneck, agents) row per grid value, with c_z = 1 - c_t.");

    m.def("reconfigure", [](const CapabilityGraph& disturbed, const LineConfiguration& original,
                            const std::string& agent, double c_t, double c_z, bool allow_sharing,
                            std::optional<std::vector<std::string>> adjacent, int radius) {
        const auto p = ReconfigProblem::from_graph(disturbed, original, agent, Weights::reconfig_defaults(c_t, c_z),
                                                   allow_sharing, std::move(adjacent), radius);
        const auto s = solve_reconfig(p);
        auto d = solution_dict(s);
        d["mode"] = std::string(to_string(classify(original, s.assignment)));
        return d;
    }, py::arg("graph"), py::arg("original"), py::arg("agent"), py::arg("c_t"), py::arg("c_z"),
       py::arg("allow_sharing") = true, py::arg("adjacent") = py::none(), py::arg("radius") = 2,
       "Reconfigure around `agent`; `graph` must already hold the disturbed time models.");

    m.def("simulate", [](const CapabilityGraph& g, const LineConfiguration& c, double hours, std::uint64_t seed,
                         const std::vector<std::tuple<std::string, double, double>>& disturbances) {
        const auto model = build_sim(c, g, to_scenarios(disturbances), hours * 3600.0, seed);
        SimReport r;
        {
            py::gil_scoped_release release;
            r = run(model);
        }
        return to_py(report_to_json(r));
    }, py::arg("graph"), py::arg("config"), py::arg("hours") = 16.0, py::arg("seed") = 1,
       py::arg("disturbances") = std::vector<std::tuple<std::string, double, double>>{},
       "Disturbances are (agent, multiplier, onset_s) triples.");

    m.def("monitor", [](const CapabilityGraph& g, const LineConfiguration& c, const std::string& samples_csv, double k,
                        std::size_t window, std::size_t persistence) {
        Monitor mon(g, c, {k, window, persistence});
        py::list out;
        for (const auto& e : replay(mon, parse_sample_log(samples_csv))) out.append(to_py(event_to_json(e)));
        return out;
    }, py::arg("graph"), py::arg("config"), py::arg("samples_csv"), py::arg("k") = 3.0, py::arg("window") = 10,
       py::arg("persistence") = 1, "Replays a sample log (CSV text) and returns the emitted events.");

    m.def("run_scenario", [](const std::filesystem::path& scenario, std::optional<std::filesystem::path> out_dir) {
        const auto r = run_scenario(load_scenario(scenario));
        if (out_dir) write_scenario_outputs(r, *out_dir);
        py::dict d;
        d["summary_csv"] = summary_csv(r);
        d["decision"] = to_py(decision_to_json(r));
        d["chosen"] = r.rows[r.chosen_row].label;
        return d;
    }, py::arg("scenario"), py::arg("out_dir") = py::none());
}
