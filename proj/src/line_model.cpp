#include "linereconf/line_model.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

LineConfiguration::LineConfiguration(std::vector<std::string> operations)
    : operations_(std::move(operations)), shares_(operations_.size()) {}

std::optional<std::size_t> LineConfiguration::op_index(std::string_view op) const {
    for (std::size_t j = 0; j < operations_.size(); ++j)
        if (operations_[j] == op) return j;
    return std::nullopt;
}

void LineConfiguration::assign(std::size_t op, const std::string& agent, double fraction) {
    if (op >= shares_.size()) throw Error(ErrorKind::InvalidArgument, "operation index out of range");
    auto& s = shares_[op];
    s.erase(std::remove_if(s.begin(), s.end(), [&](const Share& x) { return x.agent == agent; }),
            s.end());
    if (fraction > 0.0) {
        s.push_back({agent, fraction});
        std::sort(s.begin(), s.end(), [](const Share& a, const Share& b) { return a.agent < b.agent; });
    }
}

void LineConfiguration::assign(std::string_view op, const std::string& agent, double fraction) {
    auto j = op_index(op);
    if (!j) throw Error(ErrorKind::UnknownEntity, "operation " + std::string(op));
    assign(*j, agent, fraction);
}

void LineConfiguration::clear(std::size_t op) { shares_.at(op).clear(); }

double LineConfiguration::fraction(const std::string& agent, std::size_t op) const {
    for (const auto& s : shares_.at(op))
        if (s.agent == agent) return s.fraction;
    return 0.0;
}

std::vector<std::string> LineConfiguration::agents_used() const {
    std::vector<std::string> out;
    for (const auto& ops : shares_) {
        // Larger shares first so a station's primary agent precedes helpers.
        std::vector<Share> sorted = ops;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const Share& a, const Share& b) { return a.fraction > b.fraction; });
        for (const auto& s : sorted)
            if (std::find(out.begin(), out.end(), s.agent) == out.end()) out.push_back(s.agent);
    }
    return out;
}

std::vector<std::size_t> LineConfiguration::ops_of(const std::string& agent) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < shares_.size(); ++j)
        if (fraction(agent, j) > 0.0) out.push_back(j);
    return out;
}

bool LineConfiguration::is_integral() const {
    for (const auto& ops : shares_)
        for (const auto& s : ops)
            if (std::abs(s.fraction - 1.0) > kFractionTolerance) return false;
    return true;
}

int LineConfiguration::buffer_capacity(std::size_t slot) const {
    auto it = buffers_.find(slot);
    return it == buffers_.end() ? default_buffer_ : it->second;
}

void LineConfiguration::set_buffer_capacity(std::size_t slot, int capacity) {
    if (capacity < 1) throw Error(ErrorKind::InvalidArgument, "buffer capacity must be >= 1");
    buffers_[slot] = capacity;
}

void LineConfiguration::set_default_buffer_capacity(int capacity) {
    if (capacity < 1) throw Error(ErrorKind::InvalidArgument, "buffer capacity must be >= 1");
    default_buffer_ = capacity;
}

std::optional<std::size_t> StationView::station_of_op(std::size_t op) const {
    for (std::size_t s = 0; s < stations.size(); ++s)
        if (op >= stations[s].first_op && op <= stations[s].last_op) return s;
    return std::nullopt;
}

std::map<std::string, double> expected_station_times(const LineConfiguration& c,
                                                     const CapabilityGraph& g) {
    std::map<std::string, double> out;
    for (std::size_t j = 0; j < c.size(); ++j) {
        for (const auto& s : c.shares(j)) {
            const TimeModel* m = g.find_time_model(s.agent, c.operations()[j]);
            if (!m) throw Error(ErrorKind::MissingTimeModel, s.agent + "/" + c.operations()[j]);
            out[s.agent] += m->expected() * s.fraction;
        }
    }
    return out;
}

double bottleneck_time(const LineConfiguration& c, const CapabilityGraph& g) {
    double worst = 0.0;
    for (const auto& [agent, t] : expected_station_times(c, g)) worst = std::max(worst, t);
    return worst;
}

StationView derive_stations(const LineConfiguration& c) {
    const auto order = c.agents_used();
    auto rank = [&](const std::string& a) {
        return std::find(order.begin(), order.end(), a) - order.begin();
    };
    StationView view;
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto& shares = c.shares(j);
        const Share* owner = nullptr;
        for (const auto& s : shares) {
            if (s.fraction + kFractionTolerance < 0.5) continue;
            if (!owner || s.fraction > owner->fraction + kFractionTolerance ||
                (std::abs(s.fraction - owner->fraction) <= kFractionTolerance &&
                 rank(s.agent) < rank(owner->agent)))
                owner = &s;
        }
        if (!owner)
            throw Error(ErrorKind::AmbiguousOwnership,
                        "no agent holds at least half of operation " + c.operations()[j]);
        if (view.stations.empty() || view.stations.back().agent != owner->agent) {
            view.stations.push_back({owner->agent, j, j, {}});
        } else {
            view.stations.back().last_op = j;
        }
        for (const auto& s : shares)
            if (&s != owner) view.stations.back().shared.push_back({j, s.agent, s.fraction});
    }
    for (std::size_t slot = 0; slot + 1 < view.stations.size(); ++slot)
        view.buffer_capacities.push_back(c.buffer_capacity(slot));
    return view;
}

std::vector<Violation> validate(const LineConfiguration& c, const CapabilityGraph& g) {
    std::vector<Violation> out;
    const auto graph_ops = g.operation_names();
    if (graph_ops != c.operations())
        out.push_back({"operation sequence differs from the graph's operation order", {}, {}});
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto& op = c.operations()[j];
        const bool op_known = g.contains(EntityId::operation(op));
        if (!op_known) out.push_back({"unknown operation " + op, op, {}});
        double sum = 0.0;
        for (const auto& s : c.shares(j)) {
            sum += s.fraction;
            if (s.fraction < -kFractionTolerance || s.fraction > 1.0 + kFractionTolerance)
                out.push_back({"fraction out of [0,1] for " + s.agent + " on " + op, op, s.agent});
            if (!g.contains(EntityId::agent(s.agent))) {
                out.push_back({"unknown agent " + s.agent, op, s.agent});
                continue;
            }
            if (op_known && !g.has_all_needs(EntityId::agent(s.agent), EntityId::operation(op)))
                out.push_back({s.agent + " lacks the capability for " + op, op, s.agent});
            else if (op_known && !g.find_time_model(s.agent, op))
                out.push_back({"no time model for " + s.agent + " on " + op, op, s.agent});
            const bool fractional = std::abs(s.fraction - 1.0) > kFractionTolerance;
            if (fractional && !c.fractional_scope().count(j))
                out.push_back({"fractional share outside the reconfiguration scope: " + s.agent +
                                   " on " + op,
                               op, s.agent});
        }
        if (std::abs(sum - 1.0) > kFractionTolerance)
            out.push_back({"fractions of " + op + " sum to " + std::to_string(sum), op, {}});
    }
    return out;
}

double adjustment(const LineConfiguration& c, const LineConfiguration& original) {
    if (c.operations() != original.operations())
        throw Error(ErrorKind::InvalidArgument, "configurations cover different operations");
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        std::set<std::string> agents;
        for (const auto& s : c.shares(j)) agents.insert(s.agent);
        for (const auto& s : original.shares(j)) agents.insert(s.agent);
        for (const auto& a : agents) total += std::abs(c.fraction(a, j) - original.fraction(a, j));
    }
    return total;
}

LineConfiguration parse_configuration(std::string_view json_text) {
    using detail::json;
    const json doc = detail::parse_json_text(json_text, "configuration");
    detail::check_keys(doc, {"operations", "assignment", "buffers", "default_buffer", "scoped_ops"},
                       "configuration");
    LineConfiguration c(detail::get_field<std::vector<std::string>>(doc, "operations", "configuration"));
    const auto assignment = detail::get_field<json>(doc, "assignment", "configuration");
    if (!assignment.is_array())
        throw Error(ErrorKind::Parse, "configuration: 'assignment' must be a list");
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const std::string where = "configuration.assignment[" + std::to_string(i) + "]";
        const auto& a = assignment[i];
        detail::check_keys(a, {"agent", "op", "fraction"}, where);
        const auto op = detail::get_field<std::string>(a, "op", where);
        auto j = c.op_index(op);
        if (!j) throw Error(ErrorKind::Parse, where + ": operation '" + op + "' not in 'operations'");
        c.assign(*j, detail::get_field<std::string>(a, "agent", where),
                 detail::get_field<double>(a, "fraction", where));
    }
    if (doc.contains("default_buffer"))
        c.set_default_buffer_capacity(detail::get_field<int>(doc, "default_buffer", "configuration"));
    if (doc.contains("buffers")) {
        const auto& buffers = doc.at("buffers");
        for (std::size_t i = 0; i < buffers.size(); ++i) {
            const std::string where = "configuration.buffers[" + std::to_string(i) + "]";
            detail::check_keys(buffers[i], {"after_station_index", "capacity"}, where);
            const auto cap = detail::get_field<int>(buffers[i], "capacity", where);
            if (cap < 1) throw Error(ErrorKind::Parse, where + ": capacity must be >= 1");
            c.set_buffer_capacity(detail::get_field<std::size_t>(buffers[i], "after_station_index", where),
                                  cap);
        }
    }
    if (doc.contains("scoped_ops")) {
        std::set<std::size_t> scope;
        for (const auto& op : detail::get_field<std::vector<std::string>>(doc, "scoped_ops", "configuration")) {
            auto j = c.op_index(op);
            if (!j) throw Error(ErrorKind::Parse, "configuration.scoped_ops: unknown operation " + op);
            scope.insert(*j);
        }
        c.set_fractional_scope(std::move(scope));
    }
    return c;
}

LineConfiguration load_configuration(const std::filesystem::path& path) {
    return parse_configuration(detail::read_text_file(path));
}

std::string configuration_to_json(const LineConfiguration& c) {
    using detail::json;
    json doc;
    doc["operations"] = c.operations();
    doc["assignment"] = json::array();
    for (std::size_t j = 0; j < c.size(); ++j)
        for (const auto& s : c.shares(j))
            doc["assignment"].push_back({{"agent", s.agent}, {"op", c.operations()[j]}, {"fraction", s.fraction}});
    if (c.default_buffer_capacity() != 1) doc["default_buffer"] = c.default_buffer_capacity();
    if (!c.buffer_overrides().empty()) {
        doc["buffers"] = json::array();
        for (const auto& [slot, cap] : c.buffer_overrides())
            doc["buffers"].push_back({{"after_station_index", slot}, {"capacity", cap}});
    }
    if (!c.fractional_scope().empty()) {
        std::vector<std::string> scope;
        for (auto j : c.fractional_scope()) scope.push_back(c.operations()[j]);
        doc["scoped_ops"] = scope;
    }
    return doc.dump(1) + "\n";
}

void save_configuration(const LineConfiguration& c, const std::filesystem::path& path) {
    detail::write_text_file(path, configuration_to_json(c));
}

}  // namespace linereconf
