#include "linereconf/capability_graph.hpp"

#include <algorithm>
#include <set>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

std::string_view to_string(EntityKind kind) {
    switch (kind) {
    case EntityKind::Agent: return "Agent";
    case EntityKind::Operation: return "Operation";
    case EntityKind::Station: return "Station";
    case EntityKind::Capability: return "Capability";
    case EntityKind::Resource: return "Resource";
    case EntityKind::Line: return "Line";
    }
    return "Agent";
}

std::string_view to_string(Predicate p) {
    switch (p) {
    case Predicate::Has: return "has";
    case Predicate::Needs: return "needs";
    case Predicate::Contains: return "contains";
    case Predicate::Performs: return "performs";
    case Predicate::Precedes: return "precedes";
    }
    return "has";
}

EntityKind entity_kind_from_string(std::string_view s) {
    for (auto k : {EntityKind::Agent, EntityKind::Operation, EntityKind::Station,
                   EntityKind::Capability, EntityKind::Resource, EntityKind::Line}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorKind::Parse, "unknown entity kind '" + std::string(s) + "'");
}

Predicate predicate_from_string(std::string_view s) {
    for (auto p : {Predicate::Has, Predicate::Needs, Predicate::Contains, Predicate::Performs,
                   Predicate::Precedes}) {
        if (to_string(p) == s) return p;
    }
    throw Error(ErrorKind::Parse, "unknown predicate '" + std::string(s) + "'");
}

std::string EntityId::encoded() const { return std::string(to_string(kind)) + ":" + name; }

EntityId EntityId::decode(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos || colon + 1 == s.size())
        throw Error(ErrorKind::Parse, "expected 'Kind:name', got '" + std::string(s) + "'");
    return {entity_kind_from_string(s.substr(0, colon)), std::string(s.substr(colon + 1))};
}

void CapabilityGraph::add_entity(EntityId id, std::optional<std::string> type) {
    if (id.name.empty()) throw Error(ErrorKind::Consistency, "entity name must be non-empty");
    if (index_.count(id))
        throw Error(ErrorKind::Consistency, "duplicate entity " + id.encoded());
    index_.emplace(id, entities_.size());
    if (type) types_[id] = *type;
    entities_.push_back(std::move(id));
}

void CapabilityGraph::add_triple(Triple t) {
    require_entity(t.subject);
    require_entity(t.object);
    if (std::find(triples_.begin(), triples_.end(), t) == triples_.end())
        triples_.push_back(std::move(t));
}

void CapabilityGraph::set_time_model(const std::string& agent, const std::string& op,
                                     TimeModel m) {
    require_entity(EntityId::agent(agent));
    require_entity(EntityId::operation(op));
    time_models_.insert_or_assign({agent, op}, std::move(m));
}

void CapabilityGraph::require_entity(const EntityId& id) const {
    if (!index_.count(id)) throw Error(ErrorKind::UnknownEntity, id.encoded());
}

void CapabilityGraph::check_consistency() const {
    auto describe = [](const Triple& t) {
        return t.subject.encoded() + " " + std::string(to_string(t.predicate)) + " " +
               t.object.encoded();
    };
    using K = EntityKind;
    for (const auto& t : triples_) {
        const K s = t.subject.kind;
        const K o = t.object.kind;
        bool ok = false;
        switch (t.predicate) {
        case Predicate::Has:
            ok = (s == K::Agent || s == K::Station || s == K::Line) &&
                 (o == K::Capability || o == K::Resource);
            break;
        case Predicate::Needs:
            ok = s == K::Operation && (o == K::Capability || o == K::Resource);
            break;
        case Predicate::Contains:
            ok = (s == K::Station || s == K::Line) &&
                 (o == K::Agent || o == K::Resource || o == K::Station);
            break;
        case Predicate::Performs:
            ok = (s == K::Agent || s == K::Station) && o == K::Operation;
            break;
        case Predicate::Precedes:
            ok = s == K::Operation && o == K::Operation &&
                 index_.at(t.subject) < index_.at(t.object);
            break;
        }
        if (!ok) throw Error(ErrorKind::Consistency, "invalid triple: " + describe(t));
    }
    for (const auto& [key, model] : time_models_) {
        const auto agent = EntityId::agent(key.first);
        const auto op = EntityId::operation(key.second);
        if (!has_all_needs(agent, op))
            throw Error(ErrorKind::Consistency, "time model for " + key.first + "/" + key.second +
                                                    " but the agent lacks a need of the operation");
        if (!(model.expected() > 0.0) || !std::isfinite(model.expected()))
            throw Error(ErrorKind::Consistency, "non-positive expected time for " + key.first +
                                                    "/" + key.second);
    }
}

std::vector<EntityId> CapabilityGraph::entities_of(EntityKind kind) const {
    std::vector<EntityId> out;
    for (const auto& e : entities_)
        if (e.kind == kind) out.push_back(e);
    return out;
}

std::vector<std::string> CapabilityGraph::agent_names() const {
    std::vector<std::string> out;
    for (const auto& e : entities_)
        if (e.kind == EntityKind::Agent) out.push_back(e.name);
    return out;
}

std::vector<std::string> CapabilityGraph::operation_names() const {
    std::vector<std::string> out;
    for (const auto& e : entities_)
        if (e.kind == EntityKind::Operation) out.push_back(e.name);
    return out;
}

std::optional<std::string> CapabilityGraph::entity_type(const EntityId& id) const {
    auto it = types_.find(id);
    if (it == types_.end()) return std::nullopt;
    return it->second;
}

std::string CapabilityGraph::agent_type(const std::string& agent) const {
    auto t = entity_type(EntityId::agent(agent));
    return t ? *t : agent;
}

std::vector<Triple> CapabilityGraph::match(const std::optional<EntityId>& subject,
                                           std::optional<Predicate> predicate,
                                           const std::optional<EntityId>& object) const {
    std::vector<Triple> out;
    for (const auto& t : triples_) {
        if (subject && t.subject != *subject) continue;
        if (predicate && t.predicate != *predicate) continue;
        if (object && t.object != *object) continue;
        out.push_back(t);
    }
    return out;
}

std::vector<EntityId> CapabilityGraph::derived_has(const EntityId& subject) const {
    require_entity(subject);
    std::set<EntityId> out;
    for (const auto& t : match(subject, Predicate::Has, std::nullopt)) out.insert(t.object);
    // One hop: a container has whatever its members have, and contained resources themselves.
    for (const auto& c : match(subject, Predicate::Contains, std::nullopt)) {
        if (c.object.kind == EntityKind::Resource) out.insert(c.object);
        for (const auto& t : match(c.object, Predicate::Has, std::nullopt)) out.insert(t.object);
    }
    return {out.begin(), out.end()};
}

std::vector<EntityId> CapabilityGraph::needs_of(const EntityId& op) const {
    std::vector<EntityId> out;
    for (const auto& t : match(op, Predicate::Needs, std::nullopt)) out.push_back(t.object);
    return out;
}

bool CapabilityGraph::has_all_needs(const EntityId& subject, const EntityId& op) const {
    require_entity(op);
    const auto have = derived_has(subject);
    for (const auto& need : needs_of(op))
        if (!std::binary_search(have.begin(), have.end(), need)) return false;
    return true;
}

std::vector<EntityId> CapabilityGraph::achievable_operations(const EntityId& agent) const {
    require_entity(agent);
    if (agent.kind != EntityKind::Agent)
        throw Error(ErrorKind::UnknownEntity, agent.encoded() + " is not an agent");
    std::vector<EntityId> out;
    for (const auto& e : entities_)
        if (e.kind == EntityKind::Operation && has_all_needs(agent, e)) out.push_back(e);
    return out;
}

std::vector<EntityId> CapabilityGraph::capable_agents(const EntityId& op) const {
    require_entity(op);
    if (op.kind != EntityKind::Operation)
        throw Error(ErrorKind::UnknownEntity, op.encoded() + " is not an operation");
    std::vector<EntityId> out;
    for (const auto& e : entities_)
        if (e.kind == EntityKind::Agent && has_all_needs(e, op)) out.push_back(e);
    return out;
}

const TimeModel* CapabilityGraph::find_time_model(const std::string& agent,
                                                  const std::string& op) const {
    auto it = time_models_.find({agent, op});
    return it == time_models_.end() ? nullptr : &it->second;
}

const TimeModel& CapabilityGraph::operation_time(const EntityId& agent, const EntityId& op) const {
    require_entity(agent);
    require_entity(op);
    if (!has_all_needs(agent, op))
        throw Error(ErrorKind::NoCapability, agent.name + " cannot perform " + op.name);
    const TimeModel* m = find_time_model(agent.name, op.name);
    if (!m) throw Error(ErrorKind::MissingTimeModel, agent.name + "/" + op.name);
    return *m;
}

bool operator==(const CapabilityGraph& a, const CapabilityGraph& b) {
    const std::set<Triple> ta(a.triples_.begin(), a.triples_.end());
    const std::set<Triple> tb(b.triples_.begin(), b.triples_.end());
    return a.entities_ == b.entities_ && a.types_ == b.types_ && ta == tb &&
           a.time_models_ == b.time_models_;
}

CapabilityGraph update_time_model(const CapabilityGraph& g, const EntityId& agent,
                                  const EntityId& op, TimeModel m) {
    if (!g.contains(agent)) throw Error(ErrorKind::UnknownEntity, agent.encoded());
    if (!g.contains(op)) throw Error(ErrorKind::UnknownEntity, op.encoded());
    CapabilityGraph out = g;
    out.set_time_model(agent.name, op.name, std::move(m));
    return out;
}

CapabilityGraph remove_capability(const CapabilityGraph& g, const EntityId& agent,
                                  const EntityId& capability) {
    if (!g.contains(agent)) throw Error(ErrorKind::UnknownEntity, agent.encoded());
    if (!g.contains(capability)) throw Error(ErrorKind::UnknownEntity, capability.encoded());
    CapabilityGraph out;
    for (const auto& e : g.entities()) out.add_entity(e, g.entity_type(e));
    const Triple removed{agent, Predicate::Has, capability};
    for (const auto& t : g.triples())
        if (t != removed) out.add_triple(t);
    // Time models for operations the agent can no longer do are dropped with the capability.
    for (const auto& [key, m] : g.time_models()) {
        if (key.first == agent.name &&
            !out.has_all_needs(agent, EntityId::operation(key.second)))
            continue;
        out.set_time_model(key.first, key.second, m);
    }
    return out;
}

namespace {

using detail::json;

TimeModel time_model_from_json(const json& j, const std::string& where) {
    detail::check_keys(j, {"agent", "op", "kind", "mean", "sd", "samples"}, where);
    const auto kind = time_model_kind_from_string(detail::get_field<std::string>(j, "kind", where));
    try {
        switch (kind) {
        case TimeModelKind::Constant:
            return TimeModel::constant(detail::get_field<double>(j, "mean", where));
        case TimeModelKind::TruncNormal:
            return TimeModel::trunc_normal(detail::get_field<double>(j, "mean", where),
                                           detail::get_field<double>(j, "sd", where));
        case TimeModelKind::LogNormal:
            return TimeModel::log_normal(detail::get_field<double>(j, "mean", where),
                                         detail::get_field<double>(j, "sd", where));
        case TimeModelKind::Empirical:
            return TimeModel::empirical(detail::get_field<std::vector<double>>(j, "samples", where));
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse) throw;
        throw Error(ErrorKind::Consistency, where + ": " + e.what());
    }
    throw Error(ErrorKind::Parse, where + ": bad time model");
}

json time_model_to_json(const std::string& agent, const std::string& op, const TimeModel& m) {
    json j{{"agent", agent}, {"op", op}, {"kind", std::string(to_string(m.kind()))}};
    switch (m.kind()) {
    case TimeModelKind::Constant: j["mean"] = m.mean_param(); break;
    case TimeModelKind::TruncNormal:
    case TimeModelKind::LogNormal:
        j["mean"] = m.mean_param();
        j["sd"] = m.sd_param();
        break;
    case TimeModelKind::Empirical: j["samples"] = m.samples(); break;
    }
    return j;
}

}  // namespace

CapabilityGraph parse_graph(std::string_view json_text) {
    const json doc = detail::parse_json_text(json_text, "graph");
    detail::check_keys(doc, {"entities", "triples", "time_models"}, "graph");
    CapabilityGraph g;
    const auto entities = detail::get_field<json>(doc, "entities", "graph");
    if (!entities.is_array()) throw Error(ErrorKind::Parse, "graph: 'entities' must be a list");
    for (std::size_t i = 0; i < entities.size(); ++i) {
        const std::string where = "graph.entities[" + std::to_string(i) + "]";
        const auto& e = entities[i];
        detail::check_keys(e, {"kind", "name", "type"}, where);
        EntityId id{entity_kind_from_string(detail::get_field<std::string>(e, "kind", where)),
                    detail::get_field<std::string>(e, "name", where)};
        std::optional<std::string> type;
        if (e.contains("type")) type = detail::get_field<std::string>(e, "type", where);
        g.add_entity(std::move(id), std::move(type));
    }
    if (doc.contains("triples")) {
        const auto& triples = doc.at("triples");
        if (!triples.is_array()) throw Error(ErrorKind::Parse, "graph: 'triples' must be a list");
        for (std::size_t i = 0; i < triples.size(); ++i) {
            const std::string where = "graph.triples[" + std::to_string(i) + "]";
            const auto& t = triples[i];
            if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string() ||
                !t[2].is_string())
                throw Error(ErrorKind::Parse, where + ": expected [subject, predicate, object]");
            Triple triple{EntityId::decode(t[0].get<std::string>()),
                          predicate_from_string(t[1].get<std::string>()),
                          EntityId::decode(t[2].get<std::string>())};
            try {
                g.add_triple(triple);
            } catch (const Error& e) {
                throw Error(ErrorKind::Consistency, where + ": dangling reference (" + e.what() + ")");
            }
        }
    }
    if (doc.contains("time_models")) {
        const auto& tms = doc.at("time_models");
        if (!tms.is_array()) throw Error(ErrorKind::Parse, "graph: 'time_models' must be a list");
        for (std::size_t i = 0; i < tms.size(); ++i) {
            const std::string where = "graph.time_models[" + std::to_string(i) + "]";
            const auto agent = detail::get_field<std::string>(tms[i], "agent", where);
            const auto op = detail::get_field<std::string>(tms[i], "op", where);
            auto model = time_model_from_json(tms[i], where);
            try {
                g.set_time_model(agent, op, std::move(model));
            } catch (const Error& e) {
                throw Error(ErrorKind::Consistency, where + ": dangling reference (" + e.what() + ")");
            }
        }
    }
    g.check_consistency();
    return g;
}

CapabilityGraph load_graph(const std::filesystem::path& path) {
    return parse_graph(detail::read_text_file(path));
}

std::string graph_to_json(const CapabilityGraph& g) {
    json doc;
    doc["entities"] = json::array();
    for (const auto& e : g.entities()) {
        json je{{"kind", std::string(to_string(e.kind))}, {"name", e.name}};
        if (auto t = g.entity_type(e)) je["type"] = *t;
        doc["entities"].push_back(std::move(je));
    }
    doc["triples"] = json::array();
    for (const auto& t : g.triples())
        doc["triples"].push_back(
            json::array({t.subject.encoded(), std::string(to_string(t.predicate)), t.object.encoded()}));
    doc["time_models"] = json::array();
    for (const auto& [key, m] : g.time_models())
        doc["time_models"].push_back(time_model_to_json(key.first, key.second, m));
    return doc.dump(1) + "\n";
}

void save_graph(const CapabilityGraph& g, const std::filesystem::path& path) {
    detail::write_text_file(path, graph_to_json(g));
}

}  // namespace linereconf
