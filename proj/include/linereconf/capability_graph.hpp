#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "linereconf/time_model.hpp"

namespace linereconf {

enum class EntityKind { Agent, Operation, Station, Capability, Resource, Line };
enum class Predicate { Has, Needs, Contains, Performs, Precedes };

std::string_view to_string(EntityKind kind);
std::string_view to_string(Predicate p);
EntityKind entity_kind_from_string(std::string_view s);
Predicate predicate_from_string(std::string_view s);

struct EntityId {
    EntityKind kind = EntityKind::Agent;
    std::string name;

    static EntityId agent(std::string n) { return {EntityKind::Agent, std::move(n)}; }
    static EntityId operation(std::string n) { return {EntityKind::Operation, std::move(n)}; }
    static EntityId station(std::string n) { return {EntityKind::Station, std::move(n)}; }
    static EntityId capability(std::string n) { return {EntityKind::Capability, std::move(n)}; }
    static EntityId resource(std::string n) { return {EntityKind::Resource, std::move(n)}; }

    // "Kind:name", the encoding used in graph files.
    std::string encoded() const;
    static EntityId decode(std::string_view s);

    friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

struct Triple {
    EntityId subject;
    Predicate predicate = Predicate::Has;
    EntityId object;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// The system model: agents, operations, capabilities, resources and
/// stations linked by triples, plus per-(agent, operation) time models.
///
/// Operations are sequenced by declaration order. A graph value is never
/// mutated after construction by callers that share it; the update
/// functions below return a new graph.
class CapabilityGraph {
public:
    // Builder interface, used by the loader and by tests.
    void add_entity(EntityId id, std::optional<std::string> type = std::nullopt);
    void add_triple(Triple t);
    void set_time_model(const std::string& agent, const std::string& op, TimeModel m);

    // Throws Consistency if a triple violates predicate domain/range or
    // a time model is attached to an (agent, op) pair the agent cannot do.
    void check_consistency() const;

    bool contains(const EntityId& id) const { return index_.count(id) != 0; }
    const std::vector<EntityId>& entities() const { return entities_; }
    const std::vector<Triple>& triples() const { return triples_; }
    const std::map<std::pair<std::string, std::string>, TimeModel>& time_models() const {
        return time_models_;
    }

    std::vector<EntityId> entities_of(EntityKind kind) const;
    std::vector<std::string> agent_names() const;
    std::vector<std::string> operation_names() const;
    std::optional<std::string> entity_type(const EntityId& id) const;
    std::string agent_type(const std::string& agent) const;

    // Wildcard pattern query over stored triples.
    std::vector<Triple> match(const std::optional<EntityId>& subject,
                              std::optional<Predicate> predicate,
                              const std::optional<EntityId>& object) const;

    // Direct `has` objects plus one hop of transfer through `contains`.
    std::vector<EntityId> derived_has(const EntityId& subject) const;
    std::vector<EntityId> needs_of(const EntityId& op) const;
    bool has_all_needs(const EntityId& subject, const EntityId& op) const;

    std::vector<EntityId> achievable_operations(const EntityId& agent) const;
    std::vector<EntityId> capable_agents(const EntityId& op) const;
    const TimeModel& operation_time(const EntityId& agent, const EntityId& op) const;
    const TimeModel* find_time_model(const std::string& agent, const std::string& op) const;

    friend bool operator==(const CapabilityGraph& a, const CapabilityGraph& b);

private:
    void require_entity(const EntityId& id) const;

    std::vector<EntityId> entities_;
    std::map<EntityId, std::size_t> index_;
    std::map<EntityId, std::string> types_;
    std::vector<Triple> triples_;
    std::map<std::pair<std::string, std::string>, TimeModel> time_models_;
};

CapabilityGraph update_time_model(const CapabilityGraph& g, const EntityId& agent,
                                  const EntityId& op, TimeModel m);
CapabilityGraph remove_capability(const CapabilityGraph& g, const EntityId& agent,
                                  const EntityId& capability);

CapabilityGraph parse_graph(std::string_view json_text);
CapabilityGraph load_graph(const std::filesystem::path& path);
std::string graph_to_json(const CapabilityGraph& g);
void save_graph(const CapabilityGraph& g, const std::filesystem::path& path);

}  // namespace linereconf
