#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "linereconf/capability_graph.hpp"

namespace linereconf {

inline constexpr double kFractionTolerance = 1e-9;

struct Share {
    std::string agent;
    double fraction = 0.0;

    friend bool operator==(const Share&, const Share&) = default;
};

/// Ordered operations plus a (possibly fractional) operation -> agent
/// assignment. shares[j] lists every agent with a positive fraction of
/// operation j; fractions of one operation sum to 1.
class LineConfiguration {
public:
    LineConfiguration() = default;
    explicit LineConfiguration(std::vector<std::string> operations);

    const std::vector<std::string>& operations() const { return operations_; }
    std::size_t size() const { return operations_.size(); }
    std::optional<std::size_t> op_index(std::string_view op) const;

    // Replaces any existing fraction for (agent, op); a zero fraction removes it.
    void assign(std::size_t op, const std::string& agent, double fraction);
    void assign(std::string_view op, const std::string& agent, double fraction);
    void clear(std::size_t op);

    const std::vector<Share>& shares(std::size_t op) const { return shares_.at(op); }
    double fraction(const std::string& agent, std::size_t op) const;

    // Agents with any positive fraction, in order of first appearance along the line.
    std::vector<std::string> agents_used() const;
    std::vector<std::size_t> ops_of(const std::string& agent) const;
    bool is_integral() const;

    // Operations on which fractional entries are permitted (reconfiguration scope).
    const std::set<std::size_t>& fractional_scope() const { return fractional_scope_; }
    void set_fractional_scope(std::set<std::size_t> scope) { fractional_scope_ = std::move(scope); }

    // Capacity of the buffer after station `slot` (0-based); default 1.
    int buffer_capacity(std::size_t slot) const;
    const std::map<std::size_t, int>& buffer_overrides() const { return buffers_; }
    void set_buffer_capacity(std::size_t slot, int capacity);
    int default_buffer_capacity() const { return default_buffer_; }
    void set_default_buffer_capacity(int capacity);

    friend bool operator==(const LineConfiguration&, const LineConfiguration&) = default;

private:
    std::vector<std::string> operations_;
    std::vector<std::vector<Share>> shares_;
    std::set<std::size_t> fractional_scope_;
    std::map<std::size_t, int> buffers_;
    int default_buffer_ = 1;
};

struct SharedFraction {
    std::size_t op = 0;
    std::string agent;
    double fraction = 0.0;
};

struct StationInfo {
    std::string agent;         // primary (majority) agent
    std::size_t first_op = 0;  // inclusive operation index range
    std::size_t last_op = 0;
    std::vector<SharedFraction> shared;  // minority shares of this station's ops
};

struct StationView {
    std::vector<StationInfo> stations;
    std::vector<int> buffer_capacities;  // one per inter-station slot

    std::optional<std::size_t> station_of_op(std::size_t op) const;
};

struct DisturbanceScenario {
    std::string agent;
    double time_multiplier = 1.0;
    std::vector<std::string> affected_ops;  // empty: every op of the agent
    double onset = 0.0;
};

// Expected busy time per agent: sum over ops of E(T_kj) * fraction.
std::map<std::string, double> expected_station_times(const LineConfiguration& c,
                                                     const CapabilityGraph& g);
double bottleneck_time(const LineConfiguration& c, const CapabilityGraph& g);

// Maximal runs of operations with the same majority owner. Exact half/half
// splits go to the agent that appears first along the line; an operation
// without any share >= 0.5 throws AmbiguousOwnership.
StationView derive_stations(const LineConfiguration& c);

struct Violation {
    std::string message;
    std::optional<std::string> op;
    std::optional<std::string> agent;
};

std::vector<Violation> validate(const LineConfiguration& c, const CapabilityGraph& g);

// Sum over (agent, op) of |fraction - original fraction|.
double adjustment(const LineConfiguration& c, const LineConfiguration& original);

LineConfiguration parse_configuration(std::string_view json_text);
LineConfiguration load_configuration(const std::filesystem::path& path);
std::string configuration_to_json(const LineConfiguration& c);
void save_configuration(const LineConfiguration& c, const std::filesystem::path& path);

}  // namespace linereconf
