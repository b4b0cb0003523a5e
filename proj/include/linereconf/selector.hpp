#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linereconf/optimizer.hpp"
#include "linereconf/simulator.hpp"

namespace linereconf {

enum class SelectionKey { Throughput, Agents, Adjustment };

std::string_view to_string(SelectionKey k);
SelectionKey selection_key_from_string(std::string_view s);

struct SelectionPolicy {
    std::optional<double> min_throughput;
    std::optional<int> max_agents;
    // Throughput is compared descending, the others ascending.
    std::vector<SelectionKey> order{SelectionKey::Throughput, SelectionKey::Agents, SelectionKey::Adjustment};

    void check() const;
};

// What the selector needs to know about one simulated plan.
struct Candidate {
    std::string label;
    int agents = 0;
    double adjustment = 0.0;
    double bottleneck = 0.0;
    double throughput = 0.0;
    double throughput_se = 0.0;  // standard error of the throughput mean; 0 for one run
};

Candidate make_candidate(std::string label, const Solution& s, const SimReport& r);
Candidate make_candidate(std::string label, const Solution& s, const Replication& r);

struct Exclusion {
    std::size_t index = 0;
    std::vector<std::string> reasons;
};

struct Selection {
    std::size_t chosen = 0;
    std::vector<std::size_t> ranking;  // feasible candidates, best first
    std::vector<Exclusion> exclusions;
};

// Drops candidates that violate a threshold and ranks the rest
// lexicographically by policy.order. Throughputs within their combined
// standard error count as equal. Remaining ties go to the lower index.
Selection select(const std::vector<Candidate>& candidates, const SelectionPolicy& policy);

SelectionPolicy parse_policy(std::string_view json_text);
std::string selection_to_json(const Selection& s, const std::vector<Candidate>& candidates);

}  // namespace linereconf
