#include "linereconf/selector.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "linereconf/error.hpp"

namespace linereconf {

std::string_view to_string(SelectionKey k) {
    switch (k) {
    case SelectionKey::Throughput: return "throughput";
    case SelectionKey::Agents: return "agents";
    case SelectionKey::Adjustment: return "adjustment";
    }
    return "?";
}

SelectionKey selection_key_from_string(std::string_view s) {
    for (const auto k : {SelectionKey::Throughput, SelectionKey::Agents, SelectionKey::Adjustment})
        if (to_string(k) == s) return k;
    throw Error(ErrorKind::Parse, "unknown selection key '" + std::string(s) + "'");
}

void SelectionPolicy::check() const {
    if (order.empty()) throw Error(ErrorKind::InvalidArgument, "selection order must not be empty");
    std::set<SelectionKey> seen(order.begin(), order.end());
    if (seen.size() != order.size()) throw Error(ErrorKind::InvalidArgument, "selection order repeats a key");
    if (max_agents && *max_agents < 0) throw Error(ErrorKind::InvalidArgument, "max_agents must be >= 0");
}

Candidate make_candidate(std::string label, const Solution& s, const SimReport& r) {
    return {std::move(label), s.agents_used, s.adjustment, r.bottleneck, static_cast<double>(r.throughput), 0.0};
}

Candidate make_candidate(std::string label, const Solution& s, const Replication& r) {
    const double n = static_cast<double>(r.runs.size());
    return {std::move(label), s.agents_used, s.adjustment, r.bottleneck.mean, r.throughput.mean,
            r.throughput.sd / std::sqrt(n)};
}

namespace {

using Group = std::vector<std::size_t>;

void rank(const std::vector<Candidate>& c, Group group, std::vector<SelectionKey>::const_iterator key,
          std::vector<SelectionKey>::const_iterator end, std::vector<std::size_t>& out) {
    if (key == end || group.size() < 2) {
        std::sort(group.begin(), group.end());
        out.insert(out.end(), group.begin(), group.end());
        return;
    }
    if (*key == SelectionKey::Throughput) {
        // Peel off tiers: the best remaining candidate and everything within
        // the combined standard error of it.
        std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
            if (c[a].throughput != c[b].throughput) return c[a].throughput > c[b].throughput;
            return c[a].throughput_se < c[b].throughput_se;
        });
        while (!group.empty()) {
            const auto& lead = c[group.front()];
            Group tier, rest;
            for (const auto i : group) {
                const double se = std::hypot(lead.throughput_se, c[i].throughput_se);
                (lead.throughput - c[i].throughput <= se ? tier : rest).push_back(i);
            }
            rank(c, tier, key + 1, end, out);
            group = rest;
        }
        return;
    }
    auto value = [&](std::size_t i) {
        return *key == SelectionKey::Agents ? static_cast<double>(c[i].agents) : c[i].adjustment;
    };
    std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    for (std::size_t lo = 0; lo < group.size();) {
        std::size_t hi = lo + 1;
        while (hi < group.size() && std::abs(value(group[hi]) - value(group[lo])) <= 1e-9) ++hi;
        rank(c, Group(group.begin() + lo, group.begin() + hi), key + 1, end, out);
        lo = hi;
    }
}

}  // namespace

Selection select(const std::vector<Candidate>& candidates, const SelectionPolicy& policy) {
    policy.check();
    if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidates to select from");
    Selection s;
    Group feasible;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        Exclusion ex{i, {}};
        if (policy.min_throughput && c.throughput < *policy.min_throughput)
            ex.reasons.push_back("throughput " + std::to_string(c.throughput) + " below minimum " +
                                 std::to_string(*policy.min_throughput));
        if (policy.max_agents && c.agents > *policy.max_agents)
            ex.reasons.push_back("uses " + std::to_string(c.agents) + " agents, more than " +
                                 std::to_string(*policy.max_agents));
        if (ex.reasons.empty()) feasible.push_back(i);
        else s.exclusions.push_back(std::move(ex));
    }
    if (feasible.empty()) {
        std::string msg = "every candidate violates a threshold";
        for (const auto& ex : s.exclusions) {
            msg += "; " + candidates[ex.index].label + ":";
            for (const auto& r : ex.reasons) msg += " " + r;
        }
        throw Error(ErrorKind::NoFeasibleCandidate, msg);
    }
    rank(candidates, feasible, policy.order.begin(), policy.order.end(), s.ranking);
    s.chosen = s.ranking.front();
    return s;
}

SelectionPolicy parse_policy(std::string_view json_text) {
    using detail::json;
    const json doc = detail::parse_json_text(json_text, "policy");
    detail::check_keys(doc, {"min_throughput", "max_agents", "order"}, "policy");
    SelectionPolicy p;
    if (doc.contains("min_throughput") && !doc.at("min_throughput").is_null())
        p.min_throughput = detail::get_field<double>(doc, "min_throughput", "policy");
    if (doc.contains("max_agents") && !doc.at("max_agents").is_null())
        p.max_agents = detail::get_field<int>(doc, "max_agents", "policy");
    if (doc.contains("order")) {
        p.order.clear();
        for (const auto& k : detail::get_field<std::vector<std::string>>(doc, "order", "policy"))
            p.order.push_back(selection_key_from_string(k));
    }
    p.check();
    return p;
}

std::string selection_to_json(const Selection& s, const std::vector<Candidate>& candidates) {
    using detail::json;
    json doc;
    doc["chosen"] = candidates.at(s.chosen).label;
    doc["chosen_index"] = s.chosen;
    doc["ranking"] = json::array();
    for (const auto i : s.ranking) {
        const auto& c = candidates[i];
        doc["ranking"].push_back({{"index", i},
                                  {"label", c.label},
                                  {"agents", c.agents},
                                  {"bottleneck_s", c.bottleneck},
                                  {"throughput", c.throughput},
                                  {"throughput_se", c.throughput_se},
                                  {"adjustment", c.adjustment}});
    }
    doc["exclusions"] = json::array();
    for (const auto& ex : s.exclusions)
        doc["exclusions"].push_back({{"index", ex.index}, {"label", candidates[ex.index].label}, {"reasons", ex.reasons}});
    return doc.dump(1) + "\n";
}

}  // namespace linereconf
