#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "linereconf/error.hpp"
#include "linereconf/selector.hpp"

using namespace linereconf;

namespace {

Candidate cand(std::string label, int agents, double throughput, double se = 0.0, double adjustment = 0.0) {
    return {std::move(label), agents, adjustment, 43.9, throughput, se};
}

// Indistinguishable under every key, so only the candidate index separates them.
bool final_tie(const Candidate& a, const Candidate& b) {
    return a.agents == b.agents && a.adjustment == b.adjustment &&
           std::abs(a.throughput - b.throughput) <= std::hypot(a.throughput_se, b.throughput_se);
}

}  // namespace

TEST_CASE("a single feasible candidate is chosen") {
    const auto s = select({cand("only", 20, 1295)}, {});
    CHECK(s.chosen == 0);
    CHECK(s.ranking == std::vector<std::size_t>{0});
}

TEST_CASE("throughput-first policy prefers the configuration switch in the +200% pair") {
    const std::vector<Candidate> c{cand("plan_switch", 20, 1161), cand("configuration_switch", 21, 1275)};
    CHECK(select(c, {}).chosen == 1);
    SelectionPolicy agents_first;
    agents_first.order = {SelectionKey::Agents, SelectionKey::Throughput};
    CHECK(select(c, agents_first).chosen == 0);
}

TEST_CASE("equal throughput goes to the plan with fewer agents") {
    CHECK(select({cand("more", 21, 1292), cand("fewer", 20, 1292)}, {}).chosen == 1);
    // Within the combined standard error the throughputs count as equal.
    CHECK(select({cand("more", 21, 1295, 6.0), cand("fewer", 20, 1290, 6.0)}, {}).chosen == 1);
    // Outside it the higher throughput wins.
    CHECK(select({cand("more", 21, 1295, 1.0), cand("fewer", 20, 1290, 1.0)}, {}).chosen == 0);
}

TEST_CASE("adjustment breaks ties after agents") {
    const std::vector<Candidate> c{cand("big_change", 20, 1000, 0, 4.0), cand("small_change", 20, 1000, 0, 1.0)};
    CHECK(select(c, {}).chosen == 1);
    CHECK(select({cand("a", 20, 1000), cand("b", 20, 1000)}, {}).chosen == 0);
}

TEST_CASE("thresholds exclude candidates and report why") {
    SelectionPolicy p;
    p.min_throughput = 1200;
    p.max_agents = 20;
    const std::vector<Candidate> c{cand("slow", 20, 962), cand("big", 21, 1275), cand("ok", 20, 1292)};
    const auto s = select(c, p);
    CHECK(s.chosen == 2);
    REQUIRE(s.exclusions.size() == 2);
    CHECK(s.exclusions[0].index == 0);
    CHECK(s.exclusions[1].reasons.size() == 1);

    try {
        select({cand("slow", 20, 962), cand("big", 21, 1275)}, p);
        FAIL("expected NoFeasibleCandidate");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoFeasibleCandidate);
        const std::string msg = e.what();
        CHECK(msg.find("slow") != std::string::npos);
        CHECK(msg.find("big") != std::string::npos);
    }
}

TEST_CASE("shuffling candidates never changes the choice; the choice meets every threshold") {
    std::mt19937_64 rng(2);
    int checked = 0;
    for (int trial = 0; trial < 600; ++trial) {
        const std::size_t n = 2 + rng() % 6;
        std::vector<Candidate> c;
        for (std::size_t i = 0; i < n; ++i)
            c.push_back(cand("c" + std::to_string(i), 18 + static_cast<int>(rng() % 4),
                             1000.0 + static_cast<double>(rng() % 6) * 5.0, static_cast<double>(rng() % 3) * 2.0,
                             static_cast<double>(rng() % 3)));
        SelectionPolicy p;
        if (rng() % 2) p.max_agents = 20;
        if (rng() % 2) p.min_throughput = 1005.0;
        std::vector<SelectionKey> keys{SelectionKey::Throughput, SelectionKey::Agents, SelectionKey::Adjustment};
        std::shuffle(keys.begin(), keys.end(), rng);
        p.order = keys;
        Selection base;
        try {
            base = select(c, p);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoFeasibleCandidate);
            continue;
        }
        const auto& chosen = c[base.chosen];
        if (p.max_agents) CHECK(chosen.agents <= *p.max_agents);
        if (p.min_throughput) CHECK(chosen.throughput >= *p.min_throughput);
        auto shuffled = c;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto& other = shuffled[select(shuffled, p).chosen];
        if (other.label != chosen.label) CHECK(final_tie(other, chosen));
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("candidates from replications carry the standard error") {
    Replication r;
    r.runs.resize(4);
    r.throughput = {1290.0, 8.0};
    r.bottleneck = {43.9, 0.1};
    Solution s;
    s.agents_used = 20;
    s.adjustment = 2.0;
    const auto c = make_candidate("x", s, r);
    CHECK(c.throughput_se == doctest::Approx(4.0));
    CHECK(c.agents == 20);
    CHECK(c.adjustment == 2.0);
}

TEST_CASE("policy parsing and decision JSON") {
    const auto p = parse_policy(R"({"min_throughput": 1000, "order": ["agents", "throughput"]})");
    CHECK(p.min_throughput == std::optional<double>(1000.0));
    CHECK_FALSE(p.max_agents.has_value());
    CHECK(p.order == std::vector<SelectionKey>{SelectionKey::Agents, SelectionKey::Throughput});
    CHECK_THROWS_AS(parse_policy(R"({"order": []})"), Error);
    CHECK_THROWS_AS(parse_policy(R"({"order": ["agents", "agents"]})"), Error);
    CHECK_THROWS_AS(parse_policy(R"({"order": ["cost"]})"), Error);
    CHECK_THROWS_AS(parse_policy(R"({"budget": 3})"), Error);

    const std::vector<Candidate> c{cand("a", 21, 1000), cand("b", 20, 1000)};
    SelectionPolicy strict;
    strict.max_agents = 20;
    const auto doc = nlohmann::json::parse(selection_to_json(select(c, strict), c));
    CHECK(doc.at("chosen") == "b");
    CHECK(doc.at("ranking").size() == 1);
    CHECK(doc.at("exclusions").size() == 1);
}
