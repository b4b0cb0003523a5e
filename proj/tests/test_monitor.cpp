#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "linereconf/error.hpp"
#include "linereconf/monitor.hpp"

using namespace linereconf;
using fixtures::AgentSpec;

namespace {

// Agent A owns Op1 and Op2 (10 s each), B owns Op3 (30 s): bottleneck 30 s.
struct Setup {
    CapabilityGraph graph;
    LineConfiguration config;
};

Setup setup(const TimeModel& a_model = TimeModel::constant(10.0)) {
    const auto ops = fixtures::op_names(3);
    auto g = fixtures::make_graph(ops, {AgentSpec{"A", "T", {10.0, 10.0, std::nullopt}},
                                        AgentSpec{"B", "T", {std::nullopt, std::nullopt, 30.0}}});
    g = update_time_model(g, EntityId::agent("A"), EntityId::operation("Op1"), a_model);
    LineConfiguration c(ops);
    c.assign(0, "A", 1.0);
    c.assign(1, "A", 1.0);
    c.assign(2, "B", 1.0);
    return {g, c};
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("a stream sitting on the baseline mean never triggers") {
    for (const auto& model : {TimeModel::constant(43.9), TimeModel::trunc_normal(10.0, 1.0)}) {
        auto s = setup(model);
        Monitor m(s.graph, s.config);
        const double mu = model.expected();
        for (int i = 0; i < 1000; ++i) CHECK_FALSE(m.ingest("A", "Op1", mu).has_value());
        CHECK(m.stream("A", "Op1").windows_seen == 100);
    }
}

TEST_CASE("a 1.5x slow-down on a noisy baseline is caught within two windows") {
    const auto base = TimeModel::trunc_normal(10.0, 1.0);
    auto s = setup(base);
    const auto slow = base.scaled(1.5);
    std::mt19937_64 rng(4);
    Monitor m(s.graph, s.config);
    for (int i = 0; i < 200; ++i) m.ingest("A", "Op1", base.sample(rng));
    std::optional<DisturbanceEvent> e;
    int used = 0;
    while (!e && used < 2 * 10) {
        e = m.ingest("A", "Op1", slow.sample(rng));
        ++used;
    }
    REQUIRE(e.has_value());
    CHECK(e->multiplier == doctest::Approx(1.5).epsilon(0.1));
    CHECK(e->agent == "A");
    CHECK(e->ops == std::vector<std::string>{"Op1"});
}

TEST_CASE("a 3x shift on a constant baseline fires at the end of the window it starts in") {
    auto s = setup();
    Monitor m(s.graph, s.config);
    // Windows cover samples [0,10), [10,20), [20,30), ... With sigma0 = 0 the
    // threshold is mu0 itself, so one shifted sample pushes its window over.
    for (int i = 0; i < 25; ++i) CHECK_FALSE(m.ingest("A", "Op1", 10.0).has_value());
    for (int i = 25; i < 29; ++i) CHECK_FALSE(m.ingest("A", "Op1", 30.0).has_value());
    const auto e = m.ingest("A", "Op1", 30.0);
    REQUIRE(e.has_value());
    CHECK(e->onset_index == 20);
    CHECK(e->multiplier == doctest::Approx((5 * 10.0 + 5 * 30.0) / 10.0 / 10.0));
    // Next window is fully shifted.
    std::optional<DisturbanceEvent> next;
    for (int i = 0; i < 10; ++i) next = m.ingest("A", "Op1", 30.0);
    REQUIRE(next.has_value());
    CHECK(next->multiplier == doctest::Approx(3.0));
    CHECK(next->onset_index == 20);
}

TEST_CASE("persistence requires D consecutive breaching windows") {
    auto s = setup();
    Monitor m(s.graph, s.config, {3.0, 10, 3});
    int fired_at = -1;
    for (int i = 0; i < 40 && fired_at < 0; ++i)
        if (m.ingest("A", "Op1", 20.0)) fired_at = i;
    CHECK(fired_at == 29);
    CHECK(m.stream("A", "Op1").onset_index == std::optional<std::size_t>(0));
}

TEST_CASE("updated time models scale the baseline and keep its coefficient of variation") {
    auto s = setup();
    Monitor m(s.graph, s.config);
    CHECK(kind_of([&] { m.updated_model("A", "Op1"); }) == ErrorKind::InsufficientSamples);
    for (int i = 0; i < 10; ++i) m.ingest("A", "Op1", 15.0);
    const auto t = m.updated_model("A", "Op1");
    CHECK(t.kind() == TimeModelKind::Constant);
    CHECK(t.expected() == doctest::Approx(15.0));

    auto ln = setup(TimeModel::log_normal(20.0, 4.0));
    Monitor m2(ln.graph, ln.config);
    for (int i = 0; i < 10; ++i) m2.ingest("A", "Op1", 40.0);
    const auto u = m2.updated_model("A", "Op1");
    CHECK(u.kind() == TimeModelKind::LogNormal);
    CHECK(u.mean_param() == doctest::Approx(40.0));
    CHECK(u.sd_param() == doctest::Approx(8.0));
}

TEST_CASE("fitted multipliers from noisy 1.5x samples land within 5 percent") {
    const auto base = TimeModel::trunc_normal(20.0, 2.0);
    const auto slow = base.scaled(1.5);
    int good = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto s = setup(base);
        Monitor m(s.graph, s.config);
        std::mt19937_64 rng(1000 + trial);
        for (int i = 0; i < 40; ++i) m.ingest("A", "Op1", base.sample(rng));
        for (int i = 0; i < 50; ++i) m.ingest("A", "Op1", slow.sample(rng));
        const double fitted = m.updated_model("A", "Op1").expected() / base.expected();
        if (std::abs(fitted - 1.5) <= 0.05 * 1.5) ++good;
    }
    CHECK(good >= 90);
}

TEST_CASE("false-positive rates") {
    const MonitorThresholds strict{3.0, 10, 1};
    // A truncation at zero 10 sd below the mean is numerically a normal.
    const double rate = false_positive_rate(TimeModel::trunc_normal(100.0, 10.0), strict, 1000000, 3);
    CHECK(rate <= 0.005);
    CHECK(rate > 0.0);
    const double coin = false_positive_rate(TimeModel::trunc_normal(100.0, 10.0), {0.0, 10, 1}, 200000, 5);
    CHECK(coin == doctest::Approx(0.5).epsilon(0.04));
    CHECK(false_positive_rate(TimeModel::constant(5.0), {0.5, 10, 1}, 10000) == 0.0);
    CHECK_THROWS_AS(false_positive_rate(TimeModel::constant(5.0), strict, 50), Error);
}

TEST_CASE("step changes above the detection bound are caught within (D+1)W samples") {
    const double mu = 40.0, sd = 4.0;
    const std::size_t W = 10;
    const double k = 3.0;
    const double m_factor = 1.2;
    REQUIRE((m_factor - 1.0) * mu > 2.0 * k * sd / std::sqrt(static_cast<double>(W)));
    const auto base = TimeModel::trunc_normal(mu, sd);
    const auto slow = base.scaled(m_factor);
    for (const std::size_t D : {1u, 2u}) {
        int caught = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            auto s = setup(base);
            Monitor m(s.graph, s.config, {k, W, D});
            std::mt19937_64 rng(trial * 7919 + D);
            const std::size_t pre = 20 + rng() % 17;
            for (std::size_t i = 0; i < pre; ++i) m.ingest("A", "Op1", base.sample(rng));
            bool hit = false;
            for (std::size_t i = 0; i < (D + 1) * W && !hit; ++i) hit = m.ingest("A", "Op1", slow.sample(rng)).has_value();
            caught += hit;
        }
        CHECK(caught >= 990);
    }
}

TEST_CASE("raising k never increases the number of events") {
    std::mt19937_64 rng(12);
    const auto base = TimeModel::trunc_normal(10.0, 2.0);
    std::vector<double> stream;
    for (int i = 0; i < 3000; ++i) stream.push_back(base.sample(rng) * (i % 700 < 200 ? 1.3 : 1.0));
    for (const std::size_t D : {1u, 2u, 3u}) {
        std::size_t previous = SIZE_MAX;
        for (double k = 0.0; k <= 6.0; k += 0.5) {
            auto s = setup(base);
            Monitor m(s.graph, s.config, {k, 10, D});
            std::size_t events = 0;
            for (const double v : stream) events += m.ingest("A", "Op1", v).has_value();
            CHECK(events <= previous);
            previous = events;
        }
    }
}

TEST_CASE("line impact compares the projected station time with the bottleneck") {
    auto s = setup();
    Monitor mild(s.graph, s.config);
    std::optional<DisturbanceEvent> e;
    for (int i = 0; i < 10; ++i) e = mild.ingest("A", "Op1", 15.0);
    REQUIRE(e.has_value());
    CHECK_FALSE(e->line_impacting);  // 15 + 10 < 30

    Monitor severe(s.graph, s.config);
    for (int i = 0; i < 10; ++i) e = severe.ingest("A", "Op1", 30.0);
    REQUIRE(e.has_value());
    CHECK(e->line_impacting);  // 30 + 10 > 30

    // Both of A's operations slowed by 1.5x: 30 s, not above the 30 s bottleneck.
    Monitor both(s.graph, s.config);
    for (int i = 0; i < 10; ++i) both.ingest("A", "Op1", 15.0);
    for (int i = 0; i < 10; ++i) e = both.ingest("A", "Op2", 15.0);
    REQUIRE(e.has_value());
    CHECK(e->ops == std::vector<std::string>{"Op1", "Op2"});
    CHECK_FALSE(e->line_impacting);
    const auto scenario = e->to_scenario();
    CHECK(scenario.agent == "A");
    CHECK(scenario.time_multiplier == doctest::Approx(1.5));
}

TEST_CASE("speed-ups are logged but do not trigger") {
    auto s = setup();
    Monitor m(s.graph, s.config);
    for (int i = 0; i < 50; ++i) CHECK_FALSE(m.ingest("A", "Op1", 5.0).has_value());
    CHECK(m.stream("A", "Op1").speedups == 5);
}

TEST_CASE("input errors") {
    auto s = setup();
    Monitor m(s.graph, s.config);
    CHECK(kind_of([&] { m.ingest("B", "Op1", 1.0); }) == ErrorKind::UnknownPair);
    CHECK(kind_of([&] { m.ingest("A", "Op1", 0.0); }) == ErrorKind::NonPositiveDuration);
    CHECK(kind_of([&] { m.ingest("A", "Op1", -2.0); }) == ErrorKind::NonPositiveDuration);
    CHECK(kind_of([&] { Monitor(s.graph, s.config, {3.0, 1, 1}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { Monitor(s.graph, s.config, {3.0, 10, 0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sample logs replay through the monitor") {
    std::string csv = "timestamp_s,agent,op,duration_s\n";
    for (int i = 0; i < 30; ++i) csv += std::to_string(100.0 * i) + ",A,Op1," + (i < 10 ? "10" : "25") + "\n";
    const auto samples = parse_sample_log(csv);
    CHECK(samples.size() == 30);
    auto s = setup();
    Monitor m(s.graph, s.config);
    const auto events = replay(m, samples);
    REQUIRE(events.size() == 2);
    CHECK(events[0].onset == doctest::Approx(1000.0));
    const auto doc = nlohmann::json::parse(event_to_json(events[0]));
    for (const char* key : {"agent", "ops", "multiplier", "onset", "line_impacting"}) CHECK(doc.contains(key));

    CHECK(kind_of([] { parse_sample_log("agent,op\nA,Op1\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_sample_log("timestamp_s,agent,op,duration_s\n1,A,Op1,abc\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_sample_log("timestamp_s,agent,op,duration_s\n1,A,Op1\n"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_sample_log(""); }) == ErrorKind::Parse);
}
