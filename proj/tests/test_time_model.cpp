#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "linereconf/error.hpp"
#include "linereconf/time_model.hpp"

using namespace linereconf;

namespace {

double monte_carlo_mean(const TimeModel& m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += m.sample(rng);
    return s / n;
}

// Mean of N(mu, sd) truncated to (0, inf) by trapezoidal integration.
double truncated_mean_by_quadrature(double mu, double sd) {
    const double hi = mu + 12.0 * sd;
    const int steps = 200000;
    const double h = hi / steps;
    double mass = 0.0, first = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double x = i * h;
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        const double pdf = std::exp(-0.5 * (x - mu) * (x - mu) / (sd * sd));
        mass += w * pdf;
        first += w * x * pdf;
    }
    return first / mass;
}

}  // namespace

TEST_CASE("constant model") {
    const auto m = TimeModel::constant(43.9);
    CHECK(m.expected() == 43.9);
    CHECK(m.stddev() == 0.0);
    std::mt19937_64 rng(1);
    CHECK(m.sample(rng) == 43.9);
}

TEST_CASE("empirical model with identical samples") {
    const auto m = TimeModel::empirical({5, 5, 5});
    CHECK(m.expected() == doctest::Approx(5.0));
    CHECK(m.stddev() == doctest::Approx(0.0));
}

TEST_CASE("empirical model samples only observed values") {
    const auto m = TimeModel::empirical({2.0, 4.0, 9.0});
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const double v = m.sample(rng);
        CHECK((v == 2.0 || v == 4.0 || v == 9.0));
    }
    CHECK(m.expected() == doctest::Approx(5.0));
}

TEST_CASE("scaling a 10 s model by 1.5 gives 15 s and keeps the coefficient of variation") {
    for (const auto& m : {TimeModel::constant(10.0), TimeModel::trunc_normal(10.0, 1.0),
                          TimeModel::log_normal(10.0, 2.0), TimeModel::empirical({8.0, 10.0, 12.0})}) {
        const auto s = m.scaled(1.5);
        CHECK(s.kind() == m.kind());
        CHECK(s.expected() == doctest::Approx(1.5 * m.expected()));
        CHECK(s.stddev() == doctest::Approx(1.5 * m.stddev()));
    }
}

TEST_CASE("log-normal fitted from synthetic samples reproduces their mean") {
    std::mt19937_64 rng(2024);
    std::lognormal_distribution<double> dist(std::log(12.0), 0.3);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = dist(rng);
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (xs.size() - 1));
    const auto m = TimeModel::log_normal(mean, sd);
    CHECK(std::abs(m.expected() - mean) / mean < 0.02);
    CHECK(std::abs(monte_carlo_mean(m, 200000, 5) - mean) / mean < 0.02);
    CHECK(m.stddev() == doctest::Approx(sd));
}

TEST_CASE("truncated normal expectation matches quadrature and sampling") {
    for (const auto& [mu, sd] : std::vector<std::pair<double, double>>{{10.0, 1.0}, {5.0, 4.0}, {2.0, 3.0}}) {
        const auto m = TimeModel::trunc_normal(mu, sd);
        const double q = truncated_mean_by_quadrature(mu, sd);
        CHECK(m.expected() == doctest::Approx(q).epsilon(1e-6));
        CHECK(monte_carlo_mean(m, 200000, 11) == doctest::Approx(q).epsilon(0.01));
        std::mt19937_64 rng(3);
        for (int i = 0; i < 1000; ++i) CHECK(m.sample(rng) > 0.0);
    }
}

TEST_CASE("sampling is reproducible for a fixed seed") {
    const auto m = TimeModel::trunc_normal(7.0, 2.0);
    std::mt19937_64 a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(m.sample(a) == m.sample(b));
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(TimeModel::constant(0.0), Error);
    CHECK_THROWS_AS(TimeModel::constant(-1.0), Error);
    CHECK_THROWS_AS(TimeModel::trunc_normal(5.0, -1.0), Error);
    CHECK_THROWS_AS(TimeModel::log_normal(0.0, 1.0), Error);
    CHECK_THROWS_AS(TimeModel::empirical({}), Error);
    CHECK_THROWS_AS(TimeModel::empirical({1.0, 0.0}), Error);
    CHECK_THROWS_AS(TimeModel::constant(5.0).scaled(0.0), Error);
}

TEST_CASE("kind names round-trip") {
    for (const auto k : {TimeModelKind::Constant, TimeModelKind::TruncNormal, TimeModelKind::LogNormal,
                         TimeModelKind::Empirical})
        CHECK(time_model_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(time_model_kind_from_string("Weibull"), Error);
}
