#include <cmath>
#include <random>

#include "doctest.h"
#include "linereconf/error.hpp"
#include "linereconf/lp.hpp"
#include "rational_lp_oracle.hpp"

using namespace linereconf;

TEST_CASE("lp: min x subject to x >= 3") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, 10.0, 1.0);
    lp.add_row({{x, 1.0}}, RowSense::GreaterEqual, 3.0);
    const auto r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.x[x] == doctest::Approx(3.0));
}

TEST_CASE("lp: textbook two-variable case") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, 1.0, -1.0);
    const int y = lp.add_variable(0.0, 1.0, -1.0);
    lp.add_row({{x, 1.0}, {y, 1.0}}, RowSense::LessEqual, 1.0);
    const auto r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-1.0));
    CHECK(lp.max_violation(r.x) < 1e-9);
}

TEST_CASE("lp: infeasible and unbounded are classified") {
    LinearProgram infeasible;
    const int x = infeasible.add_variable(0.0, 1.0, 1.0);
    infeasible.add_row({{x, 1.0}}, RowSense::GreaterEqual, 2.0);
    CHECK(lp_solve(infeasible).status == LpStatus::Infeasible);

    LinearProgram unbounded;
    const int a = unbounded.add_variable(0.0, kInfinity, -1.0);
    const int b = unbounded.add_variable(0.0, kInfinity, 0.0);
    unbounded.add_row({{a, 1.0}, {b, -1.0}}, RowSense::LessEqual, 1.0);
    CHECK(lp_solve(unbounded).status == LpStatus::Unbounded);
}

TEST_CASE("lp: equality rows and shifted bounds") {
    LinearProgram lp;
    const int x = lp.add_variable(-2.0, 4.0, 2.0);
    const int y = lp.add_variable(1.0, 5.0, -1.0);
    lp.add_row({{x, 1.0}, {y, 1.0}}, RowSense::Equal, 3.0);
    const auto r = lp_solve(lp);
    REQUIRE(r.status == LpStatus::Optimal);
    // Push y to 5, x = -2.
    CHECK(r.objective == doctest::Approx(-9.0));
}

TEST_CASE("lp: random dense LPs match the exact rational oracle") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> coef(-8, 8);
    std::uniform_int_distribution<int> nvars(2, 30);
    std::uniform_int_distribution<int> nrows(1, 12);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 60; ++trial) {
        LinearProgram lp;
        const int n = nvars(rng);
        for (int j = 0; j < n; ++j) {
            const double lo = coef(rng) / 4.0;
            lp.add_variable(lo, lo + 1.0 + std::abs(coef(rng)) / 2.0, coef(rng) / 2.0);
        }
        const int m = nrows(rng);
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < n; ++j) {
                const int c = coef(rng);
                if (c != 0) row.push_back({j, c / 2.0});
            }
            const int s = static_cast<int>(rng() % 3);
            lp.add_row(std::move(row),
                       s == 0 ? RowSense::LessEqual : s == 1 ? RowSense::GreaterEqual : RowSense::Equal,
                       coef(rng) * 1.5);
        }
        const auto exact = oracle::exact_lp(lp);
        const auto got = lp_solve(lp);
        if (exact.status == oracle::ExactStatus::Optimal) {
            ++optimal;
            REQUIRE(got.status == LpStatus::Optimal);
            CHECK(got.objective == doctest::Approx(exact.objective.convert_to<double>()).epsilon(1e-6));
            CHECK(lp.max_violation(got.x) < 1e-7);
        } else {
            ++infeasible;
            CHECK(got.status == LpStatus::Infeasible);
        }
    }
    CHECK(optimal > 10);
    CHECK(infeasible > 0);
}

TEST_CASE("milp: small knapsack matches enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> w(1, 20);
    for (int trial = 0; trial < 30; ++trial) {
        MilpModel model;
        const int n = 8;
        std::vector<int> weight(n), value(n);
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n; ++j) {
            weight[j] = w(rng);
            value[j] = w(rng);
            model.add_variable(0.0, 1.0, -value[j], true);
            row.push_back({j, static_cast<double>(weight[j])});
        }
        const int cap = 40;
        model.lp.add_row(row, RowSense::LessEqual, cap);
        int best = 0;
        for (int mask = 0; mask < (1 << n); ++mask) {
            int tw = 0, tv = 0;
            for (int j = 0; j < n; ++j)
                if (mask >> j & 1) tw += weight[j], tv += value[j];
            if (tw <= cap) best = std::max(best, tv);
        }
        const auto r = milp_solve(model);
        REQUIRE(r.feasible);
        CHECK(r.objective == doctest::Approx(-best));
    }
}

TEST_CASE("milp: node limit is reported, not silently truncated") {
    MilpModel model;
    std::vector<std::pair<int, double>> row;
    for (int j = 0; j < 12; ++j) {
        model.add_variable(0.0, 1.0, -1.0 - 0.01 * j, true);
        row.push_back({j, 2.0});
    }
    model.lp.add_row(row, RowSense::LessEqual, 11.0);
    MilpOptions opts;
    opts.max_nodes = 2;
    CHECK_THROWS_AS(milp_solve(model, opts), Error);
}

TEST_CASE("lp: degenerate 0/1 assignment-style LPs match the exact oracle") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 80; ++trial) {
        LinearProgram lp;
        const int n = 6 + static_cast<int>(rng() % 20);
        for (int j = 0; j < n; ++j) lp.add_variable(0.0, 1.0, static_cast<double>(rng() % 7) - 3.0);
        const int m = 3 + static_cast<int>(rng() % 12);
        for (int i = 0; i < m; ++i) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < n; ++j)
                if (rng() % 3 == 0) row.push_back({j, (rng() % 4 == 0) ? -1.0 : 1.0});
            if (row.empty()) continue;
            const int s = static_cast<int>(rng() % 3);
            lp.add_row(std::move(row),
                       s == 0 ? RowSense::LessEqual : s == 1 ? RowSense::GreaterEqual : RowSense::Equal,
                       static_cast<double>(rng() % 3));
        }
        const auto exact = oracle::exact_lp(lp);
        const auto got = lp_solve(lp);
        if (exact.status == oracle::ExactStatus::Optimal) {
            REQUIRE(got.status == LpStatus::Optimal);
            CHECK(got.objective == doctest::Approx(exact.objective.convert_to<double>()).epsilon(1e-7));
        } else {
            CHECK(got.status == LpStatus::Infeasible);
        }
    }
}
