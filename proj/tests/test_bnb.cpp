#include <doctest.h>

#include <cmath>
#include <random>

#include "shipmg/bnb.hpp"
#include "test_oracles.hpp"

using namespace shipmg;

TEST_CASE("bnb: small covering problem") {
    MilpModel m;
    const int x = m.add_variable("x", 0.0, 10.0);
    const int y = m.add_binary("y");
    m.set_objective(x, 1.0);
    m.set_objective(y, 1.0);
    m.add_row("cover", {{x, 1.0}, {y, 1.0}}, Sense::ge, 1.5);
    const auto r = solve_milp(m, {});
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(1.5));
    CHECK(r.bound <= r.objective + 1e-9);
}

TEST_CASE("bnb: knapsack needs branching") {
    // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8.
    MilpModel m;
    const int a = m.add_binary("a");
    const int b = m.add_binary("b");
    const int c = m.add_binary("c");
    m.set_objective(a, -5.0);
    m.set_objective(b, -4.0);
    m.set_objective(c, -3.0);
    m.add_row("r1", {{a, 2.0}, {b, 3.0}, {c, 1.0}}, Sense::le, 5.0);
    m.add_row("r2", {{a, 4.0}, {b, 1.0}, {c, 2.0}}, Sense::le, 11.0);
    m.add_row("r3", {{a, 3.0}, {b, 4.0}, {c, 2.0}}, Sense::le, 8.0);
    const auto r = solve_milp(m, {});
    REQUIRE(r.status == SolveStatus::optimal);
    // Brute force over 8 patterns.
    double best = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        const int A = mask & 1, B = (mask >> 1) & 1, C = (mask >> 2) & 1;
        if (2 * A + 3 * B + C <= 5 && 4 * A + B + 2 * C <= 11 && 3 * A + 4 * B + 2 * C <= 8)
            best = std::min(best, -5.0 * A - 4.0 * B - 3.0 * C);
    }
    CHECK(r.objective == doctest::Approx(best));
}

TEST_CASE("bnb: infeasible integer problem") {
    MilpModel m;
    const int a = m.add_binary("a");
    const int b = m.add_binary("b");
    m.add_row("half", {{a, 2.0}, {b, 2.0}}, Sense::eq, 1.0);
    const auto r = solve_milp(m, {});
    CHECK(r.status == SolveStatus::infeasible);
    CHECK_FALSE(r.has_solution());
}

TEST_CASE("bnb: toy unit commitment matches exhaustive enumeration") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 20; ++trial) {
        const auto uc = oracle::random_toy_uc(rng);
        const double expected = oracle::toy_uc_enumerate(uc);
        const auto m = oracle::toy_uc_model(uc);
        SolverSettings s;
        s.rel_gap = 1e-9;
        const auto r = solve_milp(m, s);
        CAPTURE(trial);
        REQUIRE(r.has_solution());
        CHECK((r.status == SolveStatus::optimal || r.status == SolveStatus::gap_reached));
        CHECK(std::abs(r.objective - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
        CHECK(r.bound <= r.objective + 1e-9 * std::max(1.0, std::abs(r.objective)));
        for (std::size_t k = 1; k < r.bound_log.size(); ++k) CHECK(r.bound_log[k] >= r.bound_log[k - 1]);
        // The incumbent satisfies every row and bound.
        for (int i = 0; i < m.num_rows(); ++i) {
            const double act = m.row_activity(i, r.x);
            CHECK(act >= m.row(i).lower - 1e-6);
            CHECK(act <= m.row(i).upper + 1e-6);
        }
    }
}

TEST_CASE("bnb: results are deterministic") {
    std::mt19937_64 rng(5);
    const auto m = oracle::toy_uc_model(oracle::random_toy_uc(rng));
    const auto a = solve_milp(m, {});
    const auto b = solve_milp(m, {});
    CHECK(a.objective == b.objective);
    CHECK(a.nodes == b.nodes);
    CHECK(a.x == b.x);
}

TEST_CASE("bnb: node limit is reported") {
    std::mt19937_64 rng(11);
    const auto m = oracle::toy_uc_model(oracle::random_toy_uc(rng));
    SolverSettings s;
    s.node_limit = 1;
    s.rel_gap = 0.0;
    const auto r = solve_milp(m, s);
    CHECK((r.status == SolveStatus::node_limit || r.status == SolveStatus::optimal || r.status == SolveStatus::gap_reached));
    CHECK(r.nodes <= 1);
}

TEST_CASE("bnb: status strings round trip") {
    for (auto s : {SolveStatus::optimal, SolveStatus::gap_reached, SolveStatus::infeasible, SolveStatus::time_limit,
                   SolveStatus::node_limit, SolveStatus::error})
        CHECK(solve_status_from_string(to_string(s)) == s);
}
