#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "shipmg/formulation.hpp"
#include "test_instances.hpp"

using namespace shipmg;

namespace {

bool has_violation(const std::vector<Violation>& vs, const std::string& name) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.name == name; });
}

// Independent cost of a dispatch: fuel and hydrogen mass times prices,
// start-ups and the depth-of-discharge term, summed step by step.
double oracle_cost(const DispatchSolution& s, const ScenarioConfig& c) {
    const auto& e = c.economics;
    double fuel = 0.0, h2 = 0.0, starts = 0.0, dod = 0.0;
    for (int t = 0; t < s.steps; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        for (int i = 0; i < s.generators(); ++i) {
            fuel += s.mdot_f[i][ts] * s.dt;
            starts += s.su[i][ts] * c.generators[i].startup_cost;
        }
        if (!s.mdot_h2.empty()) {
            h2 += s.mdot_h2[ts] * s.dt;
            starts += s.su_fc[ts] * c.fuel_cell->startup_cost;
        }
        if (c.bess) dod += c.bess->dod_cost * (1.0 - s.soc[ts]) * s.dt;
    }
    const double start_factor = c.startup_cost_times_dt ? s.dt : 1.0;
    return fuel * (e.fuel_cost + e.emission_factor * e.co2_cost) + h2 * e.h2_cost + starts * start_factor + dod;
}

double total_co2(const DispatchSolution& s, const ScenarioConfig& c) {
    double fuel = 0.0;
    for (const auto& m : s.mdot_f)
        for (double x : m) fuel += x * s.dt;
    return fuel * c.economics.emission_factor;
}

DispatchSolution solve_small(const ScenarioConfig& cfg) {
    const auto dm = build(cfg, inst::ramp_profile(cfg.voyage));
    return solve_dispatch(dm, cfg.solver);
}

// Proven optimal within the 1e-6 relative gap of the small instances.
bool closed(const DispatchSolution& s) {
    return s.status == SolveStatus::optimal ||
           (s.status == SolveStatus::gap_reached && s.objective - s.bound <= 1e-6 * std::max(1.0, std::abs(s.objective)));
}

bool has_solution(const DispatchSolution& s) {
    return s.status == SolveStatus::optimal || s.status == SolveStatus::gap_reached || (s.status == SolveStatus::time_limit && s.steps > 0);
}

}  // namespace

TEST_CASE("formulation: SC2 at 15-minute steps has the documented size") {
    const auto cfg = default_scenario(StudyCase::sc2);
    const auto prof = simulate(cfg.load_model, cfg.voyage, cfg.rng_seed);
    const auto dm = build(cfg, prof);
    REQUIRE(dm.steps == 96);
    // Per step: 3 DG + 1 FC commitments, as many start indicators and one
    // BESS mode, plus at most one indicator per curve segment (3 x 10 + 11).
    const int fixed = 96 * (4 + 4 + 1);
    CHECK(dm.model.num_binaries() > fixed);
    CHECK(dm.model.num_binaries() <= fixed + 96 * 41);
    CHECK(dm.soc.size() == 97);
    CHECK(dm.loh.size() == 97);
    CHECK(dm.model.has_column("P_dg[2][17]"));
    CHECK(dm.model.has_column("SOC[97]"));
    CHECK_FALSE(dm.model.has_column("SOC[98]"));

    const auto& dist = dm.model.row(dm.model.row_index("distance"));
    CHECK(dist.terms.size() == 96);
    for (const auto& term : dist.terms) CHECK(term.coef == 0.25);
    CHECK(dist.lower == 197.9);
    CHECK(dist.upper == 197.9);

    // Zero-emission steps pin every generator off.
    int pinned = 0;
    for (int t = 0; t < dm.steps; ++t) {
        if (!prof.zero_emission[static_cast<std::size_t>(t)]) continue;
        for (int i = 1; i <= 3; ++i) {
            const auto name = "zero_emission[" + std::to_string(i) + "][" + std::to_string(t + 1) + "]";
            REQUIRE(dm.model.has_row(name));
            const auto& row = dm.model.row(dm.model.row_index(name));
            CHECK(row.upper == 0.0);
            CHECK(row.terms.size() == 1);
            CHECK(row.terms[0].col == dm.u[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(t)]);
            ++pinned;
        }
    }
    CHECK(pinned == 3 * 40);  // ten fjord hours
}

TEST_CASE("formulation: SC1 with a zero-emission step and no clean source is infeasible before solving") {
    auto cfg = inst::small_scenario(StudyCase::sc1);
    cfg.voyage.segments[2].zero_emission = true;
    const auto prof = inst::ramp_profile(cfg.voyage);
    CHECK_THROWS_AS(build(cfg, prof), InfeasibleScenario);
}

TEST_CASE("formulation: solver objective equals the independent cost of the dispatch") {
    for (auto c : {StudyCase::sc1, StudyCase::sc2}) {
        const auto cfg = inst::small_scenario(c);
        auto quick = cfg;
        quick.solver.time_limit = 10.0;
        const auto s = solve_small(quick);
        REQUIRE(has_solution(s));
        CHECK(check_feasibility(s, build(cfg, inst::ramp_profile(cfg.voyage))).empty());
        const double oracle = oracle_cost(s, cfg);
        CHECK(std::abs(s.objective - oracle) <= 1e-6 * std::max(1.0, std::abs(oracle)));
        CHECK(std::abs(evaluate_objective(s, cfg) - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
        CHECK(s.bound <= s.objective + 1e-9);
    }
}

TEST_CASE("formulation: the carbon price enters linearly through the fuel mass") {
    auto cfg = inst::small_scenario(StudyCase::sc1);
    cfg.solver.time_limit = 10.0;
    const auto s = solve_small(cfg);
    REQUIRE(has_solution(s));
    auto doubled = cfg;
    doubled.economics.co2_cost *= 2.0;
    const double delta = evaluate_objective(s, doubled) - evaluate_objective(s, cfg);
    const double expected = cfg.economics.co2_cost * total_co2(s, cfg);
    CHECK(delta == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("formulation: storage trajectories satisfy the state equations") {
    const auto cfg = inst::small_scenario(StudyCase::sc2);
    const auto s = solve_small(cfg);
    REQUIRE(closed(s));
    const auto& b = *cfg.bess;
    const auto& h = *cfg.h2_storage;
    REQUIRE(s.soc.size() == static_cast<std::size_t>(s.steps) + 1);
    CHECK(s.soc.front() == b.soc_init);
    CHECK(s.soc.back() == b.soc_final);
    CHECK(s.loh.front() == h.loh_init);
    for (int t = 0; t < s.steps; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const double soc_next = s.soc[ts] + (b.eta_c * s.p_b_c[ts] - s.p_b_d[ts] / b.eta_d) * s.dt / b.rated_energy;
        CHECK(std::abs(s.soc[ts + 1] - soc_next) <= 1e-9);
        const double loh_next = s.loh[ts] - s.mdot_h2[ts] * s.dt / (1000.0 * h.total_mass);
        CHECK(std::abs(s.loh[ts + 1] - loh_next) <= 1e-9);
        CHECK(s.soc[ts + 1] >= b.soc_min - 1e-9);
        CHECK(s.soc[ts + 1] <= b.soc_max + 1e-9);
        CHECK(s.p_b_c[ts] * s.p_b_d[ts] == 0.0);
    }
    // The fjord hour is served without diesel.
    for (int i = 0; i < s.generators(); ++i) CHECK(s.p_dg[i][4] == 0.0);
}

TEST_CASE("formulation: feasibility report names the violated bound or row") {
    const auto cfg = inst::small_scenario(StudyCase::sc2);
    const auto prof = inst::ramp_profile(cfg.voyage);
    const auto dm = build(cfg, prof);
    auto s = solve_dispatch(dm, cfg.solver);
    REQUIRE(closed(s));
    REQUIRE(check_feasibility(s, dm).empty());
    s.soc[2] = 0.1;
    const auto v = check_feasibility(s, dm);
    CHECK(has_violation(v, "SOC[3] lower bound"));
    CHECK(has_violation(v, "soc_dyn[2]"));
    CHECK(has_violation(v, "soc_dyn[3]"));
}

TEST_CASE("formulation: hand-built dispatch of a one-generator toy") {
    // One 5 MW generator, two harbor hours at 2 MW: u = 1 throughout, one
    // start in the first step, fuel from the tabulated curve.
    auto cfg = inst::small_scenario(StudyCase::sc1);
    cfg.generators.resize(1);
    cfg.generators[0].rated_power = 5.0;
    cfg.generators[0].fuel_curve = PiecewiseCurve{{0.0, 2.5, 5.0}, {0.0, 500.0, 1100.0}};
    auto& v = cfg.voyage;
    v.horizon_h = 2.0;
    v.segments = {{OcKind::harbor, 2.0, 0.0, 0.0, 0.0, false, ""}};
    v.distance = 0.0;
    v.cii_active = false;
    validate(cfg);
    const auto prof = constant_profile(v, 2.0);
    const auto dm = build(cfg, prof);

    DispatchSolution s;
    s.steps = 2;
    s.dt = 1.0;
    s.u = {{1.0, 1.0}};
    s.su = {{1.0, 0.0}};
    s.p_dg = {{2.0, 2.0}};
    s.mdot_f = {{400.0, 400.0}};  // 2 MW on the first segment: 2 * 500 / 2.5
    s.v = {0.0, 0.0};
    s.p_prop = {0.0, 0.0};
    s.hotel = {2.0, 2.0};
    // A single unit without a battery cannot meet the N-1 and load-step
    // rules; everything else holds.
    const auto security_only = [](const std::vector<Violation>& vs) {
        return std::all_of(vs.begin(), vs.end(), [](const Violation& v) { return v.name.starts_with("n1[") || v.name.starts_with("step["); });
    };
    const auto base = check_feasibility(s, dm);
    CHECK(security_only(base));
    CHECK(has_violation(base, "n1[1][1]"));
    CHECK(has_violation(base, "step[1][2]"));
    // Cost: 800 kg fuel at the marginal price plus one start (x dt = 1 h).
    CHECK(evaluate_objective(s, cfg) == doctest::Approx(800.0 * 1.8228 + 200.0).epsilon(1e-12));

    auto wrong = s;
    wrong.mdot_f[0][1] = 300.0;
    CHECK(has_violation(check_feasibility(wrong, dm), "pwl_flow[1][2]"));
    auto no_start = s;
    no_start.su[0][0] = 0.0;
    CHECK(has_violation(check_feasibility(no_start, dm), "su_link[1][1]"));
    auto short_power = s;
    short_power.p_dg[0][0] = 1.5;
    short_power.mdot_f[0][0] = 300.0;
    CHECK(has_violation(check_feasibility(short_power, dm), "balance[1]"));
}

TEST_CASE("formulation: the CII cap holds and relaxing it never increases the optimum") {
    auto cfg = inst::small_scenario(StudyCase::sc2);
    cfg.voyage.cii_active = false;
    const auto free = solve_small(cfg);
    REQUIRE(closed(free));
    const double free_cii = total_co2(free, cfg) * 1e3 / (cfg.voyage.capacity * cfg.voyage.distance);

    // A cap 5% below the uncapped intensity.
    auto capped = cfg;
    capped.voyage.cii_active = true;
    capped.voyage.cii_max = 0.95 * free_cii;
    const auto s = solve_small(capped);
    if (closed(s)) {
        const double cii = total_co2(s, capped) * 1e3 / (capped.voyage.capacity * capped.voyage.distance);
        CHECK(cii <= capped.voyage.cii_max + 1e-6);
        CHECK(free.objective <= s.objective + 1e-6 * std::abs(s.objective));
    } else {
        CHECK(s.status == SolveStatus::infeasible);
    }
    auto loose = capped;
    loose.voyage.cii_max = 2.0 * free_cii;
    const auto l = solve_small(loose);
    REQUIRE(closed(l));
    CHECK(l.objective == doctest::Approx(free.objective).epsilon(2e-6));
}

TEST_CASE("formulation: a carbon price does not increase the optimal emissions") {
    auto with_tax = inst::small_scenario(StudyCase::sc2);
    auto no_tax = with_tax;
    no_tax.economics.co2_cost = 0.0;
    const auto a = solve_small(with_tax);
    const auto b = solve_small(no_tax);
    REQUIRE(closed(a));
    REQUIRE(closed(b));
    // Both runs are optimal to 1e-6; allow the emissions worth of that gap.
    const double slack = 1e-6 * (std::abs(a.objective) + std::abs(b.objective)) / with_tax.economics.co2_cost;
    CHECK(total_co2(a, with_tax) <= total_co2(b, no_tax) + slack);
}
