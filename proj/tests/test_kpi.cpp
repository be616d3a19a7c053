#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shipmg/kpi.hpp"

using namespace shipmg;

namespace {

// Single-generator config with the tabulated economics and voyage constants.
ScenarioConfig one_generator() {
    auto cfg = default_scenario(StudyCase::sc1);
    cfg.generators.resize(1);
    return cfg;
}

// Hand-built dispatch: per step fuel flow (kg/h), speed (kn) and power (MW).
DispatchSolution dispatch(double dt, const std::vector<double>& mdot, const std::vector<double>& v, const std::vector<double>& p) {
    DispatchSolution s;
    s.steps = static_cast<int>(mdot.size());
    s.dt = dt;
    s.mdot_f = {mdot};
    s.p_dg = {p};
    s.u.assign(1, {});
    s.su.assign(1, std::vector<double>(mdot.size(), 0.0));
    for (double x : p) s.u[0].push_back(x > 0.0 ? 1.0 : 0.0);
    s.v = v;
    s.p_prop = std::vector<double>(mdot.size(), 0.0);
    s.hotel = p;
    return s;
}

KpiReport totals(double cost, double fuel, double h2, double co2, double cii, double lf) {
    KpiReport r;
    r.total_cost = cost;
    r.total_fuel = fuel;
    r.total_h2 = h2;
    r.total_co2 = co2;
    r.cii = cii;
    r.lf_avg = lf;
    return r;
}

}  // namespace

TEST_CASE("kpi: CO2 follows from fuel through the emission factor") {
    const auto cfg = one_generator();
    const auto s = dispatch(1.0, {35280.0}, {197.9}, {5.0});
    const auto r = kpis(s, cfg);
    CHECK(r.total_fuel == 35280.0);
    CHECK(r.total_co2 == 3.206 * 35280.0);
    // Tabulated SC1 pair: 35,280 kg fuel and 113,110 kg CO2 (rounded).
    CHECK(std::abs(r.total_co2 - 113110.0) < 5.0);
}

TEST_CASE("kpi: CII unit handling and the tabulated study-case pairs") {
    auto cfg = one_generator();
    // 1 kg over 1 t and 1 nm is 1000 g/(t nm).
    cfg.voyage.capacity = 1.0;
    cfg.voyage.distance = 1.0;
    const auto unit = kpis(dispatch(1.0, {1.0 / 3.206}, {1.0}, {1.0}), cfg);
    CHECK(unit.cii == doctest::Approx(1000.0).epsilon(1e-12));

    cfg = one_generator();
    CHECK(cfg.voyage.capacity == 48030.0);
    CHECK(cfg.voyage.distance == 197.9);
    for (auto [co2, cii] : {std::pair{113110.0, 11.9}, std::pair{61009.0, 6.4}}) {
        const auto r = kpis(dispatch(1.0, {co2 / 3.206}, {197.9}, {5.0}), cfg);
        CHECK(r.total_co2 == doctest::Approx(co2).epsilon(1e-12));
        CHECK(std::abs(r.cii - cii) <= 0.05);
    }
}

TEST_CASE("kpi: zero dispatch gives zero totals") {
    const auto cfg = one_generator();
    const auto r = kpis(dispatch(0.25, {0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}), cfg);
    CHECK(r.total_fuel == 0.0);
    CHECK(r.total_co2 == 0.0);
    CHECK(r.total_h2 == 0.0);
    CHECK(r.cii == 0.0);
    CHECK(r.lf_avg == 0.0);
    CHECK_FALSE(r.cii_cum[0].has_value());
    CHECK_FALSE(r.cii_cum[1].has_value());
}

TEST_CASE("kpi: load factor averages committed generator steps only") {
    auto cfg = default_scenario(StudyCase::sc1);
    DispatchSolution s;
    s.steps = 2;
    s.dt = 1.0;
    s.u = {{1.0, 1.0}, {0.0, 1.0}, {0.0, 0.0}};
    s.su = {{1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}};
    s.p_dg = {{5.04 * 0.5, 5.04}, {0.0, 6.72 * 0.25}, {0.0, 0.0}};
    s.mdot_f = {{100.0, 200.0}, {0.0, 50.0}, {0.0, 0.0}};
    s.v = {10.0, 10.0};
    const auto r = kpis(s, cfg);
    CHECK(r.lf_avg == doctest::Approx((0.5 + 1.0 + 0.25) / 3.0).epsilon(1e-12));
    CHECK(r.starts == 2);
    CHECK(r.total_fuel == 350.0);
}

TEST_CASE("kpi: cumulative CII profile") {
    auto cfg = one_generator();
    cfg.voyage.distance = 30.0;
    // Harbor step (no distance), clean step (distance, no fuel), then diesel.
    const auto s = dispatch(1.0, {50.0, 0.0, 400.0, 400.0}, {0.0, 10.0, 10.0, 10.0}, {1.0, 0.0, 2.0, 2.0});
    const auto prof = cii_profile(s, cfg);
    const auto r = kpis(s, cfg);
    REQUIRE(prof.size() == 4);
    CHECK_FALSE(prof[0].has_value());
    const double cap = cfg.voyage.capacity;
    CHECK(*prof[1] == doctest::Approx(50.0 * 3.206 * 1e3 / (cap * 10.0)));
    CHECK(*prof[2] == doctest::Approx(450.0 * 3.206 * 1e3 / (cap * 20.0)));
    CHECK(*prof[3] == doctest::Approx(r.cii).epsilon(1e-12));

    const auto clean_first = dispatch(1.0, {0.0, 0.0, 400.0}, {10.0, 10.0, 10.0}, {0.0, 0.0, 2.0});
    const auto p2 = cii_profile(clean_first, cfg);
    CHECK(*p2[0] == 0.0);
    CHECK(*p2[1] == 0.0);
    CHECK(*p2[2] > 0.0);
}

TEST_CASE("kpi: totals are additive over a split horizon") {
    const auto cfg = one_generator();
    const std::vector<double> mdot = {120.0, 0.0, 310.5, 777.0, 12.25, 400.0};
    const std::vector<double> v = {0.0, 6.0, 12.0, 14.0, 9.0, 0.0};
    const std::vector<double> p = {1.0, 0.0, 2.0, 4.5, 0.1, 2.0};
    const auto whole = kpis(dispatch(0.25, mdot, v, p), cfg);
    const auto head = kpis(dispatch(0.25, {mdot.begin(), mdot.begin() + 2}, {v.begin(), v.begin() + 2}, {p.begin(), p.begin() + 2}), cfg);
    const auto tail = kpis(dispatch(0.25, {mdot.begin() + 2, mdot.end()}, {v.begin() + 2, v.end()}, {p.begin() + 2, p.end()}), cfg);
    CHECK(whole.total_fuel == doctest::Approx(head.total_fuel + tail.total_fuel).epsilon(1e-14));
    CHECK(whole.total_co2 == doctest::Approx(head.total_co2 + tail.total_co2).epsilon(1e-14));
    CHECK(whole.distance == doctest::Approx(head.distance + tail.distance).epsilon(1e-14));
    CHECK(whole.total_cost == doctest::Approx(head.total_cost + tail.total_cost).epsilon(1e-14));
}

TEST_CASE("kpi: comparison of the tabulated study cases") {
    const auto sc1 = totals(65508.0, 35280.0, 0.0, 113110.0, 11.9, 0.58);
    const auto sc2 = totals(65575.0, 19029.0, 5619.0, 61009.0, 6.4, 0.7834);
    const auto c = compare(sc1, sc2);
    CHECK(std::round(c["total_co2"].change) == -46.0);
    CHECK(c.co2_saving == 52101.0);
    CHECK(c["lf_avg"].change == doctest::Approx(20.34).epsilon(1e-12));

    const auto same = compare(sc2, sc2);
    for (const auto& d : same.deltas) CHECK(d.change == 0.0);
    CHECK(same.co2_saving == 0.0);
    CHECK(std::isinf(compare(sc1, sc2)["total_h2"].change));
    CHECK_THROWS((void)c["nope"]);
}

TEST_CASE("kpi: CSV outputs re-parse through the readers") {
    auto cfg = default_scenario(StudyCase::sc2);
    DispatchSolution s;
    s.steps = 3;
    s.dt = 0.25;
    s.u = {{1, 1, 0}, {0, 1, 1}, {0, 0, 0}};
    s.su = {{1, 0, 0}, {0, 1, 0}, {0, 0, 0}};
    s.p_dg = {{3.1, 2.0, 0.0}, {0.0, 1.0 / 3.0, 5.5}, {0.0, 0.0, 0.0}};
    s.mdot_f = {{640.0, 420.0, 0.0}, {0.0, 90.1, 1100.0}, {0.0, 0.0, 0.0}};
    s.u_fc = {0, 1, 1};
    s.su_fc = {0, 1, 0};
    s.p_fc = {0.0, 2.0, 1.5};
    s.mdot_h2 = {0.0, 120.0, 95.0};
    s.p_b_c = {0.2, 0.0, 0.0};
    s.p_b_d = {0.0, 0.0, 0.7};
    s.y_b = {1, 0, 0};
    s.soc = {0.5, 0.5095, 0.5095, 0.4};
    s.loh = {1.0, 1.0, 0.997, 0.9946};
    s.v = {0.0, 8.0, 8.0};
    s.p_prop = {0.0, 1.0, 1.0};
    s.hotel = {2.9, 2.3333333333333335, 6.0};
    const auto r = kpis(s, cfg);

    std::stringstream ks;
    write_kpis_csv(ks, r);
    const auto k = read_kpis_csv(ks);
    CHECK(k.total_cost == r.total_cost);
    CHECK(k.total_fuel == r.total_fuel);
    CHECK(k.total_h2 == r.total_h2);
    CHECK(k.total_co2 == r.total_co2);
    CHECK(k.cii == r.cii);
    CHECK(k.lf_avg == r.lf_avg);
    CHECK(k.starts == r.starts);

    std::stringstream ss;
    write_series_csv(ss, r);
    const auto back = read_series_csv(ss);
    CHECK(back.hotel == r.hotel);
    CHECK(back.p_dg == r.p_dg);
    CHECK(back.u_dg == r.u_dg);
    CHECK(back.p_fc == r.p_fc);
    CHECK(back.soc == r.soc);
    CHECK(back.loh == r.loh);
    CHECK(back.cii_cum == r.cii_cum);
    CHECK(back.co2 == r.co2);
    CHECK(back.dt == r.dt);

    const auto table = summary_table({{"SC1", r}, {"SC2", r}});
    for (const char* label : {"Total Cost [EUR]", "Fuel [kg]", "H2 [kg]", "CO2 [kg]", "CII [g/(t nm)]", "LF [%]", "SC1", "SC2"})
        CHECK(table.find(label) != std::string::npos);
}
