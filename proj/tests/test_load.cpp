#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "shipmg/load.hpp"

using namespace shipmg;

namespace {

MarkovLoadModel two_state(double p01, double p10) {
    MarkovLoadModel m;
    m.labels = {"A", "B"};
    m.hotel = {2.0, 4.0};
    m.transition = {{1.0 - p01, p01}, {p10, 1.0 - p10}};
    for (const char* k : {"harbor", "manoeuvring", "navigation", "fjord"}) m.masks[k] = {"A", "B"};
    return m;
}

VoyagePlan long_voyage(double hours) {
    VoyagePlan v;
    v.dt = 0.25;
    v.horizon_h = hours;
    v.segments = {{OcKind::navigation, hours, 0.0, 16.0, 2.0, false, ""}};
    return v;
}

}  // namespace

TEST_CASE("load: single-state chain gives a constant profile") {
    MarkovLoadModel m;
    m.labels = {"H"};
    m.hotel = {3.0};
    m.transition = {{1.0}};
    for (const char* k : {"harbor", "manoeuvring", "navigation", "fjord"}) m.masks[k] = {"H"};
    const auto prof = simulate(m, default_voyage(), 7);
    REQUIRE(prof.steps() == 96);
    for (double h : prof.hotel) CHECK(h == 3.0);
}

TEST_CASE("load: simulation is deterministic and respects masks and segments") {
    const auto model = default_load_model();
    const auto voyage = default_voyage();
    const auto a = simulate(model, voyage, 42);
    const auto b = simulate(model, voyage, 42);
    CHECK(a == b);
    CHECK_FALSE(a == simulate(model, voyage, 43));
    CHECK_NOTHROW(check_profile(a, voyage));
    const auto seg = voyage.step_segments();
    for (int t = 0; t < a.steps(); ++t) {
        const auto& s = voyage.segments[static_cast<std::size_t>(seg[static_cast<std::size_t>(t)])];
        std::set<double> allowed;
        for (const auto& label : model.masks.at(s.mask_label())) allowed.insert(model.hotel[static_cast<std::size_t>(model.state_index(label))]);
        CHECK(allowed.contains(a.hotel[static_cast<std::size_t>(t)]));
        CHECK(a.oc_kind[static_cast<std::size_t>(t)] == s.kind);
        CHECK(a.zero_emission[static_cast<std::size_t>(t)] == s.zero_emission);
    }
}

TEST_CASE("load: stationary distribution") {
    MarkovLoadModel id = two_state(0.0, 0.0);
    try {
        (void)stationary_distribution(id);
        FAIL("expected reducible chain error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("reducible") != std::string::npos);
        CHECK(std::string(e.what()).find("B") != std::string::npos);
    }
    const auto sym = stationary_distribution(two_state(0.5, 0.5));
    CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-12));
    // Hand oracle for [[0.9,0.1],[0.5,0.5]]: 0.1 pi0 = 0.5 pi1 -> (5/6, 1/6).
    const auto pi = stationary_distribution(two_state(0.1, 0.5));
    CHECK(pi[0] == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(pi[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("load: long-run occupancy matches the stationary distribution") {
    const double a = 0.1, b = 0.5;
    const auto model = two_state(a, b);
    const int n = 100000;
    const auto prof = simulate(model, long_voyage(n * 0.25), 2024);
    REQUIRE(prof.steps() == n);
    int in_a = 0;
    for (double h : prof.hotel) in_a += h == 2.0 ? 1 : 0;
    // Oracle: pi_A = b/(a+b); the asymptotic variance of the occupancy of a
    // two-state chain is pi(1-pi)(1+l)/(1-l) with l = 1-a-b.
    const double pa = b / (a + b);
    const double l = 1.0 - a - b;
    const double sigma = std::sqrt(pa * (1.0 - pa) * (1.0 + l) / (1.0 - l) / n);
    CHECK(std::abs(static_cast<double>(in_a) / n - pa) <= 3.0 * sigma);
}

TEST_CASE("load: coarser voyage steps use the matrix power of the chain") {
    const auto model = two_state(0.1, 0.5);
    const auto p4 = transition_power(model, 4);
    // Oracle: closed form for two-state chains P^k = Pi + l^k (I - Pi).
    const double pa = 5.0 / 6.0, l = 0.4, l4 = l * l * l * l;
    CHECK(p4[0][0] == doctest::Approx(pa + l4 * (1.0 - pa)).epsilon(1e-12));
    CHECK(p4[1][0] == doctest::Approx(pa - l4 * pa).epsilon(1e-12));
    auto voyage = default_voyage();
    voyage.dt = 1.0;
    const auto prof = simulate(default_load_model(), voyage, 1);
    CHECK(prof.steps() == 24);
    CHECK_NOTHROW(check_profile(prof, voyage));
}

TEST_CASE("load: CSV round trip and consistency checks") {
    const auto voyage = default_voyage();
    const auto prof = simulate(default_load_model(), voyage, 5);
    std::stringstream ss;
    write_profile_csv(ss, prof);
    CHECK(ss.str().starts_with("step,time_h,oc_kind,zero_emission,hotel_mw\n1,0,harbor,0,"));
    const auto back = read_profile_csv(ss);
    CHECK(back == prof);
    auto bad = prof;
    bad.zero_emission[0] = true;
    CHECK_THROWS_AS(check_profile(bad, voyage), ConfigError);
    bad = prof;
    bad.hotel.pop_back();
    CHECK_THROWS_AS(check_profile(bad, voyage), ConfigError);
    auto model = default_load_model();
    model.masks.erase("fjord");
    CHECK_THROWS_AS((void)simulate(model, voyage, 1), ConfigError);
}
