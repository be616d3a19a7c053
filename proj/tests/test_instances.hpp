#pragma once

// Small scenarios shared by the unit and acceptance suites.

#include "shipmg/load.hpp"
#include "shipmg/scenario.hpp"

namespace inst {

// Six one-hour steps: harbor, three navigation hours, one fjord hour
// (zero-emission when the case has a fuel cell) and harbor again.
inline shipmg::ScenarioConfig small_scenario(shipmg::StudyCase c) {
    using shipmg::OcKind;
    auto cfg = shipmg::default_scenario(c);
    auto& v = cfg.voyage;
    v.dt = 1.0;
    v.horizon_h = 6.0;
    const bool ze = c == shipmg::StudyCase::sc2;
    v.segments = {
        {OcKind::harbor, 1.0, 0.0, 0.0, 0.0, false, ""},
        {OcKind::navigation, 3.0, 10.0, 16.0, 2.0, false, ""},
        {OcKind::fjord, 1.0, 6.0, 12.0, 2.0, ze, ""},
        {OcKind::harbor, 1.0, 0.0, 0.0, 0.0, false, ""},
    };
    v.distance = 48.0;
    cfg.solver.rel_gap = 1e-6;
    cfg.solver.time_limit = 60.0;
    return cfg;
}

// Deterministic hotel pattern over the voyage steps.
inline shipmg::LoadProfile ramp_profile(const shipmg::VoyagePlan& voyage) {
    auto p = shipmg::constant_profile(voyage, 3.0);
    for (std::size_t t = 0; t < p.hotel.size(); ++t) p.hotel[t] = 2.6 + 0.4 * static_cast<double>(t % 4);
    return p;
}

}  // namespace inst
