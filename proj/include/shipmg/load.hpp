#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "shipmg/scenario.hpp"

namespace shipmg {

// Hotel load and operating-condition context per optimization step.
struct LoadProfile {
    double dt = 0.25;
    std::vector<double> hotel;       // MW
    std::vector<OcKind> oc_kind;
    std::vector<bool> zero_emission;

    [[nodiscard]] int steps() const { return static_cast<int>(hotel.size()); }
    bool operator==(const LoadProfile&) const = default;
};

// Portable seeded generator: 64-bit Mersenne Twister, doubles from the top
// 53 bits.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();  // [0, 1)
    std::size_t pick(const std::vector<double>& weights);  // weights sum > 0

private:
    std::mt19937_64 engine_;
};

// Transition matrix for `k` chain steps (matrix power).
std::vector<std::vector<double>> transition_power(const MarkovLoadModel& model, int k);

// Stationary distribution pi with pi^T P = pi^T, sum(pi) = 1. Throws
// ConfigError("reducible chain: ...") listing unreachable states.
std::vector<double> stationary_distribution(const MarkovLoadModel& model);

// Samples the hotel load per voyage step; the chain is restricted to the
// states admissible in each segment. Deterministic in (model, voyage, seed).
LoadProfile simulate(const MarkovLoadModel& model, const VoyagePlan& voyage, std::uint64_t seed);

// Operating-condition skeleton with a constant hotel load (for tests/tools).
LoadProfile constant_profile(const VoyagePlan& voyage, double hotel_mw);

// Throws ConfigError unless the profile matches the voyage step by step.
void check_profile(const LoadProfile& profile, const VoyagePlan& voyage);

// CSV with header step,time_h,oc_kind,zero_emission,hotel_mw (step 1-based,
// time_h = start of the step).
void write_profile_csv(std::ostream& os, const LoadProfile& profile);
LoadProfile read_profile_csv(std::istream& is);

}  // namespace shipmg
