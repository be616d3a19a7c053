#pragma once

#include <string>

namespace shipmg {

enum class SolverBackend { internal, external };

struct SolverSettings {
    double rel_gap = 1e-4;
    double int_tol = 1e-6;
    double time_limit = 600.0;  // seconds
    long node_limit = 1'000'000;
    double big_m = 1e9;
    SolverBackend backend = SolverBackend::internal;
    // Command used by the external adapter; falls back to SHIPMG_EXTERNAL_SOLVER.
    std::string external_command;
    bool operator==(const SolverSettings&) const = default;
};

}  // namespace shipmg
