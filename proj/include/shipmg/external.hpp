#pragma once

#include <stdexcept>

#include "shipmg/bnb.hpp"
#include "shipmg/milp_model.hpp"
#include "shipmg/solver_settings.hpp"

namespace shipmg {

class ExternalSolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Name of the environment variable consulted when the settings carry no
// external command.
inline constexpr const char* kExternalSolverEnv = "SHIPMG_EXTERNAL_SOLVER";

// Writes the model as free-format MPS to a temporary directory, runs
// `<command> <model.mps> <solution.txt> <rel_gap> <time_limit>` and parses
// the solution file:
//
//     status <optimal|gap_reached|infeasible|time_limit|node_limit>
//     objective <value>
//     bound <value>            (optional)
//     <column name> <value>    (one line per column)
//
// Any failure (no command configured, non-zero exit, missing or malformed
// output) raises ExternalSolverError; there is no fallback to the internal
// solver.
MilpResult solve_external(const MilpModel& model, const SolverSettings& settings);

}  // namespace shipmg
