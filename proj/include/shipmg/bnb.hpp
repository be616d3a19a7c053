#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shipmg/milp_model.hpp"
#include "shipmg/solver_settings.hpp"

namespace shipmg {

enum class SolveStatus { optimal, gap_reached, infeasible, time_limit, node_limit, error };

const char* to_string(SolveStatus s);
SolveStatus solve_status_from_string(const std::string& s);

struct MilpResult {
    SolveStatus status = SolveStatus::error;
    std::vector<double> x;       // empty when no incumbent exists
    double objective = kInf;     // incumbent objective
    double bound = -kInf;        // proven lower bound
    long nodes = 0;
    long lp_iterations = 0;
    double seconds = 0.0;
    std::string diagnostic;
    std::vector<double> bound_log;  // global lower bound after each node

    [[nodiscard]] bool has_solution() const { return !x.empty(); }
    [[nodiscard]] double gap() const;
};

// A subproblem of the search: binary fixings on top of the root bounds.
struct BnbNode {
    std::vector<std::pair<int, signed char>> fixings;
    double bound = -kInf;
    int depth = 0;
    long sequence = 0;
};

// Best-first branch-and-bound with depth-first plunging over the binary
// columns of the model. Branches on the most fractional binary (ties to the
// lowest column index); open nodes are ordered by bound, ties first-in
// first-out. LP relaxations are warm started with the dual simplex.
// A diving heuristic runs at the root and periodically during the search.
MilpResult solve_milp(const MilpModel& model, const SolverSettings& settings);

}  // namespace shipmg
