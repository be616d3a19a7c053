#pragma once

#include <string>
#include <vector>

#include "shipmg/bnb.hpp"
#include "shipmg/load.hpp"
#include "shipmg/milp_model.hpp"
#include "shipmg/scenario.hpp"

namespace shipmg {

class FormulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised by build() when infeasibility is evident without solving (for
// example a zero-emission step with neither fuel cell nor battery).
class InfeasibleScenario : public FormulationError {
public:
    using FormulationError::FormulationError;
};

// A MILP together with the column layout of its semantic blocks. Steps are
// 0-based in the vectors and 1-based in handles ("P_dg[2][17]"). Absent
// components have empty vectors.
struct DispatchModel {
    MilpModel model;
    int steps = 0;
    double dt = 0.25;
    std::vector<double> hotel;               // MW per step
    std::vector<std::vector<int>> u, su, p_dg, mdot_f;  // [generator][step]
    std::vector<int> u_fc, su_fc, p_fc, mdot_h2;        // [step]
    std::vector<int> p_b_c, p_b_d, y_b;                 // [step]
    std::vector<int> soc, loh;                          // [step], steps + 1 states
    std::vector<int> v, p_prop;                         // [step]
    // Incremental piecewise-linear columns: [generator][step][interval] and
    // [step][interval] for the fuel cell, with the curve's first abscissa.
    // Intervals in the convex tail of a curve share one indicator column.
    std::vector<std::vector<std::vector<int>>> fill, seg_on;
    std::vector<std::vector<int>> fill_fc, seg_on_fc;
    std::vector<double> x0;
    double x0_fc = 0.0;
};

// Builds the dispatch MILP for a validated scenario and a matching profile.
DispatchModel build(const ScenarioConfig& config, const LoadProfile& profile);

struct DispatchSolution {
    int steps = 0;
    double dt = 0.25;
    std::vector<std::vector<double>> u, su, p_dg, mdot_f;  // [generator][step]
    std::vector<double> u_fc, su_fc, p_fc, mdot_h2;        // [step]; empty without a fuel cell
    std::vector<double> p_b_c, p_b_d, y_b;                 // [step]; empty without a battery
    std::vector<double> soc, loh;                          // steps + 1 states
    std::vector<double> v, p_prop, hotel, p_load;          // [step]; p_load = hotel + p_prop
    double objective = kInf;
    double bound = -kInf;
    SolveStatus status = SolveStatus::error;
    long nodes = 0;
    double seconds = 0.0;
    std::string diagnostic;
    std::vector<double> x;  // raw column values (may be empty for hand-built solutions)

    [[nodiscard]] int generators() const { return static_cast<int>(p_dg.size()); }
};

// Maps a solver result onto the semantic layout; binaries are rounded.
DispatchSolution extract_solution(const DispatchModel& dm, const MilpResult& result);

// Switches off committed units that idle at zero power whenever the move
// keeps every bound and row within tol and does not raise the objective
// (start indicators are recomputed). Makes the commitment of cost-equal
// dispatches canonical; returns the number of released unit-steps.
int release_idle_commitments(const DispatchModel& dm, std::vector<double>& x, double tol = 1e-7);

// Solves with the configured backend (internal branch-and-bound or the
// external adapter), releases idle commitments and extracts the solution.
DispatchSolution solve_dispatch(const DispatchModel& dm, const SolverSettings& settings);

// Recomputes the total cost from the primal values only:
// sum_t [sum_i mdot_f_i (c_f + e_f c_CO2) + c_H2 mdot_h2 + sum_i c_i su_i + c_b (1 - SOC)] dt,
// with the start-up term not multiplied by dt when startup_cost_times_dt is off.
double evaluate_objective(const DispatchSolution& solution, const ScenarioConfig& config);

struct Violation {
    std::string name;  // row name, or "<column handle> lower/upper bound"
    double activity = 0.0;
    double lower = -kInf;
    double upper = kInf;
    double amount = 0.0;
};

// Column vector for a solution: the semantic fields override the raw values;
// incremental fill/segment columns are reconstructed from the dispatched
// power when no raw values are present.
std::vector<double> solution_columns(const DispatchSolution& solution, const DispatchModel& dm);

// Every bound and row violated by more than tol (absolute, scaled by
// max(1, |bound|)). Empty report <=> feasible.
std::vector<Violation> check_feasibility(const DispatchSolution& solution, const DispatchModel& dm, double tol = 1e-6);

}  // namespace shipmg
