#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shipmg/formulation.hpp"
#include "shipmg/kpi.hpp"
#include "shipmg/load.hpp"
#include "shipmg/scenario.hpp"

namespace shipmg {

// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInfeasible = 2, kExitLimit = 3 };

// 0 for optimal/gap_reached, 2 for infeasible, 3 for time/node limits,
// 1 for solver errors.
int exit_code_for(SolveStatus status);

struct CaseResult {
    LoadProfile profile;
    DispatchSolution solution;
    std::optional<KpiReport> kpis;  // present whenever a solution exists
    int exit_code = kExitError;
    std::string message;
};

// Samples the load profile with `seed`, builds and solves the dispatch
// problem and computes the KPIs. When out_dir is non-empty it receives
// load_profile.csv, series.csv, kpis.csv, dispatch_long.csv and summary.txt.
// Validation and I/O problems are reported as exit code 1, never thrown.
CaseResult run_case(const ScenarioConfig& config, std::uint64_t seed, const std::string& out_dir = {});
// Same with a given profile (must match the voyage).
CaseResult run_case(const ScenarioConfig& config, const LoadProfile& profile, const std::string& out_dir = {});

enum class CellStatus { feasible, infeasible, failed };
const char* to_string(CellStatus s);
CellStatus cell_status_from_string(const std::string& s);

struct SweepCell {
    double p_fc = 0.0;  // MW
    double e_b = 0.0;   // MWh
    CellStatus status = CellStatus::failed;
    SolveStatus solver_status = SolveStatus::error;
    std::optional<KpiReport> kpis;  // feasible cells only
    std::string diagnostic;
};

// Cells are stored row-major: cell(i, j) has fc_ratings[i] and bess_energies[j].
struct SweepGrid {
    std::vector<double> fc_ratings;
    std::vector<double> bess_energies;
    std::vector<SweepCell> cells;

    [[nodiscard]] const SweepCell& cell(std::size_t i, std::size_t j) const { return cells[i * bess_energies.size() + j]; }
    [[nodiscard]] bool empty() const { return cells.empty(); }
};

struct SweepSpec {
    std::vector<double> fc_ratings;
    std::vector<double> bess_energies;
    double bess_c_rate = 1.0;  // MW of rated power per MWh
    int workers = 1;
    bool co2_tax_off = false;  // also run every cell with c_CO2 = 0
};

// Evenly spaced values lo, ..., hi (n >= 1; n = 1 gives lo).
std::vector<double> linspace(double lo, double hi, int n);

// Parses "NxM" (a grid over [0, 10] MW x [0, 10] MWh) or
// "fc0,fc1,...:e0,e1,..." (explicit values).
SweepSpec parse_grid(const std::string& text);

// Scenario for one sweep cell: a rating of 0 removes the fuel cell (and the
// hydrogen storage) or the battery; otherwise the base component is kept
// (or the default one added) with the new rating.
ScenarioConfig cell_config(const ScenarioConfig& base, double p_fc, double e_b, double c_rate);

struct SweepResult {
    SweepGrid grid;
    std::optional<SweepGrid> co2_tax_off;
};

// One optimization per cell, all on the same load realization (seed). Cells
// run in parallel on `workers` threads; per-cell failures are recorded in the
// cell. When out_dir is non-empty writes sweep.csv (and sweep_co2_tax_off.csv).
SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, std::uint64_t seed, const std::string& out_dir = {});

// sweep.csv with columns p_fc_mw,e_b_mwh,status,total_cost_eur,total_fuel_kg,
// total_h2_kg,total_co2_kg,cii,lf_avg (KPI fields empty for other cells).
void write_sweep_csv(std::ostream& os, const SweepGrid& grid);
SweepGrid read_sweep_csv(std::istream& is);

// Gnuplot-ready whitespace-separated matrices, one file per KPI
// (heatmap_<kpi>.dat, rows = fuel-cell ratings, columns = battery energies,
// NaN for cells without KPIs). Returns the written paths; an empty sweep
// writes nothing and returns a warning in `warning`.
std::vector<std::string> emit_plot_data(const SweepGrid& grid, const std::string& out_dir, std::string* warning = nullptr,
                                        const std::string& suffix = {});

// Long-format dispatch table dispatch_long.csv (step,time_h,source,power_mw)
// with one source per generator (DG1..), PEMFC and BESS (discharge positive)
// when present, plus the load.
std::vector<std::string> emit_plot_data(const KpiReport& series, const std::string& out_dir);

}  // namespace shipmg
