#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shipmg/formulation.hpp"
#include "shipmg/scenario.hpp"

namespace shipmg {

// Voyage-level indicators of one dispatch plus the per-step traces behind
// them. Units: EUR, kg, gCO2/(t nm), MW, knots, fractions.
struct KpiReport {
    double total_cost = 0.0;
    double total_fuel = 0.0;
    double total_h2 = 0.0;
    double total_co2 = 0.0;
    double cii = 0.0;
    double lf_avg = 0.0;
    double distance = 0.0;  // nm actually sailed
    int starts = 0;         // generator and fuel-cell start-ups
    bool has_fc = false;
    bool has_bess = false;

    // Per-step series (length T); soc/loh hold T + 1 states.
    double dt = 0.25;
    std::vector<double> hotel, p_prop, p_load, v;
    std::vector<std::vector<double>> p_dg, u_dg;  // [generator][step]
    std::vector<double> p_fc, p_b_c, p_b_d;       // zeros when absent
    std::vector<double> fuel, h2, co2;            // kg per step
    std::vector<std::optional<double>> cii_cum;
    std::vector<double> soc, loh;

    [[nodiscard]] int steps() const { return static_cast<int>(hotel.size()); }
};

// Totals integrate the mass flows over dt; CO2 = e_f * fuel; CII uses the
// voyage distance D and capacity; lf_avg averages P/P_n over committed
// generator steps (0 when none is committed).
KpiReport kpis(const DispatchSolution& solution, const ScenarioConfig& config);

// Cumulative CO2 [g] / (capacity [t] * cumulative distance [nm]); empty
// while nothing has been sailed yet.
std::vector<std::optional<double>> cii_profile(const DispatchSolution& solution, const ScenarioConfig& config);

struct KpiDelta {
    std::string name;
    double a = 0.0;
    double b = 0.0;
    double change = 0.0;  // percent of a; percentage points for lf_avg
};

struct KpiComparison {
    std::vector<KpiDelta> deltas;  // total_cost, total_fuel, total_h2, total_co2, cii, lf_avg
    double co2_saving = 0.0;       // kg, a - b

    [[nodiscard]] const KpiDelta& operator[](const std::string& name) const;
};

// Changes from a to b. A relative change from a zero baseline is 0 when b is
// also zero and infinite otherwise.
KpiComparison compare(const KpiReport& a, const KpiReport& b);

// kpis.csv: a header row and one row of scalars.
void write_kpis_csv(std::ostream& os, const KpiReport& report);
KpiReport read_kpis_csv(std::istream& is);

// series.csv: one row per step with every trace (soc/loh at the start and
// the end of the step).
void write_series_csv(std::ostream& os, const KpiReport& report);
KpiReport read_series_csv(std::istream& is);

// Plain-text table with one column per case, laid out like the study-case
// results table (Total Cost, Fuel, H2, CO2, CII, LF).
std::string summary_table(const std::vector<std::pair<std::string, KpiReport>>& cases);

}  // namespace shipmg
