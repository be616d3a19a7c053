#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shipmg/curves.hpp"
#include "shipmg/solver_settings.hpp"

namespace shipmg {

// Units used throughout: power MW, energy MWh, mass kg (hydrogen storage
// is configured in tonnes), mass flow kg/h, time h (unit limits in minutes
// and MW/min as tabulated), speed kn, distance nm.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GeneratorSpec {
    std::string id;
    double rated_power = 0.0;        // MW
    double min_frac = 0.0;
    double max_frac = 1.0;
    double min_up = 30.0;            // min
    double min_down = 30.0;          // min
    double ramp_up = 10.0;           // MW/min
    double ramp_down = 10.0;         // MW/min
    double overload_emerg = 1.1;
    double step_emerg = 0.33;
    double startup_cost = 200.0;     // EUR
    AnalyticCurve sfoc = default_sfoc_curve();  // g/kWh over load fraction
    int sfoc_intervals = 10;
    bool pin_sfoc_minimum = true;
    std::optional<PiecewiseCurve> fuel_curve;  // explicit kg/h vs MW, overrides sfoc

    // Linearized fuel mass flow (kg/h vs MW) used by the model.
    [[nodiscard]] PiecewiseCurve fuel_mass_flow() const;
    bool operator==(const GeneratorSpec&) const = default;
};

struct FuelCellSpec {
    double rated_power = 6.0;
    double min_frac = 0.0;
    double max_frac = 1.0;
    AnalyticCurve h2_specific = default_h2_curve(6.0);  // kg/MWh over load fraction
    int h2_intervals = 11;
    std::optional<PiecewiseCurve> h2_curve;  // explicit t/h vs MW (converted to kg/h)
    double startup_cost = 200.0;
    double min_up = 30.0;
    double min_down = 30.0;
    double ramp_up = 10.0;
    double ramp_down = 10.0;
    double overload_emerg = 1.0;
    double step_emerg = 0.33;

    // Linearized hydrogen mass flow (kg/h vs MW).
    [[nodiscard]] PiecewiseCurve h2_mass_flow() const;
    bool operator==(const FuelCellSpec&) const = default;
};

struct BessSpec {
    double rated_power = 5.35;   // MW
    double rated_energy = 5.35;  // MWh
    double eta_c = 0.95;
    double eta_d = 0.92;
    double soc_init = 0.5;
    double soc_final = 0.5;
    double soc_min = 0.2;
    double soc_max = 0.8;
    double c_rate_charge_min = 0.0;
    double c_rate_charge_max = 1.0;
    double c_rate_discharge_min = 0.0;
    double c_rate_discharge_max = 2.0;
    double overload_emerg = 3.0;
    double dod_cost = 5.0;       // EUR per unit DoD per hour
    bool operator==(const BessSpec&) const = default;
};

struct HydrogenStorageSpec {
    double total_mass = 10.0;  // tonnes
    double loh_init = 1.0;
    double loh_min = 0.0;
    bool operator==(const HydrogenStorageSpec&) const = default;
};

struct EconomicParams {
    double fuel_cost = 0.861;       // EUR/kg
    double co2_cost = 0.3;          // EUR/kg
    double emission_factor = 3.206; // kg CO2 / kg fuel
    double h2_cost = 5.176;         // EUR/kg
    bool operator==(const EconomicParams&) const = default;
};

enum class OcKind { navigation, fjord, manoeuvring, harbor };
const char* to_string(OcKind k);
OcKind oc_kind_from_string(const std::string& s);

struct VoyageSegment {
    OcKind kind = OcKind::navigation;
    double duration_h = 1.0;
    double speed_min = 0.0;
    double speed_max = 0.0;
    double speed_delta_max = 2.0;  // kn per step
    bool zero_emission = false;
    std::string hotel_states;      // mask label in the load model; empty = kind name
    bool operator==(const VoyageSegment&) const = default;

    [[nodiscard]] std::string mask_label() const { return hotel_states.empty() ? to_string(kind) : hotel_states; }
};

struct VoyagePlan {
    double dt = 0.25;        // h
    double horizon_h = 24.0; // h
    std::vector<VoyageSegment> segments;
    double distance = 197.9;  // nm
    double cii_max = 13.0;    // gCO2/(t nm)
    bool cii_active = true;
    double capacity = 48030.0;  // t
    AnalyticCurve propulsion;   // MW vs kn
    int propulsion_intervals = 8;
    bool operator==(const VoyagePlan&) const = default;

    [[nodiscard]] int steps() const;
    // Segment index of each step (0-based steps).
    [[nodiscard]] std::vector<int> step_segments() const;
    // First step (0-based) of each segment plus a final sentinel = steps().
    [[nodiscard]] std::vector<int> segment_starts() const;
};

struct MarkovLoadModel {
    std::vector<std::string> labels;
    std::vector<double> hotel;                    // MW per state
    std::vector<std::vector<double>> transition;  // row-stochastic, per step_h
    std::map<std::string, std::vector<std::string>> masks;  // admissible states per label
    double step_h = 0.25;
    bool operator==(const MarkovLoadModel&) const = default;

    [[nodiscard]] int state_index(const std::string& label) const;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<GeneratorSpec> generators;
    std::optional<FuelCellSpec> fuel_cell;
    std::optional<BessSpec> bess;
    std::optional<HydrogenStorageSpec> h2_storage;
    EconomicParams economics;
    VoyagePlan voyage;
    MarkovLoadModel load_model;
    SolverSettings solver;
    int n_units = 5;  // tabulated N: all dispatchable sources (informational)
    std::uint64_t rng_seed = 1;
    bool startup_cost_times_dt = true;
    bool operator==(const ScenarioConfig&) const = default;
};

enum class StudyCase { sc1, sc2 };
StudyCase study_case_from_string(const std::string& s);

// Tabulated defaults: SC1 = diesel generators only, SC2 = with fuel cell,
// hydrogen storage and battery.
ScenarioConfig default_scenario(StudyCase c);
VoyagePlan default_voyage();
MarkovLoadModel default_load_model();

// c_f + e_f * c_CO2.
double marginal_fuel_cost(const EconomicParams& econ);

// Throws ConfigError naming the first violated invariant.
void validate(const ScenarioConfig& cfg);

// YAML ingestion with defaults for omitted fields; unknown keys are errors.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);
std::string serialize_config(const ScenarioConfig& cfg);

}  // namespace shipmg
