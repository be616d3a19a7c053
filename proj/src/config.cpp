#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shipmg/milp_model.hpp"
#include "shipmg/scenario.hpp"

namespace shipmg {

// ---------------------------------------------------------------------------
// Domain helpers

const char* to_string(OcKind k) {
    switch (k) {
        case OcKind::navigation: return "navigation";
        case OcKind::fjord: return "fjord";
        case OcKind::manoeuvring: return "manoeuvring";
        case OcKind::harbor: return "harbor";
    }
    return "navigation";
}

OcKind oc_kind_from_string(const std::string& s) {
    for (auto k : {OcKind::navigation, OcKind::fjord, OcKind::manoeuvring, OcKind::harbor})
        if (s == to_string(k)) return k;
    throw ConfigError("unknown operating condition '" + s + "'");
}

StudyCase study_case_from_string(const std::string& s) {
    if (s == "sc1" || s == "SC1") return StudyCase::sc1;
    if (s == "sc2" || s == "SC2") return StudyCase::sc2;
    throw ConfigError("unknown study case '" + s + "' (expected sc1 or sc2)");
}

namespace {

int whole_steps(double hours, double dt, const std::string& what) {
    const double r = hours / dt;
    const double n = std::round(r);
    if (std::abs(r - n) > 1e-9 * std::max(1.0, r) || n < 0)
        throw ConfigError(what + " (" + format_number(hours) + " h) is not a whole number of steps of " + format_number(dt) + " h");
    return static_cast<int>(n);
}

}  // namespace

int VoyagePlan::steps() const { return whole_steps(horizon_h, dt, "voyage.horizon_h"); }

std::vector<int> VoyagePlan::segment_starts() const {
    std::vector<int> starts{0};
    for (std::size_t s = 0; s < segments.size(); ++s)
        starts.push_back(starts.back() + whole_steps(segments[s].duration_h, dt, "voyage.segments[" + std::to_string(s) + "].duration_h"));
    return starts;
}

std::vector<int> VoyagePlan::step_segments() const {
    const auto starts = segment_starts();
    std::vector<int> out;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s)
        for (int t = starts[s]; t < starts[s + 1]; ++t) out.push_back(static_cast<int>(s));
    return out;
}

int MarkovLoadModel::state_index(const std::string& label) const {
    for (std::size_t k = 0; k < labels.size(); ++k)
        if (labels[k] == label) return static_cast<int>(k);
    throw ConfigError("load_model: unknown state '" + label + "'");
}

PiecewiseCurve GeneratorSpec::fuel_mass_flow() const {
    if (fuel_curve) return *fuel_curve;
    auto m = mass_flow_curve_from_sfoc(sfoc, rated_power);
    std::vector<double> pins;
    if (pin_sfoc_minimum) pins.push_back(specific_minimum(sfoc) * rated_power);
    return linearize(m, sfoc_intervals, pins);
}

PiecewiseCurve FuelCellSpec::h2_mass_flow() const {
    if (h2_curve) {
        PiecewiseCurve c = *h2_curve;
        for (double& y : c.y) y *= 1000.0;  // t/h -> kg/h
        return c;
    }
    return linearize(mass_flow_curve_from_sfoc(h2_specific, rated_power), h2_intervals);
}

double marginal_fuel_cost(const EconomicParams& econ) { return econ.fuel_cost + econ.emission_factor * econ.co2_cost; }

// ---------------------------------------------------------------------------
// Defaults

VoyagePlan default_voyage() {
    VoyagePlan v;
    v.dt = 0.25;
    v.horizon_h = 24.0;
    v.segments = {
        {OcKind::harbor, 2.0, 0.0, 0.0, 0.0, false, ""},
        {OcKind::manoeuvring, 1.0, 0.0, 6.0, 3.0, false, ""},
        {OcKind::navigation, 7.0, 10.0, 16.0, 2.0, false, ""},
        {OcKind::fjord, 10.0, 6.0, 12.0, 2.0, true, ""},
        {OcKind::manoeuvring, 1.0, 0.0, 6.0, 3.0, false, ""},
        {OcKind::harbor, 3.0, 0.0, 0.0, 0.0, false, ""},
    };
    v.distance = 197.9;
    v.cii_max = 13.0;
    v.cii_active = true;
    v.capacity = 48030.0;
    v.propulsion = cubic_propulsion_curve(8.0, 16.0, 0.0, 16.0);
    v.propulsion_intervals = 8;
    return v;
}

MarkovLoadModel default_load_model() {
    MarkovLoadModel m;
    m.step_h = 0.25;
    m.labels = {"H1", "H2", "H3", "H4", "H5", "H6", "H7"};
    m.hotel = {2.2, 2.6, 3.0, 3.4, 3.8, 4.2, 4.6};
    const std::size_t n = m.labels.size();
    m.transition.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            m.transition[i][0] = 0.85;
            m.transition[i][1] = 0.15;
        } else if (i + 1 == n) {
            m.transition[i][i] = 0.85;
            m.transition[i][i - 1] = 0.15;
        } else {
            m.transition[i][i - 1] = 0.1;
            m.transition[i][i] = 0.8;
            m.transition[i][i + 1] = 0.1;
        }
    }
    m.masks["harbor"] = {"H1", "H2", "H3", "H4"};
    m.masks["manoeuvring"] = {"H3", "H4", "H5", "H6"};
    m.masks["navigation"] = {"H3", "H4", "H5", "H6", "H7"};
    m.masks["fjord"] = {"H2", "H3", "H4", "H5"};
    return m;
}

ScenarioConfig default_scenario(StudyCase c) {
    ScenarioConfig cfg;
    cfg.name = c == StudyCase::sc1 ? "SC1" : "SC2";
    const double ratings[] = {5.04, 6.72, 6.72};
    for (int i = 0; i < 3; ++i) {
        GeneratorSpec g;
        g.id = "DG" + std::to_string(i + 1);
        g.rated_power = ratings[i];
        cfg.generators.push_back(g);
    }
    cfg.voyage = default_voyage();
    cfg.load_model = default_load_model();
    cfg.rng_seed = 1;
    if (c == StudyCase::sc2) {
        cfg.fuel_cell = FuelCellSpec{};
        cfg.h2_storage = HydrogenStorageSpec{};
        cfg.bess = BessSpec{};
    } else {
        // Without zero-emission sources the fjord transit is sailed on diesel.
        for (auto& s : cfg.voyage.segments) s.zero_emission = false;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

void check_curve(const AnalyticCurve& c, const std::string& where) {
    require(std::isfinite(c.x_lo) && std::isfinite(c.x_hi) && c.x_hi > c.x_lo, where + ": domain must satisfy x_lo < x_hi");
    require(!c.coefficients.empty(), where + ": coefficients must not be empty");
    for (double v : c.coefficients) require(std::isfinite(v), where + ": coefficients must be finite");
    for (int k = 0; k <= 100; ++k) {
        const double x = c.x_lo + (c.x_hi - c.x_lo) * k / 100.0;
        double y = 0.0;
        try {
            y = c(x);
        } catch (const CurveError& e) {
            throw ConfigError(where + ": " + e.what());
        }
        require(std::isfinite(y) && y >= 0.0, where + ": curve must be finite and non-negative over its domain");
    }
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
    require(!cfg.generators.empty() || cfg.fuel_cell.has_value() || cfg.bess.has_value(),
            "at least one dispatchable source must exist");
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
        const auto& g = cfg.generators[i];
        const std::string p = "generators[" + std::to_string(i) + "]";
        require(g.rated_power > 0.0, p + ".p_n: rated_power > 0 violated");
        require(g.min_frac >= 0.0 && g.min_frac <= g.max_frac, p + ": 0 <= c_g_min <= c_g_max violated");
        require(g.max_frac > 0.0, p + ".c_g_max: must be positive");
        require(g.overload_emerg >= 1.0, p + ".alpha_g: overload_emerg >= 1 violated");
        require(g.step_emerg > 0.0 && g.step_emerg <= 1.0, p + ".beta_g: 0 < step_emerg <= 1 violated");
        require(g.min_up >= 0.0 && g.min_down >= 0.0, p + ": minimum up/down times must be non-negative");
        require(g.ramp_up > 0.0 && g.ramp_down > 0.0, p + ": ramp limits must be positive");
        require(g.startup_cost >= 0.0, p + ".c_i: start-up cost must be non-negative");
        require(g.sfoc_intervals >= 1, p + ".n_dg: at least one interval");
        if (g.fuel_curve) {
            try {
                g.fuel_curve->validate(p + ".fuel_curve");
            } catch (const CurveError& e) {
                throw ConfigError(e.what());
            }
            require(g.fuel_curve->x_min() <= g.min_frac * g.rated_power + 1e-12 &&
                        g.fuel_curve->x_max() >= g.max_frac * g.rated_power - 1e-12,
                    p + ".fuel_curve: domain must cover [c_g_min, c_g_max] * p_n");
        } else {
            check_curve(g.sfoc, p + ".sfoc");
            require(g.sfoc.x_lo <= g.min_frac && g.sfoc.x_hi >= g.max_frac, p + ".sfoc: domain must cover [c_g_min, c_g_max]");
            if (g.pin_sfoc_minimum) {
                try {
                    (void)specific_minimum(g.sfoc);
                } catch (const CurveError& e) {
                    throw ConfigError(p + ".sfoc: " + e.what());
                }
            }
        }
    }
    require(cfg.fuel_cell.has_value() == cfg.h2_storage.has_value(), "fuel_cell present <=> h2_storage present violated");
    if (cfg.fuel_cell) {
        const auto& f = *cfg.fuel_cell;
        require(f.rated_power > 0.0, "fuel_cell.p_n: rated_power > 0 violated");
        require(f.min_frac >= 0.0 && f.min_frac <= f.max_frac && f.max_frac > 0.0, "fuel_cell: 0 <= c_fc_min <= c_fc_max violated");
        require(f.h2_intervals >= 1, "fuel_cell.n_fc: at least one interval");
        require(f.overload_emerg >= 1.0, "fuel_cell.alpha_fc: overload_emerg >= 1 violated");
        require(f.step_emerg > 0.0 && f.step_emerg <= 1.0, "fuel_cell.beta_fc: 0 < step_emerg <= 1 violated");
        require(f.ramp_up > 0.0 && f.ramp_down > 0.0, "fuel_cell: ramp limits must be positive");
        require(f.min_up >= 0.0 && f.min_down >= 0.0 && f.startup_cost >= 0.0, "fuel_cell: times and costs must be non-negative");
        if (f.h2_curve) {
            try {
                f.h2_curve->validate("fuel_cell.h2_curve");
            } catch (const CurveError& e) {
                throw ConfigError(e.what());
            }
            require(f.h2_curve->x_min() <= 0.0 && f.h2_curve->x_max() >= f.rated_power * f.max_frac - 1e-12,
                    "fuel_cell.h2_curve: must be defined on [0, p_n]");
        } else {
            check_curve(f.h2_specific, "fuel_cell.h2_specific");
            require(f.h2_specific.x_lo <= 0.0 && f.h2_specific.x_hi >= f.max_frac, "fuel_cell.h2_specific: domain must cover [0, c_fc_max]");
        }
    }
    if (cfg.h2_storage) {
        const auto& h = *cfg.h2_storage;
        require(h.total_mass > 0.0, "h2_storage.m_h2: total_mass > 0 violated");
        require(h.loh_min >= 0.0 && h.loh_min <= h.loh_init && h.loh_init <= 1.0, "h2_storage: 0 <= loh_min <= loh_init <= 1 violated");
    }
    if (cfg.bess) {
        const auto& b = *cfg.bess;
        require(b.rated_power >= 0.0 && b.rated_energy > 0.0, "bess: rated power >= 0 and rated energy > 0 required");
        require(b.soc_min >= 0.0 && b.soc_min < b.soc_max && b.soc_max <= 1.0, "bess: soc_min < soc_max violated");
        require(b.soc_init >= b.soc_min && b.soc_init <= b.soc_max, "bess.soc_init: must lie in [soc_min, soc_max]");
        require(b.soc_final >= b.soc_min && b.soc_final <= b.soc_max, "bess.soc_final: must lie in [soc_min, soc_max]");
        require(b.eta_c > 0.0 && b.eta_c <= 1.0, "bess.eta_c: must lie in (0, 1]");
        require(b.eta_d > 0.0 && b.eta_d <= 1.0, "bess.eta_d: must lie in (0, 1]");
        require(b.c_rate_charge_min >= 0.0 && b.c_rate_charge_min <= b.c_rate_charge_max, "bess: 0 <= c_c_min <= c_c_max violated");
        require(b.c_rate_discharge_min >= 0.0 && b.c_rate_discharge_min <= b.c_rate_discharge_max,
                "bess: 0 <= c_d_min <= c_d_max violated");
        require(b.overload_emerg >= 0.0 && b.dod_cost >= 0.0, "bess: alpha_b and c_b must be non-negative");
    }
    const auto& e = cfg.economics;
    require(e.fuel_cost >= 0.0 && e.co2_cost >= 0.0 && e.emission_factor >= 0.0 && e.h2_cost >= 0.0,
            "economics: all prices and factors must be >= 0");

    const auto& v = cfg.voyage;
    require(v.dt > 0.0 && v.horizon_h > 0.0, "voyage: dt and horizon_h must be positive");
    int T = 0;
    std::vector<int> starts;
    try {
        T = v.steps();
        starts = v.segment_starts();
    } catch (const ConfigError&) {
        throw;
    }
    require(T >= 1, "voyage: horizon must contain at least one step");
    require(!v.segments.empty(), "voyage.segments: at least one segment required");
    require(starts.back() == T, "voyage.segments: segments must tile the horizon exactly (durations sum to horizon_h)");
    double dmin = 0.0, dmax = 0.0, vmax = 0.0, vmin = 1e300;
    for (std::size_t s = 0; s < v.segments.size(); ++s) {
        const auto& seg = v.segments[s];
        const std::string p = "voyage.segments[" + std::to_string(s) + "]";
        require(seg.duration_h > 0.0, p + ".duration_h: must be positive");
        require(seg.speed_min >= 0.0 && seg.speed_min <= seg.speed_max, p + ": speed_min <= speed_max violated");
        require(seg.speed_delta_max >= 0.0, p + ".speed_delta_max: must be non-negative");
        require(!seg.zero_emission || seg.kind == OcKind::fjord, p + ": zero_emission requires kind fjord");
        require(cfg.load_model.masks.contains(seg.mask_label()), p + ": hotel state set '" + seg.mask_label() + "' not defined in load_model.masks");
        dmin += seg.speed_min * seg.duration_h;
        dmax += seg.speed_max * seg.duration_h;
        vmax = std::max(vmax, seg.speed_max);
        vmin = std::min(vmin, seg.speed_min);
    }
    require(v.distance >= 0.0, "voyage.distance: must be non-negative");
    require(dmax >= v.distance - 1e-9 && dmin <= v.distance + 1e-9,
            "voyage: distance not reachable within speed bounds (need sum speed_min*dt <= D <= sum speed_max*dt)");
    require(v.cii_max > 0.0 && v.capacity > 0.0, "voyage: cii_max and capacity must be positive");
    require(v.propulsion_intervals >= 1, "voyage.propulsion_intervals: at least one interval");
    check_curve(v.propulsion, "voyage.propulsion");
    require(v.propulsion.x_lo <= vmin && v.propulsion.x_hi >= vmax, "voyage.propulsion: domain must cover all segment speeds");

    const auto& m = cfg.load_model;
    require(!m.labels.empty(), "load_model.states: at least one state required");
    require(m.hotel.size() == m.labels.size(), "load_model: one hotel load per state required");
    require(std::set<std::string>(m.labels.begin(), m.labels.end()).size() == m.labels.size(), "load_model: duplicate state labels");
    for (double h : m.hotel) require(std::isfinite(h) && h >= 0.0, "load_model: hotel_load >= 0 violated");
    require(m.transition.size() == m.labels.size(), "load_model.transition: must be square with one row per state");
    for (std::size_t i = 0; i < m.transition.size(); ++i) {
        require(m.transition[i].size() == m.labels.size(), "load_model.transition: must be square with one row per state");
        double sum = 0.0;
        for (double p : m.transition[i]) {
            require(p >= 0.0 && p <= 1.0, "load_model.transition: entries must lie in [0, 1]");
            sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "load_model.transition: row " + std::to_string(i) + " must sum to 1");
    }
    require(m.step_h > 0.0, "load_model.step_h: must be positive");
    {
        const double r = v.dt / m.step_h;
        require(std::abs(r - std::round(r)) <= 1e-9 * r && std::round(r) >= 1.0,
                "voyage.dt must be a whole multiple of load_model.step_h");
    }
    for (const auto& [label, states] : m.masks) {
        require(!states.empty(), "load_model.masks." + label + ": mask must be non-empty");
        for (const auto& s : states) (void)m.state_index(s);
    }

    const auto& so = cfg.solver;
    require(so.rel_gap >= 0.0, "solver.rel_gap: must be >= 0");
    require(so.int_tol > 0.0 && so.int_tol <= 1e-3, "solver.int_tol: must lie in (0, 1e-3]");
    require(so.big_m > 0.0, "big_m: must be positive");
    require(so.time_limit > 0.0 && so.node_limit > 0, "solver: limits must be positive");
}

// ---------------------------------------------------------------------------
// YAML reading

namespace {

class Node {
public:
    Node(YAML::Node n, std::string path) : n_(std::move(n)), path_(std::move(path)) {
        if (n_ && !n_.IsNull() && !n_.IsMap()) fail("expected a mapping");
    }

    void allow(std::initializer_list<const char*> keys) const {
        if (!n_ || n_.IsNull()) return;
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& kv : n_) {
            const auto key = kv.first.as<std::string>();
            if (!ok.contains(key)) fail("unknown key '" + key + "'");
        }
    }

    [[nodiscard]] bool has(const char* key) const { return n_ && n_.IsMap() && n_[key]; }
    [[nodiscard]] YAML::Node raw(const char* key) const { return n_[key]; }
    [[nodiscard]] std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[nodiscard]] Node child(const char* key) const { return {n_[key], child_path(key)}; }

    void get(const char* key, double& out) const {
        if (!has(key)) return;
        out = scalar<double>(n_[key], child_path(key));
    }
    void get(const char* key, int& out) const {
        if (!has(key)) return;
        out = scalar<int>(n_[key], child_path(key));
    }
    void get(const char* key, long& out) const {
        if (!has(key)) return;
        out = scalar<long>(n_[key], child_path(key));
    }
    void get(const char* key, std::uint64_t& out) const {
        if (!has(key)) return;
        out = scalar<std::uint64_t>(n_[key], child_path(key));
    }
    void get(const char* key, bool& out) const {
        if (!has(key)) return;
        out = scalar<bool>(n_[key], child_path(key));
    }
    void get(const char* key, std::string& out) const {
        if (!has(key)) return;
        out = scalar<std::string>(n_[key], child_path(key));
    }
    void get(const char* key, std::vector<double>& out) const {
        if (!has(key)) return;
        out = list<double>(n_[key], child_path(key));
    }

    template <class T>
    static T scalar(const YAML::Node& n, const std::string& path) {
        if (!n.IsScalar()) throw ConfigError(path + ": expected a scalar value");
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path + ": cannot interpret '" + n.Scalar() + "'");
        }
    }
    template <class T>
    static std::vector<T> list(const YAML::Node& n, const std::string& path) {
        if (!n.IsSequence()) throw ConfigError(path + ": expected a list");
        std::vector<T> out;
        for (std::size_t k = 0; k < n.size(); ++k) out.push_back(scalar<T>(n[k], path + "[" + std::to_string(k) + "]"));
        return out;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError((path_.empty() ? "config" : path_) + ": " + msg); }
    [[nodiscard]] const YAML::Node& yaml() const { return n_; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    YAML::Node n_;
    std::string path_;
};

void read_analytic(const Node& n, AnalyticCurve& c) {
    n.allow({"kind", "coefficients", "x_lo", "x_hi"});
    if (n.has("kind")) {
        std::string k;
        n.get("kind", k);
        try {
            c.kind = curve_kind_from_string(k);
        } catch (const CurveError& e) {
            n.fail(e.what());
        }
        if (c.kind == CurveKind::mass_flow) n.fail("kind mass_flow is derived, not configurable");
    }
    n.get("coefficients", c.coefficients);
    n.get("x_lo", c.x_lo);
    n.get("x_hi", c.x_hi);
}

PiecewiseCurve read_breakpoints(const Node& n) {
    n.allow({"x", "y"});
    PiecewiseCurve c;
    n.get("x", c.x);
    n.get("y", c.y);
    try {
        c.validate(n.path());
    } catch (const CurveError& e) {
        throw ConfigError(e.what());
    }
    return c;
}

void read_generator(const Node& n, GeneratorSpec& g) {
    n.allow({"id", "p_n", "c_g_min", "c_g_max", "t_min_u", "t_min_d", "dp_r_u", "dp_r_d", "alpha_g", "beta_g", "c_i", "sfoc",
             "n_dg", "pin_sfoc_minimum", "fuel_curve"});
    n.get("id", g.id);
    n.get("p_n", g.rated_power);
    n.get("c_g_min", g.min_frac);
    n.get("c_g_max", g.max_frac);
    n.get("t_min_u", g.min_up);
    n.get("t_min_d", g.min_down);
    n.get("dp_r_u", g.ramp_up);
    n.get("dp_r_d", g.ramp_down);
    n.get("alpha_g", g.overload_emerg);
    n.get("beta_g", g.step_emerg);
    n.get("c_i", g.startup_cost);
    if (n.has("sfoc")) read_analytic(n.child("sfoc"), g.sfoc);
    n.get("n_dg", g.sfoc_intervals);
    n.get("pin_sfoc_minimum", g.pin_sfoc_minimum);
    if (n.has("fuel_curve")) g.fuel_curve = read_breakpoints(n.child("fuel_curve"));
}

void read_fuel_cell(const Node& n, FuelCellSpec& f) {
    n.allow({"p_n", "c_fc_min", "c_fc_max", "h2_specific", "n_fc", "h2_curve", "c_i", "t_min_u", "t_min_d", "dp_r_u", "dp_r_d",
             "alpha_fc", "beta_fc"});
    n.get("p_n", f.rated_power);
    n.get("c_fc_min", f.min_frac);
    n.get("c_fc_max", f.max_frac);
    if (n.has("h2_specific")) read_analytic(n.child("h2_specific"), f.h2_specific);
    n.get("n_fc", f.h2_intervals);
    if (n.has("h2_curve")) f.h2_curve = read_breakpoints(n.child("h2_curve"));
    n.get("c_i", f.startup_cost);
    n.get("t_min_u", f.min_up);
    n.get("t_min_d", f.min_down);
    n.get("dp_r_u", f.ramp_up);
    n.get("dp_r_d", f.ramp_down);
    n.get("alpha_fc", f.overload_emerg);
    n.get("beta_fc", f.step_emerg);
}

void read_bess(const Node& n, BessSpec& b) {
    n.allow({"p_n", "e_n", "eta_c", "eta_d", "soc_init", "soc_final", "soc_min", "soc_max", "c_c_min", "c_c_max", "c_d_min",
             "c_d_max", "alpha_b", "c_b"});
    n.get("p_n", b.rated_power);
    n.get("e_n", b.rated_energy);
    n.get("eta_c", b.eta_c);
    n.get("eta_d", b.eta_d);
    n.get("soc_init", b.soc_init);
    n.get("soc_final", b.soc_final);
    n.get("soc_min", b.soc_min);
    n.get("soc_max", b.soc_max);
    n.get("c_c_min", b.c_rate_charge_min);
    n.get("c_c_max", b.c_rate_charge_max);
    n.get("c_d_min", b.c_rate_discharge_min);
    n.get("c_d_max", b.c_rate_discharge_max);
    n.get("alpha_b", b.overload_emerg);
    n.get("c_b", b.dod_cost);
}

void read_voyage(const Node& n, VoyagePlan& v) {
    n.allow({"dt", "horizon_h", "segments", "distance", "cii_max", "cii_active", "capacity", "propulsion", "propulsion_intervals"});
    n.get("dt", v.dt);
    n.get("horizon_h", v.horizon_h);
    n.get("distance", v.distance);
    n.get("cii_max", v.cii_max);
    n.get("cii_active", v.cii_active);
    n.get("capacity", v.capacity);
    if (n.has("propulsion")) read_analytic(n.child("propulsion"), v.propulsion);
    n.get("propulsion_intervals", v.propulsion_intervals);
    if (n.has("segments")) {
        const auto seq = n.raw("segments");
        if (!seq.IsSequence()) n.child("segments").fail("expected a list");
        v.segments.clear();
        for (std::size_t k = 0; k < seq.size(); ++k) {
            Node s(seq[k], n.child_path("segments") + "[" + std::to_string(k) + "]");
            s.allow({"kind", "duration_h", "speed_min", "speed_max", "speed_delta_max", "zero_emission", "hotel_states"});
            VoyageSegment seg;
            if (!s.has("kind")) s.fail("missing key 'kind'");
            if (!s.has("duration_h")) s.fail("missing key 'duration_h'");
            std::string kind;
            s.get("kind", kind);
            try {
                seg.kind = oc_kind_from_string(kind);
            } catch (const ConfigError& e) {
                s.fail(e.what());
            }
            s.get("duration_h", seg.duration_h);
            s.get("speed_min", seg.speed_min);
            s.get("speed_max", seg.speed_max);
            s.get("speed_delta_max", seg.speed_delta_max);
            s.get("zero_emission", seg.zero_emission);
            s.get("hotel_states", seg.hotel_states);
            v.segments.push_back(seg);
        }
    }
}

void read_load_model(const Node& n, MarkovLoadModel& m) {
    n.allow({"step_h", "states", "transition", "masks"});
    n.get("step_h", m.step_h);
    if (n.has("states")) {
        const auto seq = n.raw("states");
        if (!seq.IsSequence()) n.child("states").fail("expected a list");
        m.labels.clear();
        m.hotel.clear();
        for (std::size_t k = 0; k < seq.size(); ++k) {
            Node s(seq[k], n.child_path("states") + "[" + std::to_string(k) + "]");
            s.allow({"label", "hotel_mw"});
            if (!s.has("label") || !s.has("hotel_mw")) s.fail("each state needs 'label' and 'hotel_mw'");
            std::string label;
            double h = 0.0;
            s.get("label", label);
            s.get("hotel_mw", h);
            m.labels.push_back(label);
            m.hotel.push_back(h);
        }
    }
    if (n.has("transition")) {
        const auto seq = n.raw("transition");
        if (!seq.IsSequence()) n.child("transition").fail("expected a list of rows");
        m.transition.clear();
        for (std::size_t k = 0; k < seq.size(); ++k)
            m.transition.push_back(Node::list<double>(seq[k], n.child_path("transition") + "[" + std::to_string(k) + "]"));
    }
    if (n.has("masks")) {
        const auto map = n.raw("masks");
        if (!map.IsMap()) n.child("masks").fail("expected a mapping");
        m.masks.clear();
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            m.masks[key] = Node::list<std::string>(kv.second, n.child_path("masks") + "." + key);
        }
    }
}

void read_solver(const Node& n, SolverSettings& s) {
    n.allow({"rel_gap", "int_tol", "time_limit", "node_limit", "backend", "external_command"});
    n.get("rel_gap", s.rel_gap);
    n.get("int_tol", s.int_tol);
    n.get("time_limit", s.time_limit);
    n.get("node_limit", s.node_limit);
    if (n.has("backend")) {
        std::string b;
        n.get("backend", b);
        if (b == "internal") s.backend = SolverBackend::internal;
        else if (b == "external") s.backend = SolverBackend::external;
        else n.child("backend").fail("expected 'internal' or 'external'");
    }
    n.get("external_command", s.external_command);
}

ScenarioConfig from_yaml(const YAML::Node& root_yaml) {
    Node root(root_yaml, "");
    root.allow({"name", "case", "generators", "fuel_cell", "bess", "h2_storage", "economics", "voyage", "load_model", "solver",
                "big_m", "n_units", "rng_seed", "startup_cost_times_dt"});
    // Start from the SC1 defaults (or the named base case) and overlay.
    StudyCase base = StudyCase::sc1;
    if (root.has("case")) {
        std::string c;
        root.get("case", c);
        try {
            base = study_case_from_string(c);
        } catch (const ConfigError& e) {
            root.child("case").fail(e.what());
        }
    }
    ScenarioConfig cfg = default_scenario(base);
    root.get("name", cfg.name);
    if (root.has("generators")) {
        const auto seq = root.raw("generators");
        if (!seq.IsSequence()) root.child("generators").fail("expected a list");
        cfg.generators.clear();
        for (std::size_t k = 0; k < seq.size(); ++k) {
            Node g(seq[k], "generators[" + std::to_string(k) + "]");
            GeneratorSpec spec;
            spec.id = "DG" + std::to_string(k + 1);
            if (!g.has("p_n")) g.fail("missing key 'p_n'");
            read_generator(g, spec);
            cfg.generators.push_back(spec);
        }
    }
    auto optional_block = [&](const char* key, auto& slot, auto reader) {
        if (!root.has(key)) return;
        const auto node = root.raw(key);
        if (node.IsNull() || (node.IsScalar() && (node.Scalar() == "none" || node.Scalar() == "false"))) {
            slot.reset();
            return;
        }
        using T = typename std::decay_t<decltype(slot)>::value_type;
        T value = slot ? *slot : T{};
        reader(root.child(key), value);
        slot = value;
    };
    optional_block("fuel_cell", cfg.fuel_cell, read_fuel_cell);
    optional_block("bess", cfg.bess, read_bess);
    optional_block("h2_storage", cfg.h2_storage, [](const Node& n, HydrogenStorageSpec& h) {
        n.allow({"m_h2", "loh_init", "loh_min"});
        n.get("m_h2", h.total_mass);
        n.get("loh_init", h.loh_init);
        n.get("loh_min", h.loh_min);
    });
    if (root.has("economics")) {
        const auto e = root.child("economics");
        e.allow({"c_f", "c_co2", "e_f", "c_h2"});
        e.get("c_f", cfg.economics.fuel_cost);
        e.get("c_co2", cfg.economics.co2_cost);
        e.get("e_f", cfg.economics.emission_factor);
        e.get("c_h2", cfg.economics.h2_cost);
    }
    if (root.has("voyage")) read_voyage(root.child("voyage"), cfg.voyage);
    if (root.has("load_model")) read_load_model(root.child("load_model"), cfg.load_model);
    if (root.has("solver")) read_solver(root.child("solver"), cfg.solver);
    root.get("big_m", cfg.solver.big_m);
    root.get("n_units", cfg.n_units);
    root.get("rng_seed", cfg.rng_seed);
    root.get("startup_cost_times_dt", cfg.startup_cost_times_dt);
    validate(cfg);
    return cfg;
}

// ---------------------------------------------------------------------------
// YAML writing

void emit_num(YAML::Emitter& out, const char* key, double v) { out << YAML::Key << key << YAML::Value << format_number(v); }

void emit_list(YAML::Emitter& out, const char* key, const std::vector<double>& v) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) out << format_number(x);
    out << YAML::EndSeq;
}

void emit_analytic(YAML::Emitter& out, const char* key, const AnalyticCurve& c) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(c.kind);
    emit_list(out, "coefficients", c.coefficients);
    emit_num(out, "x_lo", c.x_lo);
    emit_num(out, "x_hi", c.x_hi);
    out << YAML::EndMap;
}

void emit_breakpoints(YAML::Emitter& out, const char* key, const PiecewiseCurve& c) {
    out << YAML::Key << key << YAML::Value << YAML::BeginMap;
    emit_list(out, "x", c.x);
    emit_list(out, "y", c.y);
    out << YAML::EndMap;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("parse error: top level must be a mapping");
    try {
        return from_yaml(root);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << cfg.name;
    out << YAML::Key << "rng_seed" << YAML::Value << cfg.rng_seed;
    out << YAML::Key << "n_units" << YAML::Value << cfg.n_units;
    emit_num(out, "big_m", cfg.solver.big_m);
    out << YAML::Key << "startup_cost_times_dt" << YAML::Value << cfg.startup_cost_times_dt;

    out << YAML::Key << "generators" << YAML::Value << YAML::BeginSeq;
    for (const auto& g : cfg.generators) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << g.id;
        emit_num(out, "p_n", g.rated_power);
        emit_num(out, "c_g_min", g.min_frac);
        emit_num(out, "c_g_max", g.max_frac);
        emit_num(out, "t_min_u", g.min_up);
        emit_num(out, "t_min_d", g.min_down);
        emit_num(out, "dp_r_u", g.ramp_up);
        emit_num(out, "dp_r_d", g.ramp_down);
        emit_num(out, "alpha_g", g.overload_emerg);
        emit_num(out, "beta_g", g.step_emerg);
        emit_num(out, "c_i", g.startup_cost);
        emit_analytic(out, "sfoc", g.sfoc);
        out << YAML::Key << "n_dg" << YAML::Value << g.sfoc_intervals;
        out << YAML::Key << "pin_sfoc_minimum" << YAML::Value << g.pin_sfoc_minimum;
        if (g.fuel_curve) emit_breakpoints(out, "fuel_curve", *g.fuel_curve);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "fuel_cell" << YAML::Value;
    if (cfg.fuel_cell) {
        const auto& f = *cfg.fuel_cell;
        out << YAML::BeginMap;
        emit_num(out, "p_n", f.rated_power);
        emit_num(out, "c_fc_min", f.min_frac);
        emit_num(out, "c_fc_max", f.max_frac);
        emit_analytic(out, "h2_specific", f.h2_specific);
        out << YAML::Key << "n_fc" << YAML::Value << f.h2_intervals;
        if (f.h2_curve) emit_breakpoints(out, "h2_curve", *f.h2_curve);
        emit_num(out, "c_i", f.startup_cost);
        emit_num(out, "t_min_u", f.min_up);
        emit_num(out, "t_min_d", f.min_down);
        emit_num(out, "dp_r_u", f.ramp_up);
        emit_num(out, "dp_r_d", f.ramp_down);
        emit_num(out, "alpha_fc", f.overload_emerg);
        emit_num(out, "beta_fc", f.step_emerg);
        out << YAML::EndMap;
    } else {
        out << YAML::Null;
    }

    out << YAML::Key << "h2_storage" << YAML::Value;
    if (cfg.h2_storage) {
        out << YAML::BeginMap;
        emit_num(out, "m_h2", cfg.h2_storage->total_mass);
        emit_num(out, "loh_init", cfg.h2_storage->loh_init);
        emit_num(out, "loh_min", cfg.h2_storage->loh_min);
        out << YAML::EndMap;
    } else {
        out << YAML::Null;
    }

    out << YAML::Key << "bess" << YAML::Value;
    if (cfg.bess) {
        const auto& b = *cfg.bess;
        out << YAML::BeginMap;
        emit_num(out, "p_n", b.rated_power);
        emit_num(out, "e_n", b.rated_energy);
        emit_num(out, "eta_c", b.eta_c);
        emit_num(out, "eta_d", b.eta_d);
        emit_num(out, "soc_init", b.soc_init);
        emit_num(out, "soc_final", b.soc_final);
        emit_num(out, "soc_min", b.soc_min);
        emit_num(out, "soc_max", b.soc_max);
        emit_num(out, "c_c_min", b.c_rate_charge_min);
        emit_num(out, "c_c_max", b.c_rate_charge_max);
        emit_num(out, "c_d_min", b.c_rate_discharge_min);
        emit_num(out, "c_d_max", b.c_rate_discharge_max);
        emit_num(out, "alpha_b", b.overload_emerg);
        emit_num(out, "c_b", b.dod_cost);
        out << YAML::EndMap;
    } else {
        out << YAML::Null;
    }

    out << YAML::Key << "economics" << YAML::Value << YAML::BeginMap;
    emit_num(out, "c_f", cfg.economics.fuel_cost);
    emit_num(out, "c_co2", cfg.economics.co2_cost);
    emit_num(out, "e_f", cfg.economics.emission_factor);
    emit_num(out, "c_h2", cfg.economics.h2_cost);
    out << YAML::EndMap;

    const auto& v = cfg.voyage;
    out << YAML::Key << "voyage" << YAML::Value << YAML::BeginMap;
    emit_num(out, "dt", v.dt);
    emit_num(out, "horizon_h", v.horizon_h);
    emit_num(out, "distance", v.distance);
    emit_num(out, "cii_max", v.cii_max);
    out << YAML::Key << "cii_active" << YAML::Value << v.cii_active;
    emit_num(out, "capacity", v.capacity);
    emit_analytic(out, "propulsion", v.propulsion);
    out << YAML::Key << "propulsion_intervals" << YAML::Value << v.propulsion_intervals;
    out << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : v.segments) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << to_string(s.kind);
        emit_num(out, "duration_h", s.duration_h);
        emit_num(out, "speed_min", s.speed_min);
        emit_num(out, "speed_max", s.speed_max);
        emit_num(out, "speed_delta_max", s.speed_delta_max);
        out << YAML::Key << "zero_emission" << YAML::Value << s.zero_emission;
        if (!s.hotel_states.empty()) out << YAML::Key << "hotel_states" << YAML::Value << s.hotel_states;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    const auto& m = cfg.load_model;
    out << YAML::Key << "load_model" << YAML::Value << YAML::BeginMap;
    emit_num(out, "step_h", m.step_h);
    out << YAML::Key << "states" << YAML::Value << YAML::BeginSeq;
    for (std::size_t k = 0; k < m.labels.size(); ++k) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "label" << YAML::Value << m.labels[k];
        emit_num(out, "hotel_mw", m.hotel[k]);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "transition" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : m.transition) {
        out << YAML::Flow << YAML::BeginSeq;
        for (double p : row) out << format_number(p);
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "masks" << YAML::Value << YAML::BeginMap;
    for (const auto& [label, states] : m.masks) {
        out << YAML::Key << label << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& s : states) out << s;
        out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    out << YAML::EndMap;

    const auto& so = cfg.solver;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    emit_num(out, "rel_gap", so.rel_gap);
    emit_num(out, "int_tol", so.int_tol);
    emit_num(out, "time_limit", so.time_limit);
    out << YAML::Key << "node_limit" << YAML::Value << so.node_limit;
    out << YAML::Key << "backend" << YAML::Value << (so.backend == SolverBackend::internal ? "internal" : "external");
    out << YAML::Key << "external_command" << YAML::Value << so.external_command;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace shipmg
