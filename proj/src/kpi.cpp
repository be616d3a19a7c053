#include "shipmg/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "shipmg/csv.hpp"
#include "shipmg/milp_model.hpp"

namespace shipmg {

namespace {

double at(const std::vector<double>& v, int t) { return v.empty() ? 0.0 : v[static_cast<std::size_t>(t)]; }

std::vector<double> or_zeros(const std::vector<double>& v, int n) {
    return v.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.0) : v;
}

double relative_change(double a, double b) {
    if (a == 0.0) return b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b);
    return (b - a) / std::abs(a) * 100.0;
}

const std::vector<std::string> kScalarColumns = {"total_cost_eur", "total_fuel_kg", "total_h2_kg", "total_co2_kg", "cii",
                                                 "lf_avg",         "distance_nm",   "starts",      "dt_h"};

}  // namespace

std::vector<std::optional<double>> cii_profile(const DispatchSolution& solution, const ScenarioConfig& config) {
    std::vector<std::optional<double>> out(static_cast<std::size_t>(solution.steps));
    double co2 = 0.0, dist = 0.0;
    for (int t = 0; t < solution.steps; ++t) {
        for (const auto& m : solution.mdot_f) co2 += m[static_cast<std::size_t>(t)] * solution.dt * config.economics.emission_factor;
        dist += at(solution.v, t) * solution.dt;
        if (dist > 0.0) out[static_cast<std::size_t>(t)] = co2 * 1e3 / (config.voyage.capacity * dist);
    }
    return out;
}

KpiReport kpis(const DispatchSolution& s, const ScenarioConfig& config) {
    KpiReport r;
    const int T = s.steps;
    const auto n = static_cast<std::size_t>(T);
    r.dt = s.dt;
    r.total_cost = evaluate_objective(s, config);
    r.hotel = or_zeros(s.hotel, T);
    r.p_prop = or_zeros(s.p_prop, T);
    r.v = or_zeros(s.v, T);
    r.p_load.resize(n);
    for (std::size_t t = 0; t < n; ++t) r.p_load[t] = s.p_load.empty() ? r.hotel[t] + r.p_prop[t] : s.p_load[t];
    r.p_dg = s.p_dg;
    r.u_dg = s.u;
    r.has_fc = !s.p_fc.empty();
    r.has_bess = !s.p_b_c.empty();
    r.p_fc = or_zeros(s.p_fc, T);
    r.p_b_c = or_zeros(s.p_b_c, T);
    r.p_b_d = or_zeros(s.p_b_d, T);
    r.soc = s.soc;
    r.loh = s.loh;
    r.fuel.assign(n, 0.0);
    r.h2.assign(n, 0.0);
    r.co2.assign(n, 0.0);

    double lf_sum = 0.0;
    long committed = 0;
    for (int t = 0; t < T; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        for (int i = 0; i < s.generators(); ++i) {
            const auto is = static_cast<std::size_t>(i);
            r.fuel[ts] += s.mdot_f[is][ts] * s.dt;
            r.starts += static_cast<int>(std::lround(s.su[is][ts]));
            if (s.u[is][ts] > 0.5) {
                lf_sum += s.p_dg[is][ts] / config.generators[is].rated_power;
                ++committed;
            }
        }
        r.h2[ts] = at(s.mdot_h2, t) * s.dt;
        r.starts += static_cast<int>(std::lround(at(s.su_fc, t)));
        r.co2[ts] = r.fuel[ts] * config.economics.emission_factor;
        r.total_fuel += r.fuel[ts];
        r.total_h2 += r.h2[ts];
        r.distance += r.v[ts] * s.dt;
    }
    r.total_co2 = config.economics.emission_factor * r.total_fuel;
    r.lf_avg = committed > 0 ? lf_sum / static_cast<double>(committed) : 0.0;
    const double d = config.voyage.distance;
    r.cii = d > 0.0 ? r.total_co2 * 1e3 / (config.voyage.capacity * d) : 0.0;
    r.cii_cum = cii_profile(s, config);
    return r;
}

const KpiDelta& KpiComparison::operator[](const std::string& name) const {
    for (const auto& d : deltas)
        if (d.name == name) return d;
    throw std::out_of_range("no KPI named '" + name + "'");
}

KpiComparison compare(const KpiReport& a, const KpiReport& b) {
    KpiComparison c;
    const std::pair<const char*, double KpiReport::*> fields[] = {
        {"total_cost", &KpiReport::total_cost}, {"total_fuel", &KpiReport::total_fuel}, {"total_h2", &KpiReport::total_h2},
        {"total_co2", &KpiReport::total_co2},   {"cii", &KpiReport::cii}};
    for (const auto& [name, field] : fields) c.deltas.push_back({name, a.*field, b.*field, relative_change(a.*field, b.*field)});
    c.deltas.push_back({"lf_avg", a.lf_avg, b.lf_avg, (b.lf_avg - a.lf_avg) * 100.0});
    c.co2_saving = a.total_co2 - b.total_co2;
    return c;
}

void write_kpis_csv(std::ostream& os, const KpiReport& r) {
    csv::write_row(os, kScalarColumns);
    csv::write_row(os, {format_number(r.total_cost), format_number(r.total_fuel), format_number(r.total_h2),
                        format_number(r.total_co2), format_number(r.cii), format_number(r.lf_avg), format_number(r.distance),
                        std::to_string(r.starts), format_number(r.dt)});
}

KpiReport read_kpis_csv(std::istream& is) {
    const auto t = csv::read(is);
    if (t.rows.size() != 1) throw csv::CsvError("kpis.csv: expected exactly one data row");
    KpiReport r;
    r.total_cost = t.number(0, "total_cost_eur");
    r.total_fuel = t.number(0, "total_fuel_kg");
    r.total_h2 = t.number(0, "total_h2_kg");
    r.total_co2 = t.number(0, "total_co2_kg");
    r.cii = t.number(0, "cii");
    r.lf_avg = t.number(0, "lf_avg");
    r.distance = t.number(0, "distance_nm");
    r.starts = static_cast<int>(t.number(0, "starts"));
    r.dt = t.number(0, "dt_h");
    return r;
}

void write_series_csv(std::ostream& os, const KpiReport& r) {
    std::vector<std::string> header = {"step", "time_h", "hotel_mw", "p_prop_mw", "p_load_mw", "v_kn"};
    for (std::size_t i = 0; i < r.p_dg.size(); ++i) {
        header.push_back("u_dg" + std::to_string(i + 1));
        header.push_back("p_dg" + std::to_string(i + 1) + "_mw");
    }
    for (const char* h : {"p_fc_mw", "p_b_c_mw", "p_b_d_mw", "fuel_kg", "h2_kg", "co2_kg", "cii_cum", "soc_start", "soc_end",
                          "loh_start", "loh_end"})
        header.emplace_back(h);
    csv::write_row(os, header);
    const auto state = [](const std::vector<double>& v, std::size_t k) { return v.empty() ? std::string() : format_number(v[k]); };
    for (std::size_t t = 0; t < r.hotel.size(); ++t) {
        std::vector<std::string> row = {std::to_string(t + 1),        format_number(static_cast<double>(t) * r.dt),
                                        format_number(r.hotel[t]),    format_number(r.p_prop[t]),
                                        format_number(r.p_load[t]),   format_number(r.v[t])};
        for (std::size_t i = 0; i < r.p_dg.size(); ++i) {
            row.push_back(format_number(r.u_dg[i][t]));
            row.push_back(format_number(r.p_dg[i][t]));
        }
        for (double x : {r.p_fc[t], r.p_b_c[t], r.p_b_d[t], r.fuel[t], r.h2[t], r.co2[t]}) row.push_back(format_number(x));
        row.push_back(r.cii_cum[t] ? format_number(*r.cii_cum[t]) : std::string());
        row.push_back(state(r.soc, t));
        row.push_back(state(r.soc, t + 1));
        row.push_back(state(r.loh, t));
        row.push_back(state(r.loh, t + 1));
        csv::write_row(os, row);
    }
}

KpiReport read_series_csv(std::istream& is) {
    const auto tab = csv::read(is);
    KpiReport r;
    std::size_t gens = 0;
    while (std::find(tab.header.begin(), tab.header.end(), "p_dg" + std::to_string(gens + 1) + "_mw") != tab.header.end()) ++gens;
    r.p_dg.assign(gens, {});
    r.u_dg.assign(gens, {});
    const auto n = tab.rows.size();
    if (n >= 2) r.dt = tab.number(1, "time_h") - tab.number(0, "time_h");
    const auto optional_state = [&](std::size_t row, const char* name, std::vector<double>& out) {
        const auto& cell = tab.text(row, name);
        if (!cell.empty()) out.push_back(csv::parse_double(cell));
    };
    for (std::size_t t = 0; t < n; ++t) {
        r.hotel.push_back(tab.number(t, "hotel_mw"));
        r.p_prop.push_back(tab.number(t, "p_prop_mw"));
        r.p_load.push_back(tab.number(t, "p_load_mw"));
        r.v.push_back(tab.number(t, "v_kn"));
        for (std::size_t i = 0; i < gens; ++i) {
            r.u_dg[i].push_back(tab.number(t, "u_dg" + std::to_string(i + 1)));
            r.p_dg[i].push_back(tab.number(t, "p_dg" + std::to_string(i + 1) + "_mw"));
        }
        r.p_fc.push_back(tab.number(t, "p_fc_mw"));
        r.p_b_c.push_back(tab.number(t, "p_b_c_mw"));
        r.p_b_d.push_back(tab.number(t, "p_b_d_mw"));
        r.fuel.push_back(tab.number(t, "fuel_kg"));
        r.h2.push_back(tab.number(t, "h2_kg"));
        r.co2.push_back(tab.number(t, "co2_kg"));
        const auto& c = tab.text(t, "cii_cum");
        r.cii_cum.push_back(c.empty() ? std::nullopt : std::optional<double>(csv::parse_double(c)));
        if (t == 0) {
            optional_state(t, "soc_start", r.soc);
            optional_state(t, "loh_start", r.loh);
        }
        optional_state(t, "soc_end", r.soc);
        optional_state(t, "loh_end", r.loh);
    }
    return r;
}

std::string summary_table(const std::vector<std::pair<std::string, KpiReport>>& cases) {
    std::ostringstream os;
    os << std::fixed;
    const int label_w = 22, col_w = 14;
    os << std::left << std::setw(label_w) << "" << std::right;
    for (const auto& [name, _] : cases) os << std::setw(col_w) << name;
    os << '\n';
    const auto line = [&](const char* label, int precision, auto value) {
        os << std::left << std::setw(label_w) << label << std::right << std::setprecision(precision);
        for (const auto& c : cases) os << std::setw(col_w) << value(c.second);
        os << '\n';
    };
    line("Total Cost [EUR]", 0, [](const KpiReport& r) { return r.total_cost; });
    line("Fuel [kg]", 0, [](const KpiReport& r) { return r.total_fuel; });
    line("H2 [kg]", 0, [](const KpiReport& r) { return r.total_h2; });
    line("CO2 [kg]", 0, [](const KpiReport& r) { return r.total_co2; });
    line("CII [g/(t nm)]", 1, [](const KpiReport& r) { return r.cii; });
    line("LF [%]", 2, [](const KpiReport& r) { return r.lf_avg * 100.0; });
    line("Starts", 0, [](const KpiReport& r) { return static_cast<double>(r.starts); });
    return os.str();
}

}  // namespace shipmg
