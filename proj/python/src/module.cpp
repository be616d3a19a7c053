// Python bindings: scenario configuration, load simulation, single-case
// optimization and KPI comparison.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shipmg/kpi.hpp"
#include "shipmg/load.hpp"
#include "shipmg/runner.hpp"
#include "shipmg/scenario.hpp"

namespace py = pybind11;
using namespace shipmg;

namespace {

py::dict kpi_dict(const KpiReport& r) {
    py::dict d;
    d["total_cost"] = r.total_cost;
    d["total_fuel"] = r.total_fuel;
    d["total_h2"] = r.total_h2;
    d["total_co2"] = r.total_co2;
    d["cii"] = r.cii;
    d["lf_avg"] = r.lf_avg;
    d["distance"] = r.distance;
    d["starts"] = r.starts;
    d["dt"] = r.dt;
    return d;
}

py::dict series_dict(const KpiReport& r) {
    py::dict d;
    d["hotel"] = r.hotel;
    d["p_prop"] = r.p_prop;
    d["p_load"] = r.p_load;
    d["v"] = r.v;
    d["p_dg"] = r.p_dg;
    d["u_dg"] = r.u_dg;
    d["p_fc"] = r.p_fc;
    d["p_b_c"] = r.p_b_c;
    d["p_b_d"] = r.p_b_d;
    d["fuel"] = r.fuel;
    d["h2"] = r.h2;
    d["co2"] = r.co2;
    d["cii_cum"] = r.cii_cum;
    d["soc"] = r.soc;
    d["loh"] = r.loh;
    return d;
}

KpiReport kpi_from_dict(const py::dict& d) {
    KpiReport r;
    r.total_cost = d["total_cost"].cast<double>();
    r.total_fuel = d["total_fuel"].cast<double>();
    r.total_h2 = d["total_h2"].cast<double>();
    r.total_co2 = d["total_co2"].cast<double>();
    r.cii = d["cii"].cast<double>();
    r.lf_avg = d["lf_avg"].cast<double>();
    return r;
}

}  // namespace

PYBIND11_MODULE(_shipmg, m) {
    m.doc() = "Optimal power management of a shipboard microgrid";
    m.attr("__version__") = SHIPMG_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<ScenarioConfig>(m, "Scenario")
        .def_static(
            "default", [](const std::string& study_case) { return default_scenario(study_case_from_string(study_case)); },
            py::arg("study_case") = "sc2", "Built-in study case 'sc1' (diesel only) or 'sc2' (fuel cell and battery)")
        .def_static("from_yaml", &parse_config, py::arg("text"), "Parse and validate a YAML configuration")
        .def_static("load", &load_config, py::arg("path"), "Read and validate a YAML configuration file")
        .def("to_yaml", &serialize_config)
        .def("validate", &validate)
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
        .def_property_readonly("has_fuel_cell", [](const ScenarioConfig& c) { return c.fuel_cell.has_value(); })
        .def_property_readonly("has_bess", [](const ScenarioConfig& c) { return c.bess.has_value(); })
        .def_property(
            "dt", [](const ScenarioConfig& c) { return c.voyage.dt; }, [](ScenarioConfig& c, double v) { c.voyage.dt = v; })
        .def_property(
            "co2_cost", [](const ScenarioConfig& c) { return c.economics.co2_cost; },
            [](ScenarioConfig& c, double v) { c.economics.co2_cost = v; })
        .def_property(
            "rel_gap", [](const ScenarioConfig& c) { return c.solver.rel_gap; }, [](ScenarioConfig& c, double v) { c.solver.rel_gap = v; })
        .def_property(
            "time_limit", [](const ScenarioConfig& c) { return c.solver.time_limit; },
            [](ScenarioConfig& c, double v) { c.solver.time_limit = v; })
        .def_property(
            "solver", [](const ScenarioConfig& c) { return c.solver.backend == SolverBackend::external ? "external" : "internal"; },
            [](ScenarioConfig& c, const std::string& s) {
                if (s != "internal" && s != "external") throw py::value_error("solver must be 'internal' or 'external'");
                c.solver.backend = s == "external" ? SolverBackend::external : SolverBackend::internal;
            })
        .def_property(
            "external_command", [](const ScenarioConfig& c) { return c.solver.external_command; },
            [](ScenarioConfig& c, const std::string& s) { c.solver.external_command = s; })
        .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; })
        .def("__repr__", [](const ScenarioConfig& c) { return "<Scenario " + c.name + ">"; });

    m.def(
        "simulate_load",
        [](const ScenarioConfig& c, std::uint64_t seed) {
            validate(c);
            const auto p = simulate(c.load_model, c.voyage, seed);
            py::dict d;
            d["dt"] = p.dt;
            d["hotel"] = p.hotel;
            std::vector<std::string> kinds;
            for (auto k : p.oc_kind) kinds.emplace_back(to_string(k));
            d["oc_kind"] = kinds;
            d["zero_emission"] = p.zero_emission;
            return d;
        },
        py::arg("scenario"), py::arg("seed"), "Sample the hotel-load profile (MW per step) of the voyage");

    m.def(
        "optimize",
        [](const ScenarioConfig& c, std::optional<std::uint64_t> seed, const std::string& out_dir) {
            CaseResult r;
            {
                py::gil_scoped_release release;
                r = run_case(c, seed.value_or(c.rng_seed), out_dir);
            }
            py::dict d;
            d["status"] = std::string(to_string(r.solution.status));
            d["exit_code"] = r.exit_code;
            d["message"] = r.message;
            d["objective"] = r.solution.objective;
            d["bound"] = r.solution.bound;
            d["seconds"] = r.solution.seconds;
            if (r.kpis) {
                d["kpis"] = kpi_dict(*r.kpis);
                d["series"] = series_dict(*r.kpis);
            } else {
                d["kpis"] = py::none();
                d["series"] = py::none();
            }
            return d;
        },
        py::arg("scenario"), py::arg("seed") = py::none(), py::arg("out_dir") = "",
        "Optimize the dispatch; returns status, exit code, objective, KPIs and per-step series");

    m.def(
        "compare",
        [](const py::dict& a, const py::dict& b) {
            const auto c = compare(kpi_from_dict(a), kpi_from_dict(b));
            py::dict d;
            for (const auto& delta : c.deltas) d[py::str(delta.name)] = delta.change;
            d["co2_saving"] = c.co2_saving;
            return d;
        },
        py::arg("a"), py::arg("b"), "Changes from KPI set a to b: percent (percentage points for lf_avg) and CO2 saving in kg");
}
