// Command-line front end: load simulation, single-case optimization,
// FC x BESS sensitivity sweeps and KPI reports.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shipmg/csv.hpp"
#include "shipmg/kpi.hpp"
#include "shipmg/load.hpp"
#include "shipmg/runner.hpp"
#include "shipmg/scenario.hpp"

namespace fs = std::filesystem;
using namespace shipmg;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string study_case;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string solver;
    bool no_co2_tax = false;
};

void add_scenario_options(CLI::App* cmd, CommonOptions& o, const std::string& default_case) {
    o.study_case = default_case;
    cmd->add_option("--config", o.config_path, "Scenario configuration file (YAML)")->check(CLI::ExistingFile);
    cmd->add_option("--case", o.study_case, "Built-in study case when no --config is given")
        ->check(CLI::IsMember({"sc1", "sc2"}))
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Load-profile seed (default: the configuration's rng_seed)");
}

void add_solver_options(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--solver", o.solver, "MILP backend (default: the configuration's)")->check(CLI::IsMember({"internal", "external"}));
    cmd->add_flag("--no-co2-tax", o.no_co2_tax, "Set the carbon price c_CO2 to zero");
}

ScenarioConfig scenario(const CommonOptions& o) {
    ScenarioConfig cfg = o.config_path.empty() ? default_scenario(study_case_from_string(o.study_case)) : load_config(o.config_path);
    if (!o.solver.empty()) cfg.solver.backend = o.solver == "external" ? SolverBackend::external : SolverBackend::internal;
    validate(cfg);
    return cfg;
}

std::uint64_t seed_of(const CommonOptions& o, const ScenarioConfig& cfg) { return o.seed.value_or(cfg.rng_seed); }

int simulate_load(const CommonOptions& o) {
    const auto cfg = scenario(o);
    const auto profile = simulate(cfg.load_model, cfg.voyage, seed_of(o, cfg));
    if (o.out.empty()) {
        write_profile_csv(std::cout, profile);
        return kExitOk;
    }
    fs::create_directories(o.out);
    const auto path = fs::path(o.out) / "load_profile.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_profile_csv(os, profile);
    std::cout << "wrote " << path.string() << '\n';
    return kExitOk;
}

int optimize(const CommonOptions& o) {
    auto cfg = scenario(o);
    if (o.no_co2_tax) cfg.economics.co2_cost = 0.0;
    const auto r = run_case(cfg, seed_of(o, cfg), o.out);
    if (r.exit_code == kExitError) {
        std::cerr << "error: " << r.message << '\n';
        return r.exit_code;
    }
    std::cout << "status: " << to_string(r.solution.status) << '\n';
    if (!r.message.empty()) std::cout << "message: " << r.message << '\n';
    if (r.kpis) {
        std::cout << "objective: " << format_number(r.solution.objective) << " EUR, bound: " << format_number(r.solution.bound)
                  << " EUR\n\n"
                  << summary_table({{cfg.name, *r.kpis}});
    }
    if (!o.out.empty()) std::cout << "outputs in " << o.out << '\n';
    return r.exit_code;
}

int sweep(const CommonOptions& o, const std::string& grid, int workers) {
    const auto cfg = scenario(o);
    auto spec = parse_grid(grid);
    spec.workers = workers;
    spec.co2_tax_off = o.no_co2_tax;
    const auto res = run_sweep(cfg, spec, seed_of(o, cfg), o.out);
    std::cout << std::setw(10) << "p_fc_mw" << std::setw(10) << "e_b_mwh" << std::setw(12) << "status" << std::setw(16) << "cost_eur"
              << std::setw(14) << "co2_kg" << '\n';
    for (const auto& c : res.grid.cells) {
        std::cout << std::setw(10) << format_number(c.p_fc) << std::setw(10) << format_number(c.e_b) << std::setw(12) << to_string(c.status);
        if (c.kpis) std::cout << std::setw(16) << std::fixed << std::setprecision(0) << c.kpis->total_cost << std::setw(14) << c.kpis->total_co2;
        std::cout << std::defaultfloat << '\n';
    }
    if (!o.out.empty()) std::cout << "outputs in " << o.out << '\n';
    return kExitOk;
}

int report(const std::vector<std::string>& runs, const std::string& out) {
    std::vector<std::pair<std::string, KpiReport>> cases;
    for (const auto& dir : runs) {
        const auto path = fs::path(dir) / "kpis.csv";
        std::ifstream is(path, std::ios::binary);
        if (!is) throw std::runtime_error("cannot read " + path.string());
        auto name = fs::path(dir).filename().string();
        if (name.empty()) name = fs::path(dir).parent_path().filename().string();
        cases.emplace_back(name, read_kpis_csv(is));
    }
    std::ostringstream text;
    text << summary_table(cases);
    if (cases.size() == 2) {
        const auto c = compare(cases[0].second, cases[1].second);
        text << "\n" << cases[1].first << " vs " << cases[0].first << ":\n";
        for (const auto& d : c.deltas)
            text << "  " << std::left << std::setw(12) << d.name << std::right << std::showpos << std::fixed << std::setprecision(2) << d.change
                 << (d.name == "lf_avg" ? " pp" : " %") << std::noshowpos << std::defaultfloat << '\n';
        text << "  CO2 saving: " << std::fixed << std::setprecision(0) << c.co2_saving << " kg\n";
    }
    std::cout << text.str();
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream os(fs::path(out) / "report.txt", std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (fs::path(out) / "report.txt").string());
        os << text.str();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal power management of a shipboard microgrid (diesel generators, PEM fuel cell, battery)", "shipmg"};
    app.set_version_flag("--version", std::string("shipmg ") + SHIPMG_VERSION);
    app.require_subcommand(1);

    CommonOptions sim_o, opt_o, sweep_o;
    auto* sim = app.add_subcommand("simulate-load", "Sample the hotel-load profile of a voyage");
    add_scenario_options(sim, sim_o, "sc2");
    sim->add_option("--out", sim_o.out, "Output directory (default: print CSV to stdout)");

    auto* opt = app.add_subcommand("optimize", "Optimize the dispatch of one study case");
    add_scenario_options(opt, opt_o, "sc2");
    add_solver_options(opt, opt_o);
    opt->add_option("--out", opt_o.out, "Output directory for profile, series, KPIs and summary");

    std::string grid = "5x5";
    int workers = 1;
    auto* sw = app.add_subcommand("sweep", "Fuel-cell rating x battery energy sensitivity sweep");
    add_scenario_options(sw, sweep_o, "sc2");
    add_solver_options(sw, sweep_o);
    sw->add_option("--out", sweep_o.out, "Output directory for sweep.csv and heatmap matrices");
    sw->add_option("--grid", grid, "NxM over [0,10] MW x [0,10] MWh, or fc1,fc2,...:e1,e2,...")->capture_default_str();
    sw->add_option("--workers", workers, "Parallel worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sw->get_option("--no-co2-tax")->description("Also run every cell with c_CO2 = 0");

    std::vector<std::string> runs;
    std::string report_out;
    auto* rep = app.add_subcommand("report", "Summarize and compare optimize outputs");
    rep->add_option("runs", runs, "Output directories of optimize runs")->required()->check(CLI::ExistingDirectory);
    rep->add_option("--out", report_out, "Directory for report.txt");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (sim->parsed()) return simulate_load(sim_o);
        if (opt->parsed()) return optimize(opt_o);
        if (sw->parsed()) return sweep(sweep_o, grid, workers);
        if (rep->parsed()) return report(runs, report_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
