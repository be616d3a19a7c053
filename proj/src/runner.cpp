#include "shipmg/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "shipmg/csv.hpp"
#include "shipmg/external.hpp"
#include "shipmg/milp_model.hpp"

namespace shipmg {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_case_outputs(const CaseResult& r, const std::string& out_dir) {
    prepare_dir(out_dir);
    const fs::path dir(out_dir);
    {
        auto os = open_output(dir / "load_profile.csv");
        write_profile_csv(os, r.profile);
    }
    std::ostringstream summary;
    summary << "status: " << to_string(r.solution.status) << '\n';
    if (std::isfinite(r.solution.objective)) summary << "objective: " << format_number(r.solution.objective) << '\n';
    if (std::isfinite(r.solution.bound)) summary << "bound: " << format_number(r.solution.bound) << '\n';
    if (!r.message.empty()) summary << "message: " << r.message << '\n';
    if (r.kpis) {
        {
            auto os = open_output(dir / "series.csv");
            write_series_csv(os, *r.kpis);
        }
        {
            auto os = open_output(dir / "kpis.csv");
            write_kpis_csv(os, *r.kpis);
        }
        emit_plot_data(*r.kpis, out_dir);
        summary << '\n' << summary_table({{"case", *r.kpis}});
    }
    auto os = open_output(dir / "summary.txt");
    os << summary.str();
}

std::string matrix_value(const SweepCell& c, double KpiReport::*field) {
    if (!c.kpis) return "NaN";
    return format_number((*c.kpis).*field);
}

}  // namespace

int exit_code_for(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal:
        case SolveStatus::gap_reached: return kExitOk;
        case SolveStatus::infeasible: return kExitInfeasible;
        case SolveStatus::time_limit:
        case SolveStatus::node_limit: return kExitLimit;
        case SolveStatus::error: break;
    }
    return kExitError;
}

CaseResult run_case(const ScenarioConfig& config, std::uint64_t seed, const std::string& out_dir) {
    LoadProfile profile;
    try {
        validate(config);
        profile = simulate(config.load_model, config.voyage, seed);
    } catch (const std::exception& e) {
        CaseResult r;
        r.exit_code = kExitError;
        r.message = e.what();
        return r;
    }
    return run_case(config, profile, out_dir);
}

CaseResult run_case(const ScenarioConfig& config, const LoadProfile& profile, const std::string& out_dir) {
    CaseResult r;
    r.profile = profile;
    try {
        validate(config);
        check_profile(profile, config.voyage);
        const auto dm = build(config, profile);
        r.solution = solve_dispatch(dm, config.solver);
        r.exit_code = exit_code_for(r.solution.status);
        r.message = r.solution.diagnostic;
        if (!r.solution.x.empty()) r.kpis = kpis(r.solution, config);
    } catch (const InfeasibleScenario& e) {
        r.solution.status = SolveStatus::infeasible;
        r.exit_code = kExitInfeasible;
        r.message = e.what();
    } catch (const std::exception& e) {
        r.exit_code = kExitError;
        r.message = e.what();
        return r;
    }
    if (!out_dir.empty()) {
        try {
            write_case_outputs(r, out_dir);
        } catch (const std::exception& e) {
            r.exit_code = kExitError;
            r.message = e.what();
        }
    }
    return r;
}

const char* to_string(CellStatus s) {
    switch (s) {
        case CellStatus::feasible: return "feasible";
        case CellStatus::infeasible: return "infeasible";
        case CellStatus::failed: return "failed";
    }
    return "failed";
}

CellStatus cell_status_from_string(const std::string& s) {
    for (auto c : {CellStatus::feasible, CellStatus::infeasible, CellStatus::failed})
        if (s == to_string(c)) return c;
    throw std::invalid_argument("unknown cell status '" + s + "'");
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("grid size must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(n), lo);
    for (int k = 1; k < n; ++k) v[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (n - 1);
    if (n > 1) v.back() = hi;
    return v;
}

SweepSpec parse_grid(const std::string& text) {
    SweepSpec spec;
    const auto numbers = [&](const std::string& part) {
        std::vector<double> out;
        for (const auto& f : csv::split(part)) {
            try {
                out.push_back(csv::parse_double(f));
            } catch (const std::exception&) {
                throw std::invalid_argument("invalid grid value '" + f + "' in '" + text + "'");
            }
            if (!(out.back() >= 0.0)) throw std::invalid_argument("grid values must be non-negative in '" + text + "'");
        }
        return out;
    };
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        spec.fc_ratings = numbers(text.substr(0, colon));
        spec.bess_energies = numbers(text.substr(colon + 1));
    } else if (const auto x = text.find('x'); x != std::string::npos) {
        int n = 0, m = 0;
        try {
            std::size_t used = 0;
            n = std::stoi(text.substr(0, x), &used);
            if (used != x) throw std::invalid_argument("");
            m = std::stoi(text.substr(x + 1), &used);
            if (used != text.size() - x - 1) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid grid '" + text + "' (expected NxM or fc,...:e,...)");
        }
        if (n < 1 || m < 1) throw std::invalid_argument("grid dimensions must be >= 1 in '" + text + "'");
        spec.fc_ratings = linspace(0.0, 10.0, n);
        spec.bess_energies = linspace(0.0, 10.0, m);
    } else {
        throw std::invalid_argument("invalid grid '" + text + "' (expected NxM or fc,...:e,...)");
    }
    if (spec.fc_ratings.empty() || spec.bess_energies.empty()) throw std::invalid_argument("empty grid '" + text + "'");
    return spec;
}

ScenarioConfig cell_config(const ScenarioConfig& base, double p_fc, double e_b, double c_rate) {
    ScenarioConfig c = base;
    if (p_fc > 0.0) {
        FuelCellSpec fc = base.fuel_cell.value_or(FuelCellSpec{});
        if (fc.h2_curve) {
            // Keep the specific consumption: scale both axes with the rating.
            const double k = p_fc / fc.rated_power;
            for (double& x : fc.h2_curve->x) x *= k;
            for (double& y : fc.h2_curve->y) y *= k;
        }
        fc.rated_power = p_fc;
        c.fuel_cell = fc;
        if (!c.h2_storage) c.h2_storage = HydrogenStorageSpec{};
    } else {
        c.fuel_cell.reset();
        c.h2_storage.reset();
    }
    if (e_b > 0.0) {
        BessSpec b = base.bess.value_or(BessSpec{});
        b.rated_energy = e_b;
        b.rated_power = e_b * c_rate;
        c.bess = b;
    } else {
        c.bess.reset();
    }
    return c;
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, std::uint64_t seed, const std::string& out_dir) {
    validate(base);
    const LoadProfile profile = simulate(base.load_model, base.voyage, seed);
    const std::size_t n_cells = spec.fc_ratings.size() * spec.bess_energies.size();
    const std::size_t variants = spec.co2_tax_off ? 2 : 1;
    std::vector<SweepCell> cells(n_cells * variants);

    const auto solve_cell = [&](std::size_t k) {
        const std::size_t idx = k % n_cells;
        SweepCell& cell = cells[k];
        cell.p_fc = spec.fc_ratings[idx / spec.bess_energies.size()];
        cell.e_b = spec.bess_energies[idx % spec.bess_energies.size()];
        try {
            auto cfg = cell_config(base, cell.p_fc, cell.e_b, spec.bess_c_rate);
            if (k >= n_cells) cfg.economics.co2_cost = 0.0;
            const auto r = run_case(cfg, profile);
            cell.solver_status = r.solution.status;
            cell.diagnostic = r.message;
            if (r.kpis) {
                cell.status = CellStatus::feasible;
                cell.kpis = r.kpis;
            } else if (r.exit_code == kExitInfeasible) {
                cell.status = CellStatus::infeasible;
            } else {
                cell.status = CellStatus::failed;
            }
        } catch (const std::exception& e) {
            cell.status = CellStatus::failed;
            cell.diagnostic = e.what();
        }
    };

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) solve_cell(k);
    };
    const auto threads = static_cast<std::size_t>(std::max(1, spec.workers));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(threads, cells.size()); ++w) pool.emplace_back(worker);
    worker();
    pool.clear();

    SweepResult result;
    const auto grid_of = [&](std::size_t offset) {
        SweepGrid g;
        g.fc_ratings = spec.fc_ratings;
        g.bess_energies = spec.bess_energies;
        g.cells.assign(cells.begin() + static_cast<std::ptrdiff_t>(offset),
                       cells.begin() + static_cast<std::ptrdiff_t>(offset + n_cells));
        return g;
    };
    result.grid = grid_of(0);
    if (spec.co2_tax_off) result.co2_tax_off = grid_of(n_cells);

    if (!out_dir.empty()) {
        prepare_dir(out_dir);
        {
            auto os = open_output(fs::path(out_dir) / "sweep.csv");
            write_sweep_csv(os, result.grid);
        }
        emit_plot_data(result.grid, out_dir);
        if (result.co2_tax_off) {
            auto os = open_output(fs::path(out_dir) / "sweep_co2_tax_off.csv");
            write_sweep_csv(os, *result.co2_tax_off);
            emit_plot_data(*result.co2_tax_off, out_dir, nullptr, "_co2_tax_off");
        }
    }
    return result;
}

void write_sweep_csv(std::ostream& os, const SweepGrid& grid) {
    csv::write_row(os, {"p_fc_mw", "e_b_mwh", "status", "total_cost_eur", "total_fuel_kg", "total_h2_kg", "total_co2_kg", "cii",
                        "lf_avg"});
    for (const auto& c : grid.cells) {
        std::vector<std::string> row = {format_number(c.p_fc), format_number(c.e_b), to_string(c.status)};
        for (auto f : {&KpiReport::total_cost, &KpiReport::total_fuel, &KpiReport::total_h2, &KpiReport::total_co2,
                       &KpiReport::cii, &KpiReport::lf_avg})
            row.push_back(c.kpis ? format_number((*c.kpis).*f) : std::string());
        csv::write_row(os, row);
    }
}

SweepGrid read_sweep_csv(std::istream& is) {
    const auto t = csv::read(is);
    SweepGrid g;
    const auto add_unique = [](std::vector<double>& v, double x) {
        if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    };
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        SweepCell c;
        c.p_fc = t.number(r, "p_fc_mw");
        c.e_b = t.number(r, "e_b_mwh");
        c.status = cell_status_from_string(t.text(r, "status"));
        if (!t.text(r, "total_cost_eur").empty()) {
            KpiReport k;
            k.total_cost = t.number(r, "total_cost_eur");
            k.total_fuel = t.number(r, "total_fuel_kg");
            k.total_h2 = t.number(r, "total_h2_kg");
            k.total_co2 = t.number(r, "total_co2_kg");
            k.cii = t.number(r, "cii");
            k.lf_avg = t.number(r, "lf_avg");
            c.kpis = k;
        }
        add_unique(g.fc_ratings, c.p_fc);
        add_unique(g.bess_energies, c.e_b);
        g.cells.push_back(std::move(c));
    }
    if (g.cells.size() != g.fc_ratings.size() * g.bess_energies.size())
        throw csv::CsvError("sweep.csv: grid is not rectangular");
    for (std::size_t k = 0; k < g.cells.size(); ++k) {
        const auto& c = g.cells[k];
        if (c.p_fc != g.fc_ratings[k / g.bess_energies.size()] || c.e_b != g.bess_energies[k % g.bess_energies.size()])
            throw csv::CsvError("sweep.csv: cells are not in row-major order");
    }
    return g;
}

std::vector<std::string> emit_plot_data(const SweepGrid& grid, const std::string& out_dir, std::string* warning,
                                        const std::string& suffix) {
    if (grid.empty()) {
        if (warning) *warning = "empty sweep: no plot data written";
        return {};
    }
    prepare_dir(out_dir);
    const std::pair<const char*, double KpiReport::*> fields[] = {
        {"total_cost_eur", &KpiReport::total_cost}, {"total_fuel_kg", &KpiReport::total_fuel},
        {"total_h2_kg", &KpiReport::total_h2},      {"total_co2_kg", &KpiReport::total_co2},
        {"cii", &KpiReport::cii},                   {"lf_avg", &KpiReport::lf_avg}};
    std::vector<std::string> written;
    for (const auto& [name, field] : fields) {
        const auto path = fs::path(out_dir) / ("heatmap_" + std::string(name) + suffix + ".dat");
        auto os = open_output(path);
        os << "# " << name << ": rows p_fc_mw =";
        for (double p : grid.fc_ratings) os << ' ' << format_number(p);
        os << "; columns e_b_mwh =";
        for (double e : grid.bess_energies) os << ' ' << format_number(e);
        os << '\n';
        for (std::size_t i = 0; i < grid.fc_ratings.size(); ++i) {
            for (std::size_t j = 0; j < grid.bess_energies.size(); ++j) os << (j ? " " : "") << matrix_value(grid.cell(i, j), field);
            os << '\n';
        }
        written.push_back(path.string());
    }
    return written;
}

std::vector<std::string> emit_plot_data(const KpiReport& series, const std::string& out_dir) {
    prepare_dir(out_dir);
    const auto path = fs::path(out_dir) / "dispatch_long.csv";
    auto os = open_output(path);
    csv::write_row(os, {"step", "time_h", "source", "power_mw"});
    for (int t = 0; t < series.steps(); ++t) {
        const auto ts = static_cast<std::size_t>(t);
        const auto emit = [&](const std::string& source, double p) {
            csv::write_row(os, {std::to_string(t + 1), format_number(t * series.dt), source, format_number(p)});
        };
        for (std::size_t i = 0; i < series.p_dg.size(); ++i) emit("DG" + std::to_string(i + 1), series.p_dg[i][ts]);
        if (series.has_fc) emit("PEMFC", series.p_fc[ts]);
        if (series.has_bess) emit("BESS", series.p_b_d[ts] - series.p_b_c[ts]);
        emit("load", series.p_load[ts]);
    }
    return {path.string()};
}

}  // namespace shipmg
