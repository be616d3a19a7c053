#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "shipmg/csv.hpp"
#include "shipmg/runner.hpp"
#include "test_instances.hpp"

using namespace shipmg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("shipmg_test_runner_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

ScenarioConfig fast_small(StudyCase c) {
    auto cfg = inst::small_scenario(c);
    cfg.solver.rel_gap = 1e-4;
    return cfg;
}

// Feasibility may only switch on as either rating grows.
bool monotone_frontier(const SweepGrid& g) {
    for (std::size_t i = 0; i < g.fc_ratings.size(); ++i)
        for (std::size_t j = 0; j < g.bess_energies.size(); ++j) {
            if (g.cell(i, j).status != CellStatus::feasible) continue;
            if (i + 1 < g.fc_ratings.size() && g.cell(i + 1, j).status != CellStatus::feasible) return false;
            if (j + 1 < g.bess_energies.size() && g.cell(i, j + 1).status != CellStatus::feasible) return false;
        }
    return true;
}

// Whitespace matrix rows of a heatmap file, skipping the comment header.
std::vector<std::vector<std::string>> matrix(const fs::path& p) {
    std::ifstream is(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        rows.emplace_back(std::istream_iterator<std::string>(ls), std::istream_iterator<std::string>());
    }
    return rows;
}

}  // namespace

TEST_CASE("runner: solver statuses map to process exit codes") {
    CHECK(exit_code_for(SolveStatus::optimal) == 0);
    CHECK(exit_code_for(SolveStatus::gap_reached) == 0);
    CHECK(exit_code_for(SolveStatus::infeasible) == 2);
    CHECK(exit_code_for(SolveStatus::time_limit) == 3);
    CHECK(exit_code_for(SolveStatus::node_limit) == 3);
    CHECK(exit_code_for(SolveStatus::error) == 1);
}

TEST_CASE("runner: the same seed reproduces byte-identical outputs") {
    const auto cfg = fast_small(StudyCase::sc2);
    const auto a = scratch_dir("seed_a"), b = scratch_dir("seed_b");
    const auto ra = run_case(cfg, 11, a.string());
    const auto rb = run_case(cfg, 11, b.string());
    REQUIRE(ra.exit_code == 0);
    REQUIRE(rb.exit_code == 0);
    for (const char* f : {"load_profile.csv", "series.csv", "kpis.csv", "dispatch_long.csv", "summary.txt"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    // A different seed changes the sampled hotel load.
    const auto rc = run_case(cfg, 12, std::string{});
    CHECK(rc.profile.hotel != ra.profile.hotel);
}

TEST_CASE("runner: validation problems are reported as exit code 1") {
    auto cfg = fast_small(StudyCase::sc2);
    cfg.h2_storage.reset();
    const auto r = run_case(cfg, 1);
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.message.empty());
    CHECK_FALSE(r.kpis.has_value());

    // An output path that is an existing file cannot become a directory.
    const auto dir = scratch_dir("blocked");
    fs::create_directories(dir);
    std::ofstream(dir / "file") << "x";
    const auto w = run_case(fast_small(StudyCase::sc2), 1, (dir / "file").string());
    CHECK(w.exit_code == 1);
}

TEST_CASE("runner: a zero-emission step without clean sources is infeasible") {
    auto cfg = fast_small(StudyCase::sc1);
    cfg.voyage.segments[2].zero_emission = true;
    const auto r = run_case(cfg, 1);
    CHECK(r.exit_code == 2);
    CHECK(r.solution.status == SolveStatus::infeasible);
}

TEST_CASE("runner: grid specifications") {
    const auto g = parse_grid("5x5");
    CHECK(g.fc_ratings == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
    CHECK(g.bess_energies == g.fc_ratings);
    const auto r = parse_grid("3x2");
    CHECK(r.fc_ratings == std::vector<double>{0.0, 5.0, 10.0});
    CHECK(r.bess_energies == std::vector<double>{0.0, 10.0});
    const auto e = parse_grid("0,6:1.5");
    CHECK(e.fc_ratings == std::vector<double>{0.0, 6.0});
    CHECK(e.bess_energies == std::vector<double>{1.5});
    for (const char* bad : {"0x2", "2x", "x2", "axb", "1,-1:2", "1,2", ":1", "2x2x2"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_grid(bad), std::invalid_argument);
    }
}

TEST_CASE("runner: sweep cell configurations") {
    const auto base = default_scenario(StudyCase::sc2);
    const auto none = cell_config(base, 0.0, 0.0, 1.0);
    CHECK_FALSE(none.fuel_cell.has_value());
    CHECK_FALSE(none.h2_storage.has_value());
    CHECK_FALSE(none.bess.has_value());

    const auto c = cell_config(base, 2.5, 4.0, 0.5);
    REQUIRE(c.fuel_cell.has_value());
    REQUIRE(c.bess.has_value());
    CHECK(c.fuel_cell->rated_power == 2.5);
    CHECK(c.h2_storage.has_value());
    CHECK(c.bess->rated_energy == 4.0);
    CHECK(c.bess->rated_power == 2.0);
    CHECK(c.bess->eta_c == base.bess->eta_c);

    // Adding components to a diesel-only base uses the default units.
    const auto added = cell_config(default_scenario(StudyCase::sc1), 3.0, 2.0, 1.0);
    CHECK(added.fuel_cell->rated_power == 3.0);
    CHECK(added.h2_storage.has_value());
    CHECK(added.bess->rated_power == 2.0);

    // An explicit hydrogen curve keeps its specific consumption.
    auto tab = base;
    tab.fuel_cell->h2_curve = PiecewiseCurve{{0.0, 3.0, 6.0}, {0.0, 0.2, 0.45}};
    const auto half = cell_config(tab, 3.0, 1.0, 1.0);
    const auto& hc = *half.fuel_cell->h2_curve;
    CHECK(hc.x.back() == doctest::Approx(3.0));
    CHECK(hc.y[1] / hc.x[1] == doctest::Approx(0.2 / 3.0));
    CHECK(hc.y.back() / hc.x.back() == doctest::Approx(0.45 / 6.0));
}

TEST_CASE("runner: a small sweep is monotone, reproducible and round-trips") {
    const auto base = fast_small(StudyCase::sc2);
    SweepSpec spec;
    spec.fc_ratings = {0.0, 6.0};
    spec.bess_energies = {0.0, 5.35};
    spec.co2_tax_off = true;
    const auto dir = scratch_dir("sweep");
    const auto one = run_sweep(base, spec, 5, dir.string());
    spec.workers = 3;
    const auto many = run_sweep(base, spec, 5);

    REQUIRE(one.grid.cells.size() == 4);
    CHECK(one.grid.cell(0, 0).status == CellStatus::infeasible);
    CHECK(one.grid.cell(1, 1).status == CellStatus::feasible);
    CHECK(monotone_frontier(one.grid));
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& a = one.grid.cells[k];
        const auto& b = many.grid.cells[k];
        CHECK(a.status == b.status);
        CHECK(a.p_fc == b.p_fc);
        CHECK(a.e_b == b.e_b);
        if (a.kpis && b.kpis) CHECK(a.kpis->total_cost == b.kpis->total_cost);
    }

    // The c_CO2 = 0 variant never emits less than the taxed run.
    REQUIRE(one.co2_tax_off.has_value());
    const auto& taxed = one.grid.cell(1, 1);
    const auto& free = one.co2_tax_off->cell(1, 1);
    REQUIRE(free.kpis.has_value());
    const double slack = 1e-4 * (taxed.kpis->total_cost + free.kpis->total_cost) / base.economics.co2_cost;
    CHECK(taxed.kpis->total_co2 <= free.kpis->total_co2 + slack);

    std::ifstream is(dir / "sweep.csv");
    const auto back = read_sweep_csv(is);
    CHECK(back.fc_ratings == spec.fc_ratings);
    CHECK(back.bess_energies == spec.bess_energies);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(back.cells[k].status == one.grid.cells[k].status);
        CHECK(back.cells[k].kpis.has_value() == one.grid.cells[k].kpis.has_value());
        if (back.cells[k].kpis) CHECK(back.cells[k].kpis->total_co2 == doctest::Approx(one.grid.cells[k].kpis->total_co2).epsilon(1e-12));
    }

    const auto m = matrix(dir / "heatmap_total_co2_kg.dat");
    REQUIRE(m.size() == 2);
    CHECK(m[0].size() == 2);
    CHECK(m[0][0] == "NaN");
    CHECK(m[1][1] != "NaN");
    CHECK(fs::exists(dir / "sweep_co2_tax_off.csv"));
    CHECK(fs::exists(dir / "heatmap_cii_co2_tax_off.dat"));
}

TEST_CASE("runner: plot data") {
    std::string warning;
    const auto empty_dir = scratch_dir("empty_plot");
    CHECK(emit_plot_data(SweepGrid{}, empty_dir.string(), &warning).empty());
    CHECK_FALSE(warning.empty());
    CHECK_FALSE(fs::exists(empty_dir));

    const auto dir = scratch_dir("dispatch");
    const auto r = run_case(fast_small(StudyCase::sc2), 2, dir.string());
    REQUIRE(r.kpis.has_value());
    std::ifstream is(dir / "dispatch_long.csv");
    const auto t = csv::read(is);
    const int steps = r.kpis->steps();
    // Three generators, the fuel cell, the battery and the load per step.
    REQUIRE(t.rows.size() == static_cast<std::size_t>(6 * steps));
    for (int s = 0; s < steps; ++s) {
        double supply = 0.0, load = 0.0;
        for (std::size_t k = 0; k < 6; ++k) {
            const auto row = static_cast<std::size_t>(6 * s) + k;
            const auto src = t.text(row, "source");
            if (src == "load")
                load = t.number(row, "power_mw");
            else
                supply += t.number(row, "power_mw");
        }
        CHECK(supply == doctest::Approx(load).epsilon(1e-6));
    }
    CHECK(t.text(0, "source") == "DG1");
    CHECK(t.text(3, "source") == "PEMFC");
    CHECK(t.text(4, "source") == "BESS");
}
