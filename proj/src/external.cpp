#include "shipmg/external.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "shipmg/csv.hpp"

namespace shipmg {

namespace {

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

std::filesystem::path make_workdir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "shipmg-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw ExternalSolverError("cannot create a temporary directory for the external solver");
    return tmpl;
}

struct Workdir {
    std::filesystem::path path;
    ~Workdir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

double parse_value(const std::string& s, const std::string& what) {
    try {
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        return csv::parse_double(s);
    } catch (const csv::CsvError&) {
        throw ExternalSolverError("external solver output: malformed " + what + " '" + s + "'");
    }
}

}  // namespace

MilpResult solve_external(const MilpModel& model, const SolverSettings& settings) {
    std::string command = settings.external_command;
    if (command.empty())
        if (const char* env = std::getenv(kExternalSolverEnv)) command = env;
    if (command.empty()) throw ExternalSolverError("no external solver configured");

    const auto start = std::chrono::steady_clock::now();
    Workdir dir{make_workdir()};
    const auto mps = dir.path / "model.mps";
    const auto sol = dir.path / "solution.txt";
    {
        std::ofstream os(mps);
        write_mps(os, model, MpsFormat::free);
        if (!os) throw ExternalSolverError("cannot write " + mps.string());
    }
    std::ostringstream cmd;
    cmd << command << ' ' << quote(mps.string()) << ' ' << quote(sol.string()) << ' ' << format_number(settings.rel_gap) << ' '
        << format_number(settings.time_limit) << " > " << quote((dir.path / "solver.log").string()) << " 2>&1";
    const int rc = std::system(cmd.str().c_str());
    if (rc != 0) {
        std::ifstream log(dir.path / "solver.log");
        std::stringstream ss;
        ss << log.rdbuf();
        throw ExternalSolverError("external solver failed (exit status " + std::to_string(rc) + "): " + ss.str().substr(0, 2000));
    }
    std::ifstream in(sol);
    if (!in) throw ExternalSolverError("external solver produced no solution file");

    const auto names = mps_column_names(model, MpsFormat::free);
    std::unordered_map<std::string, int> by_name;
    for (std::size_t j = 0; j < names.size(); ++j) by_name.emplace(names[j], static_cast<int>(j));

    MilpResult r;
    bool have_status = false, have_objective = false, have_bound = false;
    double reported_objective = 0.0, reported_bound = 0.0;
    std::vector<double> x(names.size(), 0.0);
    std::vector<bool> seen(names.size(), false);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key, val;
        if (!(ls >> key)) continue;
        if (!(ls >> val)) throw ExternalSolverError("external solver output: malformed line '" + line + "'");
        if (key == "status") {
            try {
                r.status = solve_status_from_string(val);
            } catch (const std::exception&) {
                throw ExternalSolverError("external solver output: unknown status '" + val + "'");
            }
            have_status = true;
        } else if (key == "objective") {
            reported_objective = parse_value(val, "objective");
            have_objective = true;
        } else if (key == "bound") {
            reported_bound = parse_value(val, "bound");
            have_bound = true;
        } else {
            const auto it = by_name.find(key);
            if (it == by_name.end()) throw ExternalSolverError("external solver output: unknown column '" + key + "'");
            x[static_cast<std::size_t>(it->second)] = parse_value(val, "value of " + key);
            seen[static_cast<std::size_t>(it->second)] = true;
        }
    }
    if (!have_status) throw ExternalSolverError("external solver output: missing status line");
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.status == SolveStatus::infeasible) {
        r.diagnostic = "external solver reports infeasible";
        return r;
    }
    const bool any = std::find(seen.begin(), seen.end(), true) != seen.end();
    if (!any) {
        if (r.status == SolveStatus::optimal || r.status == SolveStatus::gap_reached)
            throw ExternalSolverError("external solver output: status " + std::string(to_string(r.status)) + " without a solution");
        r.diagnostic = "external solver stopped without a solution";
        return r;
    }
    if (!have_objective) throw ExternalSolverError("external solver output: missing objective line");
    for (std::size_t j = 0; j < seen.size(); ++j)
        if (!seen[j]) throw ExternalSolverError("external solver output: no value for column '" + names[j] + "'");
    r.x = std::move(x);
    r.objective = model.evaluate_objective(r.x);
    // The solver may or may not include the objective constant; shift its
    // bound by the same offset as its objective.
    r.bound = have_bound ? reported_bound + (r.objective - reported_objective) : r.objective;
    if (r.bound > r.objective) r.bound = r.objective;
    return r;
}

}  // namespace shipmg
