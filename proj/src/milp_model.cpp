#include "shipmg/milp_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace shipmg {

int MilpModel::add_variable(std::string name, double lower, double upper, Integrality type) {
    const int j = num_cols();
    if (!name.empty()) {
        auto [it, inserted] = index_.emplace(name, j);
        if (!inserted) throw ModelError("duplicate column handle: " + name);
    }
    vars_.push_back(Variable{std::move(name), lower, upper, type});
    objective_.push_back(0.0);
    return j;
}

int MilpModel::add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    Constraint c;
    c.name = std::move(name);
    c.terms = std::move(terms);
    c.sense = sense;
    switch (sense) {
        case Sense::le: c.upper = rhs; break;
        case Sense::ge: c.lower = rhs; break;
        case Sense::eq: c.lower = c.upper = rhs; break;
        case Sense::range: throw ModelError("use add_range for ranged rows");
    }
    const int i = num_rows();
    if (!c.name.empty()) {
        auto [it, inserted] = row_index_.emplace(c.name, i);
        if (!inserted) throw ModelError("duplicate row name: " + c.name);
    }
    rows_.push_back(std::move(c));
    return i;
}

int MilpModel::add_range(std::string name, std::vector<Term> terms, double lower, double upper) {
    Constraint c;
    c.name = std::move(name);
    c.terms = std::move(terms);
    c.sense = Sense::range;
    c.lower = lower;
    c.upper = upper;
    const int i = num_rows();
    if (!c.name.empty()) {
        auto [it, inserted] = row_index_.emplace(c.name, i);
        if (!inserted) throw ModelError("duplicate row name: " + c.name);
    }
    rows_.push_back(std::move(c));
    return i;
}

void MilpModel::set_objective(int col, double coef) { objective_.at(static_cast<std::size_t>(col)) = coef; }
void MilpModel::add_objective(int col, double coef) { objective_.at(static_cast<std::size_t>(col)) += coef; }

int MilpModel::num_binaries() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(),
                                          [](const Variable& v) { return v.type == Integrality::binary; }));
}

std::size_t MilpModel::num_nonzeros() const {
    std::size_t n = 0;
    for (const auto& r : rows_) n += r.terms.size();
    return n;
}

int MilpModel::column(const std::string& handle) const {
    auto it = index_.find(handle);
    if (it == index_.end()) throw ModelError("unknown column handle: " + handle);
    return it->second;
}

int MilpModel::row_index(const std::string& name) const {
    auto it = row_index_.find(name);
    if (it == row_index_.end()) throw ModelError("unknown row: " + name);
    return it->second;
}

double MilpModel::evaluate_objective(std::span<const double> x) const {
    double s = objective_constant_;
    for (std::size_t j = 0; j < objective_.size(); ++j) s += objective_[j] * x[j];
    return s;
}

double MilpModel::row_activity(int i, std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : rows_[static_cast<std::size_t>(i)].terms) s += t.coef * x[static_cast<std::size_t>(t.col)];
    return s;
}

void MilpModel::validate() const {
    for (const auto& v : vars_) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper)
            throw ModelError("column " + v.name + ": lower bound exceeds upper bound");
        if (v.type == Integrality::binary && (v.lower < 0.0 || v.upper > 1.0))
            throw ModelError("binary column " + v.name + " has bounds outside [0,1]");
    }
    for (const auto& r : rows_) {
        for (const auto& t : r.terms) {
            if (t.col < 0 || t.col >= num_cols())
                throw ModelError("row " + r.name + " references undeclared column " + std::to_string(t.col));
            if (!std::isfinite(t.coef)) throw ModelError("row " + r.name + " has a non-finite coefficient");
        }
        if (r.lower > r.upper) throw ModelError("row " + r.name + ": lower bound exceeds upper bound");
    }
}

void MilpModel::write_index_csv(std::ostream& os) const {
    os << "handle,column\n";
    for (int j = 0; j < num_cols(); ++j) {
        const auto& name = vars_[static_cast<std::size_t>(j)].name;
        if (!name.empty()) os << '"' << name << '"' << ',' << j << '\n';
    }
}

std::string format_number(double v) {
    if (v == 0.0) return "0";
    if (std::isinf(v)) return v > 0 ? "1e+30" : "-1e+30";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fit_fixed_number(double v) {
    std::string s = format_number(v);
    if (s.size() <= 12) return s;
    for (int prec = 12; prec >= 1; --prec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::string(buf).size() <= 12) return buf;
    }
    return s.substr(0, 12);
}

std::string fixed_name(char prefix, int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%c%07d", prefix, i + 1);
    return buf;
}

struct MpsWriter {
    std::ostream& os;
    MpsFormat fmt;

    [[nodiscard]] std::string num(double v) const { return fmt == MpsFormat::free ? format_number(v) : fit_fixed_number(v); }

    // Data line: field1 (2 chars), name1, name2, number, [name3, number].
    void line(const std::string& f1, const std::string& n1, const std::string& n2, const std::string& v1,
              const std::string& n3 = {}, const std::string& v2 = {}) const {
        if (fmt == MpsFormat::free) {
            os << ' ' << (f1.empty() ? "" : f1 + " ") << n1;
            if (!n2.empty()) os << ' ' << n2;
            if (!v1.empty()) os << ' ' << v1;
            if (!n3.empty()) os << ' ' << n3 << ' ' << v2;
            os << '\n';
            return;
        }
        char buf[128];
        if (n3.empty()) {
            std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %12s", f1.c_str(), n1.c_str(), n2.c_str(), v1.c_str());
        } else {
            std::snprintf(buf, sizeof buf, " %-2s %-8s  %-8s  %12s   %-8s  %12s", f1.c_str(), n1.c_str(), n2.c_str(),
                          v1.c_str(), n3.c_str(), v2.c_str());
        }
        std::string s(buf);
        while (!s.empty() && s.back() == ' ') s.pop_back();
        os << s << '\n';
    }
};

}  // namespace

std::vector<std::string> mps_column_names(const MilpModel& model, MpsFormat format) {
    std::vector<std::string> names(static_cast<std::size_t>(model.num_cols()));
    for (int j = 0; j < model.num_cols(); ++j) {
        const auto& n = model.variable(j).name;
        names[static_cast<std::size_t>(j)] =
            (format == MpsFormat::fixed || n.empty()) ? fixed_name('C', j) : n;
    }
    return names;
}

void write_mps(std::ostream& os, const MilpModel& model, MpsFormat format) {
    const MpsWriter w{os, format};
    const auto cnames = mps_column_names(model, format);
    std::vector<std::string> rnames(static_cast<std::size_t>(model.num_rows()));
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& n = model.row(i).name;
        rnames[static_cast<std::size_t>(i)] = (format == MpsFormat::fixed || n.empty()) ? fixed_name('R', i) : n;
    }
    const std::string obj = "COST";

    os << "NAME          SHIPMG\n";
    os << "ROWS\n";
    os << " N  " << obj << '\n';
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& r = model.row(i);
        const char* t = "L";
        if (r.sense == Sense::eq) t = "E";
        else if (r.sense == Sense::ge || r.sense == Sense::range) t = "G";
        os << ' ' << t << "  " << rnames[static_cast<std::size_t>(i)] << '\n';
    }

    // Column-major view of the matrix.
    std::vector<std::vector<Term>> cols(static_cast<std::size_t>(model.num_cols()));
    for (int i = 0; i < model.num_rows(); ++i)
        for (const auto& t : model.row(i).terms) cols[static_cast<std::size_t>(t.col)].push_back({i, t.coef});

    os << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (int j = 0; j < model.num_cols(); ++j) {
        const bool is_int = model.variable(j).type == Integrality::binary;
        if (is_int != in_int) {
            const std::string mname = "MARKER" + std::to_string(marker++);
            os << "    " << mname << "  'MARKER'  " << (is_int ? "'INTORG'" : "'INTEND'") << '\n';
            in_int = is_int;
        }
        const auto& cn = cnames[static_cast<std::size_t>(j)];
        std::vector<std::pair<std::string, double>> entries;
        if (model.objective()[static_cast<std::size_t>(j)] != 0.0)
            entries.emplace_back(obj, model.objective()[static_cast<std::size_t>(j)]);
        for (const auto& t : cols[static_cast<std::size_t>(j)])
            if (t.coef != 0.0) entries.emplace_back(rnames[static_cast<std::size_t>(t.col)], t.coef);
        if (entries.empty()) entries.emplace_back(obj, 0.0);
        for (std::size_t k = 0; k < entries.size(); k += 2) {
            if (k + 1 < entries.size())
                w.line("", cn, entries[k].first, w.num(entries[k].second), entries[k + 1].first,
                       w.num(entries[k + 1].second));
            else
                w.line("", cn, entries[k].first, w.num(entries[k].second));
        }
    }
    if (in_int) os << "    MARKER" << marker << "  'MARKER'  'INTEND'\n";

    os << "RHS\n";
    if (model.objective_constant() != 0.0) w.line("", "RHS", obj, w.num(-model.objective_constant()));
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& r = model.row(i);
        double rhs = 0.0;
        switch (r.sense) {
            case Sense::le: rhs = r.upper; break;
            case Sense::ge:
            case Sense::eq:
            case Sense::range: rhs = r.lower; break;
        }
        if (rhs != 0.0) w.line("", "RHS", rnames[static_cast<std::size_t>(i)], w.num(rhs));
    }

    bool any_range = false;
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& r = model.row(i);
        if (r.sense != Sense::range) continue;
        if (!any_range) os << "RANGES\n";
        any_range = true;
        w.line("", "RNG", rnames[static_cast<std::size_t>(i)], w.num(r.upper - r.lower));
    }

    os << "BOUNDS\n";
    for (int j = 0; j < model.num_cols(); ++j) {
        const auto& v = model.variable(j);
        const auto& cn = cnames[static_cast<std::size_t>(j)];
        if (v.type == Integrality::binary) {
            if (v.lower == v.upper) {
                w.line("FX", "BND", cn, w.num(v.lower));
            } else {
                if (v.lower != 0.0) w.line("LO", "BND", cn, w.num(v.lower));
                w.line("UP", "BND", cn, w.num(v.upper));
            }
            continue;
        }
        if (v.lower == v.upper) {
            w.line("FX", "BND", cn, w.num(v.lower));
        } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
            w.line("FR", "BND", cn, "");
        } else {
            if (std::isinf(v.lower)) w.line("MI", "BND", cn, "");
            else if (v.lower != 0.0) w.line("LO", "BND", cn, w.num(v.lower));
            if (!std::isinf(v.upper)) w.line("UP", "BND", cn, w.num(v.upper));
        }
    }
    os << "ENDATA\n";
}

MilpModel read_mps(std::istream& is) {
    enum class Section { none, rows, columns, rhs, ranges, bounds };
    Section sec = Section::none;
    MilpModel m;
    std::string obj_row;
    std::unordered_map<std::string, int> rows;
    std::vector<char> row_type;
    std::vector<std::vector<Term>> row_terms;
    std::vector<std::string> row_names;
    std::vector<double> rhs;
    std::vector<double> range;
    std::vector<bool> has_range;
    std::unordered_map<std::string, int> cols;
    std::vector<double> objective;
    double obj_const = 0.0;
    bool in_int = false;

    struct ColDef {
        std::string name;
        bool integer;
        double lo = 0.0, hi = kInf;
        bool hi_set = false;
    };
    std::vector<ColDef> coldefs;

    auto parse_num = [](const std::string& s) {
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ModelError("bad MPS number: " + s);
        if (v >= 1e30) return kInf;
        if (v <= -1e30) return -kInf;
        return v;
    };

    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '*') continue;
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (line[0] != ' ' && line[0] != '\t') {
            const auto& h = tok[0];
            if (h == "NAME") sec = Section::none;
            else if (h == "ROWS") sec = Section::rows;
            else if (h == "COLUMNS") sec = Section::columns;
            else if (h == "RHS") sec = Section::rhs;
            else if (h == "RANGES") sec = Section::ranges;
            else if (h == "BOUNDS") sec = Section::bounds;
            else if (h == "ENDATA") break;
            else throw ModelError("unknown MPS section: " + h);
            continue;
        }
        switch (sec) {
            case Section::rows: {
                if (tok.size() < 2) throw ModelError("malformed ROWS line");
                const char t = tok[0][0];
                if (t == 'N') {
                    if (obj_row.empty()) obj_row = tok[1];
                    break;
                }
                rows.emplace(tok[1], static_cast<int>(row_type.size()));
                row_type.push_back(t);
                row_names.push_back(tok[1]);
                row_terms.emplace_back();
                rhs.push_back(0.0);
                range.push_back(0.0);
                has_range.push_back(false);
                break;
            }
            case Section::columns: {
                if (tok.size() >= 3 && tok[1] == "'MARKER'") {
                    in_int = tok[2] == "'INTORG'";
                    break;
                }
                auto it = cols.find(tok[0]);
                int j;
                if (it == cols.end()) {
                    j = static_cast<int>(coldefs.size());
                    cols.emplace(tok[0], j);
                    coldefs.push_back(ColDef{tok[0], in_int});
                    objective.push_back(0.0);
                } else {
                    j = it->second;
                }
                for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                    const double v = parse_num(tok[k + 1]);
                    if (tok[k] == obj_row) {
                        objective[static_cast<std::size_t>(j)] += v;
                    } else {
                        auto r = rows.find(tok[k]);
                        if (r == rows.end()) throw ModelError("unknown row in COLUMNS: " + tok[k]);
                        row_terms[static_cast<std::size_t>(r->second)].push_back({j, v});
                    }
                }
                break;
            }
            case Section::rhs:
            case Section::ranges: {
                for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                    const double v = parse_num(tok[k + 1]);
                    if (tok[k] == obj_row) {
                        if (sec == Section::rhs) obj_const = -v;
                        continue;
                    }
                    auto r = rows.find(tok[k]);
                    if (r == rows.end()) throw ModelError("unknown row: " + tok[k]);
                    if (sec == Section::rhs) rhs[static_cast<std::size_t>(r->second)] = v;
                    else {
                        range[static_cast<std::size_t>(r->second)] = v;
                        has_range[static_cast<std::size_t>(r->second)] = true;
                    }
                }
                break;
            }
            case Section::bounds: {
                if (tok.size() < 3) throw ModelError("malformed BOUNDS line");
                auto it = cols.find(tok[2]);
                if (it == cols.end()) throw ModelError("unknown column in BOUNDS: " + tok[2]);
                auto& c = coldefs[static_cast<std::size_t>(it->second)];
                const std::string& t = tok[0];
                const double v = tok.size() > 3 ? parse_num(tok[3]) : 0.0;
                if (t == "UP") { c.hi = v; c.hi_set = true; }
                else if (t == "LO") c.lo = v;
                else if (t == "FX") { c.lo = c.hi = v; c.hi_set = true; }
                else if (t == "FR") { c.lo = -kInf; c.hi = kInf; c.hi_set = true; }
                else if (t == "MI") c.lo = -kInf;
                else if (t == "PL") { c.hi = kInf; c.hi_set = true; }
                else if (t == "BV") { c.lo = 0.0; c.hi = 1.0; c.hi_set = true; c.integer = true; }
                else throw ModelError("unsupported bound type: " + t);
                break;
            }
            case Section::none: throw ModelError("MPS data outside a section");
        }
    }

    for (std::size_t j = 0; j < coldefs.size(); ++j) {
        auto& c = coldefs[j];
        double hi = c.hi;
        if (c.integer && !c.hi_set) hi = 1.0;
        const bool binary = c.integer && c.lo >= 0.0 && hi <= 1.0;
        if (c.integer && !binary) throw ModelError("general integer column not supported: " + c.name);
        const int col = m.add_variable(c.name, c.lo, hi, binary ? Integrality::binary : Integrality::continuous);
        m.set_objective(col, objective[j]);
    }
    m.set_objective_constant(obj_const);
    for (std::size_t i = 0; i < row_type.size(); ++i) {
        const double b = rhs[i];
        const char t = row_type[i];
        auto terms = std::move(row_terms[i]);
        if (!has_range[i]) {
            m.add_row(row_names[i], std::move(terms), t == 'L' ? Sense::le : t == 'G' ? Sense::ge : Sense::eq, b);
            continue;
        }
        const double r = range[i];
        double lo = b, hi = b;
        if (t == 'L') lo = b - std::abs(r);
        else if (t == 'G') hi = b + std::abs(r);
        else if (r >= 0) hi = b + r;
        else lo = b + r;
        m.add_range(row_names[i], std::move(terms), lo, hi);
    }
    return m;
}

}  // namespace shipmg
