#include "shipmg/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace shipmg::csv {

std::size_t Table::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw CsvError("missing CSV column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const { return parse_double(text(row, name)); }

const std::string& Table::text(std::size_t row, const std::string& name) const {
    const auto c = column(name);
    const auto& r = rows.at(row);
    if (c >= r.size()) throw CsvError("CSV row " + std::to_string(row + 1) + " has too few fields");
    return r[c];
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

Table read(std::istream& is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw CsvError("empty CSV input");
    t.header = split(line);
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split(line);
        if (fields.size() != t.header.size())
            throw CsvError("CSV line has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    return t;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open " + path);
    return read(in);
}

double parse_double(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    if (b < e && s[b] == '+') ++b;
    double v = 0.0;
    const auto res = std::from_chars(s.data() + b, s.data() + e, v);
    if (res.ec != std::errc() || res.ptr != s.data() + e) throw CsvError("not a number: '" + s + "'");
    return v;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (k) os << ',';
        os << fields[k];
    }
    os << '\n';
}

}  // namespace shipmg::csv
