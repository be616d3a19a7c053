#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace shipmg::csv {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Plain comma-separated tables: no quoting, first line is the header.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; throws CsvError when absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, const std::string& name) const;
    [[nodiscard]] const std::string& text(std::size_t row, const std::string& name) const;
};

std::vector<std::string> split(const std::string& line, char sep = ',');
Table read(std::istream& is);
Table read_file(const std::string& path);

// Strict number parsing (whole field must be consumed).
double parse_double(const std::string& s);

// Writes one row, joining fields with commas.
void write_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace shipmg::csv
