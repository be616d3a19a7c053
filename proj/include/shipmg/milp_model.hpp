#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace shipmg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Integrality : std::uint8_t { continuous, binary };

// Row sense. Ranged rows carry both finite bounds.
enum class Sense : std::uint8_t { le, eq, ge, range };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    Integrality type = Integrality::continuous;
};

struct Term {
    int col;
    double coef;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::le;
    double lower = -kInf;  // row activity lower bound
    double upper = kInf;   // row activity upper bound
};

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sparse mixed-integer linear program in row form, minimization.
//
// Columns are addressed by index; the optional handle index maps semantic
// names (for example "P_dg[1][17]") to columns.
class MilpModel {
public:
    int add_variable(std::string name, double lower, double upper,
                     Integrality type = Integrality::continuous);
    int add_binary(std::string name) { return add_variable(std::move(name), 0.0, 1.0, Integrality::binary); }

    int add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs);
    int add_range(std::string name, std::vector<Term> terms, double lower, double upper);

    void set_objective(int col, double coef);
    void add_objective(int col, double coef);
    void set_objective_constant(double c) { objective_constant_ = c; }

    [[nodiscard]] int num_cols() const { return static_cast<int>(vars_.size()); }
    [[nodiscard]] int num_rows() const { return static_cast<int>(rows_.size()); }
    [[nodiscard]] int num_binaries() const;
    [[nodiscard]] std::size_t num_nonzeros() const;

    [[nodiscard]] const std::vector<Variable>& variables() const { return vars_; }
    [[nodiscard]] const std::vector<Constraint>& rows() const { return rows_; }
    [[nodiscard]] const Variable& variable(int j) const { return vars_.at(static_cast<std::size_t>(j)); }
    [[nodiscard]] const Constraint& row(int i) const { return rows_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const std::vector<double>& objective() const { return objective_; }
    [[nodiscard]] double objective_constant() const { return objective_constant_; }

    Variable& mutable_variable(int j) { return vars_.at(static_cast<std::size_t>(j)); }

    // Semantic handle lookup. Throws ModelError on unknown handles.
    [[nodiscard]] int column(const std::string& handle) const;
    [[nodiscard]] bool has_column(const std::string& handle) const { return index_.contains(handle); }
    [[nodiscard]] int row_index(const std::string& name) const;
    [[nodiscard]] bool has_row(const std::string& name) const { return row_index_.contains(name); }

    [[nodiscard]] double evaluate_objective(std::span<const double> x) const;
    [[nodiscard]] double row_activity(int i, std::span<const double> x) const;

    // Checks structural invariants: referenced columns exist, lo <= hi,
    // binaries bounded in [0,1]. Throws ModelError.
    void validate() const;

    void write_index_csv(std::ostream& os) const;

private:
    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
    std::vector<double> objective_;
    double objective_constant_ = 0.0;
    std::unordered_map<std::string, int> index_;
    std::unordered_map<std::string, int> row_index_;
};

// MPS export. Free format keeps the model's names and writes every number
// as the shortest decimal that round-trips. Fixed format uses generated
// 8-character names (C0000001, R0000001) and 12-character numeric fields,
// which may lose precision for numbers that need more digits.
enum class MpsFormat { free, fixed };
void write_mps(std::ostream& os, const MilpModel& model, MpsFormat format = MpsFormat::free);
MilpModel read_mps(std::istream& is);

// Column names as they appear in an MPS file of the given format.
std::vector<std::string> mps_column_names(const MilpModel& model, MpsFormat format);

// Shortest round-trip decimal for a double.
std::string format_number(double v);

}  // namespace shipmg
