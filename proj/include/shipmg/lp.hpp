#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shipmg/milp_model.hpp"

namespace shipmg::lp {

// Nonbasic columns sit at one of their bounds. Logical columns (one per row,
// index n + i) carry the row activity.
enum class VarState : std::uint8_t { basic, at_lower, at_upper };

struct LpBasis {
    std::vector<int> head;         // basic column for each row position
    std::vector<VarState> state;   // per column, structural then logical

    [[nodiscard]] bool empty() const { return head.empty(); }
    // Partition check: |basic| equals the row count and head matches state.
    [[nodiscard]] bool is_partition(int num_cols, int num_rows) const;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure, iteration_limit, time_limit };

const char* to_string(LpStatus s);

struct LpOptions {
    double primal_tol = 1e-7;
    double dual_tol = 1e-7;
    double pivot_tol = 1e-9;
    int refactor_interval = 50;
    int degenerate_limit = 1000;
    long max_iterations = 5'000'000;
    double time_limit = 1e30;  // seconds
};

struct LpResult {
    LpStatus status = LpStatus::numerical_failure;
    std::vector<double> x;               // structural values
    std::vector<double> row_activity;
    std::vector<double> duals;           // one per row
    std::vector<double> reduced_costs;   // one per structural column
    double objective = 0.0;
    double dual_objective = 0.0;
    LpBasis basis;
    long iterations = 0;
    std::string diagnostic;
};

// Bounded-variable dual simplex over the LP relaxation of a MilpModel.
//
// Rows are scaled by their max-norm and columns by the max-norm of the
// row-scaled matrix (powers of two). The basis is refactored with a sparse
// LU every `refactor_interval` updates; between refactorizations updates are
// kept as a product-form eta file. Pricing is dual steepest edge with a
// bound-flipping ratio test; after `degenerate_limit` consecutive degenerate
// pivots the engine switches to Bland's rule until progress resumes.
//
// The engine keeps its basis between solves, so bound changes followed by
// solve() warm start from the previous optimum.
class DualSimplex {
public:
    DualSimplex(const MilpModel& model, LpOptions options = {});
    ~DualSimplex();
    DualSimplex(DualSimplex&&) noexcept;
    DualSimplex& operator=(DualSimplex&&) noexcept;

    // Structural column bounds in model units.
    void set_bounds(int col, double lower, double upper);
    [[nodiscard]] double lower(int col) const;
    [[nodiscard]] double upper(int col) const;
    void reset_bounds();

    void set_basis(const LpBasis& basis);
    [[nodiscard]] LpBasis basis() const;

    void set_time_limit(double seconds);

    LpStatus solve();

    [[nodiscard]] LpStatus status() const;
    [[nodiscard]] double objective() const;
    [[nodiscard]] std::vector<double> primal() const;
    [[nodiscard]] long iterations() const;
    [[nodiscard]] LpResult result() const;
    [[nodiscard]] const std::string& diagnostic() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot LP solve of the continuous relaxation.
LpResult solve_lp(const MilpModel& model, const LpOptions& options = {}, const LpBasis* warm = nullptr);

}  // namespace shipmg::lp
