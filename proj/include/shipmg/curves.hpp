#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace shipmg {

class CurveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Breakpoint form of a curve: linear interpolation between (x[k], y[k]).
struct PiecewiseCurve {
    std::vector<double> x;
    std::vector<double> y;

    [[nodiscard]] int n_intervals() const { return static_cast<int>(x.size()) - 1; }
    [[nodiscard]] double x_min() const { return x.front(); }
    [[nodiscard]] double x_max() const { return x.back(); }
    [[nodiscard]] double slope(int k) const;
    [[nodiscard]] double width(int k) const { return x[static_cast<std::size_t>(k) + 1] - x[static_cast<std::size_t>(k)]; }
    // Throws CurveError unless x is strictly increasing, there are at least
    // two breakpoints and every ordinate is finite and non-negative.
    void validate(const std::string& what = "curve") const;
    bool operator==(const PiecewiseCurve&) const = default;
};

// Linear interpolation; exact at breakpoints. Throws CurveError outside
// [x_min, x_max].
double evaluate(const PiecewiseCurve& curve, double x);

enum class CurveKind {
    sfoc_polynomial,   // g/kWh vs load fraction: sum_k c_k x^k
    fc_efficiency,     // kg H2/MWh vs load fraction: c0 + c1 exp(-c2 x) + c3 x
    cubic_propulsion,  // MW vs knots: sum_k c_k v^k
    mass_flow,         // kg/h vs MW: s(P / rated) * P with s a specific-consumption curve
};

const char* to_string(CurveKind k);
CurveKind curve_kind_from_string(const std::string& s);

struct AnalyticCurve {
    CurveKind kind = CurveKind::sfoc_polynomial;
    std::vector<double> coefficients;
    double x_lo = 0.0;
    double x_hi = 1.0;
    // For mass_flow: the specific-consumption shape and the rated power.
    CurveKind specific_kind = CurveKind::sfoc_polynomial;
    double rated_power = 0.0;

    [[nodiscard]] double operator()(double x) const;
    bool operator==(const AnalyticCurve&) const = default;
};

// Fuel (or hydrogen) mass flow in kg/h as a function of power in MW from a
// specific-consumption curve in g/kWh (= kg/MWh) over load fraction.
AnalyticCurve mass_flow_curve_from_sfoc(const AnalyticCurve& specific, double rated_power);

// Location of the interior minimum of a specific-consumption curve over its
// domain, by dense scan. Throws CurveError when the minimum lies on the
// boundary.
double specific_minimum(const AnalyticCurve& specific);

// Breakpoints placed at quantiles of the cumulative curvature mass
// sqrt(|f''|) sampled on a dense grid; endpoints always included and every
// ordinate exact. Each abscissa in `pinned` replaces the nearest interior
// breakpoint. Falls back to uniform spacing for curves without curvature.
PiecewiseCurve linearize(const AnalyticCurve& curve, int n_intervals, const std::vector<double>& pinned = {});

// Uniformly spaced breakpoints (reference for the placement rule).
PiecewiseCurve linearize_uniform(const AnalyticCurve& curve, int n_intervals);

// Maximum absolute interpolation error on a uniform grid of `samples` points.
double max_interpolation_error(const AnalyticCurve& curve, const PiecewiseCurve& pwl, int samples = 10000);

// Built-in specific hydrogen consumption (kg/MWh over load fraction): high
// at low load, flat near mid/high load.
AnalyticCurve default_h2_curve(double rated_power);
// Built-in SFOC (g/kWh over load fraction) with its minimum at 80 % load.
AnalyticCurve default_sfoc_curve();
// Propulsion power P = k v^3 with k such that p_ref MW is reached at v_ref kn.
AnalyticCurve cubic_propulsion_curve(double p_ref_mw, double v_ref_kn, double v_lo, double v_hi);

// Two-column CSV with header "x,y".
void write_curve_csv(std::ostream& os, const PiecewiseCurve& curve);
PiecewiseCurve read_curve_csv(std::istream& is);

}  // namespace shipmg
