#include "shipmg/curves.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "shipmg/csv.hpp"
#include "shipmg/milp_model.hpp"

namespace shipmg {

namespace {

constexpr int kDenseSamples = 10000;

double polynomial(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
    return v;
}

double specific_value(CurveKind kind, const std::vector<double>& c, double x) {
    switch (kind) {
        case CurveKind::sfoc_polynomial:
        case CurveKind::cubic_propulsion:
            return polynomial(c, x);
        case CurveKind::fc_efficiency: {
            if (c.size() != 4) throw CurveError("fc_efficiency curve needs 4 coefficients");
            return c[0] + c[1] * std::exp(-c[2] * x) + c[3] * x;
        }
        case CurveKind::mass_flow:
            break;
    }
    throw CurveError("mass_flow cannot be nested");
}

std::vector<double> dense_grid(double lo, double hi, int samples) {
    std::vector<double> g(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (samples - 1);
    g.back() = hi;
    return g;
}

PiecewiseCurve from_abscissae(const AnalyticCurve& curve, std::vector<double> xs) {
    PiecewiseCurve p;
    p.x = std::move(xs);
    p.y.reserve(p.x.size());
    for (double x : p.x) p.y.push_back(curve(x));
    return p;
}

}  // namespace

double PiecewiseCurve::slope(int k) const {
    const auto i = static_cast<std::size_t>(k);
    return (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
}

void PiecewiseCurve::validate(const std::string& what) const {
    if (x.size() != y.size()) throw CurveError(what + ": x and y lengths differ");
    if (x.size() < 2) throw CurveError(what + ": at least 2 breakpoints required");
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k]) || !std::isfinite(y[k])) throw CurveError(what + ": non-finite breakpoint");
        if (y[k] < 0.0) throw CurveError(what + ": negative ordinate");
        if (k > 0 && !(x[k] > x[k - 1])) throw CurveError(what + ": x must be strictly increasing");
    }
}

double evaluate(const PiecewiseCurve& curve, double x) {
    if (curve.x.size() < 2) throw CurveError("curve has fewer than 2 breakpoints");
    if (!(x >= curve.x.front() && x <= curve.x.back()))
        throw CurveError("x = " + format_number(x) + " outside curve domain [" + format_number(curve.x.front()) + ", " +
                         format_number(curve.x.back()) + "]");
    const auto it = std::lower_bound(curve.x.begin(), curve.x.end(), x);
    const auto k = static_cast<std::size_t>(it - curve.x.begin());
    if (curve.x[k] == x) return curve.y[k];
    const double x0 = curve.x[k - 1], x1 = curve.x[k];
    const double y0 = curve.y[k - 1], y1 = curve.y[k];
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

const char* to_string(CurveKind k) {
    switch (k) {
        case CurveKind::sfoc_polynomial: return "sfoc_polynomial";
        case CurveKind::fc_efficiency: return "fc_efficiency";
        case CurveKind::cubic_propulsion: return "cubic_propulsion";
        case CurveKind::mass_flow: return "mass_flow";
    }
    return "sfoc_polynomial";
}

CurveKind curve_kind_from_string(const std::string& s) {
    for (auto k : {CurveKind::sfoc_polynomial, CurveKind::fc_efficiency, CurveKind::cubic_propulsion, CurveKind::mass_flow})
        if (s == to_string(k)) return k;
    throw CurveError("unknown curve kind '" + s + "'");
}

double AnalyticCurve::operator()(double x) const {
    if (kind == CurveKind::mass_flow) {
        if (x == 0.0) return 0.0;
        return specific_value(specific_kind, coefficients, x / rated_power) * x;
    }
    return specific_value(kind, coefficients, x);
}

AnalyticCurve mass_flow_curve_from_sfoc(const AnalyticCurve& specific, double rated_power) {
    if (!(rated_power > 0.0)) throw CurveError("rated power must be positive");
    if (specific.kind == CurveKind::mass_flow || specific.kind == CurveKind::cubic_propulsion)
        throw CurveError("mass flow needs a specific-consumption curve");
    AnalyticCurve m;
    m.kind = CurveKind::mass_flow;
    m.coefficients = specific.coefficients;
    m.specific_kind = specific.kind;
    m.rated_power = rated_power;
    m.x_lo = 0.0;
    m.x_hi = specific.x_hi * rated_power;
    return m;
}

double specific_minimum(const AnalyticCurve& specific) {
    const auto grid = dense_grid(specific.x_lo, specific.x_hi, kDenseSamples + 1);
    std::size_t best = 0;
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (specific(grid[k]) < specific(grid[best])) best = k;
    if (best == 0 || best + 1 == grid.size()) throw CurveError("specific-consumption curve has no interior minimum");
    return grid[best];
}

PiecewiseCurve linearize_uniform(const AnalyticCurve& curve, int n_intervals) {
    if (n_intervals < 1) throw CurveError("n_intervals must be >= 1");
    std::vector<double> xs(static_cast<std::size_t>(n_intervals) + 1);
    for (int k = 0; k <= n_intervals; ++k) xs[static_cast<std::size_t>(k)] = curve.x_lo + (curve.x_hi - curve.x_lo) * k / n_intervals;
    xs.back() = curve.x_hi;
    return from_abscissae(curve, std::move(xs));
}

PiecewiseCurve linearize(const AnalyticCurve& curve, int n_intervals, const std::vector<double>& pinned) {
    if (n_intervals < 1) throw CurveError("n_intervals must be >= 1");
    if (!(curve.x_hi > curve.x_lo)) throw CurveError("empty curve domain");
    const auto grid = dense_grid(curve.x_lo, curve.x_hi, kDenseSamples + 1);
    std::vector<double> f(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) f[k] = curve(grid[k]);

    // Cumulative curvature mass over grid cells.
    std::vector<double> cum(grid.size(), 0.0);
    const double h = grid[1] - grid[0];
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const std::size_t c = std::clamp<std::size_t>(k, 1, grid.size() - 2);
        const double second = std::abs(f[c - 1] - 2.0 * f[c] + f[c + 1]) / (h * h);
        cum[k] = cum[k - 1] + std::sqrt(second) * h;
    }
    const double total = cum.back();
    const double scale = std::max(1.0, std::abs(*std::max_element(f.begin(), f.end())));
    std::vector<double> xs;
    if (!(total > 1e-9 * scale) || !std::isfinite(total)) {
        xs = linearize_uniform(curve, n_intervals).x;
    } else {
        xs.push_back(curve.x_lo);
        for (int j = 1; j < n_intervals; ++j) {
            const double target = total * j / n_intervals;
            const auto it = std::lower_bound(cum.begin(), cum.end(), target);
            auto k = static_cast<std::size_t>(it - cum.begin());
            k = std::clamp<std::size_t>(k, 1, grid.size() - 1);
            // Interpolate inside the grid cell.
            const double c0 = cum[k - 1], c1 = cum[k];
            const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
            xs.push_back(grid[k - 1] + frac * h);
        }
        xs.push_back(curve.x_hi);
    }
    for (double p : pinned) {
        if (!(p > curve.x_lo && p < curve.x_hi) || n_intervals < 2) continue;
        std::size_t nearest = 1;
        for (std::size_t k = 1; k + 1 < xs.size(); ++k)
            if (std::abs(xs[k] - p) < std::abs(xs[nearest] - p)) nearest = k;
        xs[nearest] = p;
        std::sort(xs.begin(), xs.end());
    }
    // Enforce strict monotonicity with a minimum spacing.
    const double min_gap = (curve.x_hi - curve.x_lo) * 1e-6;
    for (std::size_t k = 1; k + 1 < xs.size(); ++k) xs[k] = std::max(xs[k], xs[k - 1] + min_gap);
    for (std::size_t k = xs.size() - 1; k-- > 1;) xs[k] = std::min(xs[k], xs[k + 1] - min_gap);
    return from_abscissae(curve, std::move(xs));
}

double max_interpolation_error(const AnalyticCurve& curve, const PiecewiseCurve& pwl, int samples) {
    double worst = 0.0;
    for (double x : dense_grid(pwl.x_min(), pwl.x_max(), samples)) worst = std::max(worst, std::abs(evaluate(pwl, x) - curve(x)));
    return worst;
}

AnalyticCurve default_sfoc_curve() {
    // 190 + 120 (x - 0.8)^2 g/kWh.
    AnalyticCurve c;
    c.kind = CurveKind::sfoc_polynomial;
    c.coefficients = {190.0 + 120.0 * 0.64, -2.0 * 120.0 * 0.8, 120.0};
    c.x_lo = 0.0;
    c.x_hi = 1.0;
    return c;
}

AnalyticCurve default_h2_curve(double rated_power) {
    if (!(rated_power > 0.0)) throw CurveError("rated power must be positive");
    AnalyticCurve c;
    c.kind = CurveKind::fc_efficiency;
    c.coefficients = {64.0, 40.0, 8.0, 10.0};
    c.x_lo = 0.0;
    c.x_hi = 1.0;
    // The shape is per unit of load; the rating enters via mass_flow_curve_from_sfoc.
    return c;
}

AnalyticCurve cubic_propulsion_curve(double p_ref_mw, double v_ref_kn, double v_lo, double v_hi) {
    if (!(v_ref_kn > 0.0) || !(p_ref_mw >= 0.0)) throw CurveError("invalid propulsion reference point");
    AnalyticCurve c;
    c.kind = CurveKind::cubic_propulsion;
    c.coefficients = {0.0, 0.0, 0.0, p_ref_mw / (v_ref_kn * v_ref_kn * v_ref_kn)};
    c.x_lo = v_lo;
    c.x_hi = v_hi;
    return c;
}

void write_curve_csv(std::ostream& os, const PiecewiseCurve& curve) {
    os << "x,y\n";
    for (std::size_t k = 0; k < curve.x.size(); ++k) os << format_number(curve.x[k]) << ',' << format_number(curve.y[k]) << '\n';
}

PiecewiseCurve read_curve_csv(std::istream& is) {
    const auto t = csv::read(is);
    PiecewiseCurve c;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        c.x.push_back(t.number(r, "x"));
        c.y.push_back(t.number(r, "y"));
    }
    c.validate("CSV curve");
    return c;
}

}  // namespace shipmg
