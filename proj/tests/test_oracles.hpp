#pragma once

// Independent oracles used by the unit and acceptance suites. Nothing in
// here calls the simplex or branch-and-bound code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "shipmg/milp_model.hpp"

namespace oracle {

struct RandomLp {
    shipmg::MilpModel model;
};

// Dense LP over a box with a known interior point, mixing <=, >= and
// ranged rows. Roughly one in five instances is made infeasible.
inline RandomLp random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomLp out;
    std::vector<double> x0(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double ub = 1.0 + 9.0 * unit(rng);
        const double lb = unit(rng) < 0.3 ? -ub * 0.5 : 0.0;
        const int c = out.model.add_variable("x" + std::to_string(j), lb, ub);
        out.model.set_objective(c, coef(rng));
        x0[static_cast<std::size_t>(j)] = lb + (ub - lb) * unit(rng);
    }
    const bool make_infeasible = unit(rng) < 0.2;
    for (int i = 0; i < m; ++i) {
        std::vector<shipmg::Term> terms;
        double act = 0.0;
        for (int j = 0; j < n; ++j) {
            if (unit(rng) < 0.25) continue;
            const double a = std::round(coef(rng) * 100.0) / 100.0;
            if (a == 0.0) continue;
            terms.push_back({j, a});
            act += a * x0[static_cast<std::size_t>(j)];
        }
        if (terms.empty()) terms.push_back({i % n, 1.0}), act = x0[static_cast<std::size_t>(i % n)];
        const double kind = unit(rng);
        const std::string name = "r" + std::to_string(i);
        if (kind < 0.45) out.model.add_row(name, terms, shipmg::Sense::le, act + 2.0 * unit(rng));
        else if (kind < 0.9) out.model.add_row(name, terms, shipmg::Sense::ge, act - 2.0 * unit(rng));
        else out.model.add_range(name, terms, act - unit(rng), act + unit(rng));
    }
    if (make_infeasible) {
        std::vector<shipmg::Term> terms;
        double hi = 0.0;
        for (int j = 0; j < n; ++j) {
            terms.push_back({j, 1.0});
            hi += out.model.variable(j).upper;
        }
        out.model.add_row("impossible", terms, shipmg::Sense::ge, hi + 1.0);
    }
    return out;
}

// Minimum of c'x over the vertices of {lo <= Ax <= hi, l <= x <= u}:
// every choice of n linearly independent tight constraints is solved and
// checked for feasibility. Returns nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration(const RandomLp& inst) {
    const auto& m = inst.model;
    const int n = m.num_cols();
    struct Hyper {
        Eigen::VectorXd a;
        double b;
    };
    std::vector<Hyper> planes;
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        planes.push_back({e, m.variable(j).lower});
        planes.push_back({e, m.variable(j).upper});
    }
    for (int i = 0; i < m.num_rows(); ++i) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (const auto& t : m.row(i).terms) a(t.col) += t.coef;
        if (std::isfinite(m.row(i).lower)) planes.push_back({a, m.row(i).lower});
        if (std::isfinite(m.row(i).upper) && m.row(i).upper != m.row(i).lower) planes.push_back({a, m.row(i).upper});
    }
    const int P = static_cast<int>(planes.size());
    std::vector<int> pick(static_cast<std::size_t>(n));
    std::optional<double> best;
    auto feasible = [&](const Eigen::VectorXd& x) {
        for (int j = 0; j < n; ++j)
            if (x(j) < m.variable(j).lower - 1e-9 || x(j) > m.variable(j).upper + 1e-9) return false;
        for (int i = 0; i < m.num_rows(); ++i) {
            double act = 0.0;
            for (const auto& t : m.row(i).terms) act += t.coef * x(t.col);
            if (act < m.row(i).lower - 1e-9 || act > m.row(i).upper + 1e-9) return false;
        }
        return true;
    };
    // Iterate over combinations of n planes.
    for (int k = 0; k < n; ++k) pick[static_cast<std::size_t>(k)] = k;
    while (true) {
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (int k = 0; k < n; ++k) {
            A.row(k) = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].a.transpose();
            b(k) = planes[static_cast<std::size_t>(pick[static_cast<std::size_t>(k)])].b;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() == n) {
            const Eigen::VectorXd x = lu.solve(b);
            if (feasible(x)) {
                double obj = m.objective_constant();
                for (int j = 0; j < n; ++j) obj += m.objective()[static_cast<std::size_t>(j)] * x(j);
                if (!best || obj < *best) best = obj;
            }
        }
        int k = n - 1;
        while (k >= 0 && pick[static_cast<std::size_t>(k)] == P - n + k) --k;
        if (k < 0) break;
        ++pick[static_cast<std::size_t>(k)];
        for (int t = k + 1; t < n; ++t) pick[static_cast<std::size_t>(t)] = pick[static_cast<std::size_t>(t - 1)] + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Toy unit commitment: G generators, T steps, piecewise fuel curves given by
// breakpoints (power, fuel cost per step), start-up cost, fixed demand.
struct ToyUc {
    int generators = 2;
    int steps = 4;
    std::vector<std::vector<double>> bp_power;   // per generator, starts at 0
    std::vector<std::vector<double>> bp_cost;    // same length, cost at breakpoint
    std::vector<double> startup;
    std::vector<double> demand;
};

inline double pwl_eval(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    for (std::size_t k = 0; k + 1 < xs.size(); ++k)
        if (x <= xs[k + 1] + 1e-12) return ys[k] + (ys[k + 1] - ys[k]) * (x - xs[k]) / (xs[k + 1] - xs[k]);
    return std::numeric_limits<double>::infinity();
}

// Exact dispatch cost of one step for a fixed commitment: the minimum of a
// sum of piecewise-linear functions under a sum constraint is attained with
// all but one unit at a breakpoint, so enumerating breakpoint combinations
// for G - 1 units and solving for the last is exhaustive.
inline double toy_step_cost(const ToyUc& uc, const std::vector<int>& on, double demand) {
    const int G = uc.generators;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> idx(static_cast<std::size_t>(G), 0);
    for (int free = 0; free < G; ++free) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            double fixed_p = 0.0, fixed_c = 0.0;
            bool ok = true;
            for (int g = 0; g < G; ++g) {
                if (g == free) continue;
                const auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(g)]);
                if (!on[static_cast<std::size_t>(g)] && k > 0) { ok = false; break; }
                fixed_p += uc.bp_power[static_cast<std::size_t>(g)][k];
                fixed_c += uc.bp_cost[static_cast<std::size_t>(g)][k];
            }
            if (ok) {
                const double rest = demand - fixed_p;
                const auto& xs = uc.bp_power[static_cast<std::size_t>(free)];
                const double cap = on[static_cast<std::size_t>(free)] ? xs.back() : 0.0;
                if (rest >= -1e-12 && rest <= cap + 1e-12)
                    best = std::min(best, fixed_c + pwl_eval(xs, uc.bp_cost[static_cast<std::size_t>(free)], std::max(rest, 0.0)));
            }
            int g = 0;
            for (; g < G; ++g) {
                if (g == free) continue;
                if (++idx[static_cast<std::size_t>(g)] < static_cast<int>(uc.bp_power[static_cast<std::size_t>(g)].size())) break;
                idx[static_cast<std::size_t>(g)] = 0;
            }
            if (g == G) break;
        }
    }
    return best;
}

// Exhaustive enumeration over all 2^(G*T) commitment patterns.
inline double toy_uc_enumerate(const ToyUc& uc) {
    const int G = uc.generators, T = uc.steps;
    const long patterns = 1L << (G * T);
    double best = std::numeric_limits<double>::infinity();
    for (long mask = 0; mask < patterns; ++mask) {
        double total = 0.0;
        std::vector<int> prev(static_cast<std::size_t>(G), 0);
        for (int t = 0; t < T && std::isfinite(total); ++t) {
            std::vector<int> on(static_cast<std::size_t>(G));
            for (int g = 0; g < G; ++g) {
                on[static_cast<std::size_t>(g)] = static_cast<int>((mask >> (g * T + t)) & 1L);
                if (on[static_cast<std::size_t>(g)] && !prev[static_cast<std::size_t>(g)]) total += uc.startup[static_cast<std::size_t>(g)];
            }
            total += toy_step_cost(uc, on, uc.demand[static_cast<std::size_t>(t)]);
            prev = on;
        }
        best = std::min(best, total);
    }
    return best;
}

// Incremental (ordered-fill) MILP of the toy problem.
inline shipmg::MilpModel toy_uc_model(const ToyUc& uc) {
    using namespace shipmg;
    MilpModel m;
    const int G = uc.generators, T = uc.steps;
    std::vector<std::vector<int>> u(static_cast<std::size_t>(G));
    for (int g = 0; g < G; ++g) {
        const auto& xs = uc.bp_power[static_cast<std::size_t>(g)];
        const auto& ys = uc.bp_cost[static_cast<std::size_t>(g)];
        const int nseg = static_cast<int>(xs.size()) - 1;
        for (int t = 0; t < T; ++t) {
            const std::string tag = "[" + std::to_string(g) + "][" + std::to_string(t) + "]";
            const int ug = m.add_binary("u" + tag);
            const int su = m.add_binary("su" + tag);
            m.set_objective(su, uc.startup[static_cast<std::size_t>(g)]);
            const int p = m.add_variable("p" + tag, 0.0, xs.back());
            u[static_cast<std::size_t>(g)].push_back(ug);
            std::vector<Term> pdef{{p, -1.0}};
            std::vector<int> fill, on;
            for (int s = 0; s < nseg; ++s) {
                const double w = xs[static_cast<std::size_t>(s) + 1] - xs[static_cast<std::size_t>(s)];
                const int f = m.add_variable("f" + tag + "[" + std::to_string(s) + "]", 0.0, w);
                const int z = m.add_binary("z" + tag + "[" + std::to_string(s) + "]");
                m.set_objective(f, (ys[static_cast<std::size_t>(s) + 1] - ys[static_cast<std::size_t>(s)]) / w);
                pdef.push_back({f, 1.0});
                m.add_row("fz" + tag + std::to_string(s), {{f, 1.0}, {z, -w}}, Sense::le, 0.0);
                fill.push_back(f);
                on.push_back(z);
            }
            m.add_row("pdef" + tag, pdef, Sense::eq, 0.0);
            m.add_row("z0u" + tag, {{on[0], 1.0}, {ug, -1.0}}, Sense::le, 0.0);
            for (int s = 0; s + 1 < nseg; ++s) {
                const double w = xs[static_cast<std::size_t>(s) + 1] - xs[static_cast<std::size_t>(s)];
                m.add_row("ord" + tag + std::to_string(s), {{fill[static_cast<std::size_t>(s)], 1.0}, {on[static_cast<std::size_t>(s) + 1], -w}},
                          Sense::ge, 0.0);
            }
            if (t == 0) m.add_row("start" + tag, {{su, 1.0}, {ug, -1.0}}, Sense::ge, 0.0);
            else m.add_row("start" + tag, {{su, 1.0}, {ug, -1.0}, {u[static_cast<std::size_t>(g)][static_cast<std::size_t>(t) - 1], 1.0}}, Sense::ge, 0.0);
        }
    }
    for (int t = 0; t < T; ++t) {
        std::vector<Term> bal;
        for (int g = 0; g < G; ++g) bal.push_back({m.column("p[" + std::to_string(g) + "][" + std::to_string(t) + "]"), 1.0});
        m.add_row("bal" + std::to_string(t), bal, Sense::eq, uc.demand[static_cast<std::size_t>(t)]);
    }
    return m;
}

// Random toy instance with non-convex three-segment curves.
inline ToyUc random_toy_uc(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ToyUc uc;
    double cap = 0.0;
    for (int g = 0; g < uc.generators; ++g) {
        const double pmax = 4.0 + 4.0 * u01(rng);
        cap += pmax;
        std::vector<double> xs{0.0, pmax * (0.2 + 0.2 * u01(rng)), pmax * (0.6 + 0.2 * u01(rng)), pmax};
        // Concave start then convex: slopes high, low, high.
        const double s1 = 30.0 + 20.0 * u01(rng), s2 = 10.0 + 10.0 * u01(rng), s3 = 25.0 + 20.0 * u01(rng);
        std::vector<double> ys{0.0, s1 * xs[1], s1 * xs[1] + s2 * (xs[2] - xs[1]), s1 * xs[1] + s2 * (xs[2] - xs[1]) + s3 * (xs[3] - xs[2])};
        uc.bp_power.push_back(xs);
        uc.bp_cost.push_back(ys);
        uc.startup.push_back(5.0 + 30.0 * u01(rng));
    }
    for (int t = 0; t < uc.steps; ++t) uc.demand.push_back(cap * (0.1 + 0.8 * u01(rng)));
    return uc;
}

}  // namespace oracle
