#include "shipmg/lp.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace shipmg::lp {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::numerical_failure: return "numerical_failure";
        case LpStatus::iteration_limit: return "iteration_limit";
        case LpStatus::time_limit: return "time_limit";
    }
    return "unknown";
}

bool LpBasis::is_partition(int num_cols, int num_rows) const {
    const auto total = static_cast<std::size_t>(num_cols + num_rows);
    if (state.size() != total || head.size() != static_cast<std::size_t>(num_rows)) return false;
    std::vector<char> seen(total, 0);
    for (int j : head) {
        if (j < 0 || static_cast<std::size_t>(j) >= total || seen[static_cast<std::size_t>(j)]) return false;
        seen[static_cast<std::size_t>(j)] = 1;
        if (state[static_cast<std::size_t>(j)] != VarState::basic) return false;
    }
    const auto basic = std::count(state.begin(), state.end(), VarState::basic);
    return basic == num_rows;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Clock = std::chrono::steady_clock;

double pow2_scale(double v) {
    if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
    return std::exp2(std::round(std::log2(v)));
}

constexpr double kArtificialBox = 1e6;

}  // namespace

struct DualSimplex::Impl {
    LpOptions opt;
    int n = 0;
    int m = 0;
    int total = 0;
    double obj_constant = 0.0;

    // Scaled structural matrix, column and row storage.
    std::vector<int> cstart, crow;
    std::vector<double> cval;
    std::vector<int> rstart, rcol;
    std::vector<double> rval;
    std::vector<double> rscale, cscale;

    std::vector<double> cost;               // scaled, logical costs zero
    std::vector<double> base_lo, base_hi;   // scaled model bounds incl. singleton tightening
    std::vector<bool> is_binary;
    std::vector<double> lo, hi;             // current true bounds (scaled)
    std::vector<double> box;                // artificial magnitude for infinite bounds

    std::vector<double> x, d;
    std::vector<int> head, pos;
    std::vector<VarState> state;
    std::vector<double> dse;

    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    struct Eta {
        int row;
        double pivot;
        std::vector<int> idx;
        std::vector<double> val;
    };
    std::vector<Eta> etas;
    bool factor_ok = false;
    std::vector<int> good_head;
    std::vector<VarState> good_state;

    LpStatus last_status = LpStatus::numerical_failure;
    std::string diag;
    long iters = 0;
    bool bounds_conflict = false;
    double time_limit = 1e30;

    // Work arrays.
    std::vector<double> work_row, rho, col, tau, tmp;
    std::vector<int> touched;
    std::vector<char> mark;

    Impl(const MilpModel& model, LpOptions o) : opt(o) {
        n = model.num_cols();
        m = model.num_rows();
        total = n + m;
        obj_constant = model.objective_constant();
        time_limit = o.time_limit;

        // Row max-norm scaling, then column max-norm scaling of the result.
        rscale.assign(static_cast<std::size_t>(m), 1.0);
        cscale.assign(static_cast<std::size_t>(n), 1.0);
        for (int i = 0; i < m; ++i) {
            double mx = 0.0;
            for (const auto& t : model.row(i).terms) mx = std::max(mx, std::abs(t.coef));
            rscale[static_cast<std::size_t>(i)] = mx > 0.0 ? 1.0 / pow2_scale(mx) : 1.0;
        }
        std::vector<double> cmax(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < m; ++i)
            for (const auto& t : model.row(i).terms)
                cmax[static_cast<std::size_t>(t.col)] = std::max(cmax[static_cast<std::size_t>(t.col)],
                                                                 std::abs(t.coef) * rscale[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            const double c = cmax[static_cast<std::size_t>(j)];
            cscale[static_cast<std::size_t>(j)] = c > 0.0 ? 1.0 / pow2_scale(c) : 1.0;
        }

        // Build CSR (merging duplicate entries) then CSC.
        rstart.assign(static_cast<std::size_t>(m) + 1, 0);
        std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        std::vector<int> cols_in_row;
        for (int i = 0; i < m; ++i) {
            cols_in_row.clear();
            for (const auto& t : model.row(i).terms) {
                if (!used[static_cast<std::size_t>(t.col)]) {
                    used[static_cast<std::size_t>(t.col)] = 1;
                    cols_in_row.push_back(t.col);
                }
                acc[static_cast<std::size_t>(t.col)] += t.coef;
            }
            std::sort(cols_in_row.begin(), cols_in_row.end());
            for (int j : cols_in_row) {
                const double v = acc[static_cast<std::size_t>(j)];
                acc[static_cast<std::size_t>(j)] = 0.0;
                used[static_cast<std::size_t>(j)] = 0;
                if (v == 0.0) continue;
                rcol.push_back(j);
                rval.push_back(v * rscale[static_cast<std::size_t>(i)] * cscale[static_cast<std::size_t>(j)]);
            }
            rstart[static_cast<std::size_t>(i) + 1] = static_cast<int>(rcol.size());
        }
        cstart.assign(static_cast<std::size_t>(n) + 1, 0);
        for (int j : rcol) ++cstart[static_cast<std::size_t>(j) + 1];
        for (int j = 0; j < n; ++j) cstart[static_cast<std::size_t>(j) + 1] += cstart[static_cast<std::size_t>(j)];
        crow.resize(rcol.size());
        cval.resize(rcol.size());
        {
            std::vector<int> fill(cstart.begin(), cstart.end() - 1);
            for (int i = 0; i < m; ++i)
                for (int k = rstart[static_cast<std::size_t>(i)]; k < rstart[static_cast<std::size_t>(i) + 1]; ++k) {
                    const int j = rcol[static_cast<std::size_t>(k)];
                    const int dst = fill[static_cast<std::size_t>(j)]++;
                    crow[static_cast<std::size_t>(dst)] = i;
                    cval[static_cast<std::size_t>(dst)] = rval[static_cast<std::size_t>(k)];
                }
        }

        cost.assign(static_cast<std::size_t>(total), 0.0);
        base_lo.assign(static_cast<std::size_t>(total), 0.0);
        base_hi.assign(static_cast<std::size_t>(total), 0.0);
        is_binary.assign(static_cast<std::size_t>(n), false);
        for (int j = 0; j < n; ++j) {
            const auto& v = model.variable(j);
            const double s = cscale[static_cast<std::size_t>(j)];
            cost[static_cast<std::size_t>(j)] = model.objective()[static_cast<std::size_t>(j)] * s;
            base_lo[static_cast<std::size_t>(j)] = v.lower / s;
            base_hi[static_cast<std::size_t>(j)] = v.upper / s;
            is_binary[static_cast<std::size_t>(j)] = v.type == Integrality::binary;
        }
        for (int i = 0; i < m; ++i) {
            const auto& r = model.row(i);
            const double s = rscale[static_cast<std::size_t>(i)];
            base_lo[static_cast<std::size_t>(n + i)] = r.lower * s;
            base_hi[static_cast<std::size_t>(n + i)] = r.upper * s;
        }
        // Singleton rows become column bounds (the row stays, its logical is
        // then never binding).
        for (int i = 0; i < m; ++i) {
            const int b = rstart[static_cast<std::size_t>(i)], e = rstart[static_cast<std::size_t>(i) + 1];
            if (e - b != 1) continue;
            const int j = rcol[static_cast<std::size_t>(b)];
            const double a = rval[static_cast<std::size_t>(b)];
            double l = base_lo[static_cast<std::size_t>(n + i)] / a;
            double h = base_hi[static_cast<std::size_t>(n + i)] / a;
            if (a < 0) std::swap(l, h);
            tighten(base_lo[static_cast<std::size_t>(j)], base_hi[static_cast<std::size_t>(j)], l, h, j);
        }
        lo = base_lo;
        hi = base_hi;
        box.assign(static_cast<std::size_t>(total), kArtificialBox);

        x.assign(static_cast<std::size_t>(total), 0.0);
        d.assign(static_cast<std::size_t>(total), 0.0);
        work_row.assign(static_cast<std::size_t>(total), 0.0);
        mark.assign(static_cast<std::size_t>(total), 0);
        rho.assign(static_cast<std::size_t>(m), 0.0);
        col.assign(static_cast<std::size_t>(m), 0.0);
        tau.assign(static_cast<std::size_t>(m), 0.0);
        tmp.assign(static_cast<std::size_t>(m), 0.0);
        slack_basis();
    }

    void tighten(double& l, double& h, double nl, double nh, int j) const {
        if (j < n && is_binary[static_cast<std::size_t>(j)]) {
            const double s = cscale[static_cast<std::size_t>(j)];
            nl = std::ceil(nl * s - 1e-9) / s;
            nh = std::floor(nh * s + 1e-9) / s;
        }
        l = std::max(l, nl);
        h = std::min(h, nh);
    }

    [[nodiscard]] double lower_pos(int j) const {
        const double l = lo[static_cast<std::size_t>(j)];
        return std::isfinite(l) ? l : -box[static_cast<std::size_t>(j)];
    }
    [[nodiscard]] double upper_pos(int j) const {
        const double h = hi[static_cast<std::size_t>(j)];
        return std::isfinite(h) ? h : box[static_cast<std::size_t>(j)];
    }
    [[nodiscard]] double nb_value(int j) const {
        return state[static_cast<std::size_t>(j)] == VarState::at_upper ? upper_pos(j) : lower_pos(j);
    }
    [[nodiscard]] bool is_fixed(int j) const { return lo[static_cast<std::size_t>(j)] == hi[static_cast<std::size_t>(j)]; }

    void slack_basis() {
        head.resize(static_cast<std::size_t>(m));
        pos.assign(static_cast<std::size_t>(total), -1);
        state.assign(static_cast<std::size_t>(total), VarState::at_lower);
        for (int i = 0; i < m; ++i) {
            head[static_cast<std::size_t>(i)] = n + i;
            pos[static_cast<std::size_t>(n + i)] = i;
            state[static_cast<std::size_t>(n + i)] = VarState::basic;
        }
        for (int j = 0; j < n; ++j) state[static_cast<std::size_t>(j)] = preferred_state(j, cost[static_cast<std::size_t>(j)]);
        dse.assign(static_cast<std::size_t>(m), 1.0);
        factor_ok = false;
    }

    [[nodiscard]] VarState preferred_state(int j, double dj) const {
        const bool lf = std::isfinite(lo[static_cast<std::size_t>(j)]);
        const bool hf = std::isfinite(hi[static_cast<std::size_t>(j)]);
        if (dj >= 0.0) return (lf || !hf) ? VarState::at_lower : VarState::at_upper;
        return (hf || !lf) ? VarState::at_upper : VarState::at_lower;
    }

    // Column j of [A | -I] accumulated into dense v with multiplier.
    template <class F>
    void for_column(int j, F&& f) const {
        if (j < n) {
            for (int k = cstart[static_cast<std::size_t>(j)]; k < cstart[static_cast<std::size_t>(j) + 1]; ++k)
                f(crow[static_cast<std::size_t>(k)], cval[static_cast<std::size_t>(k)]);
        } else {
            f(j - n, -1.0);
        }
    }

    bool refactor() {
        std::vector<Eigen::Triplet<double, int>> trip;
        trip.reserve(static_cast<std::size_t>(m) * 3);
        for (int p = 0; p < m; ++p)
            for_column(head[static_cast<std::size_t>(p)], [&](int i, double v) { trip.emplace_back(i, p, v); });
        SpMat B(m, m);
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        lu.analyzePattern(B);
        lu.factorize(B);
        etas.clear();
        factor_ok = lu.info() == Eigen::Success;
        if (factor_ok) {
            // Reject numerically singular factors.
            Eigen::VectorXd probe = Eigen::VectorXd::Ones(m);
            Eigen::VectorXd sol = lu.solve(probe);
            if (!sol.allFinite()) {
                factor_ok = false;
            } else {
                Eigen::VectorXd res = B * sol - probe;
                if (res.lpNorm<Eigen::Infinity>() > 1e-6 * std::max(1.0, sol.lpNorm<Eigen::Infinity>()))
                    factor_ok = false;
            }
        }
        if (factor_ok) {
            good_head = head;
            good_state = state;
        }
        return factor_ok;
    }

    // Refactor; on failure fall back to the last good basis, then to slack.
    void refactor_robust() {
        if (refactor()) return;
        if (!good_head.empty() && good_head != head) {
            head = good_head;
            state = good_state;
            rebuild_pos();
            if (refactor()) {
                dse.assign(static_cast<std::size_t>(m), 1.0);
                return;
            }
        }
        slack_basis();
        refactor();
    }

    void rebuild_pos() {
        pos.assign(static_cast<std::size_t>(total), -1);
        for (int p = 0; p < m; ++p) pos[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] = p;
    }

    void ftran(std::vector<double>& v) const {
        Eigen::Map<Eigen::VectorXd> mv(v.data(), m);
        Eigen::VectorXd sol = lu.solve(mv);
        mv = sol;
        for (const auto& e : etas) {
            const double wr = v[static_cast<std::size_t>(e.row)] / e.pivot;
            v[static_cast<std::size_t>(e.row)] = wr;
            if (wr == 0.0) continue;
            for (std::size_t k = 0; k < e.idx.size(); ++k) v[static_cast<std::size_t>(e.idx[k])] -= e.val[k] * wr;
        }
    }

    void btran(std::vector<double>& v) const {
        for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
            double s = v[static_cast<std::size_t>(it->row)];
            for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[static_cast<std::size_t>(it->idx[k])];
            v[static_cast<std::size_t>(it->row)] = s / it->pivot;
        }
        Eigen::Map<Eigen::VectorXd> mv(v.data(), m);
        Eigen::VectorXd sol = lu.transpose().solve(mv);
        mv = sol;
    }

    void compute_primal() {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (int j = 0; j < total; ++j) {
            if (state[static_cast<std::size_t>(j)] == VarState::basic) continue;
            const double v = nb_value(j);
            x[static_cast<std::size_t>(j)] = v;
            if (v == 0.0) continue;
            for_column(j, [&](int i, double a) { tmp[static_cast<std::size_t>(i)] -= a * v; });
        }
        ftran(tmp);
        for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] = tmp[static_cast<std::size_t>(p)];
    }

    void compute_duals() {
        std::vector<double> y(static_cast<std::size_t>(m));
        for (int p = 0; p < m; ++p) y[static_cast<std::size_t>(p)] = cost[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])];
        btran(y);
        for (int j = 0; j < total; ++j) {
            if (state[static_cast<std::size_t>(j)] == VarState::basic) {
                d[static_cast<std::size_t>(j)] = 0.0;
                continue;
            }
            double dj = cost[static_cast<std::size_t>(j)];
            for_column(j, [&](int i, double a) { dj -= a * y[static_cast<std::size_t>(i)]; });
            d[static_cast<std::size_t>(j)] = dj;
        }
    }

    [[nodiscard]] std::vector<double> row_duals() const {
        std::vector<double> y(static_cast<std::size_t>(m));
        for (int p = 0; p < m; ++p) y[static_cast<std::size_t>(p)] = cost[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])];
        btran(y);
        return y;
    }

    // Flip nonbasic columns whose reduced cost has the wrong sign.
    bool make_dual_feasible() {
        bool flipped = false;
        for (int j = 0; j < total; ++j) {
            const auto s = state[static_cast<std::size_t>(j)];
            if (s == VarState::basic || is_fixed(j)) continue;
            const double dj = d[static_cast<std::size_t>(j)];
            if (s == VarState::at_lower && dj < -opt.dual_tol) {
                state[static_cast<std::size_t>(j)] = VarState::at_upper;
                flipped = true;
            } else if (s == VarState::at_upper && dj > opt.dual_tol) {
                state[static_cast<std::size_t>(j)] = VarState::at_lower;
                flipped = true;
            }
        }
        return flipped;
    }

    void recompute_all() {
        compute_primal();
        compute_duals();
        if (make_dual_feasible()) compute_primal();
    }

    [[nodiscard]] double infeasibility(int j) const {
        const double v = x[static_cast<std::size_t>(j)];
        const double l = lo[static_cast<std::size_t>(j)], h = hi[static_cast<std::size_t>(j)];
        if (v < l - opt.primal_tol) return l - v;
        if (v > h + opt.primal_tol) return v - h;
        return 0.0;
    }

    int choose_leaving(bool bland) const {
        int best = -1;
        double best_score = 0.0;
        for (int p = 0; p < m; ++p) {
            const int j = head[static_cast<std::size_t>(p)];
            const double inf = infeasibility(j);
            if (inf <= 0.0) continue;
            if (bland) {
                if (best < 0 || j < head[static_cast<std::size_t>(best)]) best = p;
                continue;
            }
            const double score = inf * inf / dse[static_cast<std::size_t>(p)];
            if (score > best_score) {
                best_score = score;
                best = p;
            }
        }
        return best;
    }

    void compute_pivot_row() {
        for (int j : touched) {
            work_row[static_cast<std::size_t>(j)] = 0.0;
            mark[static_cast<std::size_t>(j)] = 0;
        }
        touched.clear();
        for (int i = 0; i < m; ++i) {
            const double r = rho[static_cast<std::size_t>(i)];
            if (std::abs(r) < 1e-13) continue;
            for (int k = rstart[static_cast<std::size_t>(i)]; k < rstart[static_cast<std::size_t>(i) + 1]; ++k) {
                const int j = rcol[static_cast<std::size_t>(k)];
                if (state[static_cast<std::size_t>(j)] == VarState::basic) continue;
                if (!mark[static_cast<std::size_t>(j)]) {
                    mark[static_cast<std::size_t>(j)] = 1;
                    touched.push_back(j);
                }
                work_row[static_cast<std::size_t>(j)] += r * rval[static_cast<std::size_t>(k)];
            }
            const int lj = n + i;
            if (state[static_cast<std::size_t>(lj)] != VarState::basic) {
                mark[static_cast<std::size_t>(lj)] = 1;
                touched.push_back(lj);
                work_row[static_cast<std::size_t>(lj)] = -r;
            }
        }
    }

    struct Candidate {
        int j;
        double ratio;
        double alpha;  // signed pivot-row entry
    };

    [[nodiscard]] double seconds_since(Clock::time_point t0) const {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    LpStatus run() {
        const auto t0 = Clock::now();
        diag.clear();
        if (bounds_conflict) {
            diag = "column bounds conflict after tightening";
            return last_status = LpStatus::infeasible;
        }
        for (int j = 0; j < total; ++j)
            if (lo[static_cast<std::size_t>(j)] > hi[static_cast<std::size_t>(j)] + opt.primal_tol) {
                std::ostringstream os;
                os << "bounds conflict on column " << j;
                diag = os.str();
                return last_status = LpStatus::infeasible;
            }
        if (!factor_ok) refactor_robust();
        recompute_all();

        int degenerate_run = 0;
        bool fresh = etas.empty();
        int box_rounds = 0;
        std::vector<Candidate> cands;
        std::vector<int> flips;
        long local_iters = 0;

        for (;;) {
            if (local_iters >= opt.max_iterations) return last_status = LpStatus::iteration_limit;
            if ((local_iters & 63) == 0 && seconds_since(t0) > time_limit) return last_status = LpStatus::time_limit;
            if (static_cast<int>(etas.size()) >= opt.refactor_interval) {
                refactor_robust();
                recompute_all();
                fresh = true;
            }
            const bool bland = degenerate_run > opt.degenerate_limit;
            const int p = choose_leaving(bland);
            if (p < 0) {
                if (!fresh) {
                    refactor_robust();
                    recompute_all();
                    fresh = true;
                    continue;
                }
                // Optimal for the boxed problem; check artificial bounds.
                bool at_box = false;
                for (int j = 0; j < total; ++j) {
                    if (state[static_cast<std::size_t>(j)] == VarState::basic) continue;
                    const bool art = (state[static_cast<std::size_t>(j)] == VarState::at_lower)
                                         ? !std::isfinite(lo[static_cast<std::size_t>(j)])
                                         : !std::isfinite(hi[static_cast<std::size_t>(j)]);
                    if (art && std::abs(d[static_cast<std::size_t>(j)]) > opt.dual_tol) {
                        at_box = true;
                        box[static_cast<std::size_t>(j)] *= 1e3;
                    }
                }
                if (!at_box) return last_status = LpStatus::optimal;
                if (++box_rounds > 3) {
                    diag = "objective decreases without bound along an unbounded column";
                    return last_status = LpStatus::unbounded;
                }
                compute_primal();
                fresh = true;
                continue;
            }

            const int leave = head[static_cast<std::size_t>(p)];
            const bool to_upper = x[static_cast<std::size_t>(leave)] > hi[static_cast<std::size_t>(leave)];
            const double target = to_upper ? hi[static_cast<std::size_t>(leave)] : lo[static_cast<std::size_t>(leave)];
            const double sgn = to_upper ? 1.0 : -1.0;

            std::fill(rho.begin(), rho.end(), 0.0);
            rho[static_cast<std::size_t>(p)] = 1.0;
            btran(rho);
            compute_pivot_row();

            cands.clear();
            for (int j : touched) {
                if (is_fixed(j)) continue;
                const double a = work_row[static_cast<std::size_t>(j)];
                const double sa = sgn * a;
                const auto st = state[static_cast<std::size_t>(j)];
                if (st == VarState::at_lower && sa > opt.pivot_tol) {
                    cands.push_back({j, std::max(d[static_cast<std::size_t>(j)], 0.0) / sa, a});
                } else if (st == VarState::at_upper && sa < -opt.pivot_tol) {
                    cands.push_back({j, std::max(-d[static_cast<std::size_t>(j)], 0.0) / -sa, a});
                }
            }
            if (cands.empty()) {
                if (!fresh) {
                    refactor_robust();
                    recompute_all();
                    fresh = true;
                    continue;
                }
                std::ostringstream os;
                os << "primal infeasible: basic " << (leave < n ? "column " : "row ") << (leave < n ? leave : leave - n)
                   << " cannot reach its " << (to_upper ? "upper" : "lower") << " bound";
                diag = os.str();
                return last_status = LpStatus::infeasible;
            }
            std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
                if (a.ratio != b.ratio) return a.ratio < b.ratio;
                return a.j < b.j;
            });

            // Bound-flipping ratio test.
            flips.clear();
            double slope = std::abs(x[static_cast<std::size_t>(leave)] - target);
            std::size_t k = 0;
            int q = -1;
            if (!bland) {
                for (; k < cands.size(); ++k) {
                    const int j = cands[k].j;
                    const double range = hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)];
                    if (!std::isfinite(range)) break;
                    const double ns = slope - std::abs(cands[k].alpha) * range;
                    if (ns <= opt.primal_tol) break;
                    slope = ns;
                }
                if (k == cands.size()) {
                    // Every breakpoint can be passed: no basis change restores
                    // feasibility of this row.
                    if (!fresh) {
                        refactor_robust();
                        recompute_all();
                        fresh = true;
                        continue;
                    }
                    std::ostringstream os;
                    os << "primal infeasible: " << (leave < n ? "column " : "row ") << (leave < n ? leave : leave - n)
                       << " violates its bound for every bound combination of the pivot row";
                    diag = os.str();
                    return last_status = LpStatus::infeasible;
                }
                // Harris pass over the remaining breakpoints: largest pivot
                // among those within the dual tolerance of the first.
                double theta_max = 1e300;
                for (std::size_t t = k; t < cands.size(); ++t) {
                    const auto& c = cands[t];
                    const double dd = std::abs(d[static_cast<std::size_t>(c.j)]);
                    theta_max = std::min(theta_max, (dd + opt.dual_tol) / std::abs(c.alpha));
                    if (c.ratio > theta_max) break;
                }
                double best_alpha = 0.0;
                for (std::size_t t = k; t < cands.size() && cands[t].ratio <= theta_max; ++t) {
                    if (std::abs(cands[t].alpha) > best_alpha) {
                        best_alpha = std::abs(cands[t].alpha);
                        q = cands[t].j;
                    }
                }
                if (q < 0) q = cands[k].j;
                for (std::size_t t = 0; t < k; ++t) flips.push_back(cands[t].j);
            } else {
                q = cands[0].j;
                for (std::size_t t = 1; t < cands.size() && cands[t].ratio <= cands[0].ratio; ++t)
                    q = std::min(q, cands[t].j);
            }

            // Entering column.
            std::fill(col.begin(), col.end(), 0.0);
            for_column(q, [&](int i, double a) { col[static_cast<std::size_t>(i)] = a; });
            ftran(col);
            const double alpha_q = col[static_cast<std::size_t>(p)];
            const double alpha_r = work_row[static_cast<std::size_t>(q)];
            if (std::abs(alpha_q) < opt.pivot_tol ||
                std::abs(alpha_q - alpha_r) > 1e-6 * std::max(1.0, std::abs(alpha_q))) {
                if (!fresh) {
                    refactor_robust();
                    recompute_all();
                    fresh = true;
                    continue;
                }
                if (std::abs(alpha_q) < opt.pivot_tol) {
                    diag = "pivot element vanished after fresh factorization";
                    return last_status = LpStatus::numerical_failure;
                }
            }

            // Apply bound flips.
            if (!flips.empty()) {
                std::fill(tmp.begin(), tmp.end(), 0.0);
                for (int j : flips) {
                    const double old = x[static_cast<std::size_t>(j)];
                    state[static_cast<std::size_t>(j)] =
                        state[static_cast<std::size_t>(j)] == VarState::at_lower ? VarState::at_upper : VarState::at_lower;
                    const double nv = nb_value(j);
                    x[static_cast<std::size_t>(j)] = nv;
                    const double delta = nv - old;
                    for_column(j, [&](int i, double a) { tmp[static_cast<std::size_t>(i)] += a * delta; });
                }
                ftran(tmp);
                for (int r = 0; r < m; ++r)
                    x[static_cast<std::size_t>(head[static_cast<std::size_t>(r)])] -= tmp[static_cast<std::size_t>(r)];
            }

            // Primal step.
            const double theta_p = (x[static_cast<std::size_t>(leave)] - target) / alpha_q;
            for (int r = 0; r < m; ++r) {
                const double c = col[static_cast<std::size_t>(r)];
                if (c != 0.0) x[static_cast<std::size_t>(head[static_cast<std::size_t>(r)])] -= theta_p * c;
            }
            x[static_cast<std::size_t>(q)] += theta_p;
            x[static_cast<std::size_t>(leave)] = target;

            // Dual step.
            const double theta_d = d[static_cast<std::size_t>(q)] / alpha_r;
            for (int j : touched) {
                if (state[static_cast<std::size_t>(j)] == VarState::basic) continue;
                d[static_cast<std::size_t>(j)] -= theta_d * work_row[static_cast<std::size_t>(j)];
            }
            d[static_cast<std::size_t>(q)] = 0.0;
            d[static_cast<std::size_t>(leave)] = -theta_d;

            // Dual steepest-edge weights.
            tau = rho;
            ftran(tau);
            double wp = 0.0;
            for (double r : rho) wp += r * r;
            for (int r = 0; r < m; ++r) {
                if (r == p) continue;
                const double c = col[static_cast<std::size_t>(r)];
                if (c == 0.0) continue;
                const double ratio = c / alpha_q;
                double w = dse[static_cast<std::size_t>(r)] - 2.0 * ratio * tau[static_cast<std::size_t>(r)] + ratio * ratio * wp;
                dse[static_cast<std::size_t>(r)] = std::max(w, 1e-8);
            }
            dse[static_cast<std::size_t>(p)] = std::max(wp / (alpha_q * alpha_q), 1e-8);

            // Basis change.
            head[static_cast<std::size_t>(p)] = q;
            pos[static_cast<std::size_t>(q)] = p;
            pos[static_cast<std::size_t>(leave)] = -1;
            state[static_cast<std::size_t>(q)] = VarState::basic;
            state[static_cast<std::size_t>(leave)] = to_upper ? VarState::at_upper : VarState::at_lower;
            Eta e;
            e.row = p;
            e.pivot = alpha_q;
            for (int r = 0; r < m; ++r) {
                if (r == p) continue;
                const double c = col[static_cast<std::size_t>(r)];
                if (std::abs(c) > 1e-14) {
                    e.idx.push_back(r);
                    e.val.push_back(c);
                }
            }
            etas.push_back(std::move(e));
            fresh = false;
            ++iters;
            ++local_iters;
            degenerate_run = std::abs(theta_d) < 1e-12 ? degenerate_run + 1 : 0;
        }
    }

    [[nodiscard]] double scaled_objective() const {
        double s = obj_constant;
        for (int j = 0; j < n; ++j) s += cost[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
        return s;
    }
};

DualSimplex::DualSimplex(const MilpModel& model, LpOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}
DualSimplex::~DualSimplex() = default;
DualSimplex::DualSimplex(DualSimplex&&) noexcept = default;
DualSimplex& DualSimplex::operator=(DualSimplex&&) noexcept = default;

void DualSimplex::set_bounds(int col, double lower, double upper) {
    auto& I = *impl_;
    const auto j = static_cast<std::size_t>(col);
    const double s = I.cscale[j];
    double l = lower / s, h = upper / s;
    I.lo[j] = std::max(l, I.base_lo[j]);
    I.hi[j] = std::min(h, I.base_hi[j]);
    if (I.state[j] != VarState::basic) {
        // Keep the nonbasic state dual feasible where the bound exists.
        if (I.state[j] == VarState::at_upper && !std::isfinite(I.hi[j]) && std::isfinite(I.lo[j]))
            I.state[j] = VarState::at_lower;
        if (I.state[j] == VarState::at_lower && !std::isfinite(I.lo[j]) && std::isfinite(I.hi[j]))
            I.state[j] = VarState::at_upper;
    }
}

double DualSimplex::lower(int col) const { return impl_->lo[static_cast<std::size_t>(col)] * impl_->cscale[static_cast<std::size_t>(col)]; }
double DualSimplex::upper(int col) const { return impl_->hi[static_cast<std::size_t>(col)] * impl_->cscale[static_cast<std::size_t>(col)]; }

void DualSimplex::reset_bounds() {
    impl_->lo = impl_->base_lo;
    impl_->hi = impl_->base_hi;
}

void DualSimplex::set_basis(const LpBasis& basis) {
    auto& I = *impl_;
    if (!basis.is_partition(I.n, I.m)) throw ModelError("warm-start basis is not a partition of the columns");
    if (basis.head == I.head && basis.state == I.state) return;
    const bool same_head = basis.head == I.head;
    I.head = basis.head;
    I.state = basis.state;
    I.rebuild_pos();
    if (!same_head) {
        I.factor_ok = false;
        I.dse.assign(static_cast<std::size_t>(I.m), 1.0);
    }
}

LpBasis DualSimplex::basis() const { return LpBasis{impl_->head, impl_->state}; }
void DualSimplex::set_time_limit(double seconds) { impl_->time_limit = seconds; }
LpStatus DualSimplex::solve() { return impl_->run(); }
LpStatus DualSimplex::status() const { return impl_->last_status; }
double DualSimplex::objective() const { return impl_->scaled_objective(); }
long DualSimplex::iterations() const { return impl_->iters; }
const std::string& DualSimplex::diagnostic() const { return impl_->diag; }

std::vector<double> DualSimplex::primal() const {
    const auto& I = *impl_;
    std::vector<double> out(static_cast<std::size_t>(I.n));
    for (int j = 0; j < I.n; ++j) out[static_cast<std::size_t>(j)] = I.x[static_cast<std::size_t>(j)] * I.cscale[static_cast<std::size_t>(j)];
    return out;
}

LpResult DualSimplex::result() const {
    const auto& I = *impl_;
    LpResult r;
    r.status = I.last_status;
    r.iterations = I.iters;
    r.diagnostic = I.diag;
    r.basis = basis();
    if (r.status != LpStatus::optimal) return r;
    r.x = primal();
    r.objective = I.scaled_objective();
    r.row_activity.resize(static_cast<std::size_t>(I.m));
    for (int i = 0; i < I.m; ++i)
        r.row_activity[static_cast<std::size_t>(i)] = I.x[static_cast<std::size_t>(I.n + i)] / I.rscale[static_cast<std::size_t>(i)];
    const auto y = I.row_duals();
    r.duals.resize(static_cast<std::size_t>(I.m));
    for (int i = 0; i < I.m; ++i) r.duals[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] * I.rscale[static_cast<std::size_t>(i)];
    r.reduced_costs.resize(static_cast<std::size_t>(I.n));

    // Dual objective from the Lagrangian bound over the current box.
    double dual = I.obj_constant;
    auto bound_term = [&](double coef, double l, double h) {
        if (std::abs(coef) <= 1e-12) return 0.0;
        const double b = coef > 0 ? l : h;
        if (!std::isfinite(b)) return -kInf;
        return coef * b;
    };
    for (int j = 0; j < I.n; ++j) {
        double dj = I.cost[static_cast<std::size_t>(j)];
        I.for_column(j, [&](int i, double a) { dj -= a * y[static_cast<std::size_t>(i)]; });
        const double s = I.cscale[static_cast<std::size_t>(j)];
        r.reduced_costs[static_cast<std::size_t>(j)] = dj / s;
        dual += bound_term(dj, I.lo[static_cast<std::size_t>(j)], I.hi[static_cast<std::size_t>(j)]);
    }
    for (int i = 0; i < I.m; ++i)
        dual += bound_term(y[static_cast<std::size_t>(i)], I.lo[static_cast<std::size_t>(I.n + i)], I.hi[static_cast<std::size_t>(I.n + i)]);
    r.dual_objective = dual;
    return r;
}

LpResult solve_lp(const MilpModel& model, const LpOptions& options, const LpBasis* warm) {
    if (model.num_cols() < 1) throw ModelError("LP has no variables");
    DualSimplex lp(model, options);
    if (warm != nullptr && !warm->empty()) lp.set_basis(*warm);
    lp.solve();
    return lp.result();
}

}  // namespace shipmg::lp
