#include "shipmg/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <queue>

#include "shipmg/lp.hpp"

namespace shipmg {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::gap_reached: return "gap_reached";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::time_limit: return "time_limit";
        case SolveStatus::node_limit: return "node_limit";
        case SolveStatus::error: return "error";
    }
    return "error";
}

SolveStatus solve_status_from_string(const std::string& s) {
    for (auto st : {SolveStatus::optimal, SolveStatus::gap_reached, SolveStatus::infeasible, SolveStatus::time_limit,
                    SolveStatus::node_limit, SolveStatus::error})
        if (s == to_string(st)) return st;
    throw std::invalid_argument("unknown solve status: " + s);
}

double MilpResult::gap() const {
    if (!has_solution()) return kInf;
    return (objective - bound) / std::max(1.0, std::abs(objective));
}

namespace {

using Clock = std::chrono::steady_clock;

// Row tolerance of the rounding heuristic; candidates are re-solved with
// fixed binaries before acceptance, so this only filters.
constexpr double kRoundTol = 1e-7;

// RINS schedule: node budget per sub-search, regular period and minimum
// distance between calls triggered by a new incumbent.
constexpr long kRinsNodes = 300;
constexpr long kRinsEvery = 200;
constexpr long kRinsMinGap = 20;

struct OpenNode {
    BnbNode node;
    std::shared_ptr<const lp::LpBasis> basis;
    // Branching that created the node, for the pseudocost update.
    int branch_col = -1;
    signed char branch_dir = 0;
    double branch_frac = 0.0;  // distance of the parent value to the new bound
    double parent_obj = 0.0;
};

// Per-binary average objective gain per unit of change, by direction.
class Pseudocosts {
public:
    explicit Pseudocosts(std::size_t n) : sum_(2 * n, 0.0), count_(2 * n, 0) {}

    void record(int col, signed char dir, double distance, double gain) {
        if (distance <= 1e-9) return;
        const auto k = index(col, dir);
        sum_[k] += std::max(0.0, gain) / distance;
        ++count_[k];
        total_[dir] += std::max(0.0, gain) / distance;
        ++total_count_[dir];
    }

    [[nodiscard]] bool empty() const { return total_count_[0] + total_count_[1] == 0; }

    // Average gain per unit; uninitialized entries use the direction mean.
    [[nodiscard]] double get(int col, signed char dir) const {
        const auto k = index(col, dir);
        if (count_[k] > 0) return sum_[k] / count_[k];
        return total_count_[dir] > 0 ? total_[dir] / total_count_[dir] : 1.0;
    }

private:
    static std::size_t index(int col, signed char dir) { return 2 * static_cast<std::size_t>(col) + static_cast<std::size_t>(dir); }
    std::vector<double> sum_;
    std::vector<long> count_;
    double total_[2] = {0.0, 0.0};
    long total_count_[2] = {0, 0};
};

struct WorseFirst {
    bool operator()(const OpenNode& a, const OpenNode& b) const {
        if (a.node.bound != b.node.bound) return a.node.bound > b.node.bound;
        return a.node.sequence > b.node.sequence;
    }
};

class Search {
public:
    // `base` fixes binaries for the whole search; solutions must beat
    // `cutoff`. Sub-searches (allow_rins = false) serve the RINS heuristic.
    Search(const MilpModel& model, const SolverSettings& settings, std::vector<std::pair<int, signed char>> base = {},
           double cutoff = kInf, bool allow_rins = true)
        : model_(model),
          settings_(settings),
          lp_(model),
          t0_(Clock::now()),
          base_(std::move(base)),
          cutoff_(cutoff),
          allow_rins_(allow_rins) {
        for (int j = 0; j < model.num_cols(); ++j)
            if (model.variable(j).type == Integrality::binary) binaries_.push_back(j);
        applied_.assign(static_cast<std::size_t>(model.num_cols()), -1);
        target_.assign(static_cast<std::size_t>(model.num_cols()), -1);
        col_rows_.resize(static_cast<std::size_t>(model.num_cols()));
        for (int i = 0; i < model.num_rows(); ++i)
            for (const auto& t : model.row(i).terms)
                if (t.coef != 0.0) col_rows_[static_cast<std::size_t>(t.col)].push_back({i, t.coef});
    }

    MilpResult run();

private:
    [[nodiscard]] double elapsed() const { return std::chrono::duration<double>(Clock::now() - t0_).count(); }
    [[nodiscard]] double remaining() const { return settings_.time_limit - elapsed(); }
    [[nodiscard]] double prune_threshold() const {
        const double ref = std::min(incumbent_obj_, cutoff_);
        if (!std::isfinite(ref)) return kInf;
        return ref - 1e-9 * std::max(1.0, std::abs(ref));
    }
    [[nodiscard]] bool has_incumbent() const { return !incumbent_.empty(); }

    void apply_target() {
        for (int j : binaries_) {
            const auto sj = static_cast<std::size_t>(j);
            if (applied_[sj] == target_[sj]) continue;
            applied_[sj] = target_[sj];
            const auto& v = model_.variable(j);
            if (target_[sj] < 0) lp_.set_bounds(j, v.lower, v.upper);
            else lp_.set_bounds(j, target_[sj], target_[sj]);
        }
    }

    void apply_fixings(const std::vector<std::pair<int, signed char>>& fix) {
        for (int j : binaries_) target_[static_cast<std::size_t>(j)] = -1;
        for (const auto& [j, v] : fix) target_[static_cast<std::size_t>(j)] = v;
        apply_target();
    }

    lp::LpStatus solve_lp() {
        lp_.set_time_limit(std::max(0.0, remaining()));
        const auto st = lp_.solve();
        return st;
    }

    // Fractional binary with the best pseudocost product score (most
    // fractional while no branching history exists), ties to the lowest
    // index; -1 when integral.
    [[nodiscard]] int branching_column(const std::vector<double>& x) const {
        int best = -1;
        double best_score = -1.0;
        const bool history = !pseudocosts_.empty();
        for (int j : binaries_) {
            const double v = x[static_cast<std::size_t>(j)];
            const double down = v - std::floor(v), up = std::ceil(v) - v;
            if (std::min(down, up) <= settings_.int_tol) continue;
            double score = std::min(down, up);
            if (history) {
                constexpr double eps = 1e-6;
                score = std::max(pseudocosts_.get(j, 0) * down, eps) * std::max(pseudocosts_.get(j, 1) * up, eps);
            }
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        return best;
    }

    // Fix all binaries to their rounded values and re-solve the continuous
    // part so the candidate satisfies the rows with exact binaries.
    void polish_and_offer(const std::vector<double>& x) {
        const auto saved_target = applied_;
        const auto saved_basis = lp_.basis();
        for (int j : binaries_) target_[static_cast<std::size_t>(j)] = static_cast<signed char>(std::lround(x[static_cast<std::size_t>(j)]));
        apply_target();
        if (solve_lp() == lp::LpStatus::optimal) {
            const double obj = lp_.objective();
            if (obj < incumbent_obj_ - 1e-12 * std::max(1.0, std::abs(obj))) {
                incumbent_ = lp_.primal();
                for (int j : binaries_)
                    incumbent_[static_cast<std::size_t>(j)] = std::round(incumbent_[static_cast<std::size_t>(j)]);
                incumbent_obj_ = model_.evaluate_objective(incumbent_);
                ++incumbent_version_;
            }
        }
        target_ = saved_target;
        apply_target();
        lp_.set_basis(saved_basis);
    }

    // ZI rounding: shift each fractional binary to 0 or 1 when every row it
    // appears in stays within its bounds given the current activities,
    // preferring the cheaper direction. Offers the candidate when all
    // binaries end up integral.
    void round_and_offer(const std::vector<double>& x, double lp_obj) {
        std::vector<double> act(static_cast<std::size_t>(model_.num_rows()));
        for (int i = 0; i < model_.num_rows(); ++i) act[static_cast<std::size_t>(i)] = model_.row_activity(i, x);
        std::vector<double> y = x;
        double obj = lp_obj;
        const auto& c = model_.objective();
        auto shift_ok = [&](int j, double delta) {
            for (const auto& [i, a] : col_rows_[static_cast<std::size_t>(j)]) {
                const auto& row = model_.row(i);
                const double v = act[static_cast<std::size_t>(i)] + a * delta;
                if (v < row.lower - kRoundTol * std::max(1.0, std::abs(row.lower))) return false;
                if (v > row.upper + kRoundTol * std::max(1.0, std::abs(row.upper))) return false;
            }
            return true;
        };
        bool fractional = true;
        for (int pass = 0; pass < 3 && fractional; ++pass) {
            fractional = false;
            bool changed = false;
            for (int j : binaries_) {
                const auto sj = static_cast<std::size_t>(j);
                const double v = y[sj];
                if (std::min(v - std::floor(v), std::ceil(v) - v) <= settings_.int_tol) continue;
                const double up = 1.0 - v, down = -v;
                const bool can_up = shift_ok(j, up), can_down = shift_ok(j, down);
                double delta = 0.0;
                if (can_up && can_down) {
                    const double cu = c[sj] * up, cd = c[sj] * down;
                    delta = cu < cd || (cu == cd && v >= 0.5) ? up : down;
                } else if (can_up) {
                    delta = up;
                } else if (can_down) {
                    delta = down;
                } else {
                    fractional = true;
                    continue;
                }
                for (const auto& [i, a] : col_rows_[sj]) act[static_cast<std::size_t>(i)] += a * delta;
                y[sj] += delta;
                obj += c[sj] * delta;
                changed = true;
            }
            if (!changed) break;
        }
        if (fractional || obj >= prune_threshold()) return;
        polish_and_offer(y);
    }

    // RINS: fix the binaries on which the incumbent and the node relaxation
    // agree and search the rest with a small node budget.
    void rins(const std::vector<double>& x) {
        std::vector<std::pair<int, signed char>> fix;
        for (int j : binaries_) {
            const auto sj = static_cast<std::size_t>(j);
            if (std::abs(x[sj] - incumbent_[sj]) <= settings_.int_tol)
                fix.emplace_back(j, static_cast<signed char>(std::lround(incumbent_[sj])));
        }
        if (fix.size() * 2 < binaries_.size() || fix.size() == binaries_.size()) return;
        SolverSettings sub = settings_;
        sub.node_limit = kRinsNodes;
        sub.time_limit = std::max(0.0, remaining());
        Search search(model_, sub, std::move(fix), incumbent_obj_, false);
        const auto r = search.run();
        if (r.has_solution() && r.objective < incumbent_obj_ - 1e-12 * std::max(1.0, std::abs(r.objective))) {
            incumbent_ = r.x;
            incumbent_obj_ = r.objective;
            ++incumbent_version_;
        }
    }

    // Dive from the current LP optimum: repeatedly fix the least fractional
    // binary to its nearest value, backtracking once on infeasibility.
    void dive() {
        const auto saved_target = applied_;
        const auto saved_basis = lp_.basis();
        std::vector<double> x = lp_.primal();
        const int max_steps = static_cast<int>(binaries_.size()) + 1;
        for (int step = 0; step < max_steps && remaining() > 0.0; ++step) {
            int pick = -1;
            double pick_frac = 2.0;
            for (int j : binaries_) {
                const auto sj = static_cast<std::size_t>(j);
                if (applied_[sj] >= 0) continue;
                const double v = x[sj];
                const double f = std::min(v - std::floor(v), std::ceil(v) - v);
                if (f <= settings_.int_tol) continue;
                if (f < pick_frac) {
                    pick_frac = f;
                    pick = j;
                }
            }
            if (pick < 0) {
                polish_and_offer(x);
                break;
            }
            const auto sp = static_cast<std::size_t>(pick);
            const auto first = static_cast<signed char>(std::lround(x[sp]));
            target_ = applied_;
            target_[sp] = first;
            apply_target();
            auto st = solve_lp();
            if (st != lp::LpStatus::optimal || lp_.objective() >= prune_threshold()) {
                target_[sp] = static_cast<signed char>(1 - first);
                apply_target();
                st = solve_lp();
                if (st != lp::LpStatus::optimal || lp_.objective() >= prune_threshold()) break;
            }
            x = lp_.primal();
        }
        target_ = saved_target;
        apply_target();
        lp_.set_basis(saved_basis);
    }

    const MilpModel& model_;
    SolverSettings settings_;
    lp::DualSimplex lp_;
    Clock::time_point t0_;
    std::vector<int> binaries_;
    std::vector<std::vector<std::pair<int, double>>> col_rows_;
    std::vector<signed char> applied_;
    std::vector<signed char> target_;
    std::vector<double> incumbent_;
    double incumbent_obj_ = kInf;
    long incumbent_version_ = 0;
    Pseudocosts pseudocosts_{static_cast<std::size_t>(model_.num_cols())};
    std::vector<std::pair<int, signed char>> base_;
    double cutoff_ = kInf;
    bool allow_rins_ = true;
};

MilpResult Search::run() {
    MilpResult res;
    std::priority_queue<OpenNode, std::vector<OpenNode>, WorseFirst> open;
    long sequence = 0;
    long nodes = 0;
    double lost_bound = kInf;  // bounds of nodes dropped after LP failures
    bool limit_hit = false;
    SolveStatus limit_status = SolveStatus::time_limit;

    std::optional<OpenNode> current = OpenNode{BnbNode{base_, -kInf, 0, sequence++}, nullptr};
    long last_rins_node = 0;
    long last_rins_version = 0;
    bool root = true;
    double last_logged = -kInf;

    while (true) {
        double global = lost_bound;
        if (current) global = std::min(global, current->node.bound);
        if (!open.empty()) global = std::min(global, open.top().node.bound);
        if (has_incumbent()) global = std::min(global, incumbent_obj_);
        if (!current && open.empty()) {
            global = has_incumbent() ? std::min(incumbent_obj_, lost_bound) : lost_bound;
        }
        if (global > last_logged || res.bound_log.empty()) {
            // Logged value is clamped so that the record is monotone even
            // when a freshly found incumbent tightens the minimum.
            last_logged = std::max(last_logged, global);
        }
        res.bound_log.push_back(last_logged);

        if (!current && open.empty()) break;
        if (has_incumbent()) {
            const double gap = (incumbent_obj_ - global) / std::max(1.0, std::abs(incumbent_obj_));
            if (gap <= settings_.rel_gap && (current || !open.empty())) {
                res.status = SolveStatus::gap_reached;
                res.bound = global;
                break;
            }
        }
        if (remaining() <= 0.0) {
            limit_hit = true;
            limit_status = SolveStatus::time_limit;
            break;
        }
        if (nodes >= settings_.node_limit) {
            limit_hit = true;
            limit_status = SolveStatus::node_limit;
            break;
        }

        if (!current) {
            current = open.top();
            open.pop();
            if (current->node.bound >= prune_threshold()) {
                current.reset();
                continue;
            }
            apply_fixings(current->node.fixings);
            if (current->basis) lp_.set_basis(*current->basis);
        } else {
            if (current->node.bound >= prune_threshold()) {
                current.reset();
                continue;
            }
            apply_fixings(current->node.fixings);
        }

        const auto st = solve_lp();
        ++nodes;
        if (st == lp::LpStatus::time_limit) {
            limit_hit = true;
            limit_status = SolveStatus::time_limit;
            lost_bound = std::min(lost_bound, current->node.bound);
            break;
        }
        if (st == lp::LpStatus::infeasible) {
            if (root) {
                res.status = SolveStatus::infeasible;
                res.diagnostic = "root LP relaxation infeasible: " + lp_.diagnostic();
                res.nodes = nodes;
                res.lp_iterations = lp_.iterations();
                res.seconds = elapsed();
                return res;
            }
            current.reset();
            continue;
        }
        if (st != lp::LpStatus::optimal) {
            if (root && st == lp::LpStatus::unbounded) {
                res.status = SolveStatus::error;
                res.diagnostic = "LP relaxation unbounded";
                res.seconds = elapsed();
                return res;
            }
            res.diagnostic = std::string("LP failure at node: ") + lp::to_string(st) + " " + lp_.diagnostic();
            lost_bound = std::min(lost_bound, current->node.bound);
            current.reset();
            continue;
        }

        const double obj = lp_.objective();
        if (current->branch_col >= 0)
            pseudocosts_.record(current->branch_col, current->branch_dir, current->branch_frac, obj - current->parent_obj);
        if (obj >= prune_threshold()) {
            current.reset();
            root = false;
            continue;
        }
        const double node_bound = std::max(current->node.bound, obj);
        std::vector<double> x = lp_.primal();
        const int br = branching_column(x);
        if (br < 0) {
            polish_and_offer(x);
            current.reset();
            root = false;
            continue;
        }

        round_and_offer(x, obj);
        if (allow_rins_ && has_incumbent() &&
            (nodes - last_rins_node >= kRinsEvery || (incumbent_version_ != last_rins_version && nodes - last_rins_node >= kRinsMinGap))) {
            last_rins_node = nodes;
            last_rins_version = incumbent_version_;
            rins(x);
        }
        if (node_bound >= prune_threshold()) {
            current.reset();
            root = false;
            continue;
        }

        const bool run_dive = root || (!has_incumbent() && nodes % 50 == 0) || nodes % 500 == 0;
        root = false;
        if (run_dive) {
            dive();
            if (node_bound >= prune_threshold()) {
                current.reset();
                continue;
            }
            // The dive restored bounds and basis; refresh the relaxation.
            if (solve_lp() != lp::LpStatus::optimal) {
                current.reset();
                continue;
            }
            x = lp_.primal();
        }

        const double v = x[static_cast<std::size_t>(br)];
        const signed char first = v >= 0.5 ? 1 : 0;
        auto basis = std::make_shared<const lp::LpBasis>(lp_.basis());
        BnbNode down = current->node;
        down.fixings.emplace_back(br, static_cast<signed char>(1 - first));
        down.bound = node_bound;
        down.depth += 1;
        down.sequence = sequence++;
        open.push(OpenNode{std::move(down), basis, br, static_cast<signed char>(1 - first), first ? v : 1.0 - v, obj});

        BnbNode up = std::move(current->node);
        up.fixings.emplace_back(br, first);
        up.bound = node_bound;
        up.depth += 1;
        up.sequence = sequence++;
        current = OpenNode{std::move(up), nullptr, br, first, first ? 1.0 - v : v, obj};
    }

    res.nodes = nodes;
    res.lp_iterations = lp_.iterations();
    res.seconds = elapsed();
    if (has_incumbent()) {
        res.x = incumbent_;
        res.objective = incumbent_obj_;
    }
    if (limit_hit) {
        double global = lost_bound;
        if (current) global = std::min(global, current->node.bound);
        if (!open.empty()) global = std::min(global, open.top().node.bound);
        if (has_incumbent()) global = std::min(global, incumbent_obj_);
        res.bound = global;
        res.status = limit_status;
        if (has_incumbent() && res.gap() <= settings_.rel_gap) res.status = SolveStatus::gap_reached;
        return res;
    }
    if (res.status == SolveStatus::gap_reached) return res;
    if (!has_incumbent()) {
        res.status = std::isfinite(lost_bound) ? SolveStatus::error : SolveStatus::infeasible;
        if (res.diagnostic.empty()) res.diagnostic = "no integer-feasible point exists";
        return res;
    }
    res.bound = std::min(incumbent_obj_, lost_bound);
    res.status = res.gap() <= settings_.rel_gap ? SolveStatus::optimal : SolveStatus::error;
    return res;
}

}  // namespace

MilpResult solve_milp(const MilpModel& model, const SolverSettings& settings) {
    model.validate();
    if (model.num_cols() < 1) throw ModelError("model has no variables");
    Search search(model, settings);
    return search.run();
}

}  // namespace shipmg
