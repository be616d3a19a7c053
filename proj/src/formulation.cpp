#include "shipmg/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "shipmg/external.hpp"

namespace shipmg {

namespace {

// Steps covered by a duration given in minutes (0 or 1 = no window needed).
int window_steps(double minutes, double dt) { return static_cast<int>(std::ceil(minutes / (60.0 * dt) - 1e-9)); }

struct UnitInput {
    double rated = 0.0;
    double min_frac = 0.0;
    double max_frac = 1.0;
    double min_up = 0.0;
    double min_down = 0.0;
    double ramp_up = 0.0;
    double ramp_down = 0.0;
    double startup_cost = 0.0;
    double flow_cost = 0.0;  // EUR per kg
    PiecewiseCurve flow;     // kg/h vs MW
    bool zero_emission_off = false;
    // Handle for a column base name at 1-based step t (and interval j >= 1).
    std::function<std::string(const std::string&, int, int)> handle;
};

struct UnitColumns {
    std::vector<int> u, su, p, mdot;
    std::vector<std::vector<int>> fill, on;
};

class Builder {
public:
    Builder(const ScenarioConfig& cfg, const LoadProfile& prof) : cfg_(cfg), prof_(prof) {}

    DispatchModel run() {
        dm_.steps = prof_.steps();
        dm_.dt = prof_.dt;
        dm_.hotel = prof_.hotel;
        T_ = dm_.steps;
        dt_ = dm_.dt;
        segments_ = cfg_.voyage.step_segments();

        speed_block();
        for (std::size_t i = 0; i < cfg_.generators.size(); ++i) generator(i);
        if (cfg_.fuel_cell) fuel_cell();
        if (cfg_.bess) battery();
        if (cfg_.h2_storage && cfg_.fuel_cell) hydrogen();
        balance();
        security();
        cii();
        dm_.model.validate();
        return std::move(dm_);
    }

private:
    const ScenarioConfig& cfg_;
    const LoadProfile& prof_;
    DispatchModel dm_;
    int T_ = 0;
    double dt_ = 0.25;
    std::vector<int> segments_;
    std::vector<double> prop_max_;  // MW per step

    MilpModel& m() { return dm_.model; }
    const VoyageSegment& segment(int t) const { return cfg_.voyage.segments[static_cast<std::size_t>(segments_[static_cast<std::size_t>(t)])]; }
    static std::string idx(int t) { return "[" + std::to_string(t + 1) + "]"; }

    double big_m(double needed) const { return std::min(cfg_.solver.big_m, needed); }

    UnitColumns unit(const UnitInput& in) {
        UnitColumns c;
        const auto& curve = in.flow;
        const int n = curve.n_intervals();
        const double pmax = in.max_frac * in.rated;
        const double start_coef = in.startup_cost * (cfg_.startup_cost_times_dt ? dt_ : 1.0);
        // Segments from `tail` on lie in the convex part of the curve (slopes
        // non-decreasing) and share the indicator of segment tail - 1: with a
        // positive flow price the cheaper of them is always filled first.
        int tail = n;
        if (in.flow_cost > 0.0) {
            int k = n - 1;
            while (k > 0 && curve.slope(k - 1) <= curve.slope(k)) --k;
            tail = std::min(n, k + 2);
        }
        for (int t = 0; t < T_; ++t) {
            const int h = t + 1;
            c.u.push_back(m().add_binary(in.handle("u", h, 0)));
            c.su.push_back(m().add_binary(in.handle("su", h, 0)));
            c.p.push_back(m().add_variable(in.handle("P", h, 0), 0.0, pmax));
            c.mdot.push_back(m().add_variable(in.handle("mdot", h, 0), 0.0, kInf));
            m().set_objective(c.mdot.back(), in.flow_cost * dt_);
            m().set_objective(c.su.back(), start_coef);
            std::vector<int> fill, on;
            for (int j = 0; j < n; ++j) {
                fill.push_back(m().add_variable(in.handle("seg_fill", h, j + 1), 0.0, curve.width(j)));
                on.push_back(j < tail ? m().add_binary(in.handle("seg_on", h, j + 1)) : on.back());
            }
            c.fill.push_back(fill);
            c.on.push_back(on);
        }
        for (int t = 0; t < T_; ++t) {
            const int h = t + 1;
            const int u = c.u[static_cast<std::size_t>(t)], p = c.p[static_cast<std::size_t>(t)];
            const auto& fill = c.fill[static_cast<std::size_t>(t)];
            const auto& on = c.on[static_cast<std::size_t>(t)];
            // (b) operating window
            if (in.min_frac > 0.0) m().add_row(in.handle("window_lo", h, 0), {{p, 1.0}, {u, -in.min_frac * in.rated}}, Sense::ge, 0.0);
            m().add_row(in.handle("window_hi", h, 0), {{p, 1.0}, {u, -pmax}}, Sense::le, 0.0);
            // (e) incremental piecewise-linear flow
            std::vector<Term> power{{p, 1.0}, {u, -curve.x.front()}};
            std::vector<Term> flow{{c.mdot[static_cast<std::size_t>(t)], 1.0}, {u, -curve.y.front()}};
            for (int j = 0; j < n; ++j) {
                power.push_back({fill[static_cast<std::size_t>(j)], -1.0});
                flow.push_back({fill[static_cast<std::size_t>(j)], -curve.slope(j)});
            }
            m().add_row(in.handle("pwl_power", h, 0), power, Sense::eq, 0.0);
            m().add_row(in.handle("pwl_flow", h, 0), flow, Sense::eq, 0.0);
            m().add_row(in.handle("seg_first", h, 0), {{on[0], 1.0}, {u, -1.0}}, Sense::le, 0.0);
            for (int j = 0; j < n; ++j) {
                const auto js = static_cast<std::size_t>(j);
                m().add_row(in.handle("fill_ub", h, j + 1), {{fill[js], 1.0}, {on[js], -curve.width(j)}}, Sense::le, 0.0);
                if (j + 1 < tail)
                    m().add_row(in.handle("fill_order", h, j + 1), {{fill[js], 1.0}, {on[js + 1], -curve.width(j)}}, Sense::ge, 0.0);
            }
            // (i) zero emission
            if (in.zero_emission_off && prof_.zero_emission[static_cast<std::size_t>(t)])
                m().add_row(in.handle("zero_emission", h, 0), {{u, 1.0}}, Sense::eq, 0.0);
            // (c) start-up indicator: su(t) = max(0, u(t) - u(t-1)), u(0) = 0
            const int su = c.su[static_cast<std::size_t>(t)];
            if (t == 0) {
                m().add_row(in.handle("su_link", h, 0), {{su, 1.0}, {u, -1.0}}, Sense::eq, 0.0);
            } else {
                const int up = c.u[static_cast<std::size_t>(t - 1)];
                m().add_row(in.handle("su_link", h, 0), {{su, 1.0}, {u, -1.0}, {up, 1.0}}, Sense::ge, 0.0);
                m().add_row(in.handle("su_le_u", h, 0), {{su, 1.0}, {u, -1.0}}, Sense::le, 0.0);
                m().add_row(in.handle("su_le_off", h, 0), {{su, 1.0}, {up, 1.0}}, Sense::le, 1.0);
            }
        }
        if (T_ > 1) {
            // Minimum up time: a start within the last L steps keeps the unit on.
            const int lu = window_steps(in.min_up, dt_);
            if (lu >= 2)
                for (int t = 0; t < T_; ++t) {
                    std::vector<Term> terms{{c.u[static_cast<std::size_t>(t)], -1.0}};
                    for (int s = std::max(0, t - lu + 1); s <= t; ++s) terms.push_back({c.su[static_cast<std::size_t>(s)], 1.0});
                    if (terms.size() > 2) m().add_row(in.handle("min_up", t + 1, 0), terms, Sense::le, 0.0);
                }
            // Minimum down time with shutdowns sd(s) = su(s) - u(s) + u(s-1).
            const int ld = window_steps(in.min_down, dt_);
            if (ld >= 2)
                for (int t = 1; t < T_; ++t) {
                    std::map<int, double> coef;
                    coef[c.u[static_cast<std::size_t>(t)]] += 1.0;
                    for (int s = std::max(1, t - ld + 1); s <= t; ++s) {
                        coef[c.su[static_cast<std::size_t>(s)]] += 1.0;
                        coef[c.u[static_cast<std::size_t>(s)]] -= 1.0;
                        coef[c.u[static_cast<std::size_t>(s - 1)]] += 1.0;
                    }
                    std::vector<Term> terms;
                    for (auto [col, v] : coef)
                        if (v != 0.0) terms.push_back({col, v});
                    m().add_row(in.handle("min_down", t + 1, 0), terms, Sense::le, 1.0);
                }
            // (d) ramps, omitted when the per-step limit cannot bind.
            const double ru = in.ramp_up * 60.0 * dt_, rd = in.ramp_down * 60.0 * dt_;
            for (int t = 1; t < T_; ++t) {
                const int p = c.p[static_cast<std::size_t>(t)], pp = c.p[static_cast<std::size_t>(t - 1)];
                if (ru < pmax) m().add_row(in.handle("ramp_up", t + 1, 0), {{p, 1.0}, {pp, -1.0}}, Sense::le, ru);
                if (rd < pmax) m().add_row(in.handle("ramp_down", t + 1, 0), {{pp, 1.0}, {p, -1.0}}, Sense::le, rd);
            }
        }
        return c;
    }

    void generator(std::size_t i) {
        const auto& g = cfg_.generators[i];
        UnitInput in;
        in.rated = g.rated_power;
        in.min_frac = g.min_frac;
        in.max_frac = g.max_frac;
        in.min_up = g.min_up;
        in.min_down = g.min_down;
        in.ramp_up = g.ramp_up;
        in.ramp_down = g.ramp_down;
        in.startup_cost = g.startup_cost;
        in.flow_cost = marginal_fuel_cost(cfg_.economics);
        in.flow = g.fuel_mass_flow();
        in.zero_emission_off = true;
        const std::string gi = "[" + std::to_string(i + 1) + "]";
        in.handle = [gi](const std::string& base, int t, int j) {
            std::string name = base == "P" ? "P_dg" : base == "mdot" ? "mdot_f" : base;
            name += gi + "[" + std::to_string(t) + "]";
            if (j > 0) name += "[" + std::to_string(j) + "]";
            return name;
        };
        if (in.flow.x_max() < in.max_frac * in.rated - 1e-9)
            throw FormulationError("generators[" + std::to_string(i) + "]: fuel curve does not cover the operating range");
        auto c = unit(in);
        dm_.u.push_back(c.u);
        dm_.su.push_back(c.su);
        dm_.p_dg.push_back(c.p);
        dm_.mdot_f.push_back(c.mdot);
        dm_.fill.push_back(c.fill);
        dm_.seg_on.push_back(c.on);
        dm_.x0.push_back(in.flow.x.front());
    }

    void fuel_cell() {
        const auto& f = *cfg_.fuel_cell;
        UnitInput in;
        in.rated = f.rated_power;
        in.min_frac = f.min_frac;
        in.max_frac = f.max_frac;
        in.min_up = f.min_up;
        in.min_down = f.min_down;
        in.ramp_up = f.ramp_up;
        in.ramp_down = f.ramp_down;
        in.startup_cost = f.startup_cost;
        in.flow_cost = cfg_.economics.h2_cost;
        in.flow = f.h2_mass_flow();
        in.handle = [](const std::string& base, int t, int j) {
            std::string name = base == "P" ? "P_fc" : base == "mdot" ? "mdot_h2" : base + "_fc";
            name += "[" + std::to_string(t) + "]";
            if (j > 0) name += "[" + std::to_string(j) + "]";
            return name;
        };
        if (in.flow.x_max() < in.max_frac * in.rated - 1e-9) throw FormulationError("fuel_cell: hydrogen curve does not cover the operating range");
        auto c = unit(in);
        dm_.u_fc = c.u;
        dm_.su_fc = c.su;
        dm_.p_fc = c.p;
        dm_.mdot_h2 = c.mdot;
        dm_.fill_fc = c.fill;
        dm_.seg_on_fc = c.on;
        dm_.x0_fc = in.flow.x.front();
    }

    void battery() {
        const auto& b = *cfg_.bess;
        const double cmax = b.c_rate_charge_max * b.rated_energy;
        const double dmax = b.c_rate_discharge_max * b.rated_energy;
        for (int t = 0; t <= T_; ++t) {
            double lo = b.soc_min, hi = b.soc_max;
            if (t == 0) lo = hi = b.soc_init;
            if (t == T_) lo = hi = b.soc_final;
            dm_.soc.push_back(m().add_variable("SOC" + idx(t), lo, hi));
            if (t < T_ && b.dod_cost != 0.0) m().set_objective(dm_.soc.back(), -b.dod_cost * dt_);
        }
        if (b.dod_cost != 0.0) m().set_objective_constant(m().objective_constant() + b.dod_cost * dt_ * T_);
        for (int t = 0; t < T_; ++t) {
            const int pc = m().add_variable("P_b_c" + idx(t), 0.0, cmax);
            const int pd = m().add_variable("P_b_d" + idx(t), 0.0, dmax);
            const int y = m().add_binary("y_b" + idx(t));
            dm_.p_b_c.push_back(pc);
            dm_.p_b_d.push_back(pd);
            dm_.y_b.push_back(y);
            // (f) exclusivity: y_b = 1 charging, y_b = 0 discharging.
            const double mc = big_m(cmax), md = big_m(dmax);
            m().add_row("bess_charge_mode" + idx(t), {{pc, 1.0}, {y, -mc}}, Sense::le, 0.0);
            m().add_row("bess_discharge_mode" + idx(t), {{pd, 1.0}, {y, md}}, Sense::le, md);
            if (b.c_rate_charge_min > 0.0)
                m().add_row("bess_charge_min" + idx(t), {{pc, 1.0}, {y, -b.c_rate_charge_min * b.rated_energy}}, Sense::ge, 0.0);
            if (b.c_rate_discharge_min > 0.0)
                m().add_row("bess_discharge_min" + idx(t), {{pd, 1.0}, {y, b.c_rate_discharge_min * b.rated_energy}}, Sense::ge,
                            b.c_rate_discharge_min * b.rated_energy);
            // Battery state of charge.
            const auto ts = static_cast<std::size_t>(t);
            m().add_row("soc_dyn" + idx(t),
                        {{dm_.soc[ts + 1], 1.0},
                         {dm_.soc[ts], -1.0},
                         {pc, -b.eta_c * dt_ / b.rated_energy},
                         {pd, dt_ / (b.eta_d * b.rated_energy)}},
                        Sense::eq, 0.0);
        }
    }

    void hydrogen() {
        const auto& h = *cfg_.h2_storage;
        for (int t = 0; t <= T_; ++t) {
            const double lo = t == 0 ? h.loh_init : h.loh_min;
            const double hi = t == 0 ? h.loh_init : 1.0;
            dm_.loh.push_back(m().add_variable("LoH" + idx(t), lo, hi));
        }
        // Hydrogen level: LoH(t+1) = LoH(t) - mdot_h2(t) dt / (1000 M_H2).
        for (int t = 0; t < T_; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            m().add_row("h2_dyn" + idx(t), {{dm_.loh[ts + 1], 1.0}, {dm_.loh[ts], -1.0}, {dm_.mdot_h2[ts], dt_ / (1000.0 * h.total_mass)}},
                        Sense::eq, 0.0);
        }
    }

    void speed_block() {
        const auto& voy = cfg_.voyage;
        const auto prop = linearize(voy.propulsion, voy.propulsion_intervals);
        std::vector<Term> distance;
        for (int t = 0; t < T_; ++t) {
            const auto& seg = segment(t);
            const int v = m().add_variable("v" + idx(t), seg.speed_min, seg.speed_max);
            const double pmax = evaluate(prop, seg.speed_max);
            prop_max_.push_back(pmax);
            const int pp = m().add_variable("P_prop" + idx(t), 0.0, pmax);
            dm_.v.push_back(v);
            dm_.p_prop.push_back(pp);
            distance.push_back({v, dt_});
            // Epigraph of the convex piecewise-linear propulsion curve.
            for (int j = 0; j < prop.n_intervals(); ++j) {
                const auto js = static_cast<std::size_t>(j);
                if (prop.x[js + 1] < seg.speed_min || prop.x[js] > seg.speed_max) continue;
                const double a = prop.slope(j);
                const double b0 = prop.y[js] - a * prop.x[js];
                m().add_row("prop_epi" + idx(t) + "[" + std::to_string(j + 1) + "]", {{pp, 1.0}, {v, -a}}, Sense::ge, b0);
            }
            if (t > 0 && segments_[static_cast<std::size_t>(t)] == segments_[static_cast<std::size_t>(t - 1)] &&
                seg.speed_delta_max < seg.speed_max - seg.speed_min) {
                const int vp = dm_.v[static_cast<std::size_t>(t - 1)];
                m().add_row("speed_delta_up" + idx(t), {{v, 1.0}, {vp, -1.0}}, Sense::le, seg.speed_delta_max);
                m().add_row("speed_delta_down" + idx(t), {{vp, 1.0}, {v, -1.0}}, Sense::le, seg.speed_delta_max);
            }
        }
        m().add_row("distance", distance, Sense::eq, voy.distance);
    }

    void balance() {
        for (int t = 0; t < T_; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            std::vector<Term> terms;
            for (const auto& p : dm_.p_dg) terms.push_back({p[ts], 1.0});
            if (!dm_.p_fc.empty()) terms.push_back({dm_.p_fc[ts], 1.0});
            if (!dm_.p_b_d.empty()) {
                terms.push_back({dm_.p_b_d[ts], 1.0});
                terms.push_back({dm_.p_b_c[ts], -1.0});
            }
            terms.push_back({dm_.p_prop[ts], -1.0});
            m().add_row("balance" + idx(t), terms, Sense::eq, prof_.hotel[ts]);
        }
    }

    // (j) N-1 overload and load-step security.
    void security() {
        struct Source {
            std::string label;
            const std::vector<int>* u;
            const std::vector<int>* p;
            double rated, alpha, beta;
            bool fuel_cell;
        };
        std::vector<Source> sources;
        for (std::size_t i = 0; i < cfg_.generators.size(); ++i) {
            const auto& g = cfg_.generators[i];
            sources.push_back({std::to_string(i + 1), &dm_.u[i], &dm_.p_dg[i], g.rated_power, g.overload_emerg, g.step_emerg, false});
        }
        if (cfg_.fuel_cell) {
            const auto& f = *cfg_.fuel_cell;
            sources.push_back({"fc", &dm_.u_fc, &dm_.p_fc, f.rated_power, f.overload_emerg, f.step_emerg, true});
        }
        const double bess_credit = cfg_.bess ? cfg_.bess->overload_emerg * cfg_.bess->rated_power : 0.0;
        for (int t = 0; t < T_; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            const bool manoeuvring = prof_.oc_kind[ts] == OcKind::manoeuvring;
            const double hotel = prof_.hotel[ts];
            for (std::size_t k = 0; k < sources.size(); ++k) {
                const auto& sk = sources[k];
                std::vector<Term> overload, step;
                for (std::size_t j = 0; j < sources.size(); ++j) {
                    const auto& sj = sources[j];
                    if (manoeuvring && sj.fuel_cell) continue;
                    if (j != k) overload.push_back({(*sj.u)[ts], sj.alpha * sj.rated});
                    step.push_back({(*sj.u)[ts], -sj.beta * sj.rated});
                }
                // Loss of k: the remaining credited capacity carries the load.
                const double needed = hotel + prop_max_[ts] - bess_credit;
                if (needed > 0.0) {
                    const double mk = big_m(needed);
                    overload.push_back({dm_.p_prop[ts], -1.0});
                    overload.push_back({(*sk.u)[ts], mk});
                    m().add_row("n1[" + sk.label + "]" + idx(t), overload, Sense::ge, hotel - bess_credit + mk);
                }
                // Load step: the committed units' step capability (and the
                // battery's emergency rating) covers the power of k.
                step.push_back({(*sk.p)[ts], 1.0});
                m().add_row("step[" + sk.label + "]" + idx(t), step, Sense::le, bess_credit);
            }
        }
    }

    void cii() {
        const auto& voy = cfg_.voyage;
        if (!voy.cii_active || dm_.mdot_f.empty()) return;
        std::vector<Term> terms;
        for (const auto& mf : dm_.mdot_f)
            for (int col : mf) terms.push_back({col, dt_ * cfg_.economics.emission_factor * 1e3});
        m().add_row("cii", terms, Sense::le, voy.cii_max * voy.capacity * voy.distance);
    }
};

double value(const std::vector<double>& x, int col) { return x[static_cast<std::size_t>(col)]; }

std::vector<double> gather(const std::vector<double>& x, const std::vector<int>& cols, bool binary) {
    std::vector<double> out;
    out.reserve(cols.size());
    for (int c : cols) out.push_back(binary ? std::round(value(x, c)) : value(x, c));
    return out;
}

void scatter(std::vector<double>& x, const std::vector<int>& cols, const std::vector<double>& vals) {
    if (vals.size() != cols.size()) return;
    for (std::size_t k = 0; k < cols.size(); ++k) x[static_cast<std::size_t>(cols[k])] = vals[k];
}

// Fills the incremental columns from a dispatched power.
void reconstruct_fill(std::vector<double>& x, const std::vector<int>& fill, const std::vector<int>& on, const MilpModel& model, double u,
                      double power, double x0) {
    double rest = power - x0 * u;
    for (std::size_t j = 0; j < fill.size(); ++j) {
        const double w = model.variable(fill[j]).upper;
        const double f = std::clamp(rest, 0.0, w);
        x[static_cast<std::size_t>(fill[j])] = f;
        if (j == 0 || on[j] != on[j - 1]) x[static_cast<std::size_t>(on[j])] = j == 0 ? u : (f > 0.0 ? 1.0 : 0.0);
        rest -= f;
    }
}

}  // namespace

DispatchModel build(const ScenarioConfig& config, const LoadProfile& profile) {
    try {
        check_profile(profile, config.voyage);
    } catch (const ConfigError& e) {
        throw FormulationError(std::string("inconsistent horizon: ") + e.what());
    }
    if (!config.fuel_cell && !config.bess)
        for (std::size_t t = 0; t < profile.zero_emission.size(); ++t)
            if (profile.zero_emission[t])
                throw InfeasibleScenario("zero-emission step " + std::to_string(t + 1) + " but neither fuel cell nor battery is configured");
    return Builder(config, profile).run();
}

DispatchSolution extract_solution(const DispatchModel& dm, const MilpResult& result) {
    DispatchSolution s;
    s.steps = dm.steps;
    s.dt = dm.dt;
    s.status = result.status;
    s.objective = result.objective;
    s.bound = result.bound;
    s.nodes = result.nodes;
    s.seconds = result.seconds;
    s.diagnostic = result.diagnostic;
    s.hotel = dm.hotel;
    if (!result.has_solution()) return s;
    const auto& x = result.x;
    s.x = x;
    for (std::size_t i = 0; i < dm.u.size(); ++i) {
        s.u.push_back(gather(x, dm.u[i], true));
        s.su.push_back(gather(x, dm.su[i], true));
        s.p_dg.push_back(gather(x, dm.p_dg[i], false));
        s.mdot_f.push_back(gather(x, dm.mdot_f[i], false));
    }
    s.u_fc = gather(x, dm.u_fc, true);
    s.su_fc = gather(x, dm.su_fc, true);
    s.p_fc = gather(x, dm.p_fc, false);
    s.mdot_h2 = gather(x, dm.mdot_h2, false);
    s.p_b_c = gather(x, dm.p_b_c, false);
    s.p_b_d = gather(x, dm.p_b_d, false);
    s.y_b = gather(x, dm.y_b, true);
    s.soc = gather(x, dm.soc, false);
    s.loh = gather(x, dm.loh, false);
    s.v = gather(x, dm.v, false);
    s.p_prop = gather(x, dm.p_prop, false);
    // Clean solver noise on quantities that are exactly zero by construction.
    for (std::size_t i = 0; i < s.p_dg.size(); ++i)
        for (int t = 0; t < s.steps; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            if (s.u[i][ts] == 0.0) s.p_dg[i][ts] = s.mdot_f[i][ts] = 0.0;
        }
    for (std::size_t t = 0; t < s.u_fc.size(); ++t)
        if (s.u_fc[t] == 0.0) s.p_fc[t] = s.mdot_h2[t] = 0.0;
    for (std::size_t t = 0; t < s.y_b.size(); ++t) (s.y_b[t] == 1.0 ? s.p_b_d[t] : s.p_b_c[t]) = 0.0;
    s.p_load.resize(s.hotel.size());
    for (std::size_t t = 0; t < s.hotel.size(); ++t) s.p_load[t] = s.hotel[t] + s.p_prop[t];
    return s;
}

int release_idle_commitments(const DispatchModel& dm, std::vector<double>& x, double tol) {
    const auto& model = dm.model;
    if (x.size() != static_cast<std::size_t>(model.num_cols())) return 0;
    std::vector<std::vector<int>> col_rows(static_cast<std::size_t>(model.num_cols()));
    for (int i = 0; i < model.num_rows(); ++i)
        for (const auto& term : model.row(i).terms) col_rows[static_cast<std::size_t>(term.col)].push_back(i);

    struct Unit {
        const std::vector<int>* u;
        const std::vector<int>* su;
        const std::vector<int>* p;
        const std::vector<int>* mdot;
        const std::vector<std::vector<int>>* fill;
        const std::vector<std::vector<int>>* on;
    };
    std::vector<Unit> units;
    for (std::size_t i = 0; i < dm.u.size(); ++i) units.push_back({&dm.u[i], &dm.su[i], &dm.p_dg[i], &dm.mdot_f[i], &dm.fill[i], &dm.seg_on[i]});
    if (!dm.u_fc.empty()) units.push_back({&dm.u_fc, &dm.su_fc, &dm.p_fc, &dm.mdot_h2, &dm.fill_fc, &dm.seg_on_fc});

    const auto& obj = model.objective();
    const auto row_ok = [&](int i) {
        const auto& row = model.row(i);
        const double a = model.row_activity(i, x);
        return a >= row.lower - tol * std::max(1.0, std::abs(row.lower)) && a <= row.upper + tol * std::max(1.0, std::abs(row.upper));
    };
    int released = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& unit : units) {
            for (int t = 0; t < dm.steps; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                const int u = (*unit.u)[ts];
                if (value(x, u) < 0.5 || std::abs(value(x, (*unit.p)[ts])) > tol || std::abs(value(x, (*unit.mdot)[ts])) > tol) continue;
                // Trial move: switch off, clear the curve columns and recompute
                // the start indicators of this and the next step.
                std::vector<std::pair<int, double>> saved;
                const auto set = [&](int col, double v) {
                    saved.emplace_back(col, value(x, col));
                    x[static_cast<std::size_t>(col)] = v;
                };
                set(u, 0.0);
                for (int c : (*unit.fill)[ts]) set(c, 0.0);
                for (int c : (*unit.on)[ts]) set(c, 0.0);
                for (int s = t; s <= std::min(t + 1, dm.steps - 1); ++s) {
                    const auto ss = static_cast<std::size_t>(s);
                    const double prev = s == 0 ? 0.0 : value(x, (*unit.u)[ss - 1]);
                    set((*unit.su)[ss], std::round(value(x, (*unit.u)[ss])) * (1.0 - std::round(prev)));
                }
                double delta = 0.0;
                bool ok = true;
                for (const auto& [col, old] : saved) delta += obj[static_cast<std::size_t>(col)] * (value(x, col) - old);
                if (delta > 1e-9) ok = false;
                for (std::size_t k = 0; ok && k < saved.size(); ++k)
                    for (int r : col_rows[static_cast<std::size_t>(saved[k].first)])
                        if (!row_ok(r)) {
                            ok = false;
                            break;
                        }
                if (ok) {
                    ++released;
                    changed = true;
                } else {
                    for (auto it = saved.rbegin(); it != saved.rend(); ++it) x[static_cast<std::size_t>(it->first)] = it->second;
                }
            }
        }
    }
    return released;
}

DispatchSolution solve_dispatch(const DispatchModel& dm, const SolverSettings& settings) {
    MilpResult r = settings.backend == SolverBackend::external ? solve_external(dm.model, settings) : solve_milp(dm.model, settings);
    if (r.has_solution() && release_idle_commitments(dm, r.x) > 0) r.objective = std::min(r.objective, dm.model.evaluate_objective(r.x));
    return extract_solution(dm, r);
}

double evaluate_objective(const DispatchSolution& s, const ScenarioConfig& cfg) {
    const double mc = marginal_fuel_cost(cfg.economics);
    const double start_dt = cfg.startup_cost_times_dt ? s.dt : 1.0;
    double total = 0.0;
    for (int t = 0; t < s.steps; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        double rate = 0.0;  // EUR/h
        for (std::size_t i = 0; i < s.mdot_f.size(); ++i) rate += s.mdot_f[i][ts] * mc;
        if (!s.mdot_h2.empty()) rate += cfg.economics.h2_cost * s.mdot_h2[ts];
        if (cfg.bess && !s.soc.empty()) rate += cfg.bess->dod_cost * (1.0 - s.soc[ts]);
        total += rate * s.dt;
        double starts = 0.0;
        for (std::size_t i = 0; i < s.su.size(); ++i) starts += cfg.generators[i].startup_cost * s.su[i][ts];
        if (cfg.fuel_cell && !s.su_fc.empty()) starts += cfg.fuel_cell->startup_cost * s.su_fc[ts];
        total += starts * start_dt;
    }
    return total;
}

std::vector<double> solution_columns(const DispatchSolution& s, const DispatchModel& dm) {
    const auto n = static_cast<std::size_t>(dm.model.num_cols());
    const bool raw = s.x.size() == n;
    std::vector<double> x = raw ? s.x : std::vector<double>(n, 0.0);
    for (std::size_t i = 0; i < dm.u.size() && i < s.u.size(); ++i) {
        scatter(x, dm.u[i], s.u[i]);
        scatter(x, dm.su[i], s.su[i]);
        scatter(x, dm.p_dg[i], s.p_dg[i]);
        scatter(x, dm.mdot_f[i], s.mdot_f[i]);
        if (!raw)
            for (int t = 0; t < dm.steps; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                reconstruct_fill(x, dm.fill[i][ts], dm.seg_on[i][ts], dm.model, s.u[i][ts], s.p_dg[i][ts], dm.x0[i]);
            }
    }
    scatter(x, dm.u_fc, s.u_fc);
    scatter(x, dm.su_fc, s.su_fc);
    scatter(x, dm.p_fc, s.p_fc);
    scatter(x, dm.mdot_h2, s.mdot_h2);
    if (!raw && !dm.u_fc.empty() && s.u_fc.size() == dm.u_fc.size())
        for (int t = 0; t < dm.steps; ++t) {
            const auto ts = static_cast<std::size_t>(t);
            reconstruct_fill(x, dm.fill_fc[ts], dm.seg_on_fc[ts], dm.model, s.u_fc[ts], s.p_fc[ts], dm.x0_fc);
        }
    scatter(x, dm.p_b_c, s.p_b_c);
    scatter(x, dm.p_b_d, s.p_b_d);
    scatter(x, dm.y_b, s.y_b);
    scatter(x, dm.soc, s.soc);
    scatter(x, dm.loh, s.loh);
    scatter(x, dm.v, s.v);
    scatter(x, dm.p_prop, s.p_prop);
    return x;
}

std::vector<Violation> check_feasibility(const DispatchSolution& s, const DispatchModel& dm, double tol) {
    const auto x = solution_columns(s, dm);
    const auto& model = dm.model;
    std::vector<Violation> out;
    for (int j = 0; j < model.num_cols(); ++j) {
        const auto& var = model.variable(j);
        const double xj = x[static_cast<std::size_t>(j)];
        if (xj < var.lower - tol * std::max(1.0, std::abs(var.lower)))
            out.push_back({var.name + " lower bound", xj, var.lower, var.upper, var.lower - xj});
        if (xj > var.upper + tol * std::max(1.0, std::abs(var.upper)))
            out.push_back({var.name + " upper bound", xj, var.lower, var.upper, xj - var.upper});
        if (var.type == Integrality::binary && std::abs(xj - std::round(xj)) > tol)
            out.push_back({var.name + " integrality", xj, 0.0, 1.0, std::abs(xj - std::round(xj))});
    }
    for (int i = 0; i < model.num_rows(); ++i) {
        const auto& row = model.row(i);
        const double a = model.row_activity(i, x);
        if (a < row.lower - tol * std::max(1.0, std::abs(row.lower))) out.push_back({row.name, a, row.lower, row.upper, row.lower - a});
        if (a > row.upper + tol * std::max(1.0, std::abs(row.upper))) out.push_back({row.name, a, row.lower, row.upper, a - row.upper});
    }
    return out;
}

}  // namespace shipmg
