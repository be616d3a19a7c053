#include "shipmg/load.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "shipmg/csv.hpp"
#include "shipmg/milp_model.hpp"

namespace shipmg {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::pick(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double r = uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        acc += weights[k];
        last = k;
        if (r < acc) return k;
    }
    return last;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size();
    Matrix c(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            if (a[i][k] != 0.0)
                for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// States reachable from `from` (including itself) along positive transitions.
std::vector<bool> reachable(const Matrix& p, std::size_t from) {
    std::vector<bool> seen(p.size(), false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < p.size(); ++j)
            if (p[i][j] > 0.0 && !seen[j]) {
                seen[j] = true;
                stack.push_back(j);
            }
    }
    return seen;
}

int chain_steps(const MarkovLoadModel& model, double dt) {
    const double r = dt / model.step_h;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * r)
        throw ConfigError("voyage.dt must be a whole multiple of load_model.step_h");
    return static_cast<int>(k);
}

}  // namespace

Matrix transition_power(const MarkovLoadModel& model, int k) {
    const std::size_t n = model.labels.size();
    Matrix result(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = 1.0;
    Matrix base = model.transition;
    for (int e = k; e > 0; e >>= 1) {
        if (e & 1) result = multiply(result, base);
        if (e > 1) base = multiply(base, base);
    }
    return result;
}

std::vector<double> stationary_distribution(const MarkovLoadModel& model) {
    const auto& p = model.transition;
    const std::size_t n = p.size();
    if (n == 0) throw ConfigError("load_model: chain has no states");
    for (std::size_t i = 0; i < n; ++i) {
        const auto seen = reachable(p, i);
        std::string missing;
        for (std::size_t j = 0; j < n; ++j)
            if (!seen[j]) missing += (missing.empty() ? "" : ", ") + model.labels[j];
        if (!missing.empty())
            throw ConfigError("reducible chain: from state " + model.labels[i] + " the states " + missing + " are unreachable");
    }
    // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p[j][i] - (i == j ? 1.0 : 0.0);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    a.row(static_cast<Eigen::Index>(n) - 1).setOnes();
    b(static_cast<Eigen::Index>(n) - 1) = 1.0;
    const Eigen::VectorXd x = a.fullPivLu().solve(b);
    std::vector<double> pi(n);
    for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, x(static_cast<Eigen::Index>(i)));
    double s = 0.0;
    for (double v : pi) s += v;
    for (double& v : pi) v /= s;
    return pi;
}

LoadProfile constant_profile(const VoyagePlan& voyage, double hotel_mw) {
    LoadProfile prof;
    prof.dt = voyage.dt;
    for (int s : voyage.step_segments()) {
        const auto& seg = voyage.segments[static_cast<std::size_t>(s)];
        prof.hotel.push_back(hotel_mw);
        prof.oc_kind.push_back(seg.kind);
        prof.zero_emission.push_back(seg.zero_emission);
    }
    return prof;
}

LoadProfile simulate(const MarkovLoadModel& model, const VoyagePlan& voyage, std::uint64_t seed) {
    const std::size_t n = model.labels.size();
    if (n == 0) throw ConfigError("load_model: chain has no states");
    const auto q = transition_power(model, chain_steps(model, voyage.dt));
    const auto segments = voyage.step_segments();

    // Admissible state indices per segment.
    std::vector<std::vector<std::size_t>> masks;
    for (const auto& seg : voyage.segments) {
        const auto it = model.masks.find(seg.mask_label());
        if (it == model.masks.end() || it->second.empty())
            throw ConfigError("load_model.masks: no admissible states for '" + seg.mask_label() + "'");
        std::vector<std::size_t> idx;
        for (const auto& label : it->second) idx.push_back(static_cast<std::size_t>(model.state_index(label)));
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        masks.push_back(std::move(idx));
    }

    // Initial weights: stationary distribution when defined, uniform otherwise.
    std::vector<double> initial(n, 1.0);
    try {
        initial = stationary_distribution(model);
    } catch (const ConfigError&) {
    }

    Rng rng(seed);
    LoadProfile prof = constant_profile(voyage, 0.0);
    std::size_t state = 0;
    for (std::size_t t = 0; t < segments.size(); ++t) {
        const auto& mask = masks[static_cast<std::size_t>(segments[t])];
        std::vector<double> w(mask.size(), 0.0);
        for (std::size_t k = 0; k < mask.size(); ++k) w[k] = t == 0 ? initial[mask[k]] : q[state][mask[k]];
        double total = 0.0;
        for (double v : w) total += v;
        if (total > 0.0) {
            state = mask[rng.pick(w)];
        } else if (t == 0) {
            state = mask[rng.pick(std::vector<double>(mask.size(), 1.0))];
        } else {
            // No admissible successor: jump to the admissible state with the
            // closest hotel load (lowest index on ties).
            std::size_t best = mask.front();
            for (auto k : mask)
                if (std::abs(model.hotel[k] - model.hotel[state]) < std::abs(model.hotel[best] - model.hotel[state])) best = k;
            state = best;
        }
        prof.hotel[t] = model.hotel[state];
    }
    return prof;
}

void check_profile(const LoadProfile& profile, const VoyagePlan& voyage) {
    const auto segments = voyage.step_segments();
    if (profile.hotel.size() != segments.size() || profile.oc_kind.size() != segments.size() ||
        profile.zero_emission.size() != segments.size())
        throw ConfigError("load profile has " + std::to_string(profile.hotel.size()) + " steps, voyage has " +
                          std::to_string(segments.size()));
    if (std::abs(profile.dt - voyage.dt) > 1e-12) throw ConfigError("load profile step differs from voyage.dt");
    for (std::size_t t = 0; t < segments.size(); ++t) {
        const auto& seg = voyage.segments[static_cast<std::size_t>(segments[t])];
        if (profile.oc_kind[t] != seg.kind || profile.zero_emission[t] != seg.zero_emission)
            throw ConfigError("load profile step " + std::to_string(t + 1) + " disagrees with the voyage segments");
        if (!(profile.hotel[t] >= 0.0) || !std::isfinite(profile.hotel[t]))
            throw ConfigError("load profile step " + std::to_string(t + 1) + ": hotel load must be finite and >= 0");
    }
}

void write_profile_csv(std::ostream& os, const LoadProfile& profile) {
    os << "step,time_h,oc_kind,zero_emission,hotel_mw\n";
    for (std::size_t t = 0; t < profile.hotel.size(); ++t)
        csv::write_row(os, {std::to_string(t + 1), format_number(static_cast<double>(t) * profile.dt), to_string(profile.oc_kind[t]),
                            profile.zero_emission[t] ? "1" : "0", format_number(profile.hotel[t])});
}

LoadProfile read_profile_csv(std::istream& is) {
    const auto table = csv::read(is);
    LoadProfile prof;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.number(r, "step") != static_cast<double>(r + 1)) throw csv::CsvError("load profile: steps must be 1..T in order");
        prof.hotel.push_back(table.number(r, "hotel_mw"));
        prof.oc_kind.push_back(oc_kind_from_string(table.text(r, "oc_kind")));
        const auto& z = table.text(r, "zero_emission");
        if (z != "0" && z != "1") throw csv::CsvError("load profile: zero_emission must be 0 or 1");
        prof.zero_emission.push_back(z == "1");
    }
    if (table.rows.size() >= 2) prof.dt = table.number(1, "time_h") - table.number(0, "time_h");
    return prof;
}

}  // namespace shipmg
