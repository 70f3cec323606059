#include "hks/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hks {

ConeSpec make_cone(const std::vector<double>& center, double A, double T_star) {
    if (center.empty()) throw std::invalid_argument("cone center needs at least one coordinate");
    if (!(A >= 1.0)) throw std::invalid_argument("cone constant A must be at least 1");
    if (!(T_star > 0.0)) throw std::invalid_argument("cone horizon must be positive");
    ConeSpec c;
    c.center = center;
    c.A = A;
    c.T_star = T_star;
    c.speed = 6.0 * A * static_cast<double>(center.size());
    return c;
}

double compute_A(const RunResult& run1, const RunResult& run2) {
    double rho2 = 0.0, glc1 = 0.0;
    for (const auto& r : run2.records) rho2 = std::max(rho2, r.norms.sup_rho);
    for (const auto& r : run1.records) glc1 = std::max(glc1, r.norms.sup_grad_log_c);
    return 1.0 + rho2 + glc1;
}

namespace {

double distance(const Grid& g, std::size_t cell, const std::vector<double>& center) {
    double s = 0.0;
    for (int k = 0; k < g.dim; ++k) {
        const double d = g.position(cell, k) - center[static_cast<std::size_t>(k)];
        s += d * d;
    }
    return std::sqrt(s);
}

struct Diff {
    double rho = 0.0, q = 0.0, log_c = 0.0;
};

Diff cell_diff(const SimState& a, const SimState& b, std::size_t c) {
    Diff d;
    d.rho = std::abs(a.rho[c] - b.rho[c]);
    d.log_c = std::abs(a.log_c[c] - b.log_c[c]);
    double s = 0.0;
    for (std::size_t k = 0; k < a.q.comp.size(); ++k) {
        const double e = a.q.comp[k][c] - b.q.comp[k][c];
        s += e * e;
    }
    d.q = std::sqrt(s);
    return d;
}

}  // namespace

double initial_ball_difference(const SimState& a, const SimState& b, const ConeSpec& cone) {
    const Grid& g = a.rho.grid;
    if (!same_lattice(g, b.rho.grid)) throw std::invalid_argument("states on different grids");
    if (static_cast<int>(cone.center.size()) != g.dim) throw std::invalid_argument("cone center has wrong dimension");
    const double radius = cone.speed * cone.T_star;
    double worst = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (distance(g, c, cone.center) > radius) continue;
        const Diff d = cell_diff(a, b, c);
        worst = std::max({worst, d.rho, d.q, d.log_c});
    }
    return worst;
}

double theil_sen_slope(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw std::invalid_argument("slope fit columns differ in length");
    std::vector<double> slopes;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size(); ++j)
            if (t[j] != t[i]) slopes.push_back((y[j] - y[i]) / (t[j] - t[i]));
    if (slopes.empty()) return 0.0;
    const std::size_t mid = slopes.size() / 2;
    std::nth_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid), slopes.end());
    double m = slopes[mid];
    if (slopes.size() % 2 == 0) {
        const double lo = *std::max_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

ConeReport verify_cone(const RunResult& run1, const RunResult& run2, const ConeSpec& cone, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("cone tolerance must be nonnegative");
    ConeReport rep;
    const std::size_t ns = std::min(run1.samples.size(), run2.samples.size());
    for (std::size_t k = 0; k < ns; ++k) {
        const SimState& a = run1.samples[k];
        const SimState& b = run2.samples[k];
        if (std::abs(a.t_scaled - b.t_scaled) > 1e-9 * (1.0 + std::abs(a.t_scaled)))
            throw std::invalid_argument("runs were sampled at different times");
        const Grid& g = a.rho.grid;
        if (!same_lattice(g, b.rho.grid)) throw std::invalid_argument("runs use different grids");
        if (static_cast<int>(cone.center.size()) != g.dim) throw std::invalid_argument("cone center has wrong dimension");
        const double t = a.t_scaled;
        if (t >= cone.T_star) continue;
        const double radius = cone.speed * (cone.T_star - t);
        double upper = -1e300, lower = 1e300;
        for (std::size_t c = 0; c < g.size(); ++c) {
            const Diff d = cell_diff(a, b, c);
            if (distance(g, c, cone.center) <= radius) {
                rep.max_diff_rho = std::max(rep.max_diff_rho, d.rho);
                rep.max_diff_q = std::max(rep.max_diff_q, d.q);
                rep.max_diff_log_c = std::max(rep.max_diff_log_c, d.log_c);
            }
            if (d.rho > tol) {
                const double x = g.position(c, 0);
                upper = std::max(upper, x);
                lower = std::min(lower, x);
            }
        }
        ++rep.samples_checked;
        if (upper >= lower) {
            rep.front_times.push_back(t);
            rep.front_upper.push_back(upper);
            rep.front_lower.push_back(lower);
        }
    }
    rep.cone_violation = rep.max_diff_rho > tol || rep.max_diff_q > tol || rep.max_diff_log_c > tol;
    if (rep.front_times.size() >= 3) {
        const double up = theil_sen_slope(rep.front_times, rep.front_upper);
        const double lo = theil_sen_slope(rep.front_times, rep.front_lower);
        rep.empirical_front_speed = std::max({0.0, up, -lo});
    } else {
        rep.note = "fewer than three samples with a separated front";
    }
    return rep;
}

double empirical_speed_bound(const RunResult& run) {
    double m = 0.0;
    for (const auto& r : run.records) m = std::max(m, r.max_abs_lambda);
    return m;
}

}  // namespace hks
