#include "hks/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace hks {

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int k = 0; k < dim; ++k) s *= static_cast<std::size_t>(cells_per_axis);
    return s;
}

std::size_t Grid::stride(int axis) const {
    std::size_t s = 1;
    for (int k = 0; k < axis; ++k) s *= static_cast<std::size_t>(cells_per_axis);
    return s;
}

int Grid::coord(std::size_t cell, int axis) const {
    return static_cast<int>((cell / stride(axis)) % static_cast<std::size_t>(cells_per_axis));
}

std::size_t Grid::shift(std::size_t cell, int axis, int offset) const {
    const std::size_t st = stride(axis);
    const int n = cells_per_axis;
    const int i = static_cast<int>((cell / st) % static_cast<std::size_t>(n));
    int j = (i + offset) % n;
    if (j < 0) j += n;
    return cell + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * st;
}

double Grid::cell_volume() const { return std::pow(h, dim); }

Grid make_grid(int dim, int cells_per_axis, double domain_half_width, Boundary boundary) {
    if (dim < 1) throw std::invalid_argument("grid dimension must be >= 1");
    if (cells_per_axis < 8 || cells_per_axis % 2 != 0)
        throw std::invalid_argument("cells per axis must be even and >= 8");
    if (!(domain_half_width > 0.0) || !std::isfinite(domain_half_width))
        throw std::invalid_argument("domain half-width must be positive");
    Grid g;
    g.dim = dim;
    g.cells_per_axis = cells_per_axis;
    g.domain_half_width = domain_half_width;
    g.h = 2.0 * domain_half_width / cells_per_axis;
    g.boundary = boundary;
    return g;
}

bool same_lattice(const Grid& a, const Grid& b) {
    return a.dim == b.dim && a.cells_per_axis == b.cells_per_axis &&
           a.domain_half_width == b.domain_half_width;
}

ScalarField VectorField::component(int axis) const {
    ScalarField f(grid);
    f.values = comp.at(static_cast<std::size_t>(axis));
    return f;
}

void validate(const PhysParams& p) {
    if (!(p.chi > 0.0) || !(p.mu > 0.0)) throw std::invalid_argument("chi and mu must be positive");
    if (!(p.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
}

void validate(const SimState& s) {
    if (!same_lattice(s.rho.grid, s.log_c.grid) || !same_lattice(s.rho.grid, s.q.grid))
        throw std::invalid_argument("state fields live on different grids");
    if (static_cast<int>(s.q.comp.size()) != s.rho.grid.dim)
        throw std::invalid_argument("q must have one component per axis");
    for (double v : s.rho.values)
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("rho must be positive and finite");
    for (double v : s.log_c.values)
        if (!std::isfinite(v)) throw std::invalid_argument("log_c must be finite");
}

ScalarField discrete_derivative(const ScalarField& f, int axis, int order) {
    const Grid& g = f.grid;
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("axis out of range");
    if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
    ScalarField out(g);
    const std::size_t n = g.size();
    const double h = g.h;
    const double* u = f.values.data();
    double* o = out.values.data();
    if (order == 1) {
        const double inv = 0.5 / h;
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c)
            o[c] = (u[g.shift(c, axis, 1)] - u[g.shift(c, axis, -1)]) * inv;
    } else {
        const double inv = 1.0 / (h * h);
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c)
            o[c] = (u[g.shift(c, axis, 1)] - 2.0 * u[c] + u[g.shift(c, axis, -1)]) * inv;
    }
    return out;
}

ScalarField mixed_derivative(const ScalarField& f, const std::vector<int>& alpha) {
    ScalarField out = f;
    for (int axis = 0; axis < static_cast<int>(alpha.size()); ++axis) {
        int a = alpha[static_cast<std::size_t>(axis)];
        while (a >= 2) {
            out = discrete_derivative(out, axis, 2);
            a -= 2;
        }
        if (a == 1) out = discrete_derivative(out, axis, 1);
    }
    return out;
}

ScalarField gradient_magnitude(const ScalarField& f) {
    ScalarField acc(f.grid);
    for (int axis = 0; axis < f.grid.dim; ++axis) {
        const ScalarField d = discrete_derivative(f, axis, 1);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += d[c] * d[c];
    }
    for (double& v : acc.values) v = std::sqrt(v);
    return acc;
}

namespace {

// Visits every multi-index of total order k together with the number of ordered tuples it stands for.
void for_each_multi_index(int dim, int k, const std::function<void(const std::vector<int>&, double)>& fn) {
    std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == dim - 1) {
            alpha[static_cast<std::size_t>(axis)] = left;
            double mult = std::tgamma(k + 1.0);
            for (int a : alpha) mult /= std::tgamma(a + 1.0);
            fn(alpha, mult);
            return;
        }
        for (int a = 0; a <= left; ++a) {
            alpha[static_cast<std::size_t>(axis)] = a;
            rec(axis + 1, left - a);
        }
    };
    rec(0, k);
}

}  // namespace

ScalarField gradient_power_squared(const ScalarField& f, int k) {
    ScalarField acc(f.grid);
    if (k == 0) {
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] = f[c] * f[c];
        return acc;
    }
    for_each_multi_index(f.grid.dim, k, [&](const std::vector<int>& alpha, double mult) {
        const ScalarField d = mixed_derivative(f, alpha);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += mult * d[c] * d[c];
    });
    return acc;
}

double sup_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.cell_volume());
}

double l1_norm(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += std::abs(v);
    return s * f.grid.cell_volume();
}

double total_mass(const ScalarField& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

double sobolev_norm(const ScalarField& f, int m) {
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
        const ScalarField g = gradient_power_squared(f, k);
        for (double v : g.values) s += v;
    }
    return std::sqrt(s * f.grid.cell_volume());
}

double sobolev_norm(const VectorField& f, int m) {
    double s = 0.0;
    for (int j = 0; j < f.grid.dim; ++j) {
        const double n = sobolev_norm(f.component(j), m);
        s += n * n;
    }
    return std::sqrt(s);
}

double curl_residual(const VectorField& q) {
    double worst = 0.0;
    const int d = q.grid.dim;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const ScalarField dij = discrete_derivative(q.component(j), i, 1);
            const ScalarField dji = discrete_derivative(q.component(i), j, 1);
            for (std::size_t c = 0; c < dij.size(); ++c) worst = std::max(worst, std::abs(dij[c] - dji[c]));
        }
    return worst;
}

ScalarField exp_field(const ScalarField& f) {
    ScalarField out(f.grid);
    for (std::size_t c = 0; c < f.size(); ++c) out[c] = std::exp(f[c]);
    return out;
}

ScalarField log_field(const ScalarField& f) {
    ScalarField out(f.grid);
    for (std::size_t c = 0; c < f.size(); ++c) {
        if (!(f[c] > 0.0)) throw std::invalid_argument("logarithm of a nonpositive value");
        out[c] = std::log(f[c]);
    }
    return out;
}

NormReport norm_report(const SimState& s, const PhysParams& params, int m) {
    (void)params;
    if (m < 0) throw std::invalid_argument("m must be nonnegative");
    const Grid& g = s.rho.grid;
    NormReport r;
    r.m = m;
    const ScalarField c = exp_field(s.log_c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        r.sup_rho = std::max(r.sup_rho, std::abs(s.rho[i]));
        r.sup_c = std::max(r.sup_c, c[i]);
        r.sup_inv_rho = std::max(r.sup_inv_rho, 1.0 / s.rho[i]);
        r.sup_inv_c = std::max(r.sup_inv_c, 1.0 / c[i]);
    }
    r.sup_grad_rho = sup_norm(gradient_magnitude(s.rho));
    r.sup_grad_c = sup_norm(gradient_magnitude(c));
    r.sup_grad_log_c = sup_norm(gradient_magnitude(s.log_c));

    ScalarField hess(g);
    for (int i = 0; i < g.dim; ++i)
        for (int j = 0; j < g.dim; ++j) {
            std::vector<int> alpha(static_cast<std::size_t>(g.dim), 0);
            alpha[static_cast<std::size_t>(i)] += 1;
            alpha[static_cast<std::size_t>(j)] += 1;
            const ScalarField d = mixed_derivative(c, alpha);
            for (std::size_t k = 0; k < g.size(); ++k) hess[k] += d[k] * d[k];
        }
    for (double& v : hess.values) v = std::sqrt(v);
    r.sup_hess_c = sup_norm(hess);

    double q_l2sq = 0.0;
    for (const auto& comp : s.q.comp)
        for (double v : comp) q_l2sq += v * v;
    const double vol = g.cell_volume();
    double energy = 0.0;
    for (int k = 1; k <= m; ++k) {
        const ScalarField grho = gradient_power_squared(s.rho, k);
        for (double v : grho.values) energy += v * vol;
        for (int j = 0; j < g.dim; ++j) {
            const ScalarField gq = gradient_power_squared(s.q.component(j), k);
            for (std::size_t i = 0; i < g.size(); ++i) energy += s.rho[i] * gq[i] * vol;
        }
    }
    r.X_m = 1.0 + r.sup_rho + r.sup_c + r.sup_inv_rho + r.sup_inv_c + std::sqrt(q_l2sq * vol) + energy;
    return r;
}

}  // namespace hks
