#include "hks/transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hks {

VectorField cole_hopf(const ScalarField& log_c) {
    VectorField q(log_c.grid);
    for (int axis = 0; axis < log_c.grid.dim; ++axis)
        q.comp[static_cast<std::size_t>(axis)] = discrete_derivative(log_c, axis, 1).values;
    return q;
}

double ScalingMap::time_to_scaled(double t) const { return std::sqrt(chi * mu) * t; }
double ScalingMap::time_from_scaled(double ts) const { return ts / std::sqrt(chi * mu); }
double ScalingMap::q_factor() const { return std::sqrt(chi / mu); }

VectorField ScalingMap::q_to_scaled(const VectorField& q) const {
    VectorField out = q;
    const double k = q_factor();
    for (auto& comp : out.comp)
        for (double& v : comp) v *= k;
    return out;
}

VectorField ScalingMap::q_from_scaled(const VectorField& q) const {
    VectorField out = q;
    const double k = q_factor();
    for (auto& comp : out.comp)
        for (double& v : comp) v /= k;
    return out;
}

double ScalingMap::consumption_rate() const { return std::sqrt(mu / chi); }
double ScalingMap::scaled_viscosity(double epsilon) const { return epsilon / std::sqrt(chi * mu); }

ScalingMap scaling_for(const PhysParams& p) {
    validate(p);
    return ScalingMap{p.chi, p.mu};
}

SimState make_state(const ScalarField& rho, const ScalarField& c, const PhysParams& p, double t_scaled) {
    if (!same_lattice(rho.grid, c.grid)) throw std::invalid_argument("rho and c on different grids");
    SimState s;
    s.rho = rho;
    s.log_c = log_field(c);
    s.q = scaling_for(p).q_to_scaled(cole_hopf(s.log_c));
    s.t_scaled = t_scaled;
    validate(s);
    return s;
}

namespace {

bool uniform_beyond(const ScalarField& f, double radius, double tol) {
    const Grid& g = f.grid;
    const double ref = f[0];
    for (std::size_t c = 0; c < g.size(); ++c) {
        double r = 0.0;
        for (int k = 0; k < g.dim; ++k) r = std::max(r, std::abs(g.position(c, k)));
        if (r > radius && std::abs(f[c] - ref) > tol * (1.0 + std::abs(ref))) return false;
    }
    return true;
}

double field_support(const ScalarField& f, double tol) {
    const Grid& g = f.grid;
    const double ref = f[0];
    double r = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (std::abs(f[c] - ref) <= tol * (1.0 + std::abs(ref))) continue;
        double rc = 0.0;
        for (int k = 0; k < g.dim; ++k) rc = std::max(rc, std::abs(g.position(c, k)));
        r = std::max(r, rc + 0.5 * g.h);
    }
    return r;
}

// Four-point Lagrange weights for fractional offset t in [0, 1) relative to the left node.
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

double sample(const ScalarField& f, const std::vector<double>& y, bool aligned) {
    const Grid& g = f.grid;
    const double L = g.domain_half_width;
    for (int k = 0; k < g.dim; ++k)
        if (std::abs(y[static_cast<std::size_t>(k)]) > L - 2.0 * g.h) return f[0];
    std::vector<int> base(static_cast<std::size_t>(g.dim));
    std::vector<std::array<double, 4>> w(static_cast<std::size_t>(g.dim));
    for (int k = 0; k < g.dim; ++k) {
        const double u = (y[static_cast<std::size_t>(k)] + L) / g.h - 0.5;
        if (aligned) {
            base[static_cast<std::size_t>(k)] = static_cast<int>(std::lround(u)) - 1;
            w[static_cast<std::size_t>(k)] = {0.0, 1.0, 0.0, 0.0};
        } else {
            const double fl = std::floor(u);
            base[static_cast<std::size_t>(k)] = static_cast<int>(fl) - 1;
            w[static_cast<std::size_t>(k)] = cubic_weights(u - fl);
        }
    }
    std::size_t origin = 0;
    for (int k = 0; k < g.dim; ++k) {
        int i = base[static_cast<std::size_t>(k)] % g.cells_per_axis;
        if (i < 0) i += g.cells_per_axis;
        origin += static_cast<std::size_t>(i) * g.stride(k);
    }
    // Tensor-product sum over the 4^d stencil.
    const int total = 1 << (2 * g.dim);
    double acc = 0.0;
    for (int s = 0; s < total; ++s) {
        double wt = 1.0;
        std::size_t cell = origin;
        for (int k = 0; k < g.dim; ++k) {
            const int o = (s >> (2 * k)) & 3;
            wt *= w[static_cast<std::size_t>(k)][static_cast<std::size_t>(o)];
            if (wt == 0.0) break;
            cell = g.shift(cell, k, o);
        }
        if (wt != 0.0) acc += wt * f[cell];
    }
    return acc;
}

}  // namespace

double support_radius(const SimState& s, double tol) {
    double r = std::max(field_support(s.rho, tol), field_support(s.log_c, tol));
    for (int k = 0; k < s.rho.grid.dim; ++k) r = std::max(r, field_support(s.q.component(k), tol));
    return r;
}

SimState parabolic_rescale(const SimState& s, double a) {
    if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("rescaling factor must be positive");
    validate(s);
    const Grid& g = s.rho.grid;
    const double L = g.domain_half_width;
    const double tol = 1e-12;
    const double R = support_radius(s, tol);
    if (R / a > L - 2.0 * g.h) throw std::domain_error("rescaled support leaves the domain");
    if (a > 1.0) {
        const double edge = L - 2.0 * g.h;
        if (!uniform_beyond(s.rho, edge, tol) || !uniform_beyond(s.log_c, edge, tol))
            throw std::domain_error("fields are not uniform near the domain edge");
    }

    bool aligned = true;
    for (int i = 0; i < g.cells_per_axis && aligned; ++i) {
        const double u = (a * g.center(i) + L) / g.h - 0.5;
        if (std::abs(u - std::round(u)) > 1e-9) aligned = false;
    }

    SimState out;
    out.rho = ScalarField(g);
    out.log_c = ScalarField(g);
    out.q = VectorField(g);
    out.t_scaled = s.t_scaled / (a * a);
    std::vector<ScalarField> qc;
    for (int k = 0; k < g.dim; ++k) qc.push_back(s.q.component(k));

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < g.size(); ++c) {
        std::vector<double> y(static_cast<std::size_t>(g.dim));
        for (int k = 0; k < g.dim; ++k) y[static_cast<std::size_t>(k)] = a * g.position(c, k);
        out.rho[c] = a * a * sample(s.rho, y, aligned);
        out.log_c[c] = sample(s.log_c, y, aligned);
        for (int k = 0; k < g.dim; ++k)
            out.q.comp[static_cast<std::size_t>(k)][c] = a * sample(qc[static_cast<std::size_t>(k)], y, aligned);
    }
    return out;
}

}  // namespace hks
