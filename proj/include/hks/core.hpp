#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hks {

enum class Boundary { periodic };

// Uniform lattice on [-L, L]^d. Cell i along an axis is centered at -L + (i + 1/2) h.
// Flat index: axis 0 has stride 1, axis k has stride n^k.
struct Grid {
    int dim = 1;
    int cells_per_axis = 8;
    double domain_half_width = 1.0;
    double h = 0.25;
    Boundary boundary = Boundary::periodic;

    std::size_t size() const;
    std::size_t stride(int axis) const;
    double center(int i) const { return -domain_half_width + (i + 0.5) * h; }
    int coord(std::size_t cell, int axis) const;
    double position(std::size_t cell, int axis) const { return center(coord(cell, axis)); }
    std::size_t shift(std::size_t cell, int axis, int offset) const;
    double cell_volume() const;
};

Grid make_grid(int dim, int cells_per_axis, double domain_half_width,
               Boundary boundary = Boundary::periodic);

bool same_lattice(const Grid& a, const Grid& b);

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

// Components are stored separately: comp[axis][cell].
struct VectorField {
    Grid grid;
    std::vector<std::vector<double>> comp;

    VectorField() = default;
    explicit VectorField(const Grid& g, double fill = 0.0)
        : grid(g), comp(static_cast<std::size_t>(g.dim), std::vector<double>(g.size(), fill)) {}
    ScalarField component(int axis) const;
};

struct SimState {
    ScalarField rho;
    VectorField q;
    ScalarField log_c;
    double t_scaled = 0.0;
};

struct PhysParams {
    double chi = 1.0;
    double mu = 1.0;
    double epsilon = 0.0;
};

void validate(const PhysParams& p);
void validate(const SimState& s);

struct NormReport {
    double sup_rho = 0.0;
    double sup_c = 0.0;
    double sup_inv_rho = 0.0;
    double sup_inv_c = 0.0;
    double sup_grad_rho = 0.0;
    double sup_grad_c = 0.0;
    double sup_hess_c = 0.0;
    double sup_grad_log_c = 0.0;
    double X_m = 0.0;
    int m = 2;
};

// Periodic centered differences. order 1 uses (u[i+1]-u[i-1])/(2h); order 2 uses the compact
// (u[i+1]-2u[i]+u[i-1])/h^2 stencil.
ScalarField discrete_derivative(const ScalarField& f, int axis, int order);

// Applies the centered difference for the multi-index alpha (alpha[k] derivatives along axis k),
// pairing first differences into compact second differences where possible.
ScalarField mixed_derivative(const ScalarField& f, const std::vector<int>& alpha);

ScalarField gradient_magnitude(const ScalarField& f);

// Sum over ordered index tuples of length k of the squared derivative, i.e. |grad^k f|^2 per cell.
ScalarField gradient_power_squared(const ScalarField& f, int k);

double sup_norm(const ScalarField& f);
double l2_norm(const ScalarField& f);
double l1_norm(const ScalarField& f);
double total_mass(const ScalarField& f);

// Discrete H^m norm: sqrt(sum_{k<=m} ||grad^k f||_2^2).
double sobolev_norm(const ScalarField& f, int m);
double sobolev_norm(const VectorField& f, int m);

// The curl-type residual max_{i<j} |D_i q_j - D_j q_i| with centered differences.
double curl_residual(const VectorField& q);

NormReport norm_report(const SimState& s, const PhysParams& params, int m);

ScalarField exp_field(const ScalarField& f);
ScalarField log_field(const ScalarField& f);

}  // namespace hks
