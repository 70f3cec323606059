#pragma once

#include "hks/core.hpp"

namespace hks {

// Centered discrete gradient of log c.
VectorField cole_hopf(const ScalarField& log_c);

// Maps physical (t, q) to the solver's variables and back: t_s = sqrt(chi mu) t, q_s = sqrt(chi/mu) q.
struct ScalingMap {
    double chi = 1.0;
    double mu = 1.0;

    double time_to_scaled(double t) const;
    double time_from_scaled(double ts) const;
    double q_factor() const;
    VectorField q_to_scaled(const VectorField& q) const;
    VectorField q_from_scaled(const VectorField& q) const;
    // Coefficient multiplying rho in the log c equation, in scaled time.
    double consumption_rate() const;
    // Diffusion coefficient in scaled time for a physical viscosity epsilon.
    double scaled_viscosity(double epsilon) const;
};

ScalingMap scaling_for(const PhysParams& p);

// Builds a solver state from rho and c, with q = sqrt(chi/mu) * grad log c.
SimState make_state(const ScalarField& rho, const ScalarField& c, const PhysParams& p, double t_scaled = 0.0);

// rho_a(x) = a^2 rho(a x), log c_a(x) = log c(a x), q_a(x) = a q(a x), t_a = t / a^2.
// Uses index mapping when a x lands on cell centers and periodic cubic interpolation otherwise.
// Points mapped beyond the domain take the (uniform) far-field value. Throws when the
// rescaled support does not fit inside the domain.
SimState parabolic_rescale(const SimState& s, double a);

// Half-width of the smallest centered box outside which every field is uniform to tol.
double support_radius(const SimState& s, double tol = 1e-12);

}  // namespace hks
