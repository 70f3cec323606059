#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hks/core.hpp"

namespace hks {

enum class FluxScheme { rusanov, hll };
enum class TimeIntegrator { ssp_rk2 };
enum class Reconstruction { first_order, minmod };
enum class Exec { serial, parallel };

struct SolverConfig {
    double cfl = 0.45;
    FluxScheme scheme = FluxScheme::rusanov;
    TimeIntegrator time_integrator = TimeIntegrator::ssp_rk2;
    Reconstruction reconstruction = Reconstruction::first_order;
    long max_steps = 2'000'000;
    double gradient_abort_factor = 1e6;
    Exec exec = Exec::parallel;
};

void validate(const SolverConfig& c);

struct AxisFlux {
    double mass = 0.0;    // flux of rho
    double normal = 0.0;  // flux of the q component along the axis
};

// Physical flux of (rho, q_axis) along one axis.
AxisFlux flux(double rho, double q_axis);

struct Eigen2 {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

Eigen2 eigenvalues(double rho, double q_axis);
double max_abs_speed(double rho, double q_axis);

// Interface flux between left and right states. `transverse` is the coefficient k such that
// each q component with zero physical flux along the axis gets interface flux -k (q_R - q_L).
struct InterfaceFlux {
    AxisFlux f;
    double transverse = 0.0;
};

InterfaceFlux numerical_flux_rusanov(double rho_l, double q_l, double rho_r, double q_r);
InterfaceFlux numerical_flux_hll(double rho_l, double q_l, double rho_r, double q_r);

struct Residual {
    std::vector<double> rho;
    std::vector<std::vector<double>> q;
};

// Spatial operator d/dt (rho, q) = -div F + nu Lap rho, evaluated with the given execution policy.
// The serial path is the reference; the parallel path splits face fluxes and cell updates into
// two race-free OpenMP passes.
void compute_residual(const SimState& s, const SolverConfig& cfg, double viscosity, Exec exec, Residual& out);

double max_wave_speed(const SimState& s);
double cfl_dt(const SimState& s, const SolverConfig& cfg, const PhysParams& params);

struct PositivityFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Advances by dt (one SSP-RK2 step); halves dt once if rho loses positivity. Returns the dt used.
double step(SimState& s, double dt, const SolverConfig& cfg, const PhysParams& params);

struct StepRecord {
    double t_scaled = 0.0;
    double dt = 0.0;
    double max_abs_lambda = 0.0;
    NormReport norms;
    double mass_rho = 0.0;
    std::vector<double> mass_q;
};

enum class Verdict { completed, gradient_abort, positivity_failure, step_limit };
std::string to_string(Verdict v);

struct RunOptions {
    int norm_m = 2;
    // Times the integrator lands on exactly; the state at each is stored in RunResult::samples.
    std::vector<double> sample_times;
    bool keep_all_states = false;
    std::function<void(const SimState&, const StepRecord&)> observer;
};

struct RunResult {
    std::vector<StepRecord> records;
    std::vector<SimState> samples;
    std::vector<SimState> states;  // every step, only when keep_all_states
    SimState final_state;
    Verdict verdict = Verdict::completed;
    bool under_resolved = false;
    double under_resolved_time = -1.0;
    std::string message;
};

RunResult run(const SimState& initial, const PhysParams& params, const SolverConfig& cfg, double t_end,
              const RunOptions& opts = {});

}  // namespace hks
