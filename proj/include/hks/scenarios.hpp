#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hks/blowup.hpp"
#include "hks/core.hpp"
#include "hks/propagation.hpp"
#include "hks/riemann.hpp"
#include "hks/solver.hpp"

namespace hks {

// Smooth radial plateau: amplitude on |x| <= inner, zero on |x| >= outer, joined by the
// exp(-1/s) smoothstep.
struct BumpSpec {
    double inner = 1.0;
    double outer = 2.0;
    double amplitude = 1.0;
};

double bump(double x, const BumpSpec& spec = {});

enum class ScenarioKind { constant, remark11, thm13_case1, thm13_case2, corollary14, custom };

std::string to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string& s);

struct GridSpec {
    int dim = 1;
    int cells_per_axis = 2048;
    double domain_half_width = 16.0;
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::remark11;
    double rho_bar = 1.0;
    double c_bar = 1.0;
    double a = 1.0;       // parabolic scaling factor (thm13_case1)
    double delta = 0.5;   // transverse stretch (thm13_case2, corollary14)
    int N = 2;            // amplitude exponent delta^N (corollary14)
    PhysParams params;
    GridSpec grid;
    SolverConfig solver;
    std::optional<std::pair<double, double>> target_interval;
    double t_end = 2.0;
    int sobolev_m = 2;
    // When positive, the abort factor is capped by the gradient of a jump of this fraction of the
    // initial density range resolved over two cells (see shock_abort_factor).
    double shock_fraction = 0.0;
    BumpSpec bump;
    std::string data_file;            // custom: CSV with columns x,rho,c
    std::vector<double> output_times;  // extra field snapshots
};

void validate(const ScenarioConfig& c);
ScenarioConfig default_config(ScenarioKind k);

// Smallest box half-width that thm13_case2 needs: the transverse bump must vanish before the edge.
double case2_required_half_width(double delta);

SimState build_data(const ScenarioConfig& c);

// Factor by which sup |grad rho| must grow before a jump of `fraction` times the initial density
// range sits across two cells. Throws when the grid cannot represent any growth at that fraction.
double shock_abort_factor(const SimState& initial, double fraction);

// H^m norm of (rho0 - rho_bar) plus that of grad log c0.
double perturbation_norm(const SimState& s, double rho_bar, int m);

// Upper bound on the distance from the data center to the blow-up point for the parabolically
// rescaled problem: 2/a + 6 T/a^2 + 6 rho_bar T + 6 S T / a.
double case1_radius_bound(double a, double rho_bar, double S, double T);

// Central-slice agreement between a tensor-data run and the one-dimensional run extended constantly
// in the transverse directions, at shared sample times up to the first abort.
struct SliceComparison {
    double slice_half_width = 0.5;
    double tol = 0.0;
    double max_diff = 0.0;
    double worst_time = 0.0;
    int samples = 0;
    Verdict reference_verdict = Verdict::completed;
    double reference_t_final = 0.0;
    bool ok = false;
};

struct ScenarioResult {
    ScenarioConfig config;  // as run (abort factor and scaling resolved)
    SimState initial;
    RunResult run;
    double abort_factor = 0.0;
    double perturbation = 0.0;
    std::optional<DataCheckReport> data_check;
    std::optional<ImageBounds> bounds;
    std::optional<CharTrace> trace;
    std::optional<BlowupEstimate> estimate;
    BlowupReport report;
    std::optional<double> blowup_location;
    std::optional<SliceComparison> slice;
    double trace_ratio = 0.95;
    std::vector<std::string> notes;
};

struct ScenarioOptions {
    bool analyze = true;   // data check, image bounds and characteristic trace (one-dimensional runs)
    int bounds_samples = 16;
    double trace_ratio = 0.95;
    int slice_samples = 8;  // thm13_case2 comparison points
};

ScenarioResult run_scenario(const ScenarioConfig& c, const ScenarioOptions& opts = {});

void write_outputs(const ScenarioResult& r, const std::string& out_dir);

// Paired runs of the configured data against the constant background with the same rho_bar, c_bar.
struct PropagationOptions {
    double horizon = 0.25;
    int samples = 8;
    double tol_factor = 10.0;         // tol = tol_factor * Lip * h
    std::optional<double> center;     // default: just outside the data support, clear of the ball
};

struct PropagationResult {
    ConeSpec cone;
    ConeReport report;
    double lipschitz = 0.0;  // max of the discrete Lipschitz constants of rho0 and c0
    double tol = 0.0;
    double initial_difference = 0.0;
    double lambda_max_observed = 0.0;
    RunResult background;
    RunResult perturbed;
};

PropagationResult run_propagation(const ScenarioConfig& c, const PropagationOptions& opts = {});

}  // namespace hks
