#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hks/core.hpp"
#include "hks/riemann.hpp"
#include "hks/solver.hpp"

namespace hks {

struct DataCheckReport {
    bool asm1_ok = false;  // rho0, c0 bounded below by positive constants
    bool asm2_ok = false;  // discrete derivatives up to order 4 finite
    bool asm3_ok = false;  // spatially periodic data
    bool asm4_ok = false;  // some cell has d_x rho0 <= 0 and c0 c0'' < c0'^2 - 10 h^2
    double beta1 = 0.0;
    double beta2 = 0.0;
    // Among admissible cells, the one where d_x rho0 + (S - q0)/2 d_x q0 (the sign-carrying factor of
    // d_x P0) is most negative. The first admissible cell is kept as well.
    std::size_t x0_index = 0;
    double x0 = 0.0;
    std::size_t first_x0_index = 0;
    double first_x0 = 0.0;
    double slope_factor = 0.0;
    std::string detail;
};

// One-dimensional data only. q_factor converts grad log c into the solver's q.
DataCheckReport check_blowup_data(const ScalarField& rho0, const ScalarField& c0, double q_factor = 1.0);

struct CharTrace {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<double> P;
    std::vector<double> Q;
    std::vector<double> P_tilde;
    std::vector<double> Phi;
    bool truncated = false;
    std::string truncation_reason;
};

struct TraceOptions {
    // Stop once h |P_tilde| reaches this fraction of the initial P range.
    double resolution_fraction = 0.25;
    double edge_cells = 4.0;
};

// Follows dx/dt = lambda2(rho, q) through successive solver states with Heun's rule and cubic
// interpolation, sampling P, Q, the discrete derivative of P and Phi along the way.
class CharTracer {
public:
    CharTracer(const SimState& initial, double x0, std::optional<PsiTable> psi = std::nullopt,
               TraceOptions opts = {}, CharODEConfig cfg = {});
    void advance(const SimState& next);
    bool active() const { return !trace_.truncated; }
    const CharTrace& trace() const { return trace_; }
    double position() const { return x_; }

private:
    struct Sample {
        double lambda2, P, Q, P_tilde;
    };
    Sample sample(const SimState& s, double x) const;
    double speed(const SimState& s, double x) const;
    void push(double t, double x, const Sample& smp);

    SimState prev_;
    double x_;
    std::optional<PsiTable> psi_;
    TraceOptions opts_;
    CharODEConfig cfg_;
    double psi_base_ = 0.0;
    double p_range_ = 0.0;
    double max_abs_ptilde_ = 0.0;
    CharTrace trace_;
};

// Cuts the trace at the first sample whose |P_tilde| reaches `ratio` times the trace maximum. Past
// that point the discrete gradient is pinned by the grid and no longer follows the steepening.
CharTrace resolved_prefix(const CharTrace& trace, double ratio = 0.95);

CharTrace trace_lambda2(const std::vector<SimState>& states, double x0, std::optional<PsiTable> psi = std::nullopt,
                        TraceOptions opts = {}, CharODEConfig cfg = {});

// Periodic four-point cubic interpolation of a one-dimensional field.
double interpolate_cubic(const ScalarField& f, double x);

// Divergence time of the Riccati envelope y' = -(delta0 / M_phi) y^2, y(0) = P_tilde0.
double riccati_bound(double P_tilde0, const ImageBounds& bounds);

enum class BlowupClass { gradient_blowup, sup_norm_blowup, log_c_blowup, none };
std::string to_string(BlowupClass c);

struct Classification {
    BlowupClass kind = BlowupClass::none;
    double grad_rho_growth = 1.0;
    double hess_c_growth = 1.0;
    double sup_rho_growth = 1.0;
    double sup_c_growth = 1.0;
    double grad_c_growth = 1.0;
    double grad_log_c_growth = 1.0;
};

// Bounded quantities may grow by less than 3x; the density gradient must grow by the abort factor.
// Growth of the bounded quantities is measured against max(initial value, bounded_floor), so data
// that starts within a tiny distance of a constant state is not flagged for O(1)-small changes.
Classification classify_blowup(const std::vector<StepRecord>& records, double gradient_abort_factor,
                               double bounded_floor = 1.0);

struct BlowupEstimate {
    bool ok = false;
    double T = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    int points = 0;
    std::string reason;
};

// Least-squares line through (t, 1/|P_tilde|) on the final third of the trace; T is its root.
BlowupEstimate estimate_blowup_time(const std::vector<double>& times, const std::vector<double>& P_tilde);
BlowupEstimate estimate_blowup_time(const CharTrace& trace);

struct BlowupReport {
    double t_abort = -1.0;
    double riccati_T_upper = 0.0;
    NormReport bounded_norms_max;
    NormReport diverging_norms_final;
    Classification classification;
    bool resolution_limited = false;
};

}  // namespace hks
