#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hks/core.hpp"
#include "hks/solver.hpp"

namespace hks {

// A point (rho, q) of phase space.
struct PhasePoint {
    double z1 = 1.0;
    double z2 = 0.0;
};

struct InvariantPoint {
    double w1 = 0.0;
    double w2 = 0.0;
};

struct CharODEConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    double min_step = 1e-13;
    long max_steps = 200000;
};

// Raised when the backward characteristic hits rho = 0 before reaching the q = 0 axis, i.e. the
// point lies outside the region 4 z1 > 3 z2^2 swept by axis-anchored characteristics.
struct CoverageError : std::domain_error {
    using std::domain_error::domain_error;
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Eigen2 eigen(const PhasePoint& p);
bool in_coverage(const PhasePoint& p);

struct FootResult {
    double foot = 0.0;      // z1 where the family characteristic through p meets z2 = 0
    double integral = 0.0;  // signed integral from 0 to z2 of ds / sqrt(s^2 + 4 z1(s)) along it
    long steps = 0;
};

// Integrates dz1/dz2 = lambda_family(z1, z2) from p back to z2 = 0 with step-doubling RK4.
FootResult backtrace_foot(const PhasePoint& p, int family, const CharODEConfig& cfg = {});

double f_eval(const PhasePoint& p, int family, const CharODEConfig& cfg = {});
InvariantPoint w_eval(const PhasePoint& p, const CharODEConfig& cfg = {});

struct InvariantJet {
    InvariantPoint w;
    double f1 = 0.0;
    double f2 = 0.0;
};
InvariantJet w_jet(const PhasePoint& p, const CharODEConfig& cfg = {});

using Mat2 = std::array<std::array<double, 2>, 2>;
// Rows are the gradients of w1 and w2 with respect to (z1, z2).
Mat2 grad_w(const PhasePoint& p, const CharODEConfig& cfg = {});
Mat2 grad_w_inverse(const PhasePoint& p, const CharODEConfig& cfg = {});
double det_grad_w(const PhasePoint& p, const CharODEConfig& cfg = {});

struct InversionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PhasePoint invert_w(const InvariantPoint& target, const CharODEConfig& cfg = {}, double tol = 1e-9);

double dlambda2_dw1(const PhasePoint& p, const CharODEConfig& cfg = {});
double dlambda2_dw2(const PhasePoint& p, const CharODEConfig& cfg = {});

// Thread-safe memo of w keyed on (z1, z2) rounded to `quantum`; values are computed at the
// rounded point so results do not depend on query order.
class InvariantCache {
public:
    explicit InvariantCache(double quantum = 1e-6, CharODEConfig cfg = {});
    ~InvariantCache();
    InvariantCache(const InvariantCache&) = delete;
    InvariantCache& operator=(const InvariantCache&) = delete;

    InvariantPoint get(const PhasePoint& p);
    std::size_t size() const;
    double quantum() const { return quantum_; }

private:
    struct Impl;
    double quantum_;
    CharODEConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

struct InvariantFields {
    ScalarField P;
    ScalarField Q;
};

// P = w1(rho, q_0) and Q = w2(rho, q_0) cellwise on a one-dimensional state.
InvariantFields invariant_fields(const SimState& s, InvariantCache* cache = nullptr, Exec exec = Exec::parallel,
                                 const CharODEConfig& cfg = {});

// Tabulated antiderivative in the w2 variable of dlambda2/dw2 / (lambda2 - lambda1) at fixed w1,
// anchored so that value(v_lo) = 0.
class PsiTable {
public:
    PsiTable() = default;
    PsiTable(double w1, double v_lo, double v_hi, int intervals, const CharODEConfig& cfg = {}, double tol = 1e-8);
    double value(double v) const;
    double min_value() const;
    double max_value() const;
    double w1() const { return w1_; }

private:
    double w1_ = 0.0;
    double v_lo_ = 0.0;
    double v_hi_ = 0.0;
    std::vector<double> nodes_;
};

double psi_integrand(double w1, double v, const CharODEConfig& cfg = {});

struct ImageBounds {
    double p_min = 0.0;
    double p_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    double delta0 = 0.0;
    double m_phi = 1.0;
    double M_phi = 1.0;
};

// Ranges of P0, Q0, the lower bound delta0 = 0.99 * min dlambda2/dw1 over a samples x samples
// lattice of the (P, Q) rectangle, and Phi bounds valid for every anchor w1 in [p_min, p_max].
ImageBounds image_bounds(const ScalarField& P0, const ScalarField& Q0, int samples = 24,
                         const CharODEConfig& cfg = {});

// Tightens the Phi bounds for a characteristic that starts at (p_anchor, q_anchor).
ImageBounds anchored_bounds(const ImageBounds& b, const PsiTable& table, double q_anchor);

// Generic adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth = 40);

}  // namespace hks
