#include "hks/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hks {

DataCheckReport check_blowup_data(const ScalarField& rho0, const ScalarField& c0, double q_factor) {
    const Grid& g = rho0.grid;
    if (g.dim != 1) throw std::invalid_argument("blow-up data check is one-dimensional");
    if (!same_lattice(g, c0.grid)) throw std::invalid_argument("rho0 and c0 on different grids");
    DataCheckReport r;
    r.beta1 = *std::min_element(rho0.values.begin(), rho0.values.end());
    r.beta2 = *std::min_element(c0.values.begin(), c0.values.end());
    r.asm1_ok = r.beta1 > 0.0 && r.beta2 > 0.0;
    r.asm3_ok = g.boundary == Boundary::periodic;

    r.asm2_ok = true;
    for (const ScalarField* f : {&rho0, &c0})
        for (int k = 1; k <= 4 && r.asm2_ok; ++k) {
            const ScalarField d = mixed_derivative(*f, {k});
            for (double v : d.values)
                if (!std::isfinite(v)) {
                    r.asm2_ok = false;
                    break;
                }
        }
    if (!r.asm1_ok) {
        r.detail = "data not bounded below by a positive constant";
        return r;
    }

    const ScalarField drho = discrete_derivative(rho0, 0, 1);
    const ScalarField dc = discrete_derivative(c0, 0, 1);
    const ScalarField ddc = discrete_derivative(c0, 0, 2);
    const double margin = 10.0 * g.h * g.h;
    double best = std::numeric_limits<double>::infinity();
    bool first = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gap = dc[i] * dc[i] - c0[i] * ddc[i];
        if (!(drho[i] <= 0.0 && gap > margin)) continue;
        const double q = q_factor * dc[i] / c0[i];
        const double dq = -q_factor * gap / (c0[i] * c0[i]);
        const double S = std::sqrt(q * q + 4.0 * rho0[i]);
        const double factor = drho[i] + 0.5 * (S - q) * dq;
        if (first) {
            r.first_x0_index = i;
            r.first_x0 = g.center(static_cast<int>(i));
            first = false;
        }
        if (factor < best) {
            best = factor;
            r.x0_index = i;
            r.x0 = g.center(static_cast<int>(i));
            r.slope_factor = factor;
        }
    }
    r.asm4_ok = !first;
    r.detail = r.asm4_ok ? "ok" : "no cell with d_x rho0 <= 0 and a strictly log-concave c0";
    return r;
}

double interpolate_cubic(const ScalarField& f, double x) {
    const Grid& g = f.grid;
    const double u = (x + g.domain_half_width) / g.h - 0.5;
    const double fl = std::floor(u);
    const double t = u - fl;
    const int n = g.cells_per_axis;
    auto at = [&](int i) {
        i %= n;
        if (i < 0) i += n;
        return f[static_cast<std::size_t>(i)];
    };
    const int b = static_cast<int>(fl) - 1;
    const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return w0 * at(b) + w1 * at(b + 1) + w2 * at(b + 2) + w3 * at(b + 3);
}

namespace {

double interpolate_positive(const ScalarField& f, double x) {
    const double v = interpolate_cubic(f, x);
    if (v > 0.0) return v;
    const Grid& g = f.grid;
    const double u = (x + g.domain_half_width) / g.h - 0.5;
    const double fl = std::floor(u);
    const int n = g.cells_per_axis;
    int i = static_cast<int>(fl) % n;
    if (i < 0) i += n;
    const double t = u - fl;
    return (1.0 - t) * f[static_cast<std::size_t>(i)] + t * f[static_cast<std::size_t>((i + 1) % n)];
}

}  // namespace

CharTracer::CharTracer(const SimState& initial, double x0, std::optional<PsiTable> psi, TraceOptions opts,
                       CharODEConfig cfg)
    : prev_(initial), x_(x0), psi_(std::move(psi)), opts_(opts), cfg_(cfg) {
    if (initial.rho.grid.dim != 1) throw std::invalid_argument("characteristic tracing is one-dimensional");
    const Sample s0 = sample(initial, x0);
    if (psi_) psi_base_ = psi_->value(s0.Q);
    const InvariantFields f = invariant_fields(initial, nullptr, Exec::parallel, cfg_);
    p_range_ = *std::max_element(f.P.values.begin(), f.P.values.end()) -
               *std::min_element(f.P.values.begin(), f.P.values.end());
    push(initial.t_scaled, x0, s0);
}

double CharTracer::speed(const SimState& s, double x) const {
    const double r = interpolate_positive(s.rho, x);
    ScalarField q0(s.rho.grid);
    q0.values = s.q.comp[0];
    return eigenvalues(r, interpolate_cubic(q0, x)).lambda2;
}

CharTracer::Sample CharTracer::sample(const SimState& s, double x) const {
    const Grid& g = s.rho.grid;
    ScalarField q0(g);
    q0.values = s.q.comp[0];
    const double r = interpolate_positive(s.rho, x);
    const double q = interpolate_cubic(q0, x);
    Sample out;
    out.lambda2 = eigenvalues(r, q).lambda2;
    const InvariantPoint w = w_eval({r, q}, cfg_);
    out.P = w.w1;
    out.Q = w.w2;

    const int n = g.cells_per_axis;
    const double u = (x + g.domain_half_width) / g.h - 0.5;
    const double fl = std::floor(u);
    const double t = u - fl;
    const int b = static_cast<int>(fl) - 1;
    auto wrap = [&](int i) {
        i %= n;
        return static_cast<std::size_t>(i < 0 ? i + n : i);
    };
    double P[6];
    for (int k = 0; k < 6; ++k) {
        const std::size_t c = wrap(b - 1 + k);
        P[k] = w_eval({s.rho[c], q0[c]}, cfg_).w1;
    }
    double D[4];
    for (int k = 0; k < 4; ++k) D[k] = (P[k + 2] - P[k]) / (2.0 * g.h);
    const double w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    out.P_tilde = w0 * D[0] + w1 * D[1] + w2 * D[2] + w3 * D[3];
    return out;
}

void CharTracer::push(double t, double x, const Sample& smp) {
    trace_.times.push_back(t);
    trace_.positions.push_back(x);
    trace_.P.push_back(smp.P);
    trace_.Q.push_back(smp.Q);
    trace_.P_tilde.push_back(smp.P_tilde);
    trace_.Phi.push_back(psi_ ? std::exp(psi_->value(smp.Q) - psi_base_) : std::numeric_limits<double>::quiet_NaN());
    max_abs_ptilde_ = std::max(max_abs_ptilde_, std::abs(smp.P_tilde));
}

void CharTracer::advance(const SimState& next) {
    if (trace_.truncated) return;
    const Grid& g = next.rho.grid;
    const double dt = next.t_scaled - prev_.t_scaled;
    if (!(dt > 0.0)) return;
    auto stop = [&](const std::string& why) {
        trace_.truncated = true;
        trace_.truncation_reason = why;
    };
    try {
        const double v0 = speed(prev_, x_);
        const double xp = x_ + dt * v0;
        const double xn = x_ + 0.5 * dt * (v0 + speed(next, xp));
        if (std::abs(xn) > g.domain_half_width - opts_.edge_cells * g.h) {
            stop("characteristic reached the domain edge");
            return;
        }
        const Sample smp = sample(next, xn);
        x_ = xn;
        prev_ = next;
        push(next.t_scaled, xn, smp);
        const double a = std::abs(smp.P_tilde);
        if (p_range_ > 0.0 && g.h * a >= opts_.resolution_fraction * p_range_) {
            stop("P gradient reached grid scale");
        }
    } catch (const CoverageError& e) {
        stop(std::string("left characteristic coverage: ") + e.what());
    }
}

CharTrace resolved_prefix(const CharTrace& trace, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("ratio must lie in (0, 1]");
    CharTrace out = trace;
    if (trace.P_tilde.empty()) return out;
    double mx = 0.0;
    for (double v : trace.P_tilde) mx = std::max(mx, std::abs(v));
    std::size_t k = 0;
    while (k + 1 < trace.P_tilde.size() && std::abs(trace.P_tilde[k]) < ratio * mx) ++k;
    const std::size_t keep = k + 1;
    if (keep < trace.times.size()) {
        out.times.resize(keep);
        out.positions.resize(keep);
        out.P.resize(keep);
        out.Q.resize(keep);
        out.P_tilde.resize(keep);
        out.Phi.resize(keep);
        out.truncated = true;
        out.truncation_reason = "steepening saturated at the grid scale";
    }
    return out;
}

CharTrace trace_lambda2(const std::vector<SimState>& states, double x0, std::optional<PsiTable> psi,
                        TraceOptions opts, CharODEConfig cfg) {
    if (states.empty()) throw std::invalid_argument("no states to trace through");
    CharTracer tr(states.front(), x0, std::move(psi), opts, cfg);
    for (std::size_t i = 1; i < states.size() && tr.active(); ++i) tr.advance(states[i]);
    return tr.trace();
}

double riccati_bound(double P_tilde0, const ImageBounds& bounds) {
    if (!(P_tilde0 < 0.0)) throw std::invalid_argument("Riccati bound needs a negative initial P gradient");
    if (!(bounds.delta0 > 0.0)) throw std::invalid_argument("Riccati bound needs delta0 > 0");
    return bounds.M_phi / (bounds.delta0 * std::abs(P_tilde0));
}

std::string to_string(BlowupClass c) {
    switch (c) {
        case BlowupClass::gradient_blowup: return "gradient_blowup";
        case BlowupClass::sup_norm_blowup: return "sup_norm_blowup";
        case BlowupClass::log_c_blowup: return "log_c_blowup";
        case BlowupClass::none: return "none";
    }
    return "none";
}

Classification classify_blowup(const std::vector<StepRecord>& records, double gradient_abort_factor, double bounded_floor) {
    if (records.empty()) throw std::invalid_argument("no records to classify");
    const NormReport& n0 = records.front().norms;
    auto growth = [&](auto get, double floor = 0.0) {
        const double base = std::max(get(n0), floor);
        double m = 1.0;
        for (const auto& r : records) {
            const double v = get(r.norms);
            if (base > 0.0) m = std::max(m, v / base);
        }
        return m;
    };
    Classification c;
    c.grad_rho_growth = growth([](const NormReport& n) { return n.sup_grad_rho; });
    c.hess_c_growth = growth([](const NormReport& n) { return n.sup_hess_c; });
    c.sup_rho_growth = growth([](const NormReport& n) { return n.sup_rho; }, bounded_floor);
    c.sup_c_growth = growth([](const NormReport& n) { return n.sup_c; }, bounded_floor);
    c.grad_c_growth = growth([](const NormReport& n) { return n.sup_grad_c; }, bounded_floor);
    c.grad_log_c_growth = growth([](const NormReport& n) { return n.sup_grad_log_c; }, bounded_floor);
    if (c.sup_rho_growth >= 3.0 || c.sup_c_growth >= 3.0 || c.grad_c_growth >= 3.0)
        c.kind = BlowupClass::sup_norm_blowup;
    else if (c.grad_log_c_growth >= 3.0)
        c.kind = BlowupClass::log_c_blowup;
    else if (c.grad_rho_growth >= gradient_abort_factor)
        c.kind = BlowupClass::gradient_blowup;
    return c;
}

BlowupEstimate estimate_blowup_time(const std::vector<double>& times, const std::vector<double>& P_tilde) {
    BlowupEstimate e;
    if (times.size() != P_tilde.size()) throw std::invalid_argument("trace columns differ in length");
    const std::size_t n = times.size();
    const std::size_t window = std::max<std::size_t>(3, (n + 2) / 3);
    if (n < 3) {
        e.reason = "trace too short";
        return e;
    }
    const std::size_t start = n - std::min(window, n);
    double st = 0, sy = 0, stt = 0, sty = 0;
    int m = 0;
    for (std::size_t i = start; i < n; ++i) {
        if (!(P_tilde[i] < 0.0)) {
            e.reason = "P_tilde is not negative on the fitting window";
            return e;
        }
        const double y = 1.0 / std::abs(P_tilde[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++m;
    }
    const double den = m * stt - st * st;
    if (!(den > 0.0)) {
        e.reason = "degenerate fitting window";
        return e;
    }
    e.slope = (m * sty - st * sy) / den;
    e.intercept = (sy - e.slope * st) / m;
    e.points = m;
    if (!(e.slope < 0.0)) {
        e.reason = "1/|P_tilde| is not decreasing on the fitting window";
        return e;
    }
    e.T = -e.intercept / e.slope;
    e.ok = true;
    return e;
}

BlowupEstimate estimate_blowup_time(const CharTrace& trace) {
    return estimate_blowup_time(trace.times, trace.P_tilde);
}

}  // namespace hks
