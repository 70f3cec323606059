#include "hks/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hks/transform.hpp"

namespace hks {

void validate(const SolverConfig& c) {
    if (!(c.cfl > 0.0) || c.cfl > 1.0) throw std::invalid_argument("cfl must lie in (0, 1]");
    if (c.max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
    if (!(c.gradient_abort_factor > 1.0)) throw std::invalid_argument("gradient_abort_factor must exceed 1");
}

AxisFlux flux(double rho, double q_axis) { return {rho * q_axis, rho}; }

Eigen2 eigenvalues(double rho, double q_axis) {
    const double root = std::sqrt(q_axis * q_axis + 4.0 * rho);
    return {0.5 * (q_axis - root), 0.5 * (q_axis + root)};
}

double max_abs_speed(double rho, double q_axis) {
    return 0.5 * (std::abs(q_axis) + std::sqrt(q_axis * q_axis + 4.0 * rho));
}

InterfaceFlux numerical_flux_rusanov(double rho_l, double q_l, double rho_r, double q_r) {
    const double s = std::max(max_abs_speed(rho_l, q_l), max_abs_speed(rho_r, q_r));
    const AxisFlux fl = flux(rho_l, q_l);
    const AxisFlux fr = flux(rho_r, q_r);
    InterfaceFlux out;
    out.f.mass = 0.5 * (fl.mass + fr.mass) - 0.5 * s * (rho_r - rho_l);
    out.f.normal = 0.5 * (fl.normal + fr.normal) - 0.5 * s * (q_r - q_l);
    out.transverse = 0.5 * s;
    return out;
}

InterfaceFlux numerical_flux_hll(double rho_l, double q_l, double rho_r, double q_r) {
    const Eigen2 el = eigenvalues(rho_l, q_l);
    const Eigen2 er = eigenvalues(rho_r, q_r);
    // lambda1 < 0 < lambda2 for rho > 0, so the intermediate branch always applies.
    const double sl = std::min(el.lambda1, er.lambda1);
    const double sr = std::max(el.lambda2, er.lambda2);
    const AxisFlux fl = flux(rho_l, q_l);
    const AxisFlux fr = flux(rho_r, q_r);
    const double inv = 1.0 / (sr - sl);
    InterfaceFlux out;
    out.f.mass = (sr * fl.mass - sl * fr.mass + sl * sr * (rho_r - rho_l)) * inv;
    out.f.normal = (sr * fl.normal - sl * fr.normal + sl * sr * (q_r - q_l)) * inv;
    out.transverse = -sl * sr * inv;
    return out;
}

namespace {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

inline InterfaceFlux interface_flux(FluxScheme scheme, double rl, double ql, double rr, double qr) {
    return scheme == FluxScheme::rusanov ? numerical_flux_rusanov(rl, ql, rr, qr)
                                         : numerical_flux_hll(rl, ql, rr, qr);
}

struct AxisIndex {
    std::size_t st;
    std::size_t span;  // n * st
    int n;
    std::size_t next(std::size_t c) const {
        const std::size_t i = (c / st) % static_cast<std::size_t>(n);
        return i + 1 == static_cast<std::size_t>(n) ? c - (span - st) : c + st;
    }
    std::size_t prev(std::size_t c) const {
        const std::size_t i = (c / st) % static_cast<std::size_t>(n);
        return i == 0 ? c + (span - st) : c - st;
    }
};

// Minmod slopes of rho and every q component along one axis.
void limited_slopes(const SimState& s, const AxisIndex& ax, bool parallel, std::vector<double>& srho,
                    std::vector<std::vector<double>>& sq) {
    const std::size_t n = s.rho.size();
    const int d = s.rho.grid.dim;
    srho.assign(n, 0.0);
    sq.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
#pragma omp parallel for schedule(static) if (parallel)
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t p = ax.prev(c), x = ax.next(c);
        srho[c] = minmod(s.rho[c] - s.rho[p], s.rho[x] - s.rho[c]);
        for (int j = 0; j < d; ++j) {
            const auto& qj = s.q.comp[static_cast<std::size_t>(j)];
            sq[static_cast<std::size_t>(j)][c] = minmod(qj[c] - qj[p], qj[x] - qj[c]);
        }
    }
}

void residual_serial(const SimState& s, const SolverConfig& cfg, double viscosity, Residual& out) {
    const Grid& g = s.rho.grid;
    const std::size_t n = g.size();
    const int d = g.dim;
    const double inv_h = 1.0 / g.h;
    const bool second = cfg.reconstruction == Reconstruction::minmod;
    out.rho.assign(n, 0.0);
    out.q.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    std::vector<double> srho;
    std::vector<std::vector<double>> sq;
    for (int a = 0; a < d; ++a) {
        const AxisIndex ax{g.stride(a), g.stride(a) * static_cast<std::size_t>(g.cells_per_axis), g.cells_per_axis};
        if (second) limited_slopes(s, ax, false, srho, sq);
        const auto& qa = s.q.comp[static_cast<std::size_t>(a)];
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t r = ax.next(c);
            double rl = s.rho[c], rr = s.rho[r], ql = qa[c], qr = qa[r];
            if (second) {
                rl += 0.5 * srho[c];
                rr -= 0.5 * srho[r];
                ql += 0.5 * sq[static_cast<std::size_t>(a)][c];
                qr -= 0.5 * sq[static_cast<std::size_t>(a)][r];
            }
            const InterfaceFlux F = interface_flux(cfg.scheme, rl, ql, rr, qr);
            out.rho[c] -= F.f.mass * inv_h;
            out.rho[r] += F.f.mass * inv_h;
            out.q[static_cast<std::size_t>(a)][c] -= F.f.normal * inv_h;
            out.q[static_cast<std::size_t>(a)][r] += F.f.normal * inv_h;
            for (int j = 0; j < d; ++j) {
                if (j == a) continue;
                const auto& qj = s.q.comp[static_cast<std::size_t>(j)];
                double jl = qj[c], jr = qj[r];
                if (second) {
                    jl += 0.5 * sq[static_cast<std::size_t>(j)][c];
                    jr -= 0.5 * sq[static_cast<std::size_t>(j)][r];
                }
                const double fj = -F.transverse * (jr - jl);
                out.q[static_cast<std::size_t>(j)][c] -= fj * inv_h;
                out.q[static_cast<std::size_t>(j)][r] += fj * inv_h;
            }
        }
        if (viscosity > 0.0) {
            const double k = viscosity * inv_h * inv_h;
            for (std::size_t c = 0; c < n; ++c)
                out.rho[c] += k * (s.rho[ax.next(c)] - 2.0 * s.rho[c] + s.rho[ax.prev(c)]);
        }
    }
}

void residual_parallel(const SimState& s, const SolverConfig& cfg, double viscosity, Residual& out) {
    const Grid& g = s.rho.grid;
    const std::size_t n = g.size();
    const int d = g.dim;
    const double inv_h = 1.0 / g.h;
    const bool second = cfg.reconstruction == Reconstruction::minmod;
    out.rho.assign(n, 0.0);
    out.q.assign(static_cast<std::size_t>(d), std::vector<double>(n, 0.0));
    std::vector<double> srho;
    std::vector<std::vector<double>> sq;
    // Face c holds the flux through the face between cell c and its successor.
    std::vector<double> fm(n), fn(n);
    std::vector<std::vector<double>> ft(static_cast<std::size_t>(d), std::vector<double>(n));
    for (int a = 0; a < d; ++a) {
        const AxisIndex ax{g.stride(a), g.stride(a) * static_cast<std::size_t>(g.cells_per_axis), g.cells_per_axis};
        if (second) limited_slopes(s, ax, true, srho, sq);
        const auto& qa = s.q.comp[static_cast<std::size_t>(a)];
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t r = ax.next(c);
            double rl = s.rho[c], rr = s.rho[r], ql = qa[c], qr = qa[r];
            if (second) {
                rl += 0.5 * srho[c];
                rr -= 0.5 * srho[r];
                ql += 0.5 * sq[static_cast<std::size_t>(a)][c];
                qr -= 0.5 * sq[static_cast<std::size_t>(a)][r];
            }
            const InterfaceFlux F = interface_flux(cfg.scheme, rl, ql, rr, qr);
            fm[c] = F.f.mass;
            fn[c] = F.f.normal;
            for (int j = 0; j < d; ++j) {
                if (j == a) continue;
                const auto& qj = s.q.comp[static_cast<std::size_t>(j)];
                double jl = qj[c], jr = qj[r];
                if (second) {
                    jl += 0.5 * sq[static_cast<std::size_t>(j)][c];
                    jr -= 0.5 * sq[static_cast<std::size_t>(j)][r];
                }
                ft[static_cast<std::size_t>(j)][c] = -F.transverse * (jr - jl);
            }
        }
        const double k = viscosity * inv_h * inv_h;
#pragma omp parallel for schedule(static)
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t p = ax.prev(c);
            out.rho[c] -= (fm[c] - fm[p]) * inv_h;
            out.q[static_cast<std::size_t>(a)][c] -= (fn[c] - fn[p]) * inv_h;
            for (int j = 0; j < d; ++j) {
                if (j == a) continue;
                out.q[static_cast<std::size_t>(j)][c] -=
                    (ft[static_cast<std::size_t>(j)][c] - ft[static_cast<std::size_t>(j)][p]) * inv_h;
            }
            if (viscosity > 0.0) out.rho[c] += k * (s.rho[ax.next(c)] - 2.0 * s.rho[c] + s.rho[p]);
        }
    }
}

bool positive(const std::vector<double>& v) {
    for (double x : v)
        if (!(x > 0.0)) return false;
    return true;
}

}  // namespace

void compute_residual(const SimState& s, const SolverConfig& cfg, double viscosity, Exec exec, Residual& out) {
    if (exec == Exec::serial)
        residual_serial(s, cfg, viscosity, out);
    else
        residual_parallel(s, cfg, viscosity, out);
}

double max_wave_speed(const SimState& s) {
    double m = 0.0;
    const std::size_t n = s.rho.size();
    for (const auto& qa : s.q.comp) {
#pragma omp parallel for reduction(max : m) schedule(static)
        for (std::size_t c = 0; c < n; ++c) m = std::max(m, max_abs_speed(s.rho[c], qa[c]));
    }
    return m;
}

double cfl_dt(const SimState& s, const SolverConfig& cfg, const PhysParams& params) {
    const Grid& g = s.rho.grid;
    const double smax = max_wave_speed(s);
    double dt = smax > 0.0 ? cfg.cfl * g.h / (g.dim * smax) : std::numeric_limits<double>::infinity();
    if (params.epsilon > 0.0) {
        const double visc_dt = cfg.cfl * g.h * g.h * std::sqrt(params.chi * params.mu) / (2.0 * g.dim * params.epsilon);
        dt = std::min(dt, visc_dt);
    }
    return dt;
}

namespace {

// One SSP-RK2 stage pair. Returns false when rho loses positivity.
bool try_step(SimState& s, double dt, const SolverConfig& cfg, const PhysParams& params) {
    const ScalingMap sm = scaling_for(params);
    const double nu = sm.scaled_viscosity(params.epsilon);
    const double k = sm.consumption_rate();
    const std::size_t n = s.rho.size();
    const int d = s.rho.grid.dim;
    Residual r;
    compute_residual(s, cfg, nu, cfg.exec, r);
    SimState s1 = s;
    for (std::size_t c = 0; c < n; ++c) s1.rho[c] += dt * r.rho[c];
    for (int j = 0; j < d; ++j)
        for (std::size_t c = 0; c < n; ++c)
            s1.q.comp[static_cast<std::size_t>(j)][c] += dt * r.q[static_cast<std::size_t>(j)][c];
    if (!positive(s1.rho.values)) return false;
    compute_residual(s1, cfg, nu, cfg.exec, r);
    std::vector<double> rho_new(n);
    for (std::size_t c = 0; c < n; ++c) rho_new[c] = 0.5 * s.rho[c] + 0.5 * (s1.rho[c] + dt * r.rho[c]);
    if (!positive(rho_new)) return false;
    for (std::size_t c = 0; c < n; ++c) s.log_c[c] -= k * dt * 0.5 * (s.rho[c] + s1.rho[c]);
    s.rho.values = std::move(rho_new);
    for (int j = 0; j < d; ++j) {
        auto& qj = s.q.comp[static_cast<std::size_t>(j)];
        const auto& q1 = s1.q.comp[static_cast<std::size_t>(j)];
        const auto& rj = r.q[static_cast<std::size_t>(j)];
        for (std::size_t c = 0; c < n; ++c) qj[c] = 0.5 * qj[c] + 0.5 * (q1[c] + dt * rj[c]);
    }
    s.t_scaled += dt;
    return true;
}

}  // namespace

double step(SimState& s, double dt, const SolverConfig& cfg, const PhysParams& params) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (try_step(s, dt, cfg, params)) return dt;
    if (try_step(s, 0.5 * dt, cfg, params)) return 0.5 * dt;
    throw PositivityFailure("positivity failure");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::completed: return "completed";
        case Verdict::gradient_abort: return "gradient_abort";
        case Verdict::positivity_failure: return "positivity_failure";
        case Verdict::step_limit: return "step_limit";
    }
    return "unknown";
}

namespace {

StepRecord make_record(const SimState& s, const PhysParams& params, double dt, int m) {
    StepRecord rec;
    rec.t_scaled = s.t_scaled;
    rec.dt = dt;
    rec.max_abs_lambda = max_wave_speed(s);
    rec.norms = norm_report(s, params, m);
    rec.mass_rho = total_mass(s.rho);
    for (int j = 0; j < s.rho.grid.dim; ++j) rec.mass_q.push_back(total_mass(s.q.component(j)));
    return rec;
}

}  // namespace

RunResult run(const SimState& initial, const PhysParams& params, const SolverConfig& cfg, double t_end,
              const RunOptions& opts) {
    validate(params);
    validate(cfg);
    validate(initial);
    if (!(t_end >= initial.t_scaled)) throw std::invalid_argument("t_end precedes the initial time");
    RunResult res;
    SimState s = initial;
    const double h = s.rho.grid.h;
    std::vector<double> samples = opts.sample_times;
    std::sort(samples.begin(), samples.end());
    std::size_t next_sample = 0;
    auto collect_samples = [&]() {
        while (next_sample < samples.size() && samples[next_sample] <= s.t_scaled + 1e-12 * (1.0 + s.t_scaled)) {
            res.samples.push_back(s);
            ++next_sample;
        }
    };

    res.records.push_back(make_record(s, params, 0.0, opts.norm_m));
    if (opts.observer) opts.observer(s, res.records.back());
    if (opts.keep_all_states) res.states.push_back(s);
    collect_samples();
    const double g0 = res.records.front().norms.sup_grad_rho;
    auto mark_resolution = [&](const StepRecord& rec) {
        if (!res.under_resolved && rec.norms.sup_grad_rho >= 0.5 / h) {
            res.under_resolved = true;
            res.under_resolved_time = rec.t_scaled;
        }
    };
    mark_resolution(res.records.front());

    long steps = 0;
    const double t_tol = 1e-12 * (1.0 + std::abs(t_end));
    while (s.t_scaled < t_end - t_tol) {
        if (steps >= cfg.max_steps) {
            res.verdict = Verdict::step_limit;
            break;
        }
        double dt = cfl_dt(s, cfg, params);
        double target = t_end;
        if (next_sample < samples.size()) target = std::min(target, samples[next_sample]);
        if (s.t_scaled + dt >= target - t_tol) dt = target - s.t_scaled;
        double used = 0.0;
        try {
            used = step(s, dt, cfg, params);
        } catch (const PositivityFailure& e) {
            res.verdict = Verdict::positivity_failure;
            res.message = e.what();
            break;
        }
        if (used == dt && std::abs(s.t_scaled - target) <= t_tol) s.t_scaled = target;
        ++steps;
        res.records.push_back(make_record(s, params, used, opts.norm_m));
        const StepRecord& rec = res.records.back();
        if (opts.observer) opts.observer(s, rec);
        if (opts.keep_all_states) res.states.push_back(s);
        collect_samples();
        mark_resolution(rec);
        if (g0 > 0.0 && rec.norms.sup_grad_rho >= cfg.gradient_abort_factor * g0) {
            res.verdict = Verdict::gradient_abort;
            break;
        }
    }
    res.final_state = std::move(s);
    return res;
}

}  // namespace hks
