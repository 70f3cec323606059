#include "hks/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hks/config_io.hpp"
#include "hks/transform.hpp"

namespace hks {

double bump(double x, const BumpSpec& spec) {
    const double r = std::abs(x);
    if (r <= spec.inner) return spec.amplitude;
    if (r >= spec.outer) return 0.0;
    const double s = (spec.outer - r) / (spec.outer - spec.inner);
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return spec.amplitude * a / (a + b);
}

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::constant: return "constant";
        case ScenarioKind::remark11: return "remark11";
        case ScenarioKind::thm13_case1: return "thm13_case1";
        case ScenarioKind::thm13_case2: return "thm13_case2";
        case ScenarioKind::corollary14: return "corollary14";
        case ScenarioKind::custom: return "custom";
    }
    return "custom";
}

ScenarioKind scenario_from_string(const std::string& s) {
    for (ScenarioKind k : {ScenarioKind::constant, ScenarioKind::remark11, ScenarioKind::thm13_case1,
                           ScenarioKind::thm13_case2, ScenarioKind::corollary14, ScenarioKind::custom})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown scenario '" + s + "'");
}

double case2_required_half_width(double delta) { return 2.0 / delta + 0.5; }

void validate(const ScenarioConfig& c) {
    make_grid(c.grid.dim, c.grid.cells_per_axis, c.grid.domain_half_width);
    validate(c.params);
    validate(c.solver);
    if (!(c.rho_bar > 0.0) || !(c.c_bar > 0.0)) throw std::invalid_argument("rho_bar and c_bar must be positive");
    if (!(c.a > 0.0)) throw std::invalid_argument("scaling factor a must be positive");
    if (!(c.delta > 0.0 && c.delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
    if (c.N < 0) throw std::invalid_argument("N must be nonnegative");
    if (!(c.t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (c.sobolev_m < 0) throw std::invalid_argument("sobolev_m must be nonnegative");
    if (!(c.shock_fraction >= 0.0)) throw std::invalid_argument("shock_fraction must be nonnegative");
    if (!(c.bump.inner > 0.0 && c.bump.outer > c.bump.inner))
        throw std::invalid_argument("bump radii must satisfy 0 < inner < outer");
    if (!(c.bump.amplitude > 0.0 && c.bump.amplitude <= 1.0))
        throw std::invalid_argument("bump amplitude must lie in (0, 1]");
    if (c.target_interval && !(c.target_interval->first < c.target_interval->second))
        throw std::invalid_argument("target interval must satisfy lo < hi");
    if (c.scenario == ScenarioKind::thm13_case2 && c.grid.dim >= 2 &&
        c.grid.domain_half_width < case2_required_half_width(c.delta))
        throw std::invalid_argument("domain too small for the transverse plateau: need L >= 2/delta + 0.5");
    if (c.scenario == ScenarioKind::custom && c.data_file.empty())
        throw std::invalid_argument("custom scenario needs data_file");
}

ScenarioConfig default_config(ScenarioKind k) {
    ScenarioConfig c;
    c.scenario = k;
    switch (k) {
        case ScenarioKind::constant:
            c.grid = {1, 512, 16.0};
            c.t_end = 1.0;
            break;
        case ScenarioKind::remark11:
            c.grid = {1, 2048, 16.0};
            c.shock_fraction = 0.25;
            break;
        case ScenarioKind::thm13_case1:
            c.grid = {1, 4096, 4.0};
            c.rho_bar = 0.01;
            c.target_interval = std::make_pair(1.0, 3.0);
            c.shock_fraction = 0.25;
            c.t_end = 1.0;
            break;
        case ScenarioKind::thm13_case2:
            c.grid = {2, 640, 5.0};
            c.delta = 0.5;
            c.shock_fraction = 0.25;
            break;
        case ScenarioKind::corollary14:
            c.grid = {1, 2048, 16.0};
            c.rho_bar = 1e-6;
            c.delta = 0.2;
            c.N = 6;
            c.shock_fraction = 0.25;
            c.t_end = 1e4;
            break;
        case ScenarioKind::custom:
            c.grid = {1, 2048, 16.0};
            break;
    }
    return c;
}

namespace {

struct CustomData {
    std::vector<double> rho, c;
};

CustomData read_custom(const std::string& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open data file " + path);
    std::string line;
    std::getline(in, line);
    CustomData d;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string x, r, c;
        if (!std::getline(ss, x, ',') || !std::getline(ss, r, ',') || !std::getline(ss, c, ','))
            throw std::runtime_error("data file rows need x,rho,c");
        d.rho.push_back(std::stod(r));
        d.c.push_back(std::stod(c));
    }
    if (d.rho.size() != expected) throw std::runtime_error("data file row count does not match the grid");
    return d;
}

}  // namespace

SimState build_data(const ScenarioConfig& c) {
    validate(c);
    const Grid g = make_grid(c.grid.dim, c.grid.cells_per_axis, c.grid.domain_half_width);
    ScalarField rho(g), conc(g);
    const double center = c.target_interval ? 0.5 * (c.target_interval->first + c.target_interval->second) : 0.0;
    std::optional<CustomData> custom;
    if (c.scenario == ScenarioKind::custom) custom = read_custom(c.data_file, g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x1 = g.position(i, 0);
        double transverse = 1.0;
        for (int k = 1; k < g.dim; ++k) transverse *= bump(c.delta * g.position(i, k), c.bump) / c.bump.amplitude;
        switch (c.scenario) {
            case ScenarioKind::constant:
                rho[i] = c.rho_bar;
                conc[i] = c.c_bar;
                break;
            case ScenarioKind::remark11:
                rho[i] = c.rho_bar + bump(x1, c.bump);
                conc[i] = c.c_bar + bump(x1, c.bump);
                break;
            case ScenarioKind::thm13_case1: {
                const double b = bump(c.a * (x1 - center), c.bump);
                rho[i] = c.a * c.a * (c.rho_bar + b);
                conc[i] = c.c_bar + b;
                break;
            }
            case ScenarioKind::thm13_case2:
                rho[i] = c.rho_bar + bump(x1, c.bump) * transverse;
                conc[i] = c.c_bar + bump(x1, c.bump) * transverse;
                break;
            case ScenarioKind::corollary14: {
                const double amp = std::pow(c.delta, c.N);
                rho[i] = c.rho_bar + amp * bump(x1, c.bump) * transverse;
                conc[i] = c.c_bar + amp * bump(x1, c.bump) * transverse;
                break;
            }
            case ScenarioKind::custom:
                rho[i] = custom->rho[i];
                conc[i] = custom->c[i];
                break;
        }
    }
    return make_state(rho, conc, c.params);
}

double shock_abort_factor(const SimState& initial, double fraction) {
    if (!(fraction > 0.0)) throw std::invalid_argument("shock fraction must be positive");
    const auto [lo, hi] = std::minmax_element(initial.rho.values.begin(), initial.rho.values.end());
    const double g0 = sup_norm(gradient_magnitude(initial.rho));
    if (!(g0 > 0.0)) throw std::invalid_argument("initial density is uniform; no gradient to amplify");
    const double factor = fraction * (*hi - *lo) / (2.0 * initial.rho.grid.h * g0);
    if (!(factor > 1.0))
        throw std::invalid_argument("grid too coarse: a jump of the requested size is already resolved at t = 0");
    return factor;
}

double perturbation_norm(const SimState& s, double rho_bar, int m) {
    ScalarField d = s.rho;
    for (double& v : d.values) v -= rho_bar;
    return sobolev_norm(d, m) + sobolev_norm(cole_hopf(s.log_c), m);
}

double case1_radius_bound(double a, double rho_bar, double S, double T) {
    return 2.0 / a + 6.0 * T / (a * a) + 6.0 * rho_bar * T + 6.0 * S * T / a;
}

namespace {

double argmax_gradient_position(const SimState& s) {
    const ScalarField g = gradient_magnitude(s.rho);
    const auto it = std::max_element(g.values.begin(), g.values.end());
    return g.grid.position(static_cast<std::size_t>(it - g.values.begin()), 0);
}

NormReport elementwise_max(const std::vector<StepRecord>& recs) {
    NormReport m = recs.front().norms;
    for (const auto& r : recs) {
        m.sup_rho = std::max(m.sup_rho, r.norms.sup_rho);
        m.sup_c = std::max(m.sup_c, r.norms.sup_c);
        m.sup_inv_rho = std::max(m.sup_inv_rho, r.norms.sup_inv_rho);
        m.sup_inv_c = std::max(m.sup_inv_c, r.norms.sup_inv_c);
        m.sup_grad_rho = std::max(m.sup_grad_rho, r.norms.sup_grad_rho);
        m.sup_grad_c = std::max(m.sup_grad_c, r.norms.sup_grad_c);
        m.sup_hess_c = std::max(m.sup_hess_c, r.norms.sup_hess_c);
        m.sup_grad_log_c = std::max(m.sup_grad_log_c, r.norms.sup_grad_log_c);
        m.X_m = std::max(m.X_m, r.norms.X_m);
    }
    return m;
}

// Chooses the smallest scaling factor whose blow-up radius bound fits in the target interval.
double steer_scaling(const ScenarioConfig& c, std::vector<std::string>& notes) {
    ScenarioConfig base = c;
    base.a = 1.0;
    base.target_interval.reset();
    ScenarioOptions quiet;
    quiet.analyze = false;
    const ScenarioResult br = run_scenario(base, quiet);
    if (br.run.verdict != Verdict::gradient_abort)
        throw std::runtime_error("unscaled run did not reach the abort threshold; cannot steer");
    const double T = br.run.final_state.t_scaled;
    double S = 0.0;
    for (const auto& r : br.run.records) S = std::max(S, r.norms.sup_grad_log_c);
    const double r = 0.5 * (c.target_interval->second - c.target_interval->first);
    if (6.0 * c.rho_bar * T >= r) throw std::invalid_argument("rho_bar too large for the target interval");
    double lo = 1.0, hi = 1.0;
    while (case1_radius_bound(hi, c.rho_bar, S, T) > r) {
        hi *= 2.0;
        if (hi > 1e6) throw std::invalid_argument("no admissible scaling factor");
    }
    if (hi == 1.0) return 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (case1_radius_bound(mid, c.rho_bar, S, T) > r ? lo : hi) = mid;
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "steering: unscaled abort time %.6g, sup|grad log c| %.6g, chosen a = %.6g", T, S, hi);
    notes.emplace_back(buf);
    return hi;
}

SliceComparison compare_slice(const RunResult& multi, const RunResult& line) {
    SliceComparison out;
    out.reference_verdict = line.verdict;
    out.reference_t_final = line.final_state.t_scaled;
    const Grid& g = multi.final_state.rho.grid;
    out.tol = 10.0 * g.h;
    for (const SimState& s : multi.samples) {
        const SimState* match = nullptr;
        for (const SimState& r : line.samples)
            if (std::abs(r.t_scaled - s.t_scaled) <= 1e-12 * std::max(1.0, s.t_scaled)) match = &r;
        if (!match) continue;
        const auto n = static_cast<std::size_t>(g.cells_per_axis);
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            bool inside = true;
            for (int k = 1; k < g.dim; ++k) inside = inside && std::abs(g.position(i, k)) <= out.slice_half_width;
            if (!inside) continue;
            const std::size_t j = i % n;
            worst = std::max(worst, std::abs(s.rho[i] - match->rho[j]));
            worst = std::max(worst, std::abs(s.q.comp[0][i] - match->q.comp[0][j]));
            worst = std::max(worst, std::abs(s.log_c[i] - match->log_c[j]));
            for (int k = 1; k < g.dim; ++k) worst = std::max(worst, std::abs(s.q.comp[static_cast<std::size_t>(k)][i]));
        }
        ++out.samples;
        if (worst > out.max_diff) {
            out.max_diff = worst;
            out.worst_time = s.t_scaled;
        }
    }
    out.ok = out.samples > 0 && out.max_diff <= out.tol;
    return out;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg_in, const ScenarioOptions& opts) {
    validate(cfg_in);
    ScenarioResult res;
    res.config = cfg_in;
    ScenarioConfig& c = res.config;
    res.trace_ratio = opts.trace_ratio;
    if (c.scenario == ScenarioKind::thm13_case1 && c.target_interval) c.a = steer_scaling(c, res.notes);

    res.initial = build_data(c);
    const Grid& g = res.initial.rho.grid;
    res.abort_factor = c.solver.gradient_abort_factor;
    if (c.shock_fraction > 0.0)
        res.abort_factor = std::min(res.abort_factor, shock_abort_factor(res.initial, c.shock_fraction));
    c.solver.gradient_abort_factor = res.abort_factor;
    res.perturbation = perturbation_norm(res.initial, c.scenario == ScenarioKind::thm13_case1 ? c.a * c.a * c.rho_bar : c.rho_bar,
                                         c.sobolev_m);

    std::optional<CharTracer> tracer;
    if (opts.analyze && g.dim == 1) {
        const ScalarField c0 = exp_field(res.initial.log_c);
        res.data_check = check_blowup_data(res.initial.rho, c0, scaling_for(c.params).q_factor());
        if (res.data_check->asm1_ok && res.data_check->asm4_ok) {
            try {
                const InvariantFields f = invariant_fields(res.initial);
                res.bounds = image_bounds(f.P, f.Q, opts.bounds_samples);
                const std::size_t i0 = res.data_check->x0_index;
                PsiTable table(f.P[i0], res.bounds->q_min, res.bounds->q_max, 64);
                res.bounds = anchored_bounds(*res.bounds, table, f.Q[i0]);
                tracer.emplace(res.initial, res.data_check->x0, std::move(table));
            } catch (const std::exception& e) {
                res.notes.emplace_back(std::string("invariant analysis skipped: ") + e.what());
                res.bounds.reset();
            }
        } else {
            res.notes.emplace_back("blow-up data check: " + res.data_check->detail);
        }
    }

    RunOptions ro;
    ro.norm_m = c.sobolev_m;
    ro.sample_times = c.output_times;

    std::optional<RunResult> reference;
    if (c.scenario == ScenarioKind::thm13_case2 && g.dim >= 2) {
        ScenarioConfig ref = c;
        ref.scenario = ScenarioKind::remark11;
        ref.grid.dim = 1;
        ref.shock_fraction = 0.0;
        ref.output_times.clear();
        const SimState ref0 = build_data(ref);
        RunOptions pre;
        pre.norm_m = c.sobolev_m;
        const double t1 = run(ref0, ref.params, ref.solver, ref.t_end, pre).final_state.t_scaled;
        for (int j = 1; j <= opts.slice_samples; ++j) ro.sample_times.push_back(t1 * j / opts.slice_samples);
        std::sort(ro.sample_times.begin(), ro.sample_times.end());
        pre.sample_times = ro.sample_times;
        reference = run(ref0, ref.params, ref.solver, ref.t_end, pre);
    }
    if (tracer)
        ro.observer = [&](const SimState& s, const StepRecord&) {
            if (s.t_scaled > res.initial.t_scaled) tracer->advance(s);
        };
    res.run = run(res.initial, c.params, c.solver, c.t_end, ro);

    if (reference) res.slice = compare_slice(res.run, *reference);
    if (g.dim == 1 && res.run.verdict == Verdict::gradient_abort) {
        double lam = 0.0;
        for (const auto& r : res.run.records) lam = std::max(lam, r.max_abs_lambda);
        const double reach = 2.0 + lam * res.run.final_state.t_scaled;
        if (c.scenario != ScenarioKind::custom && c.scenario != ScenarioKind::thm13_case1 && reach >= g.domain_half_width)
            res.notes.emplace_back("disturbance may have crossed the periodic seam before abort");
    }

    if (tracer) {
        res.trace = resolved_prefix(tracer->trace(), opts.trace_ratio);
        if (!tracer->trace().truncation_reason.empty() && res.trace->truncation_reason != tracer->trace().truncation_reason)
            res.notes.emplace_back("trace stopped early: " + tracer->trace().truncation_reason);
        res.estimate = estimate_blowup_time(*res.trace);
        const double p0 = res.trace->P_tilde.front();
        if (res.bounds && p0 < 0.0) res.report.riccati_T_upper = riccati_bound(p0, *res.bounds);
    }

    res.report.t_abort = res.run.verdict == Verdict::gradient_abort ? res.run.final_state.t_scaled : -1.0;
    res.report.classification = classify_blowup(res.run.records, res.abort_factor);
    res.report.bounded_norms_max = elementwise_max(res.run.records);
    res.report.diverging_norms_final = res.run.records.back().norms;
    res.report.resolution_limited = res.run.under_resolved;
    if (res.run.verdict == Verdict::gradient_abort) {
        res.blowup_location = argmax_gradient_position(res.run.final_state);
        if (c.target_interval && (*res.blowup_location < c.target_interval->first ||
                                  *res.blowup_location > c.target_interval->second))
            res.notes.emplace_back("blow-up location falls outside the target interval");
    }
    return res;
}

namespace {

void write_fields(const SimState& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const Grid& g = s.rho.grid;
    for (int k = 0; k < g.dim; ++k) out << "x" << (k + 1) << ",";
    out << "rho,";
    for (int k = 0; k < g.dim; ++k) out << "q" << (k + 1) << ",";
    out << "log_c,c\n";
    out.precision(12);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (int k = 0; k < g.dim; ++k) out << g.position(i, k) << ",";
        out << s.rho[i] << ",";
        for (int k = 0; k < g.dim; ++k) out << s.q.comp[static_cast<std::size_t>(k)][i] << ",";
        out << s.log_c[i] << "," << std::exp(s.log_c[i]) << "\n";
    }
}

std::string time_tag(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", t);
    return buf;
}

}  // namespace

void write_outputs(const ScenarioResult& r, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    {
        std::ofstream out(dir / "report.json");
        out << report_json(r).dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "norms.csv");
        out << "t,sup_rho,sup_c,sup_grad_rho,sup_hess_c,sup_grad_log_c,X_m\n";
        out.precision(12);
        for (const auto& rec : r.run.records)
            out << rec.t_scaled << "," << rec.norms.sup_rho << "," << rec.norms.sup_c << "," << rec.norms.sup_grad_rho << ","
                << rec.norms.sup_hess_c << "," << rec.norms.sup_grad_log_c << "," << rec.norms.X_m << "\n";
    }
    if (r.trace) {
        std::ofstream out(dir / "trace.csv");
        out << "t,x,P,Q,P_tilde,Phi\n";
        out.precision(12);
        const CharTrace& t = *r.trace;
        for (std::size_t i = 0; i < t.times.size(); ++i)
            out << t.times[i] << "," << t.positions[i] << "," << t.P[i] << "," << t.Q[i] << "," << t.P_tilde[i] << ","
                << t.Phi[i] << "\n";
    }
    write_fields(r.initial, (dir / ("fields_" + time_tag(r.initial.t_scaled) + ".csv")).string());
    for (const auto& s : r.run.samples) {
        const bool requested = std::any_of(r.config.output_times.begin(), r.config.output_times.end(),
                                           [&](double t) { return std::abs(t - s.t_scaled) <= 1e-12 * std::max(1.0, t); });
        if (requested) write_fields(s, (dir / ("fields_" + time_tag(s.t_scaled) + ".csv")).string());
    }
    write_fields(r.run.final_state, (dir / ("fields_" + time_tag(r.run.final_state.t_scaled) + ".csv")).string());
}

PropagationResult run_propagation(const ScenarioConfig& c, const PropagationOptions& opts) {
    validate(c);
    if (!(opts.horizon > 0.0) || opts.samples < 1) throw std::invalid_argument("propagation horizon and samples must be positive");
    ScenarioConfig flat = c;
    flat.scenario = ScenarioKind::constant;
    const SimState bumped = build_data(c);
    const SimState constant = build_data(flat);
    const Grid& g = bumped.rho.grid;

    PropagationResult out;
    out.lipschitz = std::max(sup_norm(gradient_magnitude(bumped.rho)),
                             sup_norm(gradient_magnitude(exp_field(bumped.log_c))));
    out.tol = opts.tol_factor * out.lipschitz * g.h;

    RunOptions ro;
    ro.norm_m = c.sobolev_m;
    for (int j = 1; j <= opts.samples; ++j) ro.sample_times.push_back(opts.horizon * j / opts.samples);
    SolverConfig sc = c.solver;
    sc.gradient_abort_factor = 1e6;
    out.background = run(constant, c.params, sc, opts.horizon, ro);
    out.perturbed = run(bumped, c.params, sc, opts.horizon, ro);
    out.lambda_max_observed = std::max(empirical_speed_bound(out.background), empirical_speed_bound(out.perturbed));

    const double A = compute_A(out.background, out.perturbed);
    std::vector<double> center(static_cast<std::size_t>(g.dim), 0.0);
    ConeSpec probe = make_cone(center, A, opts.horizon);
    center[0] = opts.center ? *opts.center : c.bump.outer + probe.speed * opts.horizon + 4.0 * g.h;
    out.cone = make_cone(center, A, opts.horizon);
    out.initial_difference = initial_ball_difference(bumped, constant, out.cone);
    out.report = verify_cone(out.background, out.perturbed, out.cone, out.tol);
    return out;
}

}  // namespace hks
