#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hks/config_io.hpp"
#include "hks/riemann.hpp"
#include "hks/scenarios.hpp"
#include "hks/transform.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<int> grid_n;
    std::optional<double> cfl;
    std::optional<double> epsilon;
    std::string target_interval;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output directory");
    app->add_option("--grid-n", c.grid_n, "cells per axis");
    app->add_option("--cfl", c.cfl, "CFL number");
    app->add_option("--epsilon", c.epsilon, "viscosity");
    app->add_option("--target-interval", c.target_interval, "lo,hi");
}

std::pair<double, double> parse_interval(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--target-interval expects lo,hi");
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

hks::ScenarioConfig resolve(const Common& c, hks::ScenarioKind fallback) {
    hks::ScenarioConfig cfg = hks::default_config(fallback);
    if (!c.config.empty()) {
        std::ifstream in(c.config);
        const json j = json::parse(in);
        hks::ScenarioKind k = fallback;
        if (j.contains("scenario")) k = hks::scenario_from_string(j.at("scenario").get<std::string>());
        cfg = hks::config_from_json(j, hks::default_config(k));
    }
    if (c.grid_n) cfg.grid.cells_per_axis = *c.grid_n;
    if (c.cfl) cfg.solver.cfl = *c.cfl;
    if (c.epsilon) cfg.params.epsilon = *c.epsilon;
    if (!c.target_interval.empty()) cfg.target_interval = parse_interval(c.target_interval);
    hks::validate(cfg);
    return cfg;
}

void summarize(const hks::ScenarioResult& r) {
    std::printf("scenario %s: %s at t=%.6g after %zu steps\n", hks::to_string(r.config.scenario).c_str(),
                hks::to_string(r.run.verdict).c_str(), r.run.final_state.t_scaled, r.run.records.size() - 1);
    const auto& cl = r.report.classification;
    std::printf("  classification %s, grad rho x%.3g, sup rho x%.3g, sup c x%.3g, grad log c x%.3g\n",
                hks::to_string(cl.kind).c_str(), cl.grad_rho_growth, cl.sup_rho_growth, cl.sup_c_growth,
                cl.grad_log_c_growth);
    if (r.estimate) {
        if (r.estimate->ok)
            std::printf("  T_est %.6g", r.estimate->T);
        else
            std::printf("  T_est unavailable (%s)", r.estimate->reason.c_str());
        if (r.report.riccati_T_upper > 0.0) std::printf(", Riccati upper bound %.6g", r.report.riccati_T_upper);
        std::printf("\n");
    }
    if (r.slice)
        std::printf("  slice agreement max %.3g (tol %.3g) over %d samples\n", r.slice->max_diff, r.slice->tol,
                    r.slice->samples);
    if (r.blowup_location) std::printf("  blow-up location x=%.6g\n", *r.blowup_location);
    for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
}

int run_and_write(const hks::ScenarioConfig& cfg, bool analyze, const std::string& out) {
    hks::ScenarioOptions opts;
    opts.analyze = analyze;
    const hks::ScenarioResult r = hks::run_scenario(cfg, opts);
    hks::write_outputs(r, out);
    summarize(r);
    std::printf("  outputs in %s\n", out.c_str());
    return 0;
}

// Finite-difference audit of the invariant map at random points inside the coverage region.
int riemann_check(int samples, unsigned seed, const std::string& out) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz1(0.05, 4.0), uu(-1.0, 1.0);
    double eig_res = 0.0, grad_err = 0.0, det_err = 0.0, orth_err = 0.0, round_err = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double z1 = uz1(rng);
        const double z2 = 0.9 * uu(rng) * std::sqrt(4.0 * z1 / 3.0);
        const hks::PhasePoint p{z1, z2};
        const hks::Eigen2 e = hks::eigen(p);
        for (double lam : {e.lambda1, e.lambda2}) {
            // right eigenvector (lam, 1) of [[q, rho], [1, 0]]
            eig_res = std::max(eig_res, std::abs(z2 * lam + z1 - lam * lam) / std::max(1.0, lam * lam));
        }
        const double step = 1e-4;
        auto w = [&](double a, double b) { return hks::w_eval({a, b}); };
        const auto wp1 = w(z1 + step, z2), wm1 = w(z1 - step, z2), wp2 = w(z1, z2 + step), wm2 = w(z1, z2 - step);
        const double d11 = (wp1.w1 - wm1.w1) / (2 * step), d12 = (wp2.w1 - wm2.w1) / (2 * step);
        const double d21 = (wp1.w2 - wm1.w2) / (2 * step), d22 = (wp2.w2 - wm2.w2) / (2 * step);
        const hks::Mat2 gw = hks::grad_w(p);
        const double scale = std::max({std::abs(gw[0][0]), std::abs(gw[0][1]), std::abs(gw[1][0]), std::abs(gw[1][1])});
        grad_err = std::max({grad_err, std::abs(d11 - gw[0][0]) / scale, std::abs(d12 - gw[0][1]) / scale,
                             std::abs(d21 - gw[1][0]) / scale, std::abs(d22 - gw[1][1]) / scale});
        const double det_fd = d11 * d22 - d12 * d21;
        det_err = std::max(det_err, std::abs(det_fd - hks::det_grad_w(p)) / std::abs(det_fd));
        // grad w_i annihilates the right eigenvector of its own family
        orth_err = std::max(orth_err, std::abs(d11 * e.lambda1 + d12) / (scale * std::max(1.0, std::abs(e.lambda1))));
        orth_err = std::max(orth_err, std::abs(d21 * e.lambda2 + d22) / (scale * std::max(1.0, std::abs(e.lambda2))));
        const hks::PhasePoint back = hks::invert_w(hks::w_eval(p));
        round_err = std::max(round_err, std::hypot(back.z1 - z1, back.z2 - z2));
    }
    const hks::InvariantPoint w10 = hks::w_eval({1.0, 0.0});
    json j = {{"samples", samples},
              {"seed", seed},
              {"eigen_residual", eig_res},
              {"grad_w_rel_err", grad_err},
              {"det_rel_err", det_err},
              {"invariance_rel_err", orth_err},
              {"roundtrip_err", round_err},
              {"w_1_0", {w10.w1, w10.w2}},
              {"dlambda2_dw1_1_0", hks::dlambda2_dw1({1.0, 0.0})}};
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "riemann_check.json") << j.dump(2) << "\n";
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperbolic chemotaxis solver with blow-up diagnostics"};
    app.require_subcommand(1);

    Common sim_opts, blow_opts, prop_opts, scen_opts, sweep_opts, rc_opts;

    auto* sim = app.add_subcommand("simulate", "run a configuration and write norms and fields");
    add_common(sim, sim_opts);

    auto* rc = app.add_subcommand("riemann-check", "audit the Riemann-invariant map at random points");
    add_common(rc, rc_opts);
    int rc_samples = 1000;
    unsigned rc_seed = 12345;
    rc->add_option("--samples", rc_samples, "number of random points");
    rc->add_option("--seed", rc_seed, "random seed");

    auto* blow = app.add_subcommand("blowup", "one-dimensional blow-up run with characteristic tracing");
    add_common(blow, blow_opts);

    auto* prop = app.add_subcommand("propagation", "paired bump-versus-constant cone check");
    add_common(prop, prop_opts);
    hks::PropagationOptions popts;
    double center = std::nan("");
    prop->add_option("--horizon", popts.horizon, "cone height T*");
    prop->add_option("--center", center, "cone center on axis 0");

    auto* scen = app.add_subcommand("scenario", "run a named scenario");
    add_common(scen, scen_opts);
    std::string scen_name;
    scen->add_option("name", scen_name, "constant|remark11|thm13_case1|thm13_case2|corollary14|custom")->required();

    auto* sweep = app.add_subcommand("sweep", "repeat a scenario over several grid sizes");
    add_common(sweep, sweep_opts);
    std::vector<int> sweep_ns{512, 1024, 2048};
    std::string sweep_name = "remark11";
    sweep->add_option("--grid-ns", sweep_ns, "cells per axis for each run")->delimiter(',');
    sweep->add_option("--scenario", sweep_name, "scenario name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return run_and_write(resolve(sim_opts, hks::ScenarioKind::remark11), false, sim_opts.out);
        if (*blow) {
            const auto cfg = resolve(blow_opts, hks::ScenarioKind::remark11);
            if (cfg.grid.dim != 1) throw std::invalid_argument("blowup analysis needs a one-dimensional grid");
            return run_and_write(cfg, true, blow_opts.out);
        }
        if (*scen) return run_and_write(resolve(scen_opts, hks::scenario_from_string(scen_name)), true, scen_opts.out);
        if (*rc) return riemann_check(rc_samples, rc_seed, rc_opts.out);
        if (*prop) {
            const auto cfg = resolve(prop_opts, hks::ScenarioKind::remark11);
            if (!std::isnan(center)) popts.center = center;
            const hks::PropagationResult p = hks::run_propagation(cfg, popts);
            std::filesystem::create_directories(prop_opts.out);
            const json j = hks::propagation_json(p);
            std::ofstream(std::filesystem::path(prop_opts.out) / "propagation.json") << j.dump(2) << "\n";
            std::printf("cone center %.4g speed %.4g T* %.4g: violation %s, front speed %.4g (lambda max %.4g)\n",
                        p.cone.center[0], p.cone.speed, p.cone.T_star, p.report.cone_violation ? "yes" : "no",
                        p.report.empirical_front_speed, p.lambda_max_observed);
            return p.report.cone_violation ? 1 : 0;
        }
        if (*sweep) {
            const auto base = resolve(sweep_opts, hks::scenario_from_string(sweep_name));
            std::filesystem::create_directories(sweep_opts.out);
            std::ofstream csv(std::filesystem::path(sweep_opts.out) / "sweep.csv");
            csv << "n,h,verdict,t_final,grad_rho_growth,classification,T_est,riccati_T_upper\n";
            for (int n : sweep_ns) {
                auto cfg = base;
                cfg.grid.cells_per_axis = n;
                const auto r = hks::run_scenario(cfg);
                const std::string dir = (std::filesystem::path(sweep_opts.out) / ("n_" + std::to_string(n))).string();
                hks::write_outputs(r, dir);
                summarize(r);
                csv << n << "," << r.initial.rho.grid.h << "," << hks::to_string(r.run.verdict) << ","
                    << r.run.final_state.t_scaled << "," << r.report.classification.grad_rho_growth << ","
                    << hks::to_string(r.report.classification.kind) << ",";
                if (r.estimate && r.estimate->ok) csv << r.estimate->T;
                csv << ",";
                if (r.report.riccati_T_upper > 0.0) csv << r.report.riccati_T_upper;
                csv << "\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
