#include "hks/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <stdexcept>

namespace hks {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <class E>
E enum_from(const std::string& s, std::initializer_list<std::pair<const char*, E>> table, const char* what) {
    for (const auto& [name, v] : table)
        if (s == name) return v;
    throw std::invalid_argument(std::string("unknown ") + what + " '" + s + "'");
}

const char* name_of(FluxScheme s) { return s == FluxScheme::hll ? "hll" : "rusanov"; }
const char* name_of(Reconstruction r) { return r == Reconstruction::minmod ? "minmod" : "first_order"; }
const char* name_of(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

}  // namespace

ScenarioConfig config_from_json(const json& j, const ScenarioConfig& base) {
    check_keys(j,
               {"scenario", "rho_bar", "c_bar", "a", "delta", "N", "params", "grid", "solver", "target_interval", "t_end",
                "sobolev_m", "shock_fraction", "bump", "data_file", "output_times"},
               "config");
    ScenarioConfig c = base;
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    read(j, "rho_bar", c.rho_bar);
    read(j, "c_bar", c.c_bar);
    read(j, "a", c.a);
    read(j, "delta", c.delta);
    read(j, "N", c.N);
    read(j, "t_end", c.t_end);
    read(j, "sobolev_m", c.sobolev_m);
    read(j, "shock_fraction", c.shock_fraction);
    read(j, "data_file", c.data_file);
    read(j, "output_times", c.output_times);
    if (j.contains("params")) {
        const json& p = j.at("params");
        check_keys(p, {"chi", "mu", "epsilon"}, "params");
        read(p, "chi", c.params.chi);
        read(p, "mu", c.params.mu);
        read(p, "epsilon", c.params.epsilon);
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"dim", "cells_per_axis", "domain_half_width"}, "grid");
        read(g, "dim", c.grid.dim);
        read(g, "cells_per_axis", c.grid.cells_per_axis);
        read(g, "domain_half_width", c.grid.domain_half_width);
    }
    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, {"cfl", "scheme", "time_integrator", "reconstruction", "max_steps", "gradient_abort_factor", "exec"},
                   "solver");
        read(s, "cfl", c.solver.cfl);
        read(s, "max_steps", c.solver.max_steps);
        read(s, "gradient_abort_factor", c.solver.gradient_abort_factor);
        if (s.contains("scheme"))
            c.solver.scheme = enum_from<FluxScheme>(s.at("scheme").get<std::string>(),
                                                    {{"rusanov", FluxScheme::rusanov}, {"hll", FluxScheme::hll}}, "scheme");
        if (s.contains("time_integrator"))
            c.solver.time_integrator = enum_from<TimeIntegrator>(s.at("time_integrator").get<std::string>(),
                                                                 {{"ssp_rk2", TimeIntegrator::ssp_rk2}}, "time integrator");
        if (s.contains("reconstruction"))
            c.solver.reconstruction = enum_from<Reconstruction>(
                s.at("reconstruction").get<std::string>(),
                {{"first_order", Reconstruction::first_order}, {"minmod", Reconstruction::minmod}}, "reconstruction");
        if (s.contains("exec"))
            c.solver.exec = enum_from<Exec>(s.at("exec").get<std::string>(),
                                            {{"serial", Exec::serial}, {"parallel", Exec::parallel}}, "exec");
    }
    if (j.contains("bump")) {
        const json& b = j.at("bump");
        check_keys(b, {"inner", "outer", "amplitude"}, "bump");
        read(b, "inner", c.bump.inner);
        read(b, "outer", c.bump.outer);
        read(b, "amplitude", c.bump.amplitude);
    }
    if (j.contains("target_interval")) {
        const json& t = j.at("target_interval");
        if (t.is_null()) {
            c.target_interval.reset();
        } else {
            if (!t.is_array() || t.size() != 2) throw std::invalid_argument("target_interval must be [lo, hi]");
            c.target_interval = std::make_pair(t[0].get<double>(), t[1].get<double>());
        }
    }
    validate(c);
    return c;
}

ScenarioConfig config_from_json(const json& j) {
    ScenarioKind k = ScenarioKind::remark11;
    if (j.is_object() && j.contains("scenario")) k = scenario_from_string(j.at("scenario").get<std::string>());
    return config_from_json(j, default_config(k));
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const ScenarioConfig& c) {
    json j;
    j["scenario"] = to_string(c.scenario);
    j["rho_bar"] = c.rho_bar;
    j["c_bar"] = c.c_bar;
    j["a"] = c.a;
    j["delta"] = c.delta;
    j["N"] = c.N;
    j["params"] = {{"chi", c.params.chi}, {"mu", c.params.mu}, {"epsilon", c.params.epsilon}};
    j["grid"] = {{"dim", c.grid.dim}, {"cells_per_axis", c.grid.cells_per_axis}, {"domain_half_width", c.grid.domain_half_width}};
    j["solver"] = {{"cfl", c.solver.cfl},
                   {"scheme", name_of(c.solver.scheme)},
                   {"time_integrator", "ssp_rk2"},
                   {"reconstruction", name_of(c.solver.reconstruction)},
                   {"max_steps", c.solver.max_steps},
                   {"gradient_abort_factor", c.solver.gradient_abort_factor},
                   {"exec", name_of(c.solver.exec)}};
    j["target_interval"] = c.target_interval ? json::array({c.target_interval->first, c.target_interval->second}) : json();
    j["t_end"] = c.t_end;
    j["sobolev_m"] = c.sobolev_m;
    j["shock_fraction"] = c.shock_fraction;
    j["bump"] = {{"inner", c.bump.inner}, {"outer", c.bump.outer}, {"amplitude", c.bump.amplitude}};
    j["data_file"] = c.data_file;
    j["output_times"] = c.output_times;
    return j;
}

json to_json(const NormReport& n) {
    return {{"sup_rho", n.sup_rho},           {"sup_c", n.sup_c},
            {"sup_inv_rho", n.sup_inv_rho},   {"sup_inv_c", n.sup_inv_c},
            {"sup_grad_rho", n.sup_grad_rho}, {"sup_grad_c", n.sup_grad_c},
            {"sup_hess_c", n.sup_hess_c},     {"sup_grad_log_c", n.sup_grad_log_c},
            {"X_m", n.X_m},                   {"m", n.m}};
}

json to_json(const ImageBounds& b) {
    return {{"P_min", b.p_min}, {"P_max", b.p_max}, {"Q_min", b.q_min}, {"Q_max", b.q_max},
            {"delta0", b.delta0}, {"m_Phi", b.m_phi}, {"M_Phi", b.M_phi}};
}

json to_json(const DataCheckReport& d) {
    return {{"asm1_ok", d.asm1_ok}, {"asm2_ok", d.asm2_ok}, {"asm3_ok", d.asm3_ok}, {"asm4_ok", d.asm4_ok},
            {"beta1", d.beta1},     {"beta2", d.beta2},     {"x0", d.x0},           {"x0_index", d.x0_index},
            {"first_x0", d.first_x0}, {"slope_factor", d.slope_factor}, {"detail", d.detail}};
}

json to_json(const Classification& c) {
    return {{"kind", to_string(c.kind)},
            {"grad_rho_growth", c.grad_rho_growth},
            {"hess_c_growth", c.hess_c_growth},
            {"sup_rho_growth", c.sup_rho_growth},
            {"sup_c_growth", c.sup_c_growth},
            {"grad_c_growth", c.grad_c_growth},
            {"grad_log_c_growth", c.grad_log_c_growth}};
}

json to_json(const ConeReport& c) {
    return {{"cone_violation", c.cone_violation},
            {"max_diff_rho", c.max_diff_rho},
            {"max_diff_q", c.max_diff_q},
            {"max_diff_log_c", c.max_diff_log_c},
            {"samples_checked", c.samples_checked},
            {"empirical_front_speed", c.empirical_front_speed},
            {"front_times", c.front_times},
            {"front_upper", c.front_upper},
            {"front_lower", c.front_lower},
            {"note", c.note}};
}

json propagation_json(const PropagationResult& p) {
    return {{"cone", {{"center", p.cone.center}, {"A", p.cone.A}, {"T_star", p.cone.T_star}, {"speed", p.cone.speed}}},
            {"report", to_json(p.report)},
            {"lipschitz", p.lipschitz},
            {"tol", p.tol},
            {"initial_difference", p.initial_difference},
            {"lambda_max_observed", p.lambda_max_observed},
            {"verdicts", {to_string(p.background.verdict), to_string(p.perturbed.verdict)}}};
}

json report_json(const ScenarioResult& r) {
    json j;
    j["scenario"] = to_string(r.config.scenario);
    j["config"] = to_json(r.config);
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(j["config"].dump()));
        j["provenance"] = {{"config_hash", buf},
                           {"cells", r.initial.rho.grid.size()},
                           {"h", r.initial.rho.grid.h},
                           {"trace_ratio", r.trace_ratio}};
    }
    j["verdict"] = to_string(r.run.verdict);
    j["message"] = r.run.message;
    j["t_final"] = r.run.final_state.t_scaled;
    j["steps"] = r.run.records.size() - 1;
    j["abort_factor"] = r.abort_factor;
    j["perturbation_norm"] = r.perturbation;
    j["under_resolved"] = r.run.under_resolved;
    j["under_resolved_time"] = r.run.under_resolved ? json(r.run.under_resolved_time) : json();
    j["initial_norms"] = to_json(r.run.records.front().norms);
    json rep;
    rep["t_abort"] = r.report.t_abort >= 0.0 ? json(r.report.t_abort) : json();
    rep["riccati_T_upper"] = r.report.riccati_T_upper > 0.0 ? json(r.report.riccati_T_upper) : json();
    rep["bounded_norms_max"] = to_json(r.report.bounded_norms_max);
    rep["diverging_norms_final"] = to_json(r.report.diverging_norms_final);
    rep["classification"] = to_json(r.report.classification);
    rep["resolution_limited"] = r.report.resolution_limited;
    j["blowup"] = rep;
    j["data_check"] = r.data_check ? to_json(*r.data_check) : json();
    j["image_bounds"] = r.bounds ? to_json(*r.bounds) : json();
    if (r.estimate) {
        j["T_est"] = r.estimate->ok ? json(r.estimate->T) : json();
        j["T_est_detail"] = {{"ok", r.estimate->ok},
                             {"slope", r.estimate->slope},
                             {"intercept", r.estimate->intercept},
                             {"points", r.estimate->points},
                             {"reason", r.estimate->reason}};
    } else {
        j["T_est"] = json();
    }
    if (r.trace) {
        j["trace"] = {{"points", r.trace->times.size()}, {"truncated", r.trace->truncated},
                      {"truncation_reason", r.trace->truncation_reason}};
    }
    if (r.slice)
        j["slice_comparison"] = {{"slice_half_width", r.slice->slice_half_width},
                                 {"tol", r.slice->tol},
                                 {"max_diff", r.slice->max_diff},
                                 {"worst_time", r.slice->worst_time},
                                 {"samples", r.slice->samples},
                                 {"reference_verdict", to_string(r.slice->reference_verdict)},
                                 {"reference_t_final", r.slice->reference_t_final},
                                 {"ok", r.slice->ok}};
    j["blowup_location"] = r.blowup_location ? json(*r.blowup_location) : json();
    j["notes"] = r.notes;
    return j;
}

}  // namespace hks
