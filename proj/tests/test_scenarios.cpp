#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hks/config_io.hpp"
#include "hks/scenarios.hpp"
#include "hks/transform.hpp"
#include "support.hpp"

using namespace hks;

namespace {

ScenarioConfig quick(ScenarioKind k) {
    ScenarioConfig c = default_config(k);
    c.grid.cells_per_axis = std::min(c.grid.cells_per_axis, 2048);
    return c;
}

double fourth_difference_at(double x, double h) {
    return (bump(x + 2 * h) - 4 * bump(x + h) + 6 * bump(x) - 4 * bump(x - h) + bump(x - 2 * h)) / std::pow(h, 4);
}

}  // namespace

TEST_CASE("plateau values and symmetry") {
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(3.0) == 0.0);
    CHECK(bump(1.0) == 1.0);
    CHECK(bump(2.0) == 0.0);
    CHECK(bump(1.5) > 0.0);
    CHECK(bump(1.5) < 1.0);
    CHECK(bump(1.5) == bump(-1.5));
    CHECK(bump(1.5) == doctest::Approx(0.5));
    for (double x = -3.0; x <= 3.0; x += 0.01) CHECK(bump(x) == doctest::Approx(testing_support::plateau(x)).epsilon(1e-15));
    BumpSpec s{0.5, 1.0, 0.25};
    CHECK(bump(0.2, s) == 0.25);
    CHECK(bump(1.2, s) == 0.0);
}

TEST_CASE("plateau derivatives up to fourth order are continuous across the radii") {
    // Inside the transition the fourth difference converges at second order; at the radii it is flat.
    for (double x : {1.2, 1.35, 1.7, 1.85}) {
        const double a = fourth_difference_at(x, 0.01), b = fourth_difference_at(x, 0.005), c = fourth_difference_at(x, 0.0025);
        CHECK(std::isfinite(a));
        CHECK(std::abs(a - b) / std::abs(b - c) > 3.0);
    }
    for (double x : {1.0, 2.0, -1.0, -2.0}) CHECK(std::abs(fourth_difference_at(x, 0.005)) < 1e-3);
}

TEST_CASE("unit plateau scenario passes the data check") {
    const SimState s = build_data(quick(ScenarioKind::remark11));
    const DataCheckReport r = check_blowup_data(s.rho, exp_field(s.log_c));
    CHECK(r.asm1_ok);
    CHECK(r.asm2_ok);
    CHECK(r.asm3_ok);
    CHECK(r.asm4_ok);
}

TEST_CASE("small-amplitude family has amplitude delta^N") {
    ScenarioConfig c = quick(ScenarioKind::corollary14);
    c.delta = 0.2;
    c.N = 4;
    const SimState s = build_data(c);
    double dev = 0.0;
    for (double v : s.rho.values) dev = std::max(dev, std::abs(v - c.rho_bar));
    CHECK(dev == doctest::Approx(0.0016).epsilon(1e-12));
}

TEST_CASE("case 2 data is constant in x2 on the plateau") {
    ScenarioConfig c = default_config(ScenarioKind::thm13_case2);
    c.grid.cells_per_axis = 64;
    const SimState s = build_data(c);
    const Grid& g = s.rho.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g.position(i, 1)) > 1.0 / c.delta) continue;
        const std::size_t j = static_cast<std::size_t>(g.coord(i, 0)) + g.stride(1) * 32;
        CHECK(s.rho[i] == s.rho[j]);
        CHECK(s.log_c[i] == s.log_c[j]);
    }
}

TEST_CASE("case 2 rejects a box too small for the transverse plateau") {
    ScenarioConfig c = default_config(ScenarioKind::thm13_case2);
    c.grid.domain_half_width = 4.0;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    CHECK(case2_required_half_width(0.5) == doctest::Approx(4.5));
}

TEST_CASE("case 1 data is the parabolic rescaling of the plateau") {
    ScenarioConfig c = default_config(ScenarioKind::thm13_case1);
    c.target_interval.reset();
    c.a = 2.0;
    c.grid = {1, 1024, 16.0};
    c.rho_bar = 1.0;
    const SimState scaled = build_data(c);
    ScenarioConfig base = c;
    base.scenario = ScenarioKind::remark11;
    const SimState ref = parabolic_rescale(build_data(base), 2.0);
    for (std::size_t i = 0; i < ref.rho.size(); ++i) CHECK(std::abs(scaled.rho[i] - ref.rho[i]) <= 5e-3);
}

TEST_CASE("abort factor from the resolved-jump rule") {
    const SimState fine = build_data(quick(ScenarioKind::remark11));
    CHECK(shock_abort_factor(fine, 0.25) == doctest::Approx(4.0).epsilon(0.01));
    ScenarioConfig coarse = quick(ScenarioKind::remark11);
    coarse.grid.cells_per_axis = 256;
    CHECK_THROWS_AS(shock_abort_factor(build_data(coarse), 0.25), std::invalid_argument);
    CHECK_THROWS(shock_abort_factor(testing_support::constant_state(1.0, 1.0, 1, 64, 4.0), 0.25));
}

TEST_CASE("case 1 radius bound") {
    CHECK(case1_radius_bound(2.0, 0.1, 1.5, 0.4) == doctest::Approx(1.0 + 0.6 + 0.24 + 1.8));
}

TEST_CASE("constant scenario") {
    const ScenarioResult r = run_scenario(quick(ScenarioKind::constant));
    CHECK(r.run.verdict == Verdict::completed);
    CHECK(r.report.classification.kind == BlowupClass::none);
    const double t = r.run.final_state.t_scaled;
    for (double v : r.run.final_state.log_c.values) CHECK(std::abs(std::exp(v) - std::exp(-t)) <= 1e-8);
}

TEST_CASE("unit plateau scenario ends in gradient blow-up with bounded certificates") {
    const ScenarioResult r = run_scenario(quick(ScenarioKind::remark11));
    CHECK(r.run.verdict == Verdict::gradient_abort);
    CHECK(r.report.classification.kind == BlowupClass::gradient_blowup);
    const NormReport& b = r.report.bounded_norms_max;
    for (double v : {b.sup_rho, b.sup_c, b.sup_grad_c, b.sup_grad_log_c}) CHECK(std::isfinite(v));
    CHECK(r.report.t_abort > 0.0);
    REQUIRE(r.blowup_location);
    CHECK(std::abs(*r.blowup_location) < 4.0);
}

TEST_CASE("rho_bar = 2 plateau scenario produces a trace and a Riccati bound") {
    ScenarioConfig c = quick(ScenarioKind::remark11);
    c.rho_bar = 2.0;
    const ScenarioResult r = run_scenario(c);
    REQUIRE(r.trace);
    REQUIRE(r.bounds);
    CHECK(r.trace->times.size() > 3);
    CHECK(r.report.riccati_T_upper > 0.0);
    CHECK(r.report.t_abort <= 1.1 * r.report.riccati_T_upper);
}

TEST_CASE("small-amplitude perturbation norm shrinks with N") {
    double prev = 1e300;
    for (int N : {2, 4, 6}) {
        ScenarioConfig c = quick(ScenarioKind::corollary14);
        c.N = N;
        const double p = perturbation_norm(build_data(c), c.rho_bar, 2);
        CHECK(p < prev);
        prev = p;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("identical configs give identical reports") {
    const ScenarioConfig c = quick(ScenarioKind::remark11);
    CHECK(report_json(run_scenario(c)).dump() == report_json(run_scenario(c)).dump());
}

TEST_CASE("case 2 slice agrees with the one-dimensional run") {
    ScenarioConfig c = default_config(ScenarioKind::thm13_case2);
    c.grid.cells_per_axis = 256;
    const ScenarioResult r = run_scenario(c);
    CHECK(r.run.verdict == Verdict::gradient_abort);
    REQUIRE(r.slice);
    CHECK(r.slice->samples > 0);
    CHECK(r.slice->max_diff <= 10.0 * r.initial.rho.grid.h);
}

TEST_CASE("localization of the plateau run against the constant background") {
    ScenarioConfig c = quick(ScenarioKind::remark11);
    const PropagationResult p = run_propagation(c);
    CHECK_FALSE(p.report.cone_violation);
    CHECK(p.initial_difference == 0.0);
    CHECK(p.report.empirical_front_speed <= 1.1 * p.lambda_max_observed);
    CHECK(1.1 * p.lambda_max_observed <= p.cone.speed);
}

TEST_CASE("case 1 steering puts the blow-up inside the target interval") {
    const ScenarioResult r = run_scenario(default_config(ScenarioKind::thm13_case1));
    CHECK(r.run.verdict == Verdict::gradient_abort);
    CHECK(r.config.a > 1.0);
    REQUIRE(r.blowup_location);
    CHECK(*r.blowup_location >= 1.0);
    CHECK(*r.blowup_location <= 3.0);
}

TEST_CASE("config parsing is strict") {
    using nlohmann::json;
    CHECK_THROWS_AS(config_from_json(json{{"scenario", "remark11"}, {"bogus", 1}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"grid", {{"cells", 8}}}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"scenario", "nope"}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"rho_bar", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"solver", {{"scheme", "roe"}}}}), std::invalid_argument);
    const ScenarioConfig c = config_from_json(json{{"scenario", "corollary14"}, {"N", 4}, {"target_interval", {0.5, 1.5}}});
    CHECK(c.scenario == ScenarioKind::corollary14);
    CHECK(c.N == 4);
    REQUIRE(c.target_interval);
    CHECK(c.target_interval->second == 1.5);
}

TEST_CASE("config roundtrip through JSON") {
    ScenarioConfig c = default_config(ScenarioKind::thm13_case1);
    c.solver.reconstruction = Reconstruction::minmod;
    c.solver.scheme = FluxScheme::hll;
    c.output_times = {0.1, 0.2};
    const ScenarioConfig back = config_from_json(to_json(c));
    CHECK(to_json(back).dump() == to_json(c).dump());
}

TEST_CASE("outputs are written with the documented columns") {
    ScenarioConfig c = quick(ScenarioKind::remark11);
    c.rho_bar = 2.0;
    c.output_times = {0.05};
    const ScenarioResult r = run_scenario(c);
    const auto dir = std::filesystem::temp_directory_path() / "hks_outputs_test";
    std::filesystem::remove_all(dir);
    write_outputs(r, dir.string());
    auto header = [&](const char* name) {
        std::ifstream in(dir / name);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(header("norms.csv") == "t,sup_rho,sup_c,sup_grad_rho,sup_hess_c,sup_grad_log_c,X_m");
    CHECK(header("trace.csv") == "t,x,P,Q,P_tilde,Phi");
    CHECK(header("fields_0.050000.csv") == "x1,rho,q1,log_c,c");
    CHECK(std::filesystem::exists(dir / "fields_0.000000.csv"));
    std::ifstream in(dir / "report.json");
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("verdict") == "gradient_abort");
    CHECK(j.at("provenance").contains("config_hash"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("custom data from a file") {
    const auto path = std::filesystem::temp_directory_path() / "hks_custom.csv";
    const Grid g = make_grid(1, 64, 4.0);
    {
        std::ofstream out(path);
        out << "x,rho,c\n";
        for (int i = 0; i < 64; ++i) out << g.center(i) << "," << 1.0 + 0.1 * bump(g.center(i)) << ",1\n";
    }
    ScenarioConfig c = default_config(ScenarioKind::custom);
    c.grid = {1, 64, 4.0};
    c.data_file = path.string();
    const SimState s = build_data(c);
    CHECK(s.rho[32] == doctest::Approx(1.1));
    c.grid.cells_per_axis = 128;
    CHECK_THROWS(build_data(c));
    std::filesystem::remove(path);
}
