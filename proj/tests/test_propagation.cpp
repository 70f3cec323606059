#include <cmath>

#include "doctest.h"
#include "hks/propagation.hpp"
#include "hks/transform.hpp"
#include "support.hpp"

using namespace hks;
using testing_support::constant_state;
using testing_support::plateau_state;

namespace {

RunResult sampled_run(const SimState& s, double horizon, int samples) {
    RunOptions opts;
    for (int j = 1; j <= samples; ++j) opts.sample_times.push_back(horizon * j / samples);
    return run(s, PhysParams{}, SolverConfig{}, horizon, opts);
}

}  // namespace

TEST_CASE("A for two constant runs") {
    const RunResult a = sampled_run(constant_state(1.0, 1.0, 1, 64, 8.0), 0.5, 2);
    CHECK(compute_A(a, a) == doctest::Approx(2.0));
}

TEST_CASE("A for the plateau run against the constant background") {
    const RunResult flat = sampled_run(constant_state(1.0, 1.0, 1, 512, 16.0), 0.25, 4);
    const RunResult bump = sampled_run(plateau_state(1.0, 1.0, 512, 16.0), 0.25, 4);
    double grad_log_c = 0.0;
    for (const auto& r : bump.records) grad_log_c = std::max(grad_log_c, r.norms.sup_grad_log_c);
    const double A = compute_A(bump, flat);
    CHECK(std::isfinite(A));
    CHECK(A == doctest::Approx(2.0 + grad_log_c));
}

TEST_CASE("A grows with the time window") {
    const RunResult flat = sampled_run(constant_state(1.0, 1.0, 1, 512, 16.0), 0.25, 4);
    const RunResult bump = sampled_run(plateau_state(1.0, 1.0, 512, 16.0), 0.25, 4);
    RunResult shorter = flat;
    shorter.records.resize(shorter.records.size() / 2);
    RunResult shorter_bump = bump;
    shorter_bump.records.resize(shorter_bump.records.size() / 2);
    CHECK(compute_A(shorter_bump, shorter) <= compute_A(bump, flat));
    CHECK(compute_A(flat, shorter_bump) <= compute_A(flat, bump));
}

TEST_CASE("cone speed") {
    const ConeSpec c = make_cone({1.0, 2.0}, 3.0, 0.5);
    CHECK(c.speed == doctest::Approx(36.0));
    CHECK(c.T_star == 0.5);
}

TEST_CASE("identical runs never violate the cone") {
    const RunResult a = sampled_run(plateau_state(1.0, 1.0, 512, 16.0), 0.2, 4);
    const ConeReport r = verify_cone(a, a, make_cone({0.0}, 2.0, 0.3), 1e-12);
    CHECK_FALSE(r.cone_violation);
    CHECK(r.max_diff_rho == 0.0);
    CHECK(r.max_diff_q == 0.0);
    CHECK(r.max_diff_log_c == 0.0);
    CHECK(r.samples_checked == 4);
}

TEST_CASE("zero tolerance with distinct data reports a violation") {
    const RunResult a = sampled_run(plateau_state(1.0, 1.0, 512, 16.0), 0.2, 4);
    const RunResult b = sampled_run(constant_state(1.0, 1.0, 1, 512, 16.0), 0.2, 4);
    CHECK(verify_cone(a, b, make_cone({0.0}, 2.0, 0.3), 0.0).cone_violation);
    CHECK_THROWS(verify_cone(a, b, make_cone({0.0}, 2.0, 0.3), -1.0));
}

TEST_CASE("empirical speed bound of constant states") {
    CHECK(empirical_speed_bound(sampled_run(constant_state(1.0, 1.0, 1, 64, 8.0), 0.5, 1)) == doctest::Approx(1.0));
    CHECK(empirical_speed_bound(sampled_run(constant_state(4.0, 1.0, 1, 64, 8.0), 0.5, 1)) == doctest::Approx(2.0));
}

TEST_CASE("bump against constant: cone clean and speeds sandwiched") {
    const double horizon = 0.25;
    const SimState bump0 = plateau_state(1.0, 1.0, 2048, 16.0);
    const RunResult flat = sampled_run(constant_state(1.0, 1.0, 1, 2048, 16.0), horizon, 8);
    const RunResult bump = sampled_run(bump0, horizon, 8);
    const double A = compute_A(flat, bump);
    const ConeSpec probe = make_cone({0.0}, A, horizon);
    const double h = bump0.rho.grid.h;
    const ConeSpec cone = make_cone({2.0 + probe.speed * horizon + 4.0 * h}, A, horizon);
    CHECK(initial_ball_difference(bump0, constant_state(1.0, 1.0, 1, 2048, 16.0), cone) == 0.0);
    const double lip = std::max(sup_norm(gradient_magnitude(bump0.rho)), sup_norm(gradient_magnitude(exp_field(bump0.log_c))));
    const double tol = 10.0 * lip * h;
    const ConeReport r = verify_cone(flat, bump, cone, tol);
    CHECK_FALSE(r.cone_violation);
    CHECK(r.front_times.size() >= 3);
    CHECK(r.empirical_front_speed > 0.0);
    const double lam = std::max(empirical_speed_bound(flat), empirical_speed_bound(bump));
    CHECK(r.empirical_front_speed <= 1.1 * lam);
    CHECK(1.1 * lam <= cone.speed);
    // Differences stay inside |x| <= 2 + s t.
    for (std::size_t k = 0; k < r.front_times.size(); ++k) {
        CHECK(r.front_upper[k] <= 2.0 + 1.1 * lam * r.front_times[k] + 2.0 * h);
        CHECK(r.front_lower[k] >= -2.0 - 1.1 * lam * r.front_times[k] - 2.0 * h);
    }
}

TEST_CASE("swapping the runs keeps the verdict") {
    const RunResult flat = sampled_run(constant_state(1.0, 1.0, 1, 1024, 16.0), 0.2, 4);
    const RunResult bump = sampled_run(plateau_state(1.0, 1.0, 1024, 16.0), 0.2, 4);
    for (double center : {0.0, 9.0}) {
        const ConeSpec cone = make_cone({center}, compute_A(flat, bump), 0.2);
        const ConeReport a = verify_cone(flat, bump, cone, 0.05), b = verify_cone(bump, flat, cone, 0.05);
        CHECK(a.cone_violation == b.cone_violation);
        CHECK(a.max_diff_rho == b.max_diff_rho);
    }
}

TEST_CASE("runs sampled at different times are rejected") {
    const RunResult a = sampled_run(constant_state(1.0, 1.0, 1, 64, 8.0), 0.2, 4);
    const RunResult b = sampled_run(constant_state(1.0, 1.0, 1, 64, 8.0), 0.3, 4);
    CHECK_THROWS(verify_cone(a, b, make_cone({0.0}, 2.0, 1.0), 0.1));
}

TEST_CASE("Theil-Sen slope ignores an outlier") {
    const std::vector<double> t{0, 1, 2, 3, 4, 5}, y{1, 3, 5, 70, 9, 11};
    CHECK(theil_sen_slope(t, y) == doctest::Approx(2.0));
}
