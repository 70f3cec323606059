#include <cmath>
#include <random>

#include "doctest.h"
#include "hks/solver.hpp"
#include "hks/transform.hpp"
#include "support.hpp"

using namespace hks;
using testing_support::constant_state;
using testing_support::plateau_state;

TEST_CASE("physical flux") {
    AxisFlux f = flux(1.0, 0.0);
    CHECK(f.mass == 0.0);
    CHECK(f.normal == 1.0);
    f = flux(2.0, 3.0);
    CHECK(f.mass == 6.0);
    CHECK(f.normal == 2.0);
    const Eigen2 e = eigenvalues(1.0, 0.0);
    CHECK(e.lambda1 == doctest::Approx(-1.0));
    CHECK(e.lambda2 == doctest::Approx(1.0));
    CHECK(max_abs_speed(4.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("numerical fluxes are consistent") {
    for (auto nf : {numerical_flux_rusanov, numerical_flux_hll}) {
        const InterfaceFlux f = nf(1.7, -0.4, 1.7, -0.4);
        const AxisFlux exact = flux(1.7, -0.4);
        CHECK(f.f.mass == doctest::Approx(exact.mass).epsilon(1e-15));
        CHECK(f.f.normal == doctest::Approx(exact.normal).epsilon(1e-15));
    }
}

TEST_CASE("swapping sides flips only the dissipation") {
    const double rl = 1.2, ql = 0.3, rr = 0.8, qr = -0.5;
    for (auto nf : {numerical_flux_rusanov, numerical_flux_hll}) {
        const InterfaceFlux a = nf(rl, ql, rr, qr), b = nf(rr, qr, rl, ql);
        const AxisFlux fl = flux(rl, ql), fr = flux(rr, qr);
        // Rusanov: F(L,R) + F(R,L) = F_L + F_R exactly; HLL keeps the sum only for the central part.
        if (nf == numerical_flux_rusanov) {
            CHECK(a.f.mass + b.f.mass == doctest::Approx(fl.mass + fr.mass).epsilon(1e-14));
            CHECK(a.f.normal + b.f.normal == doctest::Approx(fl.normal + fr.normal).epsilon(1e-14));
        }
        CHECK(a.transverse == doctest::Approx(b.transverse));
    }
}

TEST_CASE("HLL mass flux matches the two-wave formula") {
    const double rl = 1.0, ql = 0.0, rr = 1.0, qr = 0.2;
    const InterfaceFlux f = numerical_flux_hll(rl, ql, rr, qr);
    const Eigen2 el = eigenvalues(rl, ql), er = eigenvalues(rr, qr);
    const double sl = std::min(el.lambda1, er.lambda1), sr = std::max(el.lambda2, er.lambda2);
    const AxisFlux fl = flux(rl, ql), fr = flux(rr, qr);
    const double mass = (sr * fl.mass - sl * fr.mass + sl * sr * (rr - rl)) / (sr - sl);
    CHECK(f.f.mass == doctest::Approx(mass).epsilon(1e-14));
}

TEST_CASE("Riemann problem conserves mass") {
    const Grid g = make_grid(1, 200, 10.0);
    SimState s{ScalarField(g, 1.0), VectorField(g, 0.0), ScalarField(g, 0.0), 0.0};
    for (std::size_t i = g.size() / 2; i < g.size(); ++i) s.q.comp[0][i] = 0.5;
    const double m0 = total_mass(s.rho);
    SolverConfig cfg;
    for (auto scheme : {FluxScheme::rusanov, FluxScheme::hll}) {
        cfg.scheme = scheme;
        SimState t = s;
        for (int k = 0; k < 100; ++k) step(t, cfl_dt(t, cfg, PhysParams{}), cfg, PhysParams{});
        CHECK(std::abs(total_mass(t.rho) - m0) <= 1e-13 * m0);
    }
}

TEST_CASE("CFL time step") {
    const SimState s = constant_state(1.0, 1.0, 1, 20, 1.0);
    SolverConfig cfg;
    CHECK(cfl_dt(s, cfg, PhysParams{}) == doctest::Approx(0.045));
    const SimState s2 = constant_state(2.0, 1.0, 1, 20, 1.0);
    CHECK(cfl_dt(s2, cfg, PhysParams{}) == doctest::Approx(0.045 / std::sqrt(2.0)));
    const PhysParams viscous{1.0, 1.0, 10.0};
    CHECK(cfl_dt(s, cfg, viscous) == doctest::Approx(0.45 * 0.01 / 20.0));
}

TEST_CASE("constant state is stationary and consumption is exponential") {
    const SimState s = constant_state(1.0, 1.0, 1, 64, 4.0);
    const RunResult r = run(s, PhysParams{}, SolverConfig{}, 1.0);
    CHECK(r.verdict == Verdict::completed);
    CHECK(r.final_state.t_scaled == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 0; i < s.rho.size(); ++i) {
        CHECK(std::abs(r.final_state.rho[i] - 1.0) <= 1e-12);
        CHECK(std::abs(r.final_state.q.comp[0][i]) <= 1e-12);
        CHECK(std::abs(std::exp(r.final_state.log_c[i]) - 0.3678794412) <= 1e-8);
    }
}

TEST_CASE("consumption rate follows mu rho_bar in physical time") {
    const PhysParams p{4.0, 1.0, 0.0};
    const SimState s = make_state(ScalarField(make_grid(1, 32, 2.0), 0.5), ScalarField(make_grid(1, 32, 2.0), 1.0), p);
    const ScalingMap m = scaling_for(p);
    const RunResult r = run(s, p, SolverConfig{}, m.time_to_scaled(1.5));
    CHECK(std::exp(r.final_state.log_c[7]) == doctest::Approx(std::exp(-1.0 * 0.5 * 1.5)).epsilon(1e-10));
}

TEST_CASE("mass of rho and q is conserved per step") {
    SimState s = plateau_state(1.0, 1.0, 512, 16.0);
    SolverConfig cfg;
    cfg.reconstruction = Reconstruction::minmod;
    const double m0 = total_mass(s.rho);
    const double q0 = total_mass(s.q.component(0));
    for (int k = 0; k < 50; ++k) {
        step(s, cfl_dt(s, cfg, PhysParams{}), cfg, PhysParams{});
        CHECK(std::abs(total_mass(s.rho) - m0) <= 1e-12 * m0);
        CHECK(std::abs(total_mass(s.q.component(0)) - q0) <= 1e-12);
    }
}

TEST_CASE("one step agrees with a fine-step reference to third order") {
    // Same spatial operator, many tiny steps as the time-exact reference.
    const SimState s = plateau_state(2.0, 1.0, 256, 8.0);
    SolverConfig cfg;
    auto error = [&](double dt) {
        SimState coarse = s, fine = s;
        step(coarse, dt, cfg, PhysParams{});
        for (int k = 0; k < 256; ++k) step(fine, dt / 256, cfg, PhysParams{});
        double e = 0.0;
        for (std::size_t i = 0; i < s.rho.size(); ++i) e = std::max(e, std::abs(coarse.rho[i] - fine.rho[i]));
        return e;
    };
    const double dt = cfl_dt(s, cfg, PhysParams{});
    const double e1 = error(dt), e2 = error(dt / 2);
    CHECK(e1 / e2 > 6.0);
}

TEST_CASE("serial and parallel residuals agree") {
    for (int dim : {1, 2}) {
        const Grid g = make_grid(dim, dim == 1 ? 256 : 48, 4.0);
        ScalarField rho(g), c(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            double prod = testing_support::plateau(g.position(i, 0));
            if (dim == 2) prod *= testing_support::plateau(0.7 * g.position(i, 1));
            rho[i] = 1.0 + prod;
            c[i] = 1.0 + 0.5 * prod;
        }
        const SimState s = make_state(rho, c, PhysParams{});
        for (auto rec : {Reconstruction::first_order, Reconstruction::minmod})
            for (auto scheme : {FluxScheme::rusanov, FluxScheme::hll}) {
                SolverConfig cfg;
                cfg.reconstruction = rec;
                cfg.scheme = scheme;
                Residual a, b;
                compute_residual(s, cfg, 0.01, Exec::serial, a);
                compute_residual(s, cfg, 0.01, Exec::parallel, b);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    CHECK(std::abs(a.rho[i] - b.rho[i]) <= 1e-12);
                    for (int k = 0; k < dim; ++k) CHECK(std::abs(a.q[k][i] - b.q[k][i]) <= 1e-12);
                }
            }
    }
}

TEST_CASE("plateau data ends in a gradient abort") {
    const SimState s = plateau_state(1.0, 1.0, 1024, 16.0);
    SolverConfig cfg;
    cfg.gradient_abort_factor = 2.0;
    const RunResult r = run(s, PhysParams{}, cfg, 5.0);
    CHECK(r.verdict == Verdict::gradient_abort);
    CHECK(r.final_state.t_scaled < 5.0);
    const double g0 = r.records.front().norms.sup_grad_rho;
    CHECK(r.records.back().norms.sup_grad_rho >= 2.0 * g0);
    for (const auto& rec : r.records) CHECK(rec.norms.sup_rho <= 2.0 * r.records.front().norms.sup_rho);
}

TEST_CASE("viscous run reaches the inviscid abort time without aborting") {
    const SimState s = plateau_state(1.0, 1.0, 1024, 16.0);
    SolverConfig cfg;
    cfg.gradient_abort_factor = 2.0;
    const RunResult inviscid = run(s, PhysParams{}, cfg, 5.0);
    REQUIRE(inviscid.verdict == Verdict::gradient_abort);
    const RunResult viscous = run(s, PhysParams{1.0, 1.0, 0.05}, cfg, inviscid.final_state.t_scaled);
    CHECK(viscous.verdict == Verdict::completed);
}

TEST_CASE("c stays positive and its sup norm never grows") {
    const SimState s = plateau_state(1.0, 1.0, 1024, 16.0);
    SolverConfig cfg;
    cfg.gradient_abort_factor = 2.0;
    RunOptions opts;
    double prev = 0.0;
    bool first = true, monotone = true, positive = true;
    opts.observer = [&](const SimState& st, const StepRecord& rec) {
        for (double v : st.log_c.values) positive = positive && std::exp(v) > 0.0;
        if (!first && rec.norms.sup_c > prev) monotone = false;
        prev = rec.norms.sup_c;
        first = false;
    };
    run(s, PhysParams{}, cfg, 5.0, opts);
    CHECK(positive);
    CHECK(monotone);
}

TEST_CASE("vanishing viscosity approaches the inviscid solution") {
    const SimState s = plateau_state(1.0, 1.0, 1024, 16.0);
    const double t = 0.15;
    const SimState ref = run(s, PhysParams{}, SolverConfig{}, t).final_state;
    double prev = 1e300;
    for (double eps : {0.04, 0.02, 0.01}) {
        const SimState v = run(s, PhysParams{1.0, 1.0, eps}, SolverConfig{}, t).final_state;
        double d = 0.0;
        for (std::size_t i = 0; i < ref.rho.size(); ++i) d += std::abs(v.rho[i] - ref.rho[i]) * ref.rho.grid.h;
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("self-convergence in L1 before blow-up") {
    const double t = 0.1;
    auto solve = [&](int n) { return run(plateau_state(1.0, 1.0, n, 16.0), PhysParams{}, SolverConfig{}, t).final_state; };
    // Restrict the fine solution by averaging pairs of cells.
    auto diff = [](const SimState& coarse, const SimState& fine) {
        double d = 0.0;
        for (std::size_t i = 0; i < coarse.rho.size(); ++i)
            d += std::abs(coarse.rho[i] - 0.5 * (fine.rho[2 * i] + fine.rho[2 * i + 1])) * coarse.rho.grid.h;
        return d;
    };
    const SimState a = solve(512), b = solve(1024), c = solve(2048);
    const double order = std::log2(diff(a, b) / diff(b, c));
    MESSAGE("observed L1 order " << order);
    CHECK(order >= 0.9);
}

TEST_CASE("curl of q stays within the discretization bound in two dimensions") {
    const Grid g = make_grid(2, 64, 4.0);
    ScalarField rho(g), c(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double b = testing_support::plateau(g.position(i, 0)) * testing_support::plateau(0.8 * g.position(i, 1));
        rho[i] = 1.0 + b;
        c[i] = 1.0 + b;
    }
    SimState s = make_state(rho, c, PhysParams{});
    CHECK(curl_residual(s.q) <= 1e-12);
    SolverConfig cfg;
    double max_grad = sup_norm(gradient_magnitude(s.rho));
    for (int k = 0; k < 40; ++k) {
        step(s, cfl_dt(s, cfg, PhysParams{}), cfg, PhysParams{});
        max_grad = std::max(max_grad, sup_norm(gradient_magnitude(s.rho)));
        CHECK(curl_residual(s.q) <= 10.0 * g.h * g.h * max_grad);
    }
}

TEST_CASE("sample times are landed on exactly") {
    RunOptions opts;
    opts.sample_times = {0.05, 0.1234};
    const RunResult r = run(plateau_state(1.0, 1.0, 256, 8.0), PhysParams{}, SolverConfig{}, 0.2, opts);
    REQUIRE(r.samples.size() == 2);
    CHECK(r.samples[0].t_scaled == 0.05);
    CHECK(r.samples[1].t_scaled == 0.1234);
}

TEST_CASE("step limit verdict") {
    SolverConfig cfg;
    cfg.max_steps = 3;
    const RunResult r = run(plateau_state(1.0, 1.0, 256, 8.0), PhysParams{}, cfg, 10.0);
    CHECK(r.verdict == Verdict::step_limit);
    CHECK(r.records.size() == 4);
}

TEST_CASE("solver configuration validation") {
    SolverConfig cfg;
    cfg.cfl = 0.0;
    CHECK_THROWS(validate(cfg));
    cfg = SolverConfig{};
    cfg.gradient_abort_factor = 0.5;
    CHECK_THROWS(validate(cfg));
}
