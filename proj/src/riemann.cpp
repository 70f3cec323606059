#include "hks/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace hks {

Eigen2 eigen(const PhasePoint& p) {
    if (!(p.z1 > 0.0)) throw std::domain_error("eigen requires z1 > 0");
    return eigenvalues(p.z1, p.z2);
}

bool in_coverage(const PhasePoint& p) { return p.z1 > 0.0 && 4.0 * p.z1 > 3.0 * p.z2 * p.z2; }

namespace {

struct OdeState {
    double phi;
    double acc;
};

// Right-hand side along z2 = s. Returns false where the square root or rho positivity fails.
inline bool rhs(int family, double s, const OdeState& y, OdeState& dy) {
    const double disc = s * s + 4.0 * y.phi;
    if (!(y.phi > 0.0) || !(disc > 0.0)) return false;
    const double root = std::sqrt(disc);
    dy.phi = 0.5 * (family == 1 ? s - root : s + root);
    dy.acc = 1.0 / root;
    return true;
}

bool rk4(int family, double s, const OdeState& y, double h, OdeState& out) {
    OdeState k1, k2, k3, k4;
    if (!rhs(family, s, y, k1)) return false;
    if (!rhs(family, s + 0.5 * h, {y.phi + 0.5 * h * k1.phi, y.acc + 0.5 * h * k1.acc}, k2)) return false;
    if (!rhs(family, s + 0.5 * h, {y.phi + 0.5 * h * k2.phi, y.acc + 0.5 * h * k2.acc}, k3)) return false;
    if (!rhs(family, s + h, {y.phi + h * k3.phi, y.acc + h * k3.acc}, k4)) return false;
    out.phi = y.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    out.acc = y.acc + h / 6.0 * (k1.acc + 2.0 * k2.acc + 2.0 * k3.acc + k4.acc);
    return true;
}

}  // namespace

FootResult backtrace_foot(const PhasePoint& p, int family, const CharODEConfig& cfg) {
    if (family != 1 && family != 2) throw std::invalid_argument("family must be 1 or 2");
    if (!(p.z1 > 0.0) || !std::isfinite(p.z1) || !std::isfinite(p.z2))
        throw CoverageError("phase point outside rho > 0");
    FootResult res;
    if (p.z2 == 0.0) {
        res.foot = p.z1;
        return res;
    }
    const double dir = p.z2 > 0.0 ? -1.0 : 1.0;
    double s = p.z2;
    OdeState y{p.z1, 0.0};
    double h = dir * std::min(std::abs(p.z2), 0.05 * (1.0 + std::sqrt(p.z1)));
    long steps = 0;
    while (dir * s < 0.0) {
        if (++steps > cfg.max_steps) throw IntegrationError("characteristic integration exceeded step budget");
        if (dir * (s + h) > 0.0) h = -s;
        OdeState full, half, two;
        const bool ok = rk4(family, s, y, h, full) && rk4(family, s, y, 0.5 * h, half) &&
                        rk4(family, s + 0.5 * h, half, 0.5 * h, two);
        if (!ok) {
            if (std::abs(h) < cfg.min_step) throw CoverageError("characteristic leaves rho > 0 before the axis");
            h *= 0.25;
            continue;
        }
        const double e = std::max(std::abs(two.phi - full.phi), std::abs(two.acc - full.acc)) / 15.0;
        const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(two.phi), std::abs(two.acc));
        const double ratio = e / scale;
        if (ratio <= 1.0) {
            s += h;
            if (std::abs(s) < 1e-300 || dir * s > 0.0) s = 0.0;
            y.phi = two.phi + (two.phi - full.phi) / 15.0;
            y.acc = two.acc + (two.acc - full.acc) / 15.0;
            if (!(y.phi > 0.0)) throw CoverageError("characteristic leaves rho > 0 before the axis");
        } else if (std::abs(h) < cfg.min_step) {
            throw IntegrationError("characteristic step size underflow");
        }
        const double grow = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 4.0;
        h *= std::clamp(grow, 0.2, 4.0);
    }
    res.foot = y.phi;
    res.integral = -y.acc;
    res.steps = steps;
    return res;
}

InvariantJet w_jet(const PhasePoint& p, const CharODEConfig& cfg) {
    const FootResult a = backtrace_foot(p, 1, cfg);
    const FootResult b = backtrace_foot(p, 2, cfg);
    InvariantJet j;
    j.w.w1 = std::exp(a.foot);
    j.w.w2 = -std::exp(b.foot);
    j.f1 = std::exp(a.foot + a.integral);
    j.f2 = -std::exp(b.foot - b.integral);
    return j;
}

double f_eval(const PhasePoint& p, int family, const CharODEConfig& cfg) {
    const FootResult r = backtrace_foot(p, family, cfg);
    return family == 1 ? std::exp(r.foot + r.integral) : -std::exp(r.foot - r.integral);
}

InvariantPoint w_eval(const PhasePoint& p, const CharODEConfig& cfg) {
    return {std::exp(backtrace_foot(p, 1, cfg).foot), -std::exp(backtrace_foot(p, 2, cfg).foot)};
}

namespace {

Mat2 grad_from_jet(const PhasePoint& p, const InvariantJet& j) {
    const double S = std::sqrt(p.z2 * p.z2 + 4.0 * p.z1);
    return {{{j.f1, 0.5 * j.f1 * (S - p.z2)}, {j.f2, -0.5 * j.f2 * (p.z2 + S)}}};
}

Mat2 inverse_from_jet(const PhasePoint& p, const InvariantJet& j) {
    const double S = std::sqrt(p.z2 * p.z2 + 4.0 * p.z1);
    return {{{(p.z2 + S) / (2.0 * j.f1 * S), (S - p.z2) / (2.0 * j.f2 * S)}, {1.0 / (j.f1 * S), -1.0 / (j.f2 * S)}}};
}

}  // namespace

Mat2 grad_w(const PhasePoint& p, const CharODEConfig& cfg) { return grad_from_jet(p, w_jet(p, cfg)); }

Mat2 grad_w_inverse(const PhasePoint& p, const CharODEConfig& cfg) { return inverse_from_jet(p, w_jet(p, cfg)); }

double det_grad_w(const PhasePoint& p, const CharODEConfig& cfg) {
    const InvariantJet j = w_jet(p, cfg);
    return -j.f1 * j.f2 * std::sqrt(p.z2 * p.z2 + 4.0 * p.z1);
}

double dlambda2_dw1(const PhasePoint& p, const CharODEConfig& cfg) {
    const InvariantJet j = w_jet(p, cfg);
    const double S2 = p.z2 * p.z2 + 4.0 * p.z1;
    return (p.z2 + std::sqrt(S2)) / (j.f1 * S2);
}

double dlambda2_dw2(const PhasePoint& p, const CharODEConfig& cfg) {
    const InvariantJet j = w_jet(p, cfg);
    const double S2 = p.z2 * p.z2 + 4.0 * p.z1;
    return -p.z2 / (j.f2 * S2);
}

namespace {

PhasePoint invert_impl(const InvariantPoint& target, const CharODEConfig& cfg, double tol,
                       const std::optional<PhasePoint>& guess) {
    if (!(target.w1 > 0.0) || !(target.w2 < 0.0))
        throw InversionFailure("target outside the image of w (need w1 > 0 > w2)");
    const double F1 = std::log(target.w1);
    const double F2 = std::log(-target.w2);
    PhasePoint z;
    if (guess && in_coverage(*guess)) {
        z = *guess;
    } else {
        z.z1 = std::max(0.5 * (F1 + F2), 1e-8);
        z.z2 = (F1 - F2) / (2.0 * std::sqrt(z.z1));
        const double lim = std::sqrt(4.0 * z.z1 / 3.0);
        if (std::abs(z.z2) >= lim) z.z2 = std::copysign(0.5 * lim, z.z2);
    }
    auto residual = [&](const InvariantJet& j) {
        return std::array<double, 2>{std::log(j.w.w1) - F1, std::log(-j.w.w2) - F2};
    };
    InvariantJet jet = w_jet(z, cfg);
    auto r = residual(jet);
    for (int it = 0; it < 60; ++it) {
        const double rn = std::max(std::abs(r[0]), std::abs(r[1]));
        if (rn < 1e-14) break;
        // Jacobian of the log-residual: rows grad w_i / w_i.
        const Mat2 G = grad_from_jet(z, jet);
        const double a = G[0][0] / jet.w.w1, b = G[0][1] / jet.w.w1;
        const double c = G[1][0] / jet.w.w2, d = G[1][1] / jet.w.w2;
        const double det = a * d - b * c;
        if (!(std::abs(det) > 0.0)) throw InversionFailure("singular Jacobian in w inversion");
        const double dz1 = (d * r[0] - b * r[1]) / det;
        const double dz2 = (-c * r[0] + a * r[1]) / det;
        double lam = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const PhasePoint trial{z.z1 - lam * dz1, z.z2 - lam * dz2};
            if (in_coverage(trial)) {
                try {
                    const InvariantJet tj = w_jet(trial, cfg);
                    const auto tr = residual(tj);
                    if (std::max(std::abs(tr[0]), std::abs(tr[1])) < rn || lam < 1e-6) {
                        z = trial;
                        jet = tj;
                        r = tr;
                        accepted = true;
                        break;
                    }
                } catch (const CoverageError&) {
                }
            }
            lam *= 0.5;
        }
        if (!accepted) break;
        if (std::max(std::abs(dz1), std::abs(dz2)) * lam < 1e-15 * (1.0 + std::abs(z.z1) + std::abs(z.z2))) break;
    }
    const double err = std::max(std::abs(jet.w.w1 - target.w1) / std::abs(target.w1),
                                std::abs(jet.w.w2 - target.w2) / std::abs(target.w2));
    if (!(err <= tol)) throw InversionFailure("w inversion did not converge (relative residual " + std::to_string(err) + ")");
    return z;
}

}  // namespace

PhasePoint invert_w(const InvariantPoint& target, const CharODEConfig& cfg, double tol) {
    return invert_impl(target, cfg, tol, std::nullopt);
}

struct InvariantCache::Impl {
    static constexpr std::size_t kShards = 64;
    struct KeyHash {
        std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
            const std::uint64_t a = static_cast<std::uint64_t>(k.first) * 0x9E3779B97F4A7C15ULL;
            return static_cast<std::size_t>(a ^ (static_cast<std::uint64_t>(k.second) + 0x7F4A7C159E3779B9ULL + (a << 6) + (a >> 2)));
        }
    };
    struct Shard {
        std::mutex mu;
        std::unordered_map<std::pair<std::int64_t, std::int64_t>, InvariantPoint, KeyHash> map;
    };
    std::array<Shard, kShards> shards;
};

InvariantCache::InvariantCache(double quantum, CharODEConfig cfg)
    : quantum_(quantum), cfg_(cfg), impl_(std::make_unique<Impl>()) {
    if (!(quantum > 0.0)) throw std::invalid_argument("cache quantum must be positive");
}

InvariantCache::~InvariantCache() = default;

InvariantPoint InvariantCache::get(const PhasePoint& p) {
    const std::pair<std::int64_t, std::int64_t> key{std::llround(p.z1 / quantum_), std::llround(p.z2 / quantum_)};
    auto& shard = impl_->shards[Impl::KeyHash{}(key) % Impl::kShards];
    {
        std::lock_guard<std::mutex> lock(shard.mu);
        auto it = shard.map.find(key);
        if (it != shard.map.end()) return it->second;
    }
    const PhasePoint rounded{static_cast<double>(key.first) * quantum_, static_cast<double>(key.second) * quantum_};
    const InvariantPoint w = w_eval(rounded, cfg_);
    std::lock_guard<std::mutex> lock(shard.mu);
    shard.map.emplace(key, w);
    return w;
}

std::size_t InvariantCache::size() const {
    std::size_t s = 0;
    for (auto& sh : impl_->shards) {
        std::lock_guard<std::mutex> lock(sh.mu);
        s += sh.map.size();
    }
    return s;
}

InvariantFields invariant_fields(const SimState& s, InvariantCache* cache, Exec exec, const CharODEConfig& cfg) {
    const Grid& g = s.rho.grid;
    InvariantFields out{ScalarField(g), ScalarField(g)};
    const auto& q0 = s.q.comp.at(0);
    const std::size_t n = g.size();
    std::string failure;
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 64) if (exec == Exec::parallel)
    for (std::size_t c = 0; c < n; ++c) {
        try {
            const PhasePoint p{s.rho[c], q0[c]};
            const InvariantPoint w = cache ? cache->get(p) : w_eval(p, cfg);
            out.P[c] = w.w1;
            out.Q[c] = w.w2;
        } catch (const std::exception& e) {
#pragma omp critical(hks_invariant_failure)
            {
                if (!failed) {
                    failed = true;
                    failure = e.what();
                }
            }
        }
    }
    if (failed) throw CoverageError("invariant field evaluation failed: " + failure);
    return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    struct Rec {
        const std::function<double(double)>& f;
        double go(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
            return go(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + go(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}.go(a, b, fa, fm, fb, whole, tol, max_depth);
}

double psi_integrand(double w1, double v, const CharODEConfig& cfg) {
    const PhasePoint z = invert_w({w1, v}, cfg);
    const InvariantJet j = w_jet(z, cfg);
    const double S2 = z.z2 * z.z2 + 4.0 * z.z1;
    return -z.z2 / (j.f2 * S2 * std::sqrt(S2));
}

PsiTable::PsiTable(double w1, double v_lo, double v_hi, int intervals, const CharODEConfig& cfg, double tol)
    : w1_(w1), v_lo_(v_lo), v_hi_(v_hi) {
    if (intervals < 1) throw std::invalid_argument("PsiTable needs at least one interval");
    if (v_hi < v_lo) throw std::invalid_argument("PsiTable range is reversed");
    nodes_.assign(static_cast<std::size_t>(intervals) + 1, 0.0);
    if (v_hi == v_lo) return;
    const double dv = (v_hi - v_lo) / intervals;
    std::optional<PhasePoint> warm;
    auto g = [&](double v) {
        const PhasePoint z = invert_impl({w1, v}, cfg, 1e-9, warm);
        warm = z;
        const InvariantJet j = w_jet(z, cfg);
        const double S2 = z.z2 * z.z2 + 4.0 * z.z1;
        return -z.z2 / (j.f2 * S2 * std::sqrt(S2));
    };
    for (int i = 0; i < intervals; ++i) {
        const double a = v_lo + i * dv, b = (i + 1 == intervals) ? v_hi : a + dv;
        nodes_[static_cast<std::size_t>(i) + 1] = nodes_[static_cast<std::size_t>(i)] + adaptive_simpson(g, a, b, tol / intervals);
    }
}

double PsiTable::value(double v) const {
    if (nodes_.size() < 2 || v_hi_ == v_lo_) return 0.0;
    const double u = std::clamp((v - v_lo_) / (v_hi_ - v_lo_), 0.0, 1.0) * static_cast<double>(nodes_.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(u), nodes_.size() - 2);
    const double t = u - static_cast<double>(i);
    return (1.0 - t) * nodes_[i] + t * nodes_[i + 1];
}

double PsiTable::min_value() const { return *std::min_element(nodes_.begin(), nodes_.end()); }
double PsiTable::max_value() const { return *std::max_element(nodes_.begin(), nodes_.end()); }

ImageBounds image_bounds(const ScalarField& P0, const ScalarField& Q0, int samples, const CharODEConfig& cfg) {
    if (samples < 2) throw std::invalid_argument("image_bounds needs at least 2 samples per axis");
    ImageBounds b;
    b.p_min = *std::min_element(P0.values.begin(), P0.values.end());
    b.p_max = *std::max_element(P0.values.begin(), P0.values.end());
    b.q_min = *std::min_element(Q0.values.begin(), Q0.values.end());
    b.q_max = *std::max_element(Q0.values.begin(), Q0.values.end());
    const int np = b.p_max > b.p_min ? samples : 1;
    const int nq = b.q_max > b.q_min ? samples : 1;
    auto pt = [&](int i) { return np == 1 ? b.p_min : b.p_min + (b.p_max - b.p_min) * i / (np - 1); };
    auto qt = [&](int k) { return nq == 1 ? b.q_min : b.q_min + (b.q_max - b.q_min) * k / (nq - 1); };

    std::vector<double> min_rate(static_cast<std::size_t>(np), std::numeric_limits<double>::infinity());
    std::vector<double> spread(static_cast<std::size_t>(np), 0.0);
    std::string failure;
    bool failed = false;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < np; ++i) {
        try {
            std::optional<PhasePoint> warm;
            for (int k = 0; k < nq; ++k) {
                const PhasePoint z = invert_impl({pt(i), qt(k)}, cfg, 1e-9, warm);
                warm = z;
                min_rate[static_cast<std::size_t>(i)] = std::min(min_rate[static_cast<std::size_t>(i)], dlambda2_dw1(z, cfg));
            }
            if (nq > 1) {
                const PsiTable t(pt(i), b.q_min, b.q_max, nq - 1, cfg);
                spread[static_cast<std::size_t>(i)] = t.max_value() - t.min_value();
            }
        } catch (const std::exception& e) {
#pragma omp critical(hks_bounds_failure)
            {
                if (!failed) {
                    failed = true;
                    failure = e.what();
                }
            }
        }
    }
    if (failed) throw InversionFailure("image_bounds: " + failure);
    b.delta0 = 0.99 * *std::min_element(min_rate.begin(), min_rate.end());
    const double sp = *std::max_element(spread.begin(), spread.end());
    b.M_phi = std::exp(sp);
    b.m_phi = std::exp(-sp);
    return b;
}

ImageBounds anchored_bounds(const ImageBounds& b, const PsiTable& table, double q_anchor) {
    ImageBounds out = b;
    const double base = table.value(q_anchor);
    out.m_phi = std::exp(table.min_value() - base);
    out.M_phi = std::exp(table.max_value() - base);
    return out;
}

}  // namespace hks
