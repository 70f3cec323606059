#pragma once

#include <cmath>

#include "hks/core.hpp"
#include "hks/transform.hpp"

namespace testing_support {

// Independent copy of the smooth plateau used by the data builders.
inline double plateau(double x) {
    const double r = std::abs(x);
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    const double a = std::exp(-1.0 / (2.0 - r));
    const double b = std::exp(-1.0 / (r - 1.0));
    return a / (a + b);
}

// rho = rho_bar + plateau, c = c_bar + plateau on a periodic line.
inline hks::SimState plateau_state(double rho_bar, double c_bar, int n, double L, hks::PhysParams p = {}) {
    const hks::Grid g = hks::make_grid(1, n, L);
    hks::ScalarField rho(g), c(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.center(static_cast<int>(i));
        rho[i] = rho_bar + plateau(x);
        c[i] = c_bar + plateau(x);
    }
    return hks::make_state(rho, c, p);
}

inline hks::SimState constant_state(double rho_bar, double c_bar, int dim, int n, double L) {
    const hks::Grid g = hks::make_grid(dim, n, L);
    return hks::make_state(hks::ScalarField(g, rho_bar), hks::ScalarField(g, c_bar), hks::PhysParams{});
}

}  // namespace testing_support
