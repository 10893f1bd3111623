// Finite-difference machinery for the primitive-form oracle: Fornberg weights
// for centered stencils of arbitrary order on the periodic grid.
#pragma once

#include <vector>

#include "nsk/field.hpp"

namespace fd {

// Fornberg's algorithm: weights for the m-th derivative at x = 0 from nodes
// alpha[0..n]. (B. Fornberg, Mathematics of Computation 51 (1988) 699-706.)
inline std::vector<double> fornberg_weights(int m, const std::vector<double>& alpha) {
    const int n = static_cast<int>(alpha.size()) - 1;
    std::vector<std::vector<std::vector<double>>> delta(
        m + 1, std::vector<std::vector<double>>(n + 1, std::vector<double>(n + 1, 0.0)));
    delta[0][0][0] = 1.0;
    double c1 = 1.0;
    for (int nn = 1; nn <= n; ++nn) {
        double c2 = 1.0;
        for (int v = 0; v < nn; ++v) {
            double c3 = alpha[nn] - alpha[v];
            c2 *= c3;
            for (int mm = 0; mm <= std::min(nn, m); ++mm) {
                delta[mm][nn][v] = (alpha[nn] * delta[mm][nn - 1][v] -
                                    (mm ? mm * delta[mm - 1][nn - 1][v] : 0.0)) /
                                   c3;
            }
        }
        for (int mm = 0; mm <= std::min(nn, m); ++mm) {
            delta[mm][nn][nn] = c1 / c2 *
                                ((mm ? mm * delta[mm - 1][nn - 1][nn - 1] : 0.0) -
                                 alpha[nn - 1] * delta[mm][nn - 1][nn - 1]);
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int v = 0; v <= n; ++v) w[v] = delta[m][n][v];
    return w;
}

// periodic centered FD derivative of order `deriv` using a (2*half+1)-point stencil
inline nsk::RealField derivative(const nsk::RealField& f, int axis, int deriv, int half = 6) {
    const nsk::Grid& g = f.grid;
    std::vector<double> nodes(2 * half + 1);
    for (int i = 0; i <= 2 * half; ++i) nodes[i] = (i - half) * g.dx();
    std::vector<double> w = fornberg_weights(deriv, nodes);

    nsk::RealField out(g);
    nsk::for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double acc = 0;
        for (int s = -half; s <= half; ++s) {
            std::array<int, 3> nb = idx;
            nb[axis] = (nb[axis] + s + g.n) % g.n;
            acc += w[s + half] * f.samples[g.flat(nb)];
        }
        out.samples[flat] = acc;
    });
    return out;
}

inline nsk::RealField laplacian(const nsk::RealField& f, int half = 6) {
    nsk::RealField out(f.grid);
    for (int ax = 0; ax < f.grid.d; ++ax) {
        nsk::RealField d2 = derivative(f, ax, 2, half);
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += d2.samples[i];
    }
    return out;
}

} // namespace fd
