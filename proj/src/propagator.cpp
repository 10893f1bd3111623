#include "nsk/propagator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsk {

EigenPair eigenvalues(const FluidParams& p, double xi_abs2) {
    if (!(xi_abs2 > 0))
        throw std::invalid_argument("eigenvalues: xi = 0 rejected (identity mode)");
    const double nu = p.lin_nu(), kap = p.lin_kappa(), g2 = p.gamma2();
    const cplx disc = cplx{1.0 - 4.0 * kap / (nu * nu) - 4.0 * g2 / (nu * nu * xi_abs2), 0.0};
    const cplx root = std::sqrt(disc);
    const double pre = -0.5 * nu * xi_abs2;
    return {pre * (1.0 + root), pre * (1.0 - root)};
}

EigenPair eigenvalues(const FluidParams& p, const std::array<double, 3>& xi, int d) {
    double a2 = 0;
    for (int ax = 0; ax < d; ++ax) a2 += xi[ax] * xi[ax];
    return eigenvalues(p, a2);
}

double transition_frequency(const FluidParams& p) {
    const double nu = p.lin_nu(), kap = p.lin_kappa(), g2 = p.gamma2();
    const double denom = nu * nu - 4.0 * kap;
    if (denom > 0) return std::sqrt(4.0 * g2 / denom);
    return std::sqrt(g2 / kap);
}

static bool confluent(const EigenPair& ev) {
    return std::abs(ev.lambda_plus - ev.lambda_minus) <=
           1e-6 * (std::abs(ev.lambda_plus) + std::abs(ev.lambda_minus));
}

GreenScalars green_scalars(const FluidParams& p, double t, double xi_abs2) {
    GreenScalars s{};
    s.heat = std::exp(-p.lin_mu() * xi_abs2 * t);
    const EigenPair ev = eigenvalues(p, xi_abs2);
    const cplx lp = ev.lambda_plus, lm = ev.lambda_minus;
    if (confluent(ev)) {
        const cplx l = 0.5 * (lp + lm);
        const double el = std::exp(l.real() * t); // repeated root is real
        s.q = t * el;
        s.g11 = (1.0 - l.real() * t) * el;
        s.gll = (1.0 + l.real() * t) * el;
        return s;
    }
    const cplx ep = std::exp(lp * t), em = std::exp(lm * t);
    const cplx den = lp - lm;
    s.q = ((ep - em) / den).real();
    s.g11 = ((lp * em - lm * ep) / den).real();
    s.gll = ((lp * ep - lm * em) / den).real();
    return s;
}

double q_time_derivative(const FluidParams& p, double t, double xi_abs2, int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("q_time_derivative: k must be 0, 1 or 2");
    if (xi_abs2 == 0) {
        // both roots vanish; d^k/dt^k [t e^{0 t}] = t, 1, 0
        return k == 0 ? t : (k == 1 ? 1.0 : 0.0);
    }
    const EigenPair ev = eigenvalues(p, xi_abs2);
    const cplx lp = ev.lambda_plus, lm = ev.lambda_minus;
    if (confluent(ev)) {
        const double l = 0.5 * (lp + lm).real();
        const double el = std::exp(l * t);
        const double lk = std::pow(l, k);
        const double lk1 = k > 0 ? std::pow(l, k - 1) : 0.0;
        return el * (lk * t + k * lk1);
    }
    const cplx num = std::pow(lp, k) * std::exp(lp * t) - std::pow(lm, k) * std::exp(lm * t);
    return (num / (lp - lm)).real();
}

GreenMatrixEval green_matrix(const FluidParams& p, double t, const std::array<double, 3>& xi, int d) {
    if (t < 0) throw std::invalid_argument("green_matrix: t must be >= 0");
    double a2 = 0;
    for (int ax = 0; ax < d; ++ax) a2 += xi[ax] * xi[ax];
    const GreenScalars s = green_scalars(p, t, a2);
    const double cfac = p.gamma2() + p.lin_kappa() * a2;

    GreenMatrixEval G;
    G.dim = 1 + d;
    G.at(0, 0) = s.g11;
    for (int i = 0; i < d; ++i) {
        G.at(0, 1 + i) = cplx{0, -xi[i] * s.q};
        G.at(1 + i, 0) = cplx{0, -xi[i] * cfac * s.q};
        for (int j = 0; j < d; ++j) {
            double proj = xi[i] * xi[j] / a2;
            double id = (i == j) ? 1.0 : 0.0;
            G.at(1 + i, 1 + j) = s.gll * proj + s.heat * (id - proj);
        }
    }
    return G;
}

PropagatorTable PropagatorTable::build(const FluidParams& p, const Grid& g, double t) {
    PropagatorTable tab;
    tab.grid = g;
    tab.t = t;
    tab.params = p;
    const std::int64_t total = g.total();
    tab.g11.resize(total);
    tab.q.resize(total);
    tab.gll.resize(total);
    tab.heat.resize(total);
    const FreqTable ft(g);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double a2 = ft.abs2(idx, g.d);
        if (a2 == 0) {
            tab.g11[flat] = 1;
            tab.q[flat] = 0;
            tab.gll[flat] = 1;
            tab.heat[flat] = 1;
            return;
        }
        GreenScalars s = green_scalars(p, t, a2);
        tab.g11[flat] = s.g11;
        tab.q[flat] = s.q;
        tab.gll[flat] = s.gll;
        tab.heat[flat] = s.heat;
    });
    return tab;
}

void PropagatorTable::apply(SpectralState& u) const {
    u.check_consistent();
    if (!(u.grid() == grid)) throw std::invalid_argument("PropagatorTable: grid mismatch");
    if (t == 0) return; // G(0) = Id exactly
    const int d = grid.d;
    const double cgam = params.gamma2();
    const double ckap = params.lin_kappa();
    const FreqTable ft(grid);
    for_each_mode(grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double a2 = ft.abs2(idx, d);
        if (a2 == 0) return; // identity on the zero mode
        cplx ah = u.a.coeffs[flat];
        cplx xdotm{0, 0};
        std::array<double, 3> xi{0, 0, 0};
        for (int ax = 0; ax < d; ++ax) {
            xi[ax] = ft.freq[idx[ax]];
            xdotm += xi[ax] * u.m[ax].coeffs[flat];
        }
        const double cfac = cgam + ckap * a2;
        const cplx iunit{0, 1};
        u.a.coeffs[flat] = g11[flat] * ah - iunit * q[flat] * xdotm;
        const cplx comp_amp = gll[flat] * xdotm / a2;       // longitudinal response
        const cplx drive = iunit * cfac * q[flat] * ah;     // acoustic/capillary coupling
        for (int ax = 0; ax < d; ++ax) {
            cplx sol = u.m[ax].coeffs[flat] - xi[ax] * xdotm / a2;
            u.m[ax].coeffs[flat] = heat[flat] * sol + xi[ax] * (comp_amp - drive);
        }
    });
}

void PropagatorTable::apply_source(SpectralState& y, const std::vector<SpectralField>& n,
                                   double weight) const {
    if (static_cast<int>(n.size()) != grid.d)
        throw std::invalid_argument("apply_source: component count mismatch");
    const int d = grid.d;
    const FreqTable ft(grid);
    for_each_mode(grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double a2 = ft.abs2(idx, d);
        cplx xdotn{0, 0};
        std::array<double, 3> xi{0, 0, 0};
        for (int ax = 0; ax < d; ++ax) {
            xi[ax] = ft.freq[idx[ax]];
            xdotn += xi[ax] * n[ax].coeffs[flat];
        }
        if (a2 == 0) {
            for (int ax = 0; ax < d; ++ax) y.m[ax].coeffs[flat] += weight * n[ax].coeffs[flat];
            return;
        }
        const cplx iunit{0, 1};
        y.a.coeffs[flat] += weight * (-iunit * q[flat] * xdotn);
        const cplx comp_amp = gll[flat] * xdotn / a2;
        for (int ax = 0; ax < d; ++ax) {
            cplx sol = n[ax].coeffs[flat] - xi[ax] * xdotn / a2;
            y.m[ax].coeffs[flat] += weight * (heat[flat] * sol + xi[ax] * comp_amp);
        }
    });
}

SpectralState propagate(const SpectralState& u, double t, const FluidParams& p) {
    if (t < 0) throw std::invalid_argument("propagate: t must be >= 0");
    SpectralState out = u;
    PropagatorTable tab = PropagatorTable::build(p, u.grid(), t);
    tab.apply(out);
    out.time = u.time + t;
    return out;
}

SpectralField heat_semigroup(const SpectralField& f, double t, double diffusivity) {
    if (t < 0) throw std::invalid_argument("heat_semigroup: t must be >= 0");
    return apply_multiplier(f, [t, diffusivity](const std::array<double, 3>& xi) {
        double a2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        return cplx{std::exp(-t * diffusivity * a2), 0};
    }, cplx{1, 0});
}

std::pair<std::vector<SpectralField>, std::vector<SpectralField>>
helmholtz_project(const std::vector<SpectralField>& m) {
    if (m.empty()) throw std::invalid_argument("helmholtz_project: empty vector field");
    const Grid g = m[0].grid;
    const int d = g.d;
    if (static_cast<int>(m.size()) != d)
        throw std::invalid_argument("helmholtz_project: component count != d");
    std::vector<SpectralField> sol(d, SpectralField(g)), comp(d, SpectralField(g));
    const FreqTable ft(g);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double a2 = ft.abs2(idx, d);
        if (a2 == 0) {
            for (int ax = 0; ax < d; ++ax) sol[ax].coeffs[flat] = m[ax].coeffs[flat];
            return;
        }
        cplx xdotm{0, 0};
        for (int ax = 0; ax < d; ++ax) xdotm += ft.freq[idx[ax]] * m[ax].coeffs[flat];
        for (int ax = 0; ax < d; ++ax) {
            cplx c = ft.freq[idx[ax]] * xdotm / a2;
            comp[ax].coeffs[flat] = c;
            sol[ax].coeffs[flat] = m[ax].coeffs[flat] - c;
        }
    });
    return {std::move(sol), std::move(comp)};
}

std::vector<SpectralField> wave_diffusion_approx(const SpectralState& u0, double t,
                                                 const FluidParams& p, double diffusivity) {
    if (t < 0) throw std::invalid_argument("wave_diffusion_approx: t must be >= 0");
    const double D = diffusivity > 0 ? diffusivity : 0.5 * p.lin_nu();
    const double gam = p.gamma();
    auto [sol, comp] = helmholtz_project(u0.m);
    (void)sol;
    std::vector<SpectralField> out;
    out.reserve(comp.size());
    for (auto& c : comp) {
        SpectralField w = apply_multiplier(c, [D, gam, t](const std::array<double, 3>& xi) {
            double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
            return std::exp(cplx{-t * D * r * r, t * gam * r});
        }, cplx{1, 0});
        w.hermitian = false; // e^{i t gamma |xi|} is even, not conjugate-even
        out.push_back(std::move(w));
    }
    return out;
}

double chi_low(double r, double cutoff) {
    // same C^inf step as the LP mother profile: 1 below cutoff/2, 0 above cutoff
    auto e = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    double x = 2.0 - 2.0 * r / cutoff;
    double num = e(x);
    double den = num + e(1.0 - x);
    return den > 0 ? num / den : 0.0;
}

RealField k_psi_kernel(const FluidParams& p, const Grid& g, double t,
                       const KernelProbeSpec& spec,
                       const std::function<double(const std::array<double, 3>&)>& psi,
                       double psi_zero_dir, double cutoff_freq) {
    if (t < 0) throw std::invalid_argument("k_psi_kernel: t must be >= 0");
    const double xc = transition_frequency(p);
    if (cutoff_freq > 0 && cutoff_freq > xc * (1 + 1e-12))
        throw std::invalid_argument(
            "k_psi_kernel: chi_L must be supported below the regime-transition frequency " +
            std::to_string(xc));
    const double cutoff = cutoff_freq > 0 ? cutoff_freq : xc;
    SpectralField sym(g, true);
    const FreqTable ft(g);
    const double norm =
        std::pow(2.0 * std::numbers::pi, -0.5 * g.d) * g.lattice_measure();
    int atot = 0;
    for (int ax = 0; ax < g.d; ++ax) atot += spec.x_deriv[ax];
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        if (g.is_nyquist(idx)) return;
        double a2 = ft.abs2(idx, g.d);
        double r = std::sqrt(a2);
        if (a2 == 0) {
            if (atot == 0)
                sym.coeffs[flat] = norm * psi_zero_dir * q_time_derivative(p, t, 0.0, spec.t_deriv);
            return;
        }
        double chi = chi_low(r, cutoff);
        if (chi == 0) return;
        double qk = q_time_derivative(p, t, a2, spec.t_deriv);
        std::array<double, 3> unit{0, 0, 0};
        for (int ax = 0; ax < g.d; ++ax) unit[ax] = ft.freq[idx[ax]] / r;
        double psival = psi ? psi(unit) : 1.0;
        cplx v = norm * chi * qk * psival;
        for (int ax = 0; ax < g.d; ++ax)
            for (int rep = 0; rep < spec.x_deriv[ax]; ++rep) v *= cplx{0, ft.freq[idx[ax]]};
        sym.coeffs[flat] = v;
    });
    return inverse_transform(sym);
}

double weighted_amplification(const FluidParams& p, double t,
                              const std::array<double, 3>& xi, int d) {
    GreenMatrixEval G = green_matrix(p, t, xi, d);
    double a2 = 0;
    for (int ax = 0; ax < d; ++ax) a2 += xi[ax] * xi[ax];
    const double w = std::sqrt(1.0 + a2); // <xi>
    double fro = 0;
    for (int i = 0; i < G.dim; ++i)
        for (int j = 0; j < G.dim; ++j) {
            double scale = (i == 0 ? w : 1.0) / (j == 0 ? w : 1.0);
            double v = std::abs(G.at(i, j)) * scale;
            fro += v * v;
        }
    return std::sqrt(fro);
}

} // namespace nsk
