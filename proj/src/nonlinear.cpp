#include "nsk/nonlinear.hpp"

#include <algorithm>
#include <cmath>

namespace nsk {

static double min_of(const RealField& f) {
    double m = f.samples.empty() ? 0.0 : f.samples[0];
    for (double v : f.samples) m = std::min(m, v);
    return m;
}

RealField i_fn(const RealField& a, double margin) {
    double mn = 1.0 + min_of(a);
    if (!(mn > margin)) throw VacuumError(mn, margin);
    RealField out(a.grid);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.samples[i] = a.samples[i] / (1.0 + a.samples[i]);
    return out;
}

RealField pressure_remainder(const RealField& a, const PressureLaw& law,
                             double rho_star, double margin) {
    double mn = 1.0 + min_of(a) / rho_star;
    if (!(mn > margin)) throw VacuumError(mn, margin);
    const double dp0 = law.dP(rho_star);
    RealField out(a.grid);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.samples[i] = law.dP(rho_star + a.samples[i]) - dp0;
    return out;
}

RealField pressure_remainder_potential(const RealField& a, const PressureLaw& law,
                                       double rho_star, double margin) {
    double mn = 1.0 + min_of(a) / rho_star;
    if (!(mn > margin)) throw VacuumError(mn, margin);
    const double p0 = law.P(rho_star);
    const double dp0 = law.dP(rho_star);
    RealField out(a.grid);
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.samples[i] = law.P(rho_star + a.samples[i]) - p0 - dp0 * a.samples[i];
    return out;
}

namespace {

struct PhysState {
    RealField a;
    std::vector<RealField> grad_a; // d components
    std::vector<RealField> m;      // d components (empty when not needed)
};

PhysState to_physical(const SpectralField& a, const std::vector<SpectralField>* m) {
    PhysState ps;
    ps.a = inverse_transform(a);
    const int d = a.grid.d;
    ps.grad_a.reserve(d);
    for (int ax = 0; ax < d; ++ax) ps.grad_a.push_back(inverse_transform(derivative(a, ax)));
    if (m)
        for (int ax = 0; ax < d; ++ax) ps.m.push_back(inverse_transform((*m)[ax]));
    return ps;
}

// reused buffers for the physical-space products and their transforms
struct Scratch {
    RealField prod;
    SpectralField spec;
    void ensure(const Grid& g) {
        if (!(prod.grid == g)) prod = RealField(g);
    }
};

// transforms prod, dealiases, and adds coeff * i xi_j spec into n[i] (and the
// mirrored i xi_i term into n[j] for off-diagonal symmetric-tensor entries)
void accumulate_tensor_entry(std::vector<SpectralField>& n, Scratch& s, int i, int j,
                             double coeff, const FreqTable& ft) {
    const Grid g = n[0].grid;
    forward_transform_into(s.prod, s.spec);
    dealias_inplace(s.spec);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        cplx v = s.spec.coeffs[flat];
        n[i].coeffs[flat] += coeff * cplx{0, ft.freq[idx[j]]} * v;
        if (i != j) n[j].coeffs[flat] += coeff * cplx{0, ft.freq[idx[i]]} * v;
    });
}

void add_korteweg(std::vector<SpectralField>& n, const PhysState& ps, double kappa,
                  Scratch& s) {
    const Grid g = ps.a.grid;
    const int d = g.d;
    const FreqTable ft(g);
    s.ensure(g);

    // kappa/2 grad(Lap a^2) - kappa/2 grad(|grad a|^2)
    for (std::size_t z = 0; z < s.prod.samples.size(); ++z)
        s.prod.samples[z] = ps.a.samples[z] * ps.a.samples[z];
    forward_transform_into(s.prod, s.spec);
    dealias_inplace(s.spec);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double xi2 = ft.abs2(idx, d);
        cplx v = -0.5 * kappa * xi2 * s.spec.coeffs[flat];
        for (int i = 0; i < d; ++i)
            n[i].coeffs[flat] += cplx{0, ft.freq[idx[i]]} * v;
    });

    for (std::size_t z = 0; z < s.prod.samples.size(); ++z) {
        double acc = 0;
        for (int ax = 0; ax < d; ++ax)
            acc += ps.grad_a[ax].samples[z] * ps.grad_a[ax].samples[z];
        s.prod.samples[z] = acc;
    }
    forward_transform_into(s.prod, s.spec);
    dealias_inplace(s.spec);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        cplx v = -0.5 * kappa * s.spec.coeffs[flat];
        for (int i = 0; i < d; ++i)
            n[i].coeffs[flat] += cplx{0, ft.freq[idx[i]]} * v;
    });

    // -kappa div(grad a (x) grad a)
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            for (std::size_t z = 0; z < s.prod.samples.size(); ++z)
                s.prod.samples[z] = ps.grad_a[i].samples[z] * ps.grad_a[j].samples[z];
            accumulate_tensor_entry(n, s, i, j, -kappa, ft);
        }
}

} // namespace

std::vector<SpectralField> korteweg_divergence(const SpectralField& a, double kappa) {
    const int d = a.grid.d;
    std::vector<SpectralField> n(d, SpectralField(a.grid));
    PhysState ps = to_physical(a, nullptr);
    Scratch s;
    add_korteweg(n, ps, kappa, s);
    return n;
}

std::vector<SpectralField> assemble_N(const SpectralState& u, const FluidParams& p,
                                      double vacuum_margin) {
    u.check_consistent();
    const Grid g = u.grid();
    const int d = g.d;
    const double rs = p.rho_star;
    const FreqTable ft(g);
    PhysState ps = to_physical(u.a, &u.m);

    RealField rel(g); // a / rho*
    for (std::size_t i = 0; i < rel.samples.size(); ++i) rel.samples[i] = ps.a.samples[i] / rs;
    RealField I = i_fn(rel, vacuum_margin); // throws on vacuum breach

    std::vector<SpectralField> n(d, SpectralField(g));
    Scratch s;
    s.ensure(g);

    // convection: div((I-1)/rho* m (x) m) = -div(rho^-1 m (x) m)
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            for (std::size_t z = 0; z < s.prod.samples.size(); ++z)
                s.prod.samples[z] = (I.samples[z] - 1.0) / rs *
                                    ps.m[i].samples[z] * ps.m[j].samples[z];
            accumulate_tensor_entry(n, s, i, j, 1.0, ft);
        }

    // pressure remainder in gradient form: - grad Q(a), Q' = I_P
    {
        const double p0 = p.pressure.P(rs), dp0 = p.pressure.dP(rs);
        for (std::size_t z = 0; z < s.prod.samples.size(); ++z)
            s.prod.samples[z] =
                p.pressure.P(rs + ps.a.samples[z]) - p0 - dp0 * ps.a.samples[z];
        forward_transform_into(s.prod, s.spec);
        dealias_inplace(s.spec);
        for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
            cplx v = s.spec.coeffs[flat];
            for (int i = 0; i < d; ++i)
                n[i].coeffs[flat] -= cplx{0, ft.freq[idx[i]]} * v;
        });
    }

    // viscous coupling: - L_eff(I m), L_eff = (mu Lap + (lam+mu) grad div)/rho*
    {
        std::vector<SpectralField> w(d);
        for (int ax = 0; ax < d; ++ax) {
            for (std::size_t z = 0; z < s.prod.samples.size(); ++z)
                s.prod.samples[z] = I.samples[z] * ps.m[ax].samples[z];
            forward_transform_into(s.prod, w[ax]);
            dealias_inplace(w[ax]);
        }
        const double cmu = p.lin_mu(), clm = p.lin_lam() + p.lin_mu();
        for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
            double xi2 = ft.abs2(idx, d);
            cplx xdotw{0, 0};
            for (int ax = 0; ax < d; ++ax) xdotw += ft.freq[idx[ax]] * w[ax].coeffs[flat];
            for (int i = 0; i < d; ++i)
                n[i].coeffs[flat] += cmu * xi2 * w[i].coeffs[flat] +
                                     clm * ft.freq[idx[i]] * xdotw;
        });
    }

    add_korteweg(n, ps, p.kappa, s);
    return n;
}

double min_relative_density(const SpectralState& u, const FluidParams& p) {
    RealField a = inverse_transform(u.a);
    return 1.0 + min_of(a) / p.rho_star;
}

} // namespace nsk
