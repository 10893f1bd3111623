#include "nsk/decay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nsk {

void NormSeries::validate() const {
    if (times.size() != values.size())
        throw std::invalid_argument("NormSeries: length mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("NormSeries: times must be strictly increasing");
    for (double v : values)
        if (v < 0) throw std::invalid_argument("NormSeries: negative value");
}

double theoretical_exponent(int d, double p, double s) {
    if (d < 2 || d > 3) throw std::invalid_argument("theoretical_exponent: d must be 2 or 3");
    const double pmax = 2.0 * d / (d - 1.0);
    if (!(p >= 1.0 && p <= pmax))
        throw std::invalid_argument("theoretical_exponent: p out of range, need 1 <= p <= 2d/(d-1) = " +
                                    std::to_string(pmax));
    const double pprime = std::isinf(p) ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
    const double s_lo = std::isinf(pprime) ? -std::numeric_limits<double>::infinity() : -d / pprime;
    const double s_hi = 1.0 + d / p;
    if (!(s > s_lo && s <= s_hi))
        throw std::invalid_argument("theoretical_exponent: s out of range, need -d/p' < s <= 1 + d/p, i.e. (" +
                                    std::to_string(s_lo) + ", " + std::to_string(s_hi) + "]");
    return 0.5 * d * (1.0 - 1.0 / p) + 0.5 * s;
}

double diffusion_wave_exponent(int d) {
    if (d < 2 || d > 3) throw std::invalid_argument("diffusion_wave_exponent: d must be 2 or 3");
    return std::min((3.0 * d - 1.0) / 4.0, 0.5 * d + 0.5);
}

static NormSeries envelope_of(const NormSeries& s) {
    NormSeries out = s;
    const double f = std::sqrt(2.0);
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        double lo = s.times[i] / f, hi = s.times[i] * f;
        double m = 0;
        for (std::size_t j = 0; j < s.times.size(); ++j)
            if (s.times[j] >= lo && s.times[j] <= hi) m = std::max(m, s.values[j]);
        out.values[i] = m;
    }
    return out;
}

RateFit fit_rate(const NormSeries& series, double t0, double t1, RateFit::Mode mode) {
    series.validate();
    NormSeries s = (mode == RateFit::Mode::Envelope) ? envelope_of(series) : series;

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        if (s.times[i] < t0 || s.times[i] > t1) continue;
        if (!(s.values[i] > 0))
            throw std::invalid_argument("fit_rate: nonpositive value inside the fit window");
        lx.push_back(std::log(s.times[i]));
        ly.push_back(std::log(s.values[i]));
    }
    if (lx.size() < 8)
        throw std::invalid_argument("fit_rate: fewer than 8 samples in window [" +
                                    std::to_string(t0) + ", " + std::to_string(t1) + "]");
    const std::size_t n = lx.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    RateFit fit;
    fit.exponent = sxy / sxx;
    fit.amplitude = std::exp(my - fit.exponent * mx);
    fit.t0 = t0;
    fit.t1 = t1;
    fit.mode = mode;
    fit.samples = static_cast<int>(n);
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ly[i] - (my + fit.exponent * (lx[i] - mx));
        rss += r * r;
    }
    fit.residual_rms = std::sqrt(rss / n);
    return fit;
}

std::pair<double, double> default_fit_window(const Grid& g, const FluidParams& p) {
    double floor_t = 0.1 / (g.dxi() * g.dxi() * p.lin_nu());
    return {5.0, std::min(50.0, floor_t)};
}

double linear_residual_norm_at(const SpectralState& u, const SpectralState& u0,
                               const FluidParams& p, const DyadicPartition& part,
                               const BesovSpec& spec) {
    SpectralState lin = propagate(u0, u.time - u0.time, p);
    SpectralState diff = u - lin;
    return state_norm(part, diff, spec);
}

ResidualSeries linear_approx_residual(const std::vector<double>& times,
                                      const std::vector<SpectralState>& snaps,
                                      const SpectralState& u0, const FluidParams& p,
                                      const BesovSpec& spec) {
    if (times.size() != snaps.size() || times.empty())
        throw std::invalid_argument("linear_approx_residual: empty or mismatched trajectory");
    DyadicPartition part = build_partition(u0.grid());
    ResidualSeries out;
    out.residual.label = "linear_residual";
    out.solution.label = "solution_norm";
    for (std::size_t i = 0; i < times.size(); ++i) {
        out.residual.times.push_back(times[i]);
        out.solution.times.push_back(times[i]);
        out.residual.values.push_back(linear_residual_norm_at(snaps[i], u0, p, part, spec));
        out.solution.values.push_back(state_norm(part, snaps[i], spec));
    }
    return out;
}

static double sup_abs(const RealField& f) {
    double m = 0;
    for (double v : f.samples) m = std::max(m, std::abs(v));
    return m;
}

DiffusionWaveSeries diffusion_wave_residual(const std::vector<double>& times,
                                            const std::vector<SpectralState>& snaps,
                                            const SpectralState& u0, const FluidParams& p) {
    if (times.size() != snaps.size() || times.empty())
        throw std::invalid_argument("diffusion_wave_residual: empty or mismatched trajectory");
    DiffusionWaveSeries out;
    out.residual.label = "dw_residual";
    out.solenoidal.label = "solenoidal_linf";
    out.compressible.label = "compressible_linf";
    out.wave_approx_err.label = "wave_approx_err";

    auto [sol0, comp0] = helmholtz_project(u0.m);
    (void)comp0;
    const int d = u0.grid().d;

    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const SpectralState& u = snaps[i];

        double res = sup_abs(inverse_transform(u.a));
        double soln = 0, compn = 0, werr = 0;
        auto [sol_t, comp_t] = helmholtz_project(u.m);
        std::vector<SpectralField> approx = wave_diffusion_approx(u0, t, p);
        for (int ax = 0; ax < d; ++ax) {
            SpectralField heat_part = heat_semigroup(sol0[ax], t, p.lin_mu());
            SpectralField diff = u.m[ax];
            diff -= heat_part;
            res = std::max(res, sup_abs(inverse_transform(diff)));
            soln = std::max(soln, sup_abs(inverse_transform(heat_part)));
            compn = std::max(compn, sup_abs(inverse_transform(comp_t[ax])));
            // compare against the real part of the complex approximant
            {
                CoeffArray tmp(approx[ax].grid.total());
                fft::inverse(approx[ax].grid, approx[ax].coeffs.data(), tmp.data());
                RealField cphys = inverse_transform(comp_t[ax]);
                double mx = 0;
                for (std::size_t z = 0; z < tmp.size(); ++z)
                    mx = std::max(mx, std::abs(cphys.samples[z] - tmp[z].real()));
                werr = std::max(werr, mx);
            }
        }
        out.residual.times.push_back(t);
        out.residual.values.push_back(res);
        out.solenoidal.times.push_back(t);
        out.solenoidal.values.push_back(soln);
        out.compressible.times.push_back(t);
        out.compressible.values.push_back(compn);
        out.wave_approx_err.times.push_back(t);
        out.wave_approx_err.values.push_back(werr);
    }
    return out;
}

SimObserver linear_residual_observer(const std::string& name,
                                     std::shared_ptr<const SpectralState> u0,
                                     const FluidParams& p,
                                     std::shared_ptr<const DyadicPartition> part,
                                     const BesovSpec& spec) {
    // the linear companion trajectory is advanced incrementally; with a
    // uniform log cadence the propagator table is built once instead of per
    // snapshot
    struct Running {
        SpectralState lin;
        double t;
        std::unique_ptr<PropagatorTable> table;
    };
    auto run = std::make_shared<Running>(Running{*u0, u0->time, nullptr});
    return {name, [run, p, part, spec](double t, const SpectralState& u) {
                double step = t - run->t;
                if (step > 0) {
                    if (!run->table || run->table->t != step)
                        run->table = std::make_unique<PropagatorTable>(
                            PropagatorTable::build(p, run->lin.grid(), step));
                    run->table->apply(run->lin);
                    run->t = t;
                }
                SpectralState diff = u - run->lin;
                return state_norm(*part, diff, spec);
            }};
}

SimObserver state_norm_observer(const std::string& name,
                                std::shared_ptr<const DyadicPartition> part,
                                const BesovSpec& spec) {
    return {name, [part, spec](double, const SpectralState& u) {
                return state_norm(*part, u, spec);
            }};
}

KernelProbeResult kernel_decay_probe(const FluidParams& p, const Grid& g,
                                     const std::vector<double>& times,
                                     int t_deriv, const std::array<int, 3>& x_deriv,
                                     RateFit::Mode mode) {
    if (times.size() < 8)
        throw std::invalid_argument("kernel_decay_probe: window too short (need >= 8 samples)");
    KernelProbeResult out;
    out.series.label = "kernel_sup";
    KernelProbeSpec spec{t_deriv, x_deriv};
    for (double t : times) {
        RealField k = k_psi_kernel(p, g, t, spec);
        out.series.times.push_back(t);
        out.series.values.push_back(sup_abs(k));
    }
    out.fit = fit_rate(out.series, times.front(), times.back(), mode);
    return out;
}

} // namespace nsk
