#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nsk/integrator.hpp"
#include "nsk/lp.hpp"
#include "nsk/propagator.hpp"

namespace nsk {

struct NormSeries {
    std::string label;
    std::vector<double> times;  // strictly increasing
    std::vector<double> values; // nonnegative
    void validate() const;
};

struct RateFit {
    enum class Mode { Pointwise, Envelope };
    double exponent = 0;
    double amplitude = 0;
    double t0 = 0, t1 = 0;      // fit window
    double residual_rms = 0;    // in log space
    Mode mode = Mode::Pointwise;
    int samples = 0;
};

// d/2 (1 - 1/p) + s/2, valid for 1 <= p <= 2d/(d-1) and -d/p' < s <= 1 + d/p;
// out-of-range arguments are rejected naming the violated bound.
double theoretical_exponent(int d, double p, double s);

// min((3d-1)/4, d/2 + 1/2)
double diffusion_wave_exponent(int d);

// Least-squares slope of log(value) against log(t) over the window. Envelope
// mode first replaces each value by the max over the sliding factor-of-2
// window [t/sqrt(2), t sqrt(2)] (for oscillatory sup-norm series). Requires
// at least 8 in-window samples, all positive.
RateFit fit_rate(const NormSeries& series, double t0, double t1,
                 RateFit::Mode mode = RateFit::Mode::Pointwise);

// default fit window [5, min(50, 0.1/((2 pi/L)^2 nu))]: clear of the initial
// transient and of the finite-box decay floor e^{-delta (2 pi/L)^2 t}
std::pair<double, double> default_fit_window(const Grid& g, const FluidParams& p);

// --- per-snapshot formulas (shared by in-memory series and streaming observers)

// || U(t) - G(t) U0 || in the requested Fourier-Besov norm (components
// combined Euclidean, no Bessel weight)
double linear_residual_norm_at(const SpectralState& u, const SpectralState& u0,
                               const FluidParams& p, const DyadicPartition& part,
                               const BesovSpec& spec);

struct ResidualSeries {
    NormSeries residual; // ||U(t) - G(t)U0||
    NormSeries solution; // ||U(t)|| in the same norm, for exponent comparison
};

ResidualSeries linear_approx_residual(const std::vector<double>& times,
                                      const std::vector<SpectralState>& snaps,
                                      const SpectralState& u0, const FluidParams& p,
                                      const BesovSpec& spec);

struct DiffusionWaveSeries {
    NormSeries residual;     // ||(a, m - e^{t mu Lap} P_sigma m0)||_inf
    NormSeries solenoidal;   // ||e^{t mu Lap} P_sigma m0||_inf
    NormSeries compressible; // ||(Id - P_sigma) m(t)||_inf
    NormSeries wave_approx_err; // ||comp part - Re(e^{tD Lap}e^{it gamma|grad|} data)||_inf
};

DiffusionWaveSeries diffusion_wave_residual(const std::vector<double>& times,
                                            const std::vector<SpectralState>& snaps,
                                            const SpectralState& u0, const FluidParams& p);

// streaming versions for runs too large to retain snapshots
SimObserver linear_residual_observer(const std::string& name,
                                     std::shared_ptr<const SpectralState> u0,
                                     const FluidParams& p,
                                     std::shared_ptr<const DyadicPartition> part,
                                     const BesovSpec& spec);
SimObserver state_norm_observer(const std::string& name,
                                std::shared_ptr<const DyadicPartition> part,
                                const BesovSpec& spec);

struct KernelProbeResult {
    NormSeries series; // sup-norm of d_t^k d_x^alpha K_{psi,L}
    RateFit fit;
};

// sup-norm decay of the low-frequency kernel, fitted over [times.front(),
// times.back()]; Lemma 4.3 predicts exponent -(3d-3)/4 - (k+|alpha|)/2.
KernelProbeResult kernel_decay_probe(const FluidParams& p, const Grid& g,
                                     const std::vector<double>& times,
                                     int t_deriv, const std::array<int, 3>& x_deriv,
                                     RateFit::Mode mode = RateFit::Mode::Pointwise);

} // namespace nsk
