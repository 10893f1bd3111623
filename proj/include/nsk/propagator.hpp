#pragma once

#include <array>
#include <functional>
#include <vector>

#include "nsk/field.hpp"
#include "nsk/params.hpp"

namespace nsk {

// Growth rates at one frequency: roots of
//   lambda^2 + nu |xi|^2 lambda + |xi|^2 (gamma^2 + kappa |xi|^2) = 0,
// lambda_plus carrying the + sign of the closed form
//   lambda_pm = -(nu/2)|xi|^2 (1 +/- sqrt(1 - 4 kappa/nu^2 - 4 gamma^2/(nu^2 |xi|^2))).
struct EigenPair {
    cplx lambda_plus;
    cplx lambda_minus;
};

EigenPair eigenvalues(const FluidParams& p, double xi_abs2);
EigenPair eigenvalues(const FluidParams& p, const std::array<double, 3>& xi, int d);

// |xi| where the discriminant changes sign (oscillatory -> diffusive roots).
// When nu^2 <= 4 kappa the roots stay complex at every frequency; the
// acoustic/capillary balance scale gamma/sqrt(kappa) is returned instead.
double transition_frequency(const FluidParams& p);

// The scalar ingredients of the Green matrix at one (t, |xi|^2); all four are
// real in both root regimes. Near-confluent roots
// (|l+ - l-| <= 1e-6 (|l+|+|l-|)) switch to the repeated-root limits built on
// t e^{lambda t}.
struct GreenScalars {
    double g11;  // (l+ e^{l- t} - l- e^{l+ t}) / (l+ - l-)
    double q;    // (e^{l+ t} - e^{l- t}) / (l+ - l-)
    double gll;  // (l+ e^{l+ t} - l- e^{l- t}) / (l+ - l-)
    double heat; // e^{-mu |xi|^2 t}, the solenoidal block
};
GreenScalars green_scalars(const FluidParams& p, double t, double xi_abs2);

// d-th time derivative of q; q itself for k = 0 (kernel probes use k <= 2)
double q_time_derivative(const FluidParams& p, double t, double xi_abs2, int k);

// Full (1+d) x (1+d) per-mode propagator, rows/cols ordered (a, m_1..m_d):
//   [ g11              , -i q xi^T                                   ]
//   [ -i xi (g^2+k x^2) q , gll xi xi^T/|xi|^2 + heat (Id - xi xi^T/|xi|^2) ]
struct GreenMatrixEval {
    int dim = 0; // 1 + d
    std::array<cplx, 16> e{};
    cplx& at(int i, int j) { return e[i * dim + j]; }
    const cplx& at(int i, int j) const { return e[i * dim + j]; }
};

GreenMatrixEval green_matrix(const FluidParams& p, double t, const std::array<double, 3>& xi, int d);

// Scalars tabulated over a grid's frequency lattice so repeated steps with one
// (t, params) pair cost only per-mode arithmetic.
struct PropagatorTable {
    Grid grid;
    double t = 0;
    FluidParams params;
    std::vector<double> g11, q, gll, heat;

    static PropagatorTable build(const FluidParams& p, const Grid& g, double t);
    // U <- G(t) U; the xi = 0 mode is untouched (zero symbol there)
    void apply(SpectralState& u) const;
    // y <- y + G(t) (0, n)  for a momentum-only source n
    void apply_source(SpectralState& y, const std::vector<SpectralField>& n,
                      double weight) const;
};

// exact linear flow: applies G(t, xi) mode by mode
SpectralState propagate(const SpectralState& u, double t, const FluidParams& p);

// e^{t diff Laplace} f = F^-1[e^{-t diff |xi|^2} fhat]
SpectralField heat_semigroup(const SpectralField& f, double t, double diffusivity);

// Leray/Helmholtz splitting: first = P_sigma m (divergence-free), second =
// m - P_sigma m = F^-1[xi (xi.mhat)/|xi|^2]. The xi = 0 mode goes wholly to
// the solenoidal part.
std::pair<std::vector<SpectralField>, std::vector<SpectralField>>
helmholtz_project(const std::vector<SpectralField>& m);

// Leading-order model of the compressible block: multiplier
// e^{-t D |xi|^2} e^{i t gamma |xi|} applied to the compressible part of m0.
// D defaults to Re lambda_pm / -|xi|^2 = nu/2. Output is complex-valued
// (hermitian flag cleared); comparisons against the real solution take the
// real part.
std::vector<SpectralField> wave_diffusion_approx(const SpectralState& u0, double t,
                                                 const FluidParams& p,
                                                 double diffusivity = -1.0);

// Low-frequency kernel K_{psi,L}(t,x) = F^-1[chi_L(xi) q(t,xi) psi(xi/|xi|)]
// with the lattice-measure normalization (2 pi)^{-d/2} (2 pi/L)^d, optionally
// with time derivative of order k and spatial derivative multi-index alpha.
struct KernelProbeSpec {
    int t_deriv = 0;
    std::array<int, 3> x_deriv{0, 0, 0};
};

RealField k_psi_kernel(const FluidParams& p, const Grid& g, double t,
                       const KernelProbeSpec& spec = {},
                       const std::function<double(const std::array<double, 3>&)>& psi = {},
                       double psi_zero_dir = 1.0,
                       double cutoff_freq = -1.0);

// smooth low-pass: 1 below cutoff/2, 0 above cutoff
double chi_low(double r, double cutoff);

// Frobenius norm of D G(t,xi) D^-1 with D = diag(<xi>, 1, ..., 1); the
// quantity bounded by C e^{-delta0 |xi|^2 t} in the pointwise estimate.
double weighted_amplification(const FluidParams& p, double t,
                              const std::array<double, 3>& xi, int d);

} // namespace nsk
