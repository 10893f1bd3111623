#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nsk/fft.hpp"
#include "nsk/grid.hpp"

namespace nsk {

// Scalar field sampled on the physical grid, x_i = (L/n)*i.
struct RealField {
    Grid grid;
    std::vector<double> samples;

    RealField() = default;
    explicit RealField(const Grid& g) : grid(g), samples(g.total(), 0.0) {}
    RealField(const Grid& g, std::vector<double> s);
};

// Fourier coefficients of a scalar field on the frequency lattice.
// `hermitian` asserts the field is real in physical space, i.e.
// coeffs(-k) = conj(coeffs(k)). Nyquist rows are zero-filled throughout.
struct SpectralField {
    Grid grid;
    CoeffArray coeffs;
    bool hermitian = true;

    SpectralField() = default;
    explicit SpectralField(const Grid& g, bool hermitian_ = true)
        : grid(g), coeffs(g.total(), cplx{0, 0}), hermitian(hermitian_) {}

    cplx& at(const std::array<int, 3>& idx) { return coeffs[grid.flat(idx)]; }
    const cplx& at(const std::array<int, 3>& idx) const { return coeffs[grid.flat(idx)]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double c);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double c, SpectralField a);

// Perturbation state (a, m) = (rho - rho*, momentum) at one time, all
// components on one grid, all hermitian.
struct SpectralState {
    SpectralField a;
    std::vector<SpectralField> m; // d components
    double time = 0.0;

    SpectralState() = default;
    explicit SpectralState(const Grid& g);
    const Grid& grid() const { return a.grid; }
    void check_consistent() const;
};

SpectralState operator-(const SpectralState& x, const SpectralState& y);

// --- transforms ---------------------------------------------------------

// DFT of real samples, normalized so a single mode e^{i xi.x} has coefficient
// 1 at xi. Zeroes the Nyquist rows of the result.
SpectralField forward_transform(const RealField& f);
// allocation-free variant for hot loops; `out` is resized to the grid
void forward_transform_into(const RealField& f, SpectralField& out);
// Inverse DFT; discards the imaginary residue (reported via *imag_linf when
// requested), which stays at rounding level for hermitian inputs.
RealField inverse_transform(const SpectralField& f, double* imag_linf = nullptr);

// --- multipliers ---------------------------------------------------------

// Symbol of a Fourier multiplier: value at frequency xi (xi[ax] for ax < d).
using Symbol = std::function<cplx(const std::array<double, 3>& xi)>;

// Pointwise multiplication of coefficients by symbol(xi). The symbol is never
// evaluated at xi = 0; `zero_mode_value` is applied there instead (the paper's
// homogeneous-space setting gives the zero mode no mass, so |xi|^s with s < 0
// takes the value 0 by the mean-free convention). Throws on non-finite symbol
// values at nonzero lattice points.
SpectralField apply_multiplier(const SpectralField& f, const Symbol& symbol,
                               cplx zero_mode_value);

// |xi|^s with the mean-free zero-mode convention (1 for s = 0, else 0).
SpectralField riesz(const SpectralField& f, double s);
// <xi>^s = (1+|xi|^2)^(s/2); zero mode value 1.
SpectralField bessel(const SpectralField& f, double s);
// i*xi_ax (partial derivative)
SpectralField derivative(const SpectralField& f, int ax);
// -|xi|^2 (Laplacian)
SpectralField laplacian(const SpectralField& f);

// Zeroes every coefficient with any |k_i| > n/3 (2/3-rule guard for
// pseudo-spectral products). Idempotent.
SpectralField dealias(const SpectralField& f);
void dealias_inplace(SpectralField& f);

// --- diagnostics ----------------------------------------------------------

// max over k of |coeffs(-k) - conj(coeffs(k))| relative to the field scale
double hermitian_defect(const SpectralField& f);
// enforce coeffs(-k) = conj(coeffs(k)) by averaging mirror pairs
void hermitianize(SpectralField& f);

// Discrete Fourier-side L^{p'} norm with lattice measure (2*pi/L)^d:
// (sum |c_k|^{pprime} (2pi/L)^d)^{1/pprime}; pprime = inf gives sup_k |c_k|.
double fourier_lp_norm(const SpectralField& f, double pprime);
// Physical-side L^q norm with the matching quadrature weight (2pi/L)^d / n^d;
// q = inf gives sup_x |f(x)| (measure-free).
double phys_lq_norm(const RealField& f, double q);
// sum_x |f| * dx^d, the conventional L^1 mass used for initial-data reports
double phys_l1_dx(const RealField& f);
// discrete L^2 pairing consistent with fourier_lp_norm(.,2)^2
double l2_inner(const SpectralField& f, const SpectralField& g);

// --- constructors ---------------------------------------------------------

struct GaussianBump {
    std::array<double, 3> center{0, 0, 0};
    double width = 1.0;
    double amplitude = 1.0;
};

RealField make_gaussian_field(const Grid& g, const std::vector<GaussianBump>& bumps);

// Random hermitian field supported on |xi| <= xi_cut, coefficients drawn as
// complex gaussians scaled by envelope(|xi|). Deterministic for a given seed
// (hand-rolled Box-Muller on a splitmix/mt19937_64 stream).
SpectralField make_band_limited_random(const Grid& g, double xi_cut,
                                       std::uint64_t seed,
                                       const std::function<double(double)>& envelope = {});

} // namespace nsk
