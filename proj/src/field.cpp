#include "nsk/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace nsk {

RealField::RealField(const Grid& g, std::vector<double> s) : grid(g), samples(std::move(s)) {
    if (static_cast<std::int64_t>(samples.size()) != g.total())
        throw std::invalid_argument("RealField: sample count does not match grid");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    if (!(grid == o.grid)) throw std::invalid_argument("SpectralField: grid mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    hermitian = hermitian && o.hermitian;
    return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
    if (!(grid == o.grid)) throw std::invalid_argument("SpectralField: grid mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    hermitian = hermitian && o.hermitian;
    return *this;
}
SpectralField& SpectralField::operator*=(double c) {
    for (auto& v : coeffs) v *= c;
    return *this;
}
SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double c, SpectralField a) { return a *= c; }

SpectralState::SpectralState(const Grid& g) : a(g), m(g.d, SpectralField(g)) {}

void SpectralState::check_consistent() const {
    if (static_cast<int>(m.size()) != a.grid.d)
        throw std::invalid_argument("SpectralState: momentum component count != d");
    for (const auto& mi : m)
        if (!(mi.grid == a.grid)) throw std::invalid_argument("SpectralState: grid mismatch");
}

SpectralState operator-(const SpectralState& x, const SpectralState& y) {
    SpectralState r = x;
    r.a -= y.a;
    for (std::size_t i = 0; i < r.m.size(); ++i) r.m[i] -= y.m[i];
    return r;
}

// --- transforms ------------------------------------------------------------

static void zero_nyquist(SpectralField& f) {
    const int half = f.grid.n / 2;
    for_each_mode(f.grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        for (int ax = 0; ax < f.grid.d; ++ax)
            if (idx[ax] == half) {
                f.coeffs[flat] = cplx{0, 0};
                return;
            }
    });
}

namespace {
// reused staging buffer for the complex side of the transforms; transforms of
// large 3-d fields would otherwise spend a sizable fraction of their time in
// allocation and page faults
CoeffArray& stage_buffer(std::int64_t total) {
    static thread_local CoeffArray stage;
    stage.resize(total);
    return stage;
}
} // namespace

SpectralField forward_transform(const RealField& f) {
    SpectralField out;
    forward_transform_into(f, out);
    return out;
}

void forward_transform_into(const RealField& f, SpectralField& out) {
    if (static_cast<std::int64_t>(f.samples.size()) != f.grid.total())
        throw std::invalid_argument("forward_transform: sample count does not match grid");
    CoeffArray& in = stage_buffer(f.grid.total());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = cplx{f.samples[i], 0};
    out.grid = f.grid;
    out.hermitian = true;
    out.coeffs.resize(f.grid.total());
    fft::forward(f.grid, in.data(), out.coeffs.data());
    zero_nyquist(out);
}

RealField inverse_transform(const SpectralField& f, double* imag_linf) {
    CoeffArray& out = stage_buffer(f.grid.total());
    fft::inverse(f.grid, f.coeffs.data(), out.data());
    RealField r(f.grid);
    double imx = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        r.samples[i] = out[i].real();
        imx = std::max(imx, std::abs(out[i].imag()));
    }
    if (imag_linf) *imag_linf = imx;
    return r;
}

// --- multipliers ------------------------------------------------------------

SpectralField apply_multiplier(const SpectralField& f, const Symbol& symbol,
                               cplx zero_mode_value) {
    SpectralField out(f.grid, f.hermitian);
    const FreqTable ft(f.grid);
    bool still_hermitian = f.hermitian;
    for_each_mode(f.grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        bool zero = true;
        std::array<double, 3> xi{0, 0, 0};
        for (int ax = 0; ax < f.grid.d; ++ax) {
            xi[ax] = ft.freq[idx[ax]];
            if (idx[ax] != 0) zero = false;
        }
        cplx s;
        if (zero) {
            s = zero_mode_value;
        } else {
            s = symbol(xi);
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                throw std::invalid_argument("apply_multiplier: non-finite symbol value at a lattice point");
        }
        out.coeffs[flat] = s * f.coeffs[flat];
    });
    // hermitian is preserved when symbol(-xi) = conj(symbol(xi)); callers that
    // apply asymmetric symbols should clear the flag themselves. We keep the
    // flag and let hermitian_defect() catch accidental misuse in tests.
    out.hermitian = still_hermitian;
    return out;
}

static double abs_xi(const std::array<double, 3>& xi) {
    return std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
}

SpectralField riesz(const SpectralField& f, double s) {
    cplx zero = (s == 0.0) ? cplx{1, 0} : cplx{0, 0};
    return apply_multiplier(f, [s](const std::array<double, 3>& xi) {
        return cplx{std::pow(abs_xi(xi), s), 0};
    }, zero);
}

SpectralField bessel(const SpectralField& f, double s) {
    return apply_multiplier(f, [s](const std::array<double, 3>& xi) {
        double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        return cplx{std::pow(1.0 + r2, s / 2), 0};
    }, cplx{1, 0});
}

SpectralField derivative(const SpectralField& f, int ax) {
    if (ax < 0 || ax >= f.grid.d) throw std::invalid_argument("derivative: axis out of range");
    return apply_multiplier(f, [ax](const std::array<double, 3>& xi) {
        return cplx{0, xi[ax]};
    }, cplx{0, 0});
}

SpectralField laplacian(const SpectralField& f) {
    return apply_multiplier(f, [](const std::array<double, 3>& xi) {
        return cplx{-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0};
    }, cplx{0, 0});
}

void dealias_inplace(SpectralField& f) {
    const double cut = f.grid.n / 3.0;
    for_each_mode(f.grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        for (int ax = 0; ax < f.grid.d; ++ax) {
            if (std::abs(f.grid.signed_index(idx[ax])) > cut) {
                f.coeffs[flat] = cplx{0, 0};
                return;
            }
        }
    });
}

SpectralField dealias(const SpectralField& f) {
    SpectralField out = f;
    dealias_inplace(out);
    return out;
}

// --- diagnostics -------------------------------------------------------------

double hermitian_defect(const SpectralField& f) {
    double scale = 0, defect = 0;
    for_each_mode(f.grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        scale = std::max(scale, std::abs(f.coeffs[flat]));
        std::array<int, 3> mir = idx;
        for (int ax = 0; ax < f.grid.d; ++ax) mir[ax] = f.grid.mirror(idx[ax]);
        cplx diff = f.coeffs[f.grid.flat(mir)] - std::conj(f.coeffs[flat]);
        defect = std::max(defect, std::abs(diff));
    });
    return scale > 0 ? defect / scale : 0.0;
}

void hermitianize(SpectralField& f) {
    for_each_mode(f.grid, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        std::array<int, 3> mir = idx;
        for (int ax = 0; ax < f.grid.d; ++ax) mir[ax] = f.grid.mirror(idx[ax]);
        std::int64_t mflat = f.grid.flat(mir);
        if (mflat < flat) return; // handle each pair once
        cplx v = 0.5 * (f.coeffs[flat] + std::conj(f.coeffs[mflat]));
        f.coeffs[flat] = v;
        f.coeffs[mflat] = std::conj(v);
    });
    f.hermitian = true;
}

// --- norms -------------------------------------------------------------------

double fourier_lp_norm(const SpectralField& f, double pprime) {
    if (std::isinf(pprime)) {
        double m = 0;
        for (const auto& c : f.coeffs) m = std::max(m, std::abs(c));
        return m;
    }
    if (pprime < 1) throw std::invalid_argument("fourier_lp_norm: pprime must be >= 1");
    double acc = 0;
    for (const auto& c : f.coeffs) acc += std::pow(std::abs(c), pprime);
    return std::pow(acc * f.grid.lattice_measure(), 1.0 / pprime);
}

double phys_lq_norm(const RealField& f, double q) {
    if (std::isinf(q)) {
        double m = 0;
        for (double v : f.samples) m = std::max(m, std::abs(v));
        return m;
    }
    if (q < 1) throw std::invalid_argument("phys_lq_norm: q must be >= 1");
    double acc = 0;
    for (double v : f.samples) acc += std::pow(std::abs(v), q);
    return std::pow(acc * f.grid.phys_measure(), 1.0 / q);
}

double phys_l1_dx(const RealField& f) {
    double acc = 0;
    for (double v : f.samples) acc += std::abs(v);
    return acc * std::pow(f.grid.dx(), f.grid.d);
}

double l2_inner(const SpectralField& f, const SpectralField& g) {
    if (!(f.grid == g.grid)) throw std::invalid_argument("l2_inner: grid mismatch");
    double acc = 0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i)
        acc += (std::conj(f.coeffs[i]) * g.coeffs[i]).real();
    return acc * f.grid.lattice_measure();
}

// --- constructors --------------------------------------------------------------

RealField make_gaussian_field(const Grid& g, const std::vector<GaussianBump>& bumps) {
    RealField f(g);
    const double h = g.dx();
    const double L = g.box_len;
    std::array<int, 3> idx{0, 0, 0};
    for (std::int64_t flat = 0; flat < g.total(); ++flat) {
        double v = 0;
        for (const auto& b : bumps) {
            double r2 = 0;
            for (int ax = 0; ax < g.d; ++ax) {
                double dxa = idx[ax] * h - b.center[ax];
                dxa -= L * std::round(dxa / L); // periodic image
                r2 += dxa * dxa;
            }
            v += b.amplitude * std::exp(-r2 / (2 * b.width * b.width));
        }
        f.samples[flat] = v;
        for (int ax = g.d - 1; ax >= 0; --ax) {
            if (++idx[ax] < g.n) break;
            idx[ax] = 0;
        }
    }
    return f;
}

namespace {
// splitmix64: fixed, portable stream for reproducible draws
struct SplitMix {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; } // [0,1)
    cplx gauss_pair() {
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2 * std::numbers::pi * u2), r * std::sin(2 * std::numbers::pi * u2)};
    }
};
} // namespace

SpectralField make_band_limited_random(const Grid& g, double xi_cut, std::uint64_t seed,
                                       const std::function<double(double)>& envelope) {
    SpectralField f(g, true);
    const FreqTable ft(g);
    SplitMix rng{seed ^ 0x6e736b2d726e64ull};
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        if (g.is_nyquist(idx)) return;
        bool zero = true;
        for (int ax = 0; ax < g.d; ++ax)
            if (idx[ax] != 0) zero = false;
        if (zero) return;
        double r = std::sqrt(ft.abs2(idx, g.d));
        if (r > xi_cut) return;
        double amp = envelope ? envelope(r) : 1.0;
        f.coeffs[flat] = amp * rng.gauss_pair();
    });
    hermitianize(f);
    return f;
}

} // namespace nsk
