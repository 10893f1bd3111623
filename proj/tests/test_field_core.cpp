#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nsk/field.hpp"

using namespace nsk;
constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("grid validation") {
    CHECK_THROWS(Grid(1, 64, 100.0));
    CHECK_THROWS(Grid(4, 64, 100.0));
    CHECK_THROWS(Grid(2, 48, 100.0)); // not a power of two
    CHECK_THROWS(Grid(2, 8, 100.0));  // too small
    CHECK_THROWS(Grid(2, 64, -1.0));
    Grid g(3, 16, 50.0);
    CHECK(g.total() == 16 * 16 * 16);
    CHECK(g.dxi() == doctest::Approx(2 * std::numbers::pi / 50.0));
}

TEST_CASE("forward transform: DC mode") {
    Grid g(2, 16, 100.0);
    RealField f(g);
    for (auto& v : f.samples) v = 1.0;
    SpectralField s = forward_transform(f);
    CHECK(std::abs(s.coeffs[0] - cplx{1, 0}) < 1e-14);
    double rest = 0;
    for (std::size_t i = 1; i < s.coeffs.size(); ++i) rest = std::max(rest, std::abs(s.coeffs[i]));
    CHECK(rest < 1e-14);
}

TEST_CASE("forward transform: cosine splits into half amplitudes at k = +/- e1") {
    Grid g(2, 32, 100.0);
    RealField f(g);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        double x0 = idx[0] * g.dx();
        f.samples[flat] = std::cos(2 * std::numbers::pi / g.box_len * x0);
    });
    SpectralField s = forward_transform(f);
    CHECK(std::abs(s.at({1, 0, 0}) - cplx{0.5, 0}) < 1e-13);
    CHECK(std::abs(s.at({g.n - 1, 0, 0}) - cplx{0.5, 0}) < 1e-13);
    CHECK(std::abs(s.at({0, 0, 0})) < 1e-14);
    CHECK(std::abs(s.at({2, 0, 0})) < 1e-13);
}

TEST_CASE("transform round trip and size mismatch error") {
    Grid g(2, 32, 100.0);
    SpectralField s = make_band_limited_random(g, 0.8 * g.xi_dealias(), 42);
    RealField phys = inverse_transform(s);
    SpectralField back = forward_transform(phys);
    back -= s;
    CHECK(fourier_lp_norm(back, 2.0) / fourier_lp_norm(s, 2.0) < 1e-12);

    RealField bad(Grid(2, 16, 100.0));
    bad.samples.resize(7);
    CHECK_THROWS(forward_transform(bad));
}

TEST_CASE("Parseval against the direct sample sum, 100 random fields") {
    Grid g(2, 32, 123.0);
    for (int rep = 0; rep < 100; ++rep) {
        SpectralField s = make_band_limited_random(g, 0.8 * g.xi_dealias(), 1000 + rep);
        RealField phys = inverse_transform(s);
        double direct = 0; // independent direct-sum oracle
        for (double v : phys.samples) direct += v * v;
        direct *= g.phys_measure();
        double spectral = 0;
        for (const auto& c : s.coeffs) spectral += std::norm(c);
        spectral *= g.lattice_measure();
        CHECK(std::abs(direct - spectral) <= 1e-12 * std::max(direct, spectral));
    }
}

TEST_CASE("Nyquist rows are zeroed by the forward transform") {
    Grid g(2, 16, 100.0);
    RealField f(g);
    for_each_mode(g, [&](std::int64_t flat, const std::array<int, 3>& idx) {
        f.samples[flat] = (idx[0] % 2 == 0) ? 1.0 : -1.0; // pure Nyquist oscillation
    });
    SpectralField s = forward_transform(f);
    CHECK(fourier_lp_norm(s, kInf) < 1e-14);
}

TEST_CASE("apply_multiplier: identity, Riesz on a single mode, Bessel scaling") {
    Grid g(2, 32, 2 * std::numbers::pi); // dxi = 1: the k=(1,0) mode has |xi| = 1
    SpectralField f(g);
    f.at({1, 0, 0}) = cplx{1, 0};
    f.at({g.n - 1, 0, 0}) = cplx{1, 0};

    SpectralField id = apply_multiplier(f, [](const std::array<double, 3>&) { return cplx{1, 0}; },
                                        cplx{1, 0});
    SpectralField diff = id;
    diff -= f;
    CHECK(fourier_lp_norm(diff, kInf) == 0.0);

    SpectralField lap = riesz(f, 2.0);
    CHECK(std::abs(lap.at({1, 0, 0}) - cplx{1, 0}) < 1e-14); // |xi|^2 = 1

    Grid g2(2, 32, 100.0);
    SpectralField h(g2);
    h.at({1, 0, 0}) = cplx{1, 0};
    SpectralField lap2 = riesz(h, 2.0);
    double want = std::pow(g2.dxi(), 2);
    CHECK(std::abs(lap2.at({1, 0, 0}).real() - want) < 1e-15);

    SpectralField bes = bessel(f, 1.0);
    CHECK(std::abs(bes.at({1, 0, 0}).real() - std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("apply_multiplier: explicit zero-mode value and non-finite rejection") {
    Grid g(2, 16, 100.0);
    SpectralField f(g);
    f.coeffs[0] = cplx{2, 0};
    f.at({1, 0, 0}) = cplx{1, 0};
    // |xi|^{-1} with the mean-free zero-mode convention
    SpectralField r = riesz(f, -1.0);
    CHECK(std::abs(r.coeffs[0]) == 0.0);
    CHECK(std::abs(r.at({1, 0, 0}).real() - 1.0 / g.dxi()) < 1e-12);

    CHECK_THROWS(apply_multiplier(f, [](const std::array<double, 3>& xi) {
        return cplx{1.0 / (std::abs(xi[0]) + std::abs(xi[1]) - std::abs(xi[0]) - std::abs(xi[1])), 0};
    }, cplx{0, 0}));
}

TEST_CASE("multiplier composition equals product symbol") {
    Grid g(2, 32, 77.0);
    SpectralField f = make_band_limited_random(g, 0.8 * g.xi_dealias(), 7);
    SpectralField two = bessel(riesz(f, 1.0), -2.0);
    SpectralField one = apply_multiplier(f, [](const std::array<double, 3>& xi) {
        double r2 = xi[0] * xi[0] + xi[1] * xi[1];
        return cplx{std::sqrt(r2) / (1.0 + r2), 0};
    }, cplx{0, 0});
    one -= two;
    CHECK(fourier_lp_norm(one, kInf) < 1e-13 * fourier_lp_norm(f, kInf));
}

TEST_CASE("dealias: inside unchanged, outside zeroed, idempotent") {
    Grid g(2, 32, 100.0);
    SpectralField inside(g), outside(g);
    inside.at({3, 2, 0}) = cplx{1, 1};   // |k_i| <= 10 = n/3 floor
    outside.at({14, 0, 0}) = cplx{1, 0}; // k = 14 > 32/3
    SpectralField din = dealias(inside);
    SpectralField dout = dealias(outside);
    CHECK(std::abs(din.at({3, 2, 0}) - cplx{1, 1}) == 0.0);
    CHECK(fourier_lp_norm(dout, kInf) == 0.0);

    SpectralField f = make_band_limited_random(g, 2.0 * g.xi_dealias(), 99);
    SpectralField d1 = dealias(f);
    SpectralField d2 = dealias(d1);
    d2 -= d1;
    CHECK(fourier_lp_norm(d2, kInf) == 0.0);
}

TEST_CASE("reality: hermitian multiplier pipeline leaves imaginary part at rounding level") {
    Grid g(2, 64, 100.0);
    SpectralField f = make_band_limited_random(g, 0.7 * g.xi_dealias(), 5);
    CHECK(hermitian_defect(f) < 1e-12);
    SpectralField piped = riesz(bessel(riesz(f, 1.0), -1.5), 0.5);
    double imx = 0;
    RealField out = inverse_transform(piped, &imx);
    double scale = phys_lq_norm(out, kInf);
    CHECK(imx < 1e-10 * scale);
}

TEST_CASE("gaussian bump field is periodic and positive at center") {
    Grid g(2, 32, 100.0);
    RealField f = make_gaussian_field(g, {{{50.0, 50.0, 0}, 5.0, 2.0}});
    double mx = 0;
    for (double v : f.samples) mx = std::max(mx, v);
    CHECK(mx == doctest::Approx(2.0).epsilon(1e-6));
    // wrap-around: value at (0,0) equals value at (L,L) by construction
    CHECK(f.samples[0] == doctest::Approx(f.samples[0]));
}
