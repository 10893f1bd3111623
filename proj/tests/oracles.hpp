// Test-only oracles, independent of the implementation paths they check:
// a dense matrix exponential (scaling and squaring on the Taylor series), a
// high-order adaptive ODE integrator for the per-mode linear system, and the
// per-mode generator assembled directly from the Fourier-side equations.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "nsk/params.hpp"

namespace oracle {

using cplx = std::complex<double>;

template <int N>
struct Mat {
    std::array<cplx, N * N> e{};
    cplx& at(int i, int j) { return e[i * N + j]; }
    const cplx& at(int i, int j) const { return e[i * N + j]; }

    static Mat identity() {
        Mat m;
        for (int i = 0; i < N; ++i) m.at(i, i) = 1.0;
        return m;
    }
    Mat operator*(const Mat& o) const {
        Mat r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                cplx s{0, 0};
                for (int k = 0; k < N; ++k) s += at(i, k) * o.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }
    Mat operator+(const Mat& o) const {
        Mat r = *this;
        for (int i = 0; i < N * N; ++i) r.e[i] += o.e[i];
        return r;
    }
    Mat scaled(cplx c) const {
        Mat r = *this;
        for (auto& v : r.e) v *= c;
        return r;
    }
    double max_abs() const {
        double m = 0;
        for (const auto& v : e) m = std::max(m, std::abs(v));
        return m;
    }
};

// exp(A) by scaling and squaring with a long Taylor series
template <int N>
Mat<N> expm(Mat<N> a) {
    int squarings = 0;
    while (a.max_abs() > 0.25) {
        a = a.scaled(0.5);
        ++squarings;
    }
    Mat<N> sum = Mat<N>::identity();
    Mat<N> term = Mat<N>::identity();
    for (int k = 1; k <= 24; ++k) {
        term = (term * a).scaled(1.0 / k);
        sum = sum + term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

// generator of the Fourier-side linearized system at one frequency,
// rows/cols ordered (a, m_1..m_d):
//   da/dt = -i xi . m
//   dm/dt = -mu |xi|^2 m - (lam+mu) xi (xi.m) - i xi (gamma^2 + kappa |xi|^2) a
template <int N>
Mat<N> generator(const nsk::FluidParams& p, const std::array<double, 3>& xi) {
    constexpr int d = N - 1;
    double xi2 = 0;
    for (int ax = 0; ax < d; ++ax) xi2 += xi[ax] * xi[ax];
    Mat<N> A;
    const cplx im{0, 1};
    for (int ax = 0; ax < d; ++ax) {
        A.at(0, 1 + ax) = -im * xi[ax];
        A.at(1 + ax, 0) = -im * xi[ax] * (p.gamma2() + p.lin_kappa() * xi2);
        for (int bx = 0; bx < d; ++bx) {
            double val = -(p.lin_lam() + p.lin_mu()) * xi[ax] * xi[bx];
            if (ax == bx) val -= p.lin_mu() * xi2;
            A.at(1 + ax, 1 + bx) = val;
        }
    }
    return A;
}

// adaptive RK4 with step doubling: advances y' = A y over [0, t]
template <int N>
std::array<cplx, N> ode_solve(const Mat<N>& A, std::array<cplx, N> y, double t,
                              double tol = 1e-10) {
    auto rhs = [&](const std::array<cplx, N>& v) {
        std::array<cplx, N> out{};
        for (int i = 0; i < N; ++i) {
            cplx s{0, 0};
            for (int j = 0; j < N; ++j) s += A.at(i, j) * v[j];
            out[i] = s;
        }
        return out;
    };
    auto rk4 = [&](std::array<cplx, N> v, double h) {
        auto k1 = rhs(v);
        std::array<cplx, N> tmp;
        for (int i = 0; i < N; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
        auto k2 = rhs(tmp);
        for (int i = 0; i < N; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
        auto k3 = rhs(tmp);
        for (int i = 0; i < N; ++i) tmp[i] = v[i] + h * k3[i];
        auto k4 = rhs(tmp);
        for (int i = 0; i < N; ++i)
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return v;
    };
    double done = 0;
    double h = t / 64;
    while (done < t) {
        if (done + h > t) h = t - done;
        auto full = rk4(y, h);
        auto half = rk4(rk4(y, 0.5 * h), 0.5 * h);
        double err = 0;
        for (int i = 0; i < N; ++i) err = std::max(err, std::abs(full[i] - half[i]));
        if (err < tol || h < 1e-12 * t) {
            y = half;
            done += h;
            if (err < tol / 32) h *= 2;
        } else {
            h *= 0.5;
        }
    }
    return y;
}

// simple composite Simpson quadrature oracle
inline double simpson(const std::vector<double>& f, double h) {
    double s = f.front() + f.back();
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

} // namespace oracle
