#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace nsk {

// Discrete periodic box [0,L)^d sampled on n^d points, together with the
// frequency lattice xi_k = (2*pi/L)*k, k in [-n/2, n/2)^d.
//
// The Nyquist rows k_i = -n/2 are excluded from every spectral field (zeroed
// on construction): they have no mirror mode +n/2 on the lattice, which breaks
// the +/-xi symmetry that hermitian multipliers rely on.
struct Grid {
    int d = 2;            // spatial dimension, 2 or 3
    int n = 16;           // points per axis, power of two, >= 16
    double box_len = 100; // side length L

    Grid() = default;
    Grid(int d_, int n_, double box_len_);

    bool operator==(const Grid&) const = default;

    std::int64_t total() const {
        std::int64_t t = 1;
        for (int ax = 0; ax < d; ++ax) t *= n;
        return t;
    }

    // lattice spacing in frequency space, 2*pi/L
    double dxi() const;
    // frequency-lattice cell measure (2*pi/L)^d
    double lattice_measure() const;
    // physical quadrature weight per sample consistent with the lattice
    // measure convention: (2*pi/L)^d / n^d, so that discrete Plancherel holds
    // with equality between the two sides.
    double phys_measure() const;
    // physical grid spacing L/n
    double dx() const { return box_len / n; }
    // largest usable |xi| after 2/3 dealiasing, (2*pi/L)*(n/3)
    double xi_dealias() const;

    // signed per-axis lattice coordinate of storage index i in [0,n)
    int signed_index(int i) const { return i < n / 2 ? i : i - n; }
    // per-axis frequency of storage index i
    double freq(int i) const { return dxi() * signed_index(i); }

    // storage index of the mirror mode -k along one axis (Nyquist maps to
    // itself; it is always zero-filled)
    int mirror(int i) const { return i == 0 ? 0 : n - i; }

    std::int64_t flat(const std::array<int, 3>& idx) const {
        std::int64_t f = idx[0];
        for (int ax = 1; ax < d; ++ax) f = f * n + idx[ax];
        return f;
    }

    bool is_nyquist(const std::array<int, 3>& idx) const {
        for (int ax = 0; ax < d; ++ax)
            if (idx[ax] == n / 2) return true;
        return false;
    }
};

// Visits every lattice point in storage order. f(flat, idx) where idx holds
// the per-axis storage indices (idx[ax] in [0,n), axes >= d stay 0).
template <class F>
void for_each_mode(const Grid& g, F&& f) {
    std::array<int, 3> idx{0, 0, 0};
    const std::int64_t total = g.total();
    for (std::int64_t flat = 0; flat < total; ++flat) {
        f(flat, idx);
        for (int ax = g.d - 1; ax >= 0; --ax) {
            if (++idx[ax] < g.n) break;
            idx[ax] = 0;
        }
    }
}

// |xi| and xi components for a storage index triple.
struct FreqTable {
    explicit FreqTable(const Grid& g);
    std::vector<double> freq;   // per-axis frequency by storage index
    std::vector<double> freq2;  // squared
    double abs2(const std::array<int, 3>& idx, int d) const {
        double s = 0;
        for (int ax = 0; ax < d; ++ax) s += freq2[idx[ax]];
        return s;
    }
};

} // namespace nsk
