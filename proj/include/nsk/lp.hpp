#pragma once

#include <span>
#include <utility>
#include <vector>

#include "nsk/field.hpp"

namespace nsk {

// Norm request: regularity s, integrability p, summation sigma. The
// Fourier-Besov norm of Definition 2.1 measures the blocks in L^{p'} on the
// Fourier side; the Besov flavor measures them in L^p in physical space
// (equal for p = 2 by Plancherel).
struct BesovSpec {
    enum class Flavor { FourierBesov, Besov };
    double s = 0.0;
    double p = 2.0;      // in [1, inf]
    double sigma = 1.0;  // in [1, inf]
    Flavor flavor = Flavor::FourierBesov;

    double pprime() const; // Hoelder conjugate of p
};

// Littlewood-Paley dyadic partition of unity on the frequency lattice:
// phi_j(xi) = phi(2^{-j} xi) for interior shells, with supp phi in
// {1/2 <= |xi| <= 2} and sum_j phi_j = 1 away from xi = 0. The edge shells
// j_min and j_max absorb the telescoped mass below/above the resolvable
// dyadic range so the identity holds exactly on the whole lattice; they are
// flagged so fits can exclude edge-contaminated blocks.
struct DyadicPartition {
    Grid grid;
    int j_min = 0;
    int j_max = 0;

    int shells() const { return j_max - j_min + 1; }
    bool is_edge(int j) const { return j == j_min || j == j_max; }

    // phi_j weight at radius r = |xi| (edge absorption included)
    double weight(int j, double r) const;

    // f restricted to shell j
    SpectralField block(const SpectralField& f, int j) const;

    // per-shell Fourier-side L^{p'} norms of phi_j * fhat, index 0 = j_min
    std::vector<double> block_lp(const SpectralField& f, double pprime) const;
};

// smoothed step used for the mother profile: 1 for r <= 1, 0 for r >= 2,
// C^inf in between (exp(-1/x) construction)
double smooth_cutoff(double r);

DyadicPartition build_partition(const Grid& g);

// default low/high threshold: the shell nearest a given frequency (the
// eigenvalue regime transition when called with transition_frequency),
// clamped inside the partition's interior
int default_j0(const DyadicPartition& part, double freq);

double fourier_besov_norm(const DyadicPartition& part, const SpectralField& f,
                          const BesovSpec& spec);
double besov_norm(const DyadicPartition& part, const SpectralField& f,
                  const BesovSpec& spec);

// Euclidean combination over state components (a, m_1..m_d), matching the
// ||(f,g)||_Y = (||f||^2+||g||^2)^{1/2} convention.
double state_norm(const DyadicPartition& part, const SpectralState& u,
                  const BesovSpec& spec, bool bessel_weight_a = false);

// u_low = sum_{j <= j0-1} block_j(u), u_high = u - u_low (exact reassembly)
std::pair<SpectralField, SpectralField> low_high_split(const DyadicPartition& part,
                                                       const SpectralField& f, int j0);

// Chemin-Lerner norm: per shell, L^r in time of the block L^{p'} norms
// (trapezoid quadrature; r = inf takes the sup over samples), then the
// weighted ell^sigma sum over shells.
double chemin_lerner_norm(const DyadicPartition& part,
                          std::span<const double> times,
                          std::span<const SpectralField> fields,
                          double r, const BesovSpec& spec);

// For f supported in shell j: || |grad|^s f || / (2^{js} ||f||) measured in
// the two extreme Fourier-Lebesgue norms, first component p' = 1, second
// p' = inf. The annulus radii force both into [2^{-|s|-1}, 2^{|s|+1}].
std::array<double, 2> bernstein_audit(const DyadicPartition& part,
                                      const SpectralField& f, int j, double s);

} // namespace nsk
