#pragma once

#include <stdexcept>
#include <vector>

#include "nsk/field.hpp"
#include "nsk/params.hpp"

namespace nsk {

// Density reached the configured vacuum margin; carries the offending minimum
// of 1 + a/rho_star.
struct VacuumError : std::runtime_error {
    double min_value;
    VacuumError(double m, double margin)
        : std::runtime_error("vacuum margin violated: min(1 + a/rho*) = " + std::to_string(m) +
                             " <= margin " + std::to_string(margin)),
          min_value(m) {}
};

// I(a) = a/(1+a), evaluated pointwise (no series truncation). Requires
// min(1 + a) > margin: the density stays away from vacuum.
RealField i_fn(const RealField& a, double margin = 0.1);

// I_P(a) = P'(rho* + a) - P'(rho*), the pressure remainder multiplier:
// grad P(rho* + a) = gamma^2 grad a + I_P(a) grad a.
RealField pressure_remainder(const RealField& a, const PressureLaw& law,
                             double rho_star = 1.0, double margin = 0.1);

// Antiderivative Q with Q' = I_P and Q(0) = 0, i.e.
// Q(a) = P(rho*+a) - P(rho*) - P'(rho*) a. The momentum equation uses the
// remainder in gradient form grad Q(a), which kills its zero mode exactly on
// the lattice.
RealField pressure_remainder_potential(const RealField& a, const PressureLaw& law,
                                       double rho_star = 1.0, double margin = 0.1);

// Quadratic part of div K(rho* + a):
//   kappa/2 grad(Lap a^2) - kappa/2 grad(|grad a|^2) - kappa div(grad a (x) grad a),
// every product formed in physical space, transformed, dealiased. The linear
// part kappa rho* grad Lap a lives in the propagator, not here.
std::vector<SpectralField> korteweg_divergence(const SpectralField& a, double kappa);

// Momentum nonlinearity of the perturbation system, assembled as the residual
// of the primitive momentum equation minus the linear generator:
//   N(a,m) = div((I-1)/rho* m(x)m) - grad Q(a) - L_eff(I m) + div K_quad(a)
// with I = I(a/rho*) and L_eff = (mu Lap + (lam+mu) grad div)/rho*. Every
// term carries a leading derivative, so Nhat(0) = 0 exactly.
std::vector<SpectralField> assemble_N(const SpectralState& u, const FluidParams& p,
                                      double vacuum_margin = 0.1);

// min over the grid of 1 + a/rho_star (density in units of rho*)
double min_relative_density(const SpectralState& u, const FluidParams& p);

} // namespace nsk
