#pragma once

#include <vector>

namespace nsk {

// Pressure law P(rho), real-analytic near the reference density by
// construction (gamma-law or polynomial).
struct PressureLaw {
    enum class Kind { GammaLaw, Polynomial };
    Kind kind = Kind::GammaLaw;
    // gamma-law: P = A * rho^G
    double A = 1.0;
    double G = 2.0;
    // polynomial: P = sum_i coeff[i] * rho^i
    std::vector<double> coeffs;

    double P(double rho) const;
    double dP(double rho) const;

    static PressureLaw gamma_law(double A, double G);
    static PressureLaw polynomial(std::vector<double> coeffs);
};

// Fluid coefficients. mu, lam, kappa are the constants of the momentum
// equation; the linearization around (rho_star, 0) carries them scaled by the
// reference density (lin_* accessors), which reduces to the plain values in
// the usual rho_star = 1 normalization.
struct FluidParams {
    double mu = 1.0;       // shear viscosity, > 0
    double lam = 0.0;      // second viscosity, nu = lam + 2 mu > 0
    double kappa = 1.0;    // capillarity, > 0
    double rho_star = 1.0; // reference density, > 0
    PressureLaw pressure = PressureLaw::gamma_law(0.5, 2.0); // P'(1) = 1

    double nu() const { return lam + 2.0 * mu; }
    double gamma2() const { return pressure.dP(rho_star); } // P'(rho*)
    double gamma() const;                                   // sqrt(P'(rho*))

    // coefficients of the linearized perturbation system
    double lin_mu() const { return mu / rho_star; }
    double lin_lam() const { return lam / rho_star; }
    double lin_nu() const { return nu() / rho_star; }
    double lin_kappa() const { return kappa * rho_star; }

    // throws with a message naming every violated standing assumption
    void validate() const;
};

} // namespace nsk
