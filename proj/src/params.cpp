#include "nsk/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nsk {

double PressureLaw::P(double rho) const {
    if (kind == Kind::GammaLaw) return A * std::pow(rho, G);
    double acc = 0, powr = 1;
    for (double c : coeffs) {
        acc += c * powr;
        powr *= rho;
    }
    return acc;
}

double PressureLaw::dP(double rho) const {
    if (kind == Kind::GammaLaw) return A * G * std::pow(rho, G - 1.0);
    double acc = 0, powr = 1;
    for (std::size_t i = 1; i < coeffs.size(); ++i) {
        acc += coeffs[i] * i * powr;
        powr *= rho;
    }
    return acc;
}

PressureLaw PressureLaw::gamma_law(double A, double G) {
    PressureLaw p;
    p.kind = Kind::GammaLaw;
    p.A = A;
    p.G = G;
    return p;
}

PressureLaw PressureLaw::polynomial(std::vector<double> coeffs) {
    PressureLaw p;
    p.kind = Kind::Polynomial;
    p.coeffs = std::move(coeffs);
    return p;
}

double FluidParams::gamma() const { return std::sqrt(gamma2()); }

void FluidParams::validate() const {
    std::string bad;
    if (!(mu > 0)) bad += "mu > 0 violated (mu=" + std::to_string(mu) + "); ";
    if (!(nu() > 0)) bad += "nu = lam + 2 mu > 0 violated (nu=" + std::to_string(nu()) + "); ";
    if (!(kappa > 0)) bad += "kappa > 0 violated (kappa=" + std::to_string(kappa) + "); ";
    if (!(rho_star > 0)) bad += "rho_star > 0 violated; ";
    else if (!(pressure.dP(rho_star) > 0))
        bad += "P'(rho_star) > 0 violated (P'=" + std::to_string(pressure.dP(rho_star)) + "); ";
    if (!bad.empty()) throw std::invalid_argument("FluidParams: " + bad);
}

} // namespace nsk
