#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsk/lp.hpp"
#include "nsk/nonlinear.hpp"
#include "nsk/propagator.hpp"

namespace nsk {

struct BlowUpError : std::runtime_error {
    double last_valid_time;
    BlowUpError(double t)
        : std::runtime_error("non-finite coefficients at t = " + std::to_string(t)),
          last_valid_time(t) {}
};

struct IntegratorConfig {
    enum class Scheme { ETD1, ETD2 };
    double dt = 0.01;
    Scheme scheme = Scheme::ETD2;
    double t_end = 1.0;
    double snapshot_cadence = 0.0; // time between log rows; 0 = every step
    double vacuum_margin = 0.1;
    bool linear_only = false;
    bool keep_snapshots = false; // retain full states at log times (small runs)

    void validate() const;
};

// One exponential step of the Duhamel formula
//   U(t+dt) = G(dt) U(t) + int_0^dt G(dt - tau) (0, N(U(t+tau))) dtau.
// ETD1 freezes N at the left endpoint; ETD2 corrects with the trapezoid using
// N at the ETD1 predictor. The linear flow is exact for any dt.
SpectralState duhamel_step(const SpectralState& u, double dt, const FluidParams& p,
                           IntegratorConfig::Scheme scheme,
                           double vacuum_margin = 0.1);

// Precomputed-table variant used by the run loop.
class Stepper {
  public:
    Stepper(const Grid& g, const FluidParams& p, const IntegratorConfig& cfg);
    SpectralState step(const SpectralState& u) const;

  private:
    FluidParams params_;
    IntegratorConfig cfg_;
    PropagatorTable table_;
};

// Named scalar diagnostic evaluated at snapshot times.
struct SimObserver {
    std::string name;
    std::function<double(double t, const SpectralState& u)> eval;
};

struct Trajectory {
    std::vector<double> times;                       // log times
    std::map<std::string, std::vector<double>> series;
    std::vector<double> min_density;                 // min(1 + a/rho*) per log time
    std::vector<double> xp_value;                    // running X_p(t)
    std::vector<SpectralState> snapshots;            // only when keep_snapshots
    SpectralState final_state;
    bool completed = false;
    std::string failure;
};

// Steps U0 to t_end, logging observers at the snapshot cadence and maintaining
// the running Theorem 2.4 functional
//   X_p(t) = ||(<grad>a, m)||_{Ltilde^inf(0,t; B^{-1+d/p}_{p,1})}
//          + ||(<grad>a, m)||_{L^1(0,t; B^{1+d/p}_{p,1})}.
// Blow-up (non-finite coefficients) or a vacuum breach aborts with the last
// valid snapshot already logged; `completed` distinguishes the outcomes.
Trajectory run_simulation(const SpectralState& u0, const FluidParams& p,
                          const IntegratorConfig& cfg,
                          const std::vector<SimObserver>& observers = {},
                          double xp_p = 2.0);

// --- Picard construction -----------------------------------------------------

struct PicardReport {
    std::vector<double> distances; // CL_T distance of successive iterates
    std::vector<double> ratios;    // distances[k]/distances[k-1]
    bool converged = false;
    bool contraction_observed = false;
    int iterations = 0;
    double initial_norm = 0;   // X_{p,0} of the data
    bool smallness_gate_ok = false;
    std::vector<double> times;
    std::vector<SpectralState> limit; // final iterate trajectory on the time grid
};

// Fixed-point construction of the solution map: iterate k solves the linear
// system with the nonlinearity frozen at iterate k-1 (iterate 0 is the linear
// flow), discretized on a uniform grid with the same exponential-trapezoid
// quadrature the ETD2 stepper uses. Distances between iterates are measured
// in the CL_T norm of the construction space.
PicardReport picard_iterate(const SpectralState& u0, double horizon, double tol,
                            int max_iter, const FluidParams& p, double dt,
                            double smallness_threshold = 1.0, double xp_p = 2.0,
                            double vacuum_margin = 0.1);

// X_{p,0} = ||a0||_{B^{-1+d/p} cap B^{d/p}} + ||m0||_{B^{-1+d/p}} (ell-1 sums)
double initial_smallness(const SpectralState& u0, double p_index);

} // namespace nsk
