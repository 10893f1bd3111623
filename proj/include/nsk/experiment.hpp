#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsk/decay.hpp"
#include "nsk/integrator.hpp"

namespace nsk {

struct ConfigError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ConfigError(std::vector<std::string> v);
};

struct InitialDataSpec {
    enum class Type { Gaussian, Random, Zero };
    Type type = Type::Gaussian;

    struct Bump {
        std::array<double, 3> center{0, 0, 0};
        double width = 1.0;
        double amplitude = 1.0;
        std::string component = "a"; // a | m0 | m1 | m2
    };
    std::vector<Bump> bumps;

    // band-limited random
    std::uint64_t seed = 1;
    double xi_cut = 1.0;
    double amplitude = 0.01;
    double envelope_power = 0.0; // coefficient envelope |xi|^power
    bool zero_mean = true;
};

struct NormRequest {
    BesovSpec spec;
    std::string field = "m"; // a | m | state
    std::string name() const;
};

struct FitRequest {
    std::string series;   // column name in the norm log
    double t0 = 5, t1 = 50;
    RateFit::Mode mode = RateFit::Mode::Pointwise;
    std::optional<double> target; // theorem exponent to compare against
    double tol = 0.1;
};

struct KernelProbeConfig {
    double t0 = 5, t1 = 80;
    int count = 40;
    int t_deriv = 0;
    std::array<int, 3> x_deriv{0, 0, 0};
};

struct ExperimentConfig {
    std::string kind = "simulate"; // simulate | linear-probe | kernel-probe | decay-fit | verify
    Grid grid{2, 256, 200.0};
    FluidParams params;
    InitialDataSpec initial;
    IntegratorConfig integrator;
    std::vector<NormRequest> norms;
    bool log_linf = true;
    bool log_l1 = true;
    std::vector<FitRequest> fits;
    KernelProbeConfig probe;
    double smallness_threshold = 0.006; // bisected on the reference config
    std::optional<int> j0;              // low/high split threshold shell
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool emit_plot_data = false;
    bool save_snapshots = false;
};

// Parses and fully validates a JSON config document. Unknown keys are
// rejected; every violated constraint is reported at once.
ExperimentConfig parse_config(const std::string& text);
std::string serialize_config(const ExperimentConfig& cfg); // canonical echo

SpectralState build_initial_state(const ExperimentConfig& cfg);

enum class RunStatus { Ok = 0, ConfigFailure = 2, NumericalFailure = 3, VerifyFailure = 4 };

// Runs the configured experiment, writing manifest.json, norms.csv, fits.json
// (and optional snapshots / plot data) into cfg.out_dir.
RunStatus run_experiment(const ExperimentConfig& cfg);

// --- snapshot container -----------------------------------------------------

// Self-describing binary snapshot: magic, version, (d, n, L, time), a hash of
// the fluid parameters, then interleaved little-endian float64 (re, im)
// coefficients per component in the order a, m_0..m_{d-1}.
void write_snapshot(const std::filesystem::path& file, const SpectralState& u,
                    const FluidParams& p);

struct SnapshotReadResult {
    SpectralState state;
    bool params_hash_matches = true;
};
SnapshotReadResult read_snapshot(const std::filesystem::path& file, const FluidParams& p);

std::uint64_t params_hash(const FluidParams& p);

// --- verify suite -------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The cross-module invariant suite behind `nsk verify`.
std::vector<CheckResult> run_verify_suite(std::uint64_t seed = 12345);

} // namespace nsk
