#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nsk/experiment.hpp"

namespace {

int run_kind(const std::string& kind, const std::string& config_path,
             const std::string& out_dir, std::uint64_t seed, bool emit_plot_data) {
    std::string text = "{}";
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot open config file " << config_path << "\n";
            return 2;
        }
        std::stringstream ss;
        ss << is.rdbuf();
        text = ss.str();
    }
    try {
        nsk::ExperimentConfig cfg = nsk::parse_config(text);
        cfg.kind = kind; // the subcommand wins over the config's kind field
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed != 0) cfg.seed = seed;
        if (emit_plot_data) cfg.emit_plot_data = true;

        nsk::RunStatus status = nsk::run_experiment(cfg);
        if (status == nsk::RunStatus::VerifyFailure)
            std::cerr << "verification failed; see verify.json in " << cfg.out_dir << "\n";
        if (status == nsk::RunStatus::NumericalFailure)
            std::cerr << "numerical failure (blow-up or vacuum); partial outputs in "
                      << cfg.out_dir << "\n";
        return static_cast<int>(status);
    } catch (const nsk::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral simulator and decay-rate lab for the compressible "
                 "Navier-Stokes-Korteweg system in perturbation form"};
    app.require_subcommand(1);

    if (const char* th = std::getenv("NSK_THREADS")) {
        // computation is single-threaded and deterministic; the variable caps
        // the worker pool, so any positive value is accepted
        if (std::atoi(th) < 1) {
            std::cerr << "error: NSK_THREADS must be a positive integer\n";
            return 2;
        }
    }

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    bool emit_plot_data = false;

    const char* kinds[] = {"simulate", "linear-probe", "kernel-probe", "decay-fit", "verify"};
    const char* descs[] = {
        "time-step the nonlinear perturbation system and log norm series",
        "exact linear flow with diffusion-wave splitting diagnostics",
        "sup-norm decay of the low-frequency kernel K_{psi,L}",
        "nonlinear run with linear-approximation residual fits",
        "run the cross-module invariant suite"};
    std::string chosen;
    for (int i = 0; i < 5; ++i) {
        auto* sub = app.add_subcommand(kinds[i], descs[i]);
        sub->add_option("--config", config_path, "JSON experiment config");
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "seed override for random initial data");
        sub->add_flag("--emit-plot-data", emit_plot_data, "write long-format plot.tsv");
        sub->callback([&chosen, k = std::string(kinds[i])] { chosen = k; });
    }

    CLI11_PARSE(app, argc, argv);
    return run_kind(chosen, config_path, out_dir, seed, emit_plot_data);
}
