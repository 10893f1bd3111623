#include "nsk/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace nsk {

void IntegratorConfig::validate() const {
    if (!(dt > 0)) throw std::invalid_argument("IntegratorConfig: dt must be > 0");
    if (!(t_end >= dt)) throw std::invalid_argument("IntegratorConfig: t_end must be >= dt");
    if (!(vacuum_margin > 0 && vacuum_margin < 1))
        throw std::invalid_argument("IntegratorConfig: vacuum_margin must lie in (0,1)");
}

static bool finite_state(const SpectralState& u) {
    auto ok = [](const SpectralField& f) {
        for (const auto& c : f.coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    };
    if (!ok(u.a)) return false;
    for (const auto& mi : u.m)
        if (!ok(mi)) return false;
    return true;
}

static SpectralState etd_step(const SpectralState& u, const PropagatorTable& tab,
                              const FluidParams& p, IntegratorConfig::Scheme scheme,
                              double margin, bool linear_only) {
    const double dt = tab.t;
    SpectralState gu = u;
    tab.apply(gu);
    gu.time = u.time + dt;
    if (linear_only) return gu;

    std::vector<SpectralField> n0 = assemble_N(u, p, margin);
    if (scheme == IntegratorConfig::Scheme::ETD1) {
        SpectralState out = gu;
        tab.apply_source(out, n0, dt);
        return out;
    }
    SpectralState pred = gu;
    tab.apply_source(pred, n0, dt);
    pred.time = u.time + dt;
    std::vector<SpectralField> n1 = assemble_N(pred, p, margin);
    SpectralState out = gu;
    tab.apply_source(out, n0, 0.5 * dt);
    for (int ax = 0; ax < u.grid().d; ++ax) {
        auto& dst = out.m[ax].coeffs;
        const auto& src = n1[ax].coeffs;
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += 0.5 * dt * src[i];
    }
    return out;
}

SpectralState duhamel_step(const SpectralState& u, double dt, const FluidParams& p,
                           IntegratorConfig::Scheme scheme, double vacuum_margin) {
    PropagatorTable tab = PropagatorTable::build(p, u.grid(), dt);
    SpectralState out = etd_step(u, tab, p, scheme, vacuum_margin, false);
    if (!finite_state(out)) throw BlowUpError(u.time);
    return out;
}

Stepper::Stepper(const Grid& g, const FluidParams& p, const IntegratorConfig& cfg)
    : params_(p), cfg_(cfg), table_(PropagatorTable::build(p, g, cfg.dt)) {
    cfg.validate();
    p.validate();
}

SpectralState Stepper::step(const SpectralState& u) const {
    SpectralState out =
        etd_step(u, table_, params_, cfg_.scheme, cfg_.vacuum_margin, cfg_.linear_only);
    if (!finite_state(out)) throw BlowUpError(u.time);
    return out;
}

namespace {

// Running Chemin-Lerner accumulator for X_p(t): per-component, per-shell sups
// for the Ltilde^inf part plus a trapezoid accumulator for the Bochner L^1
// part in the higher norm.
struct XpAccumulator {
    DyadicPartition part;
    BesovSpec low, high;
    std::vector<std::vector<double>> shell_sup; // [component][shell]
    double l1_acc = 0;
    double prev_t = 0, prev_val = 0;
    bool has_prev = false;

    XpAccumulator(const Grid& g, double p_index)
        : part(build_partition(g)) {
        low = {-1.0 + g.d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
        high = {1.0 + g.d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
        shell_sup.assign(1 + g.d, std::vector<double>(part.shells(), 0.0));
    }

    void ingest(double t, const SpectralState& u) {
        const double pprime = low.pprime();
        SpectralField wa = bessel(u.a, 1.0);
        auto blocks = part.block_lp(wa, pprime);
        for (int jj = 0; jj < part.shells(); ++jj)
            shell_sup[0][jj] = std::max(shell_sup[0][jj], blocks[jj]);
        for (int ax = 0; ax < u.grid().d; ++ax) {
            auto b = part.block_lp(u.m[ax], pprime);
            for (int jj = 0; jj < part.shells(); ++jj)
                shell_sup[1 + ax][jj] = std::max(shell_sup[1 + ax][jj], b[jj]);
        }
        double hv = state_norm(part, u, high, /*bessel_weight_a=*/true);
        if (has_prev) l1_acc += 0.5 * (t - prev_t) * (prev_val + hv);
        prev_t = t;
        prev_val = hv;
        has_prev = true;
    }

    double value() const {
        double sup_part2 = 0;
        for (const auto& comp : shell_sup) {
            double n = 0;
            for (int jj = 0; jj < part.shells(); ++jj)
                n += std::pow(2.0, low.s * (part.j_min + jj)) * comp[jj];
            sup_part2 += n * n;
        }
        return std::sqrt(sup_part2) + l1_acc;
    }
};

} // namespace

Trajectory run_simulation(const SpectralState& u0, const FluidParams& p,
                          const IntegratorConfig& cfg,
                          const std::vector<SimObserver>& observers, double xp_p) {
    cfg.validate();
    p.validate();
    u0.check_consistent();

    Trajectory traj;
    for (const auto& ob : observers) traj.series[ob.name] = {};

    const std::int64_t steps = std::llround(cfg.t_end / cfg.dt);
    const std::int64_t log_every =
        cfg.snapshot_cadence <= 0
            ? 1
            : std::max<std::int64_t>(1, std::llround(cfg.snapshot_cadence / cfg.dt));

    XpAccumulator xp(u0.grid(), xp_p);
    Stepper stepper(u0.grid(), p, cfg);

    SpectralState u = u0;
    u.time = 0;

    auto log_row = [&](const SpectralState& s) {
        traj.times.push_back(s.time);
        for (const auto& ob : observers) traj.series[ob.name].push_back(ob.eval(s.time, s));
        traj.min_density.push_back(min_relative_density(s, p));
        xp.ingest(s.time, s);
        traj.xp_value.push_back(xp.value());
        if (cfg.keep_snapshots) traj.snapshots.push_back(s);
    };

    log_row(u);
    try {
        for (std::int64_t i = 1; i <= steps; ++i) {
            u = stepper.step(u);
            u.time = i * cfg.dt; // avoid accumulated rounding in the clock
            if (i % log_every == 0 || i == steps) log_row(u);
        }
        traj.completed = true;
    } catch (const VacuumError& e) {
        traj.failure = e.what();
    } catch (const BlowUpError& e) {
        traj.failure = e.what();
    }
    traj.final_state = u;
    return traj;
}

double initial_smallness(const SpectralState& u0, double p_index) {
    DyadicPartition part = build_partition(u0.grid());
    const int d = u0.grid().d;
    BesovSpec lo{-1.0 + d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
    BesovSpec hi{d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
    double na = fourier_besov_norm(part, u0.a, lo) + fourier_besov_norm(part, u0.a, hi);
    double nm2 = 0;
    for (const auto& mi : u0.m) {
        double v = fourier_besov_norm(part, mi, lo);
        nm2 += v * v;
    }
    return na + std::sqrt(nm2);
}

namespace {

// CL_T distance of two trajectories sampled on one time grid:
// ||<grad>(da), dm||_{Ltilde^inf(B^{-1+d/p}_{p,1})} + L^1_t(B^{1+d/p}_{p,1})
double cl_distance(const DyadicPartition& part, const std::vector<double>& times,
                   const std::vector<SpectralState>& x, const std::vector<SpectralState>& y,
                   double p_index) {
    const int d = x[0].grid().d;
    BesovSpec lo{-1.0 + d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
    BesovSpec hi{1.0 + d / p_index, p_index, 1.0, BesovSpec::Flavor::FourierBesov};
    const double pprime = lo.pprime();

    std::vector<std::vector<double>> sup(1 + d, std::vector<double>(part.shells(), 0.0));
    double l1 = 0, prev = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        SpectralState diff = x[i] - y[i];
        SpectralField wa = bessel(diff.a, 1.0);
        auto blocks = part.block_lp(wa, pprime);
        for (int jj = 0; jj < part.shells(); ++jj)
            sup[0][jj] = std::max(sup[0][jj], blocks[jj]);
        for (int ax = 0; ax < d; ++ax) {
            auto b = part.block_lp(diff.m[ax], pprime);
            for (int jj = 0; jj < part.shells(); ++jj)
                sup[1 + ax][jj] = std::max(sup[1 + ax][jj], b[jj]);
        }
        double hv = state_norm(part, diff, hi, true);
        if (i > 0) l1 += 0.5 * (times[i] - times[i - 1]) * (prev + hv);
        prev = hv;
    }
    double sup2 = 0;
    for (const auto& comp : sup) {
        double n = 0;
        for (int jj = 0; jj < part.shells(); ++jj)
            n += std::pow(2.0, lo.s * (part.j_min + jj)) * comp[jj];
        sup2 += n * n;
    }
    return std::sqrt(sup2) + l1;
}

} // namespace

PicardReport picard_iterate(const SpectralState& u0, double horizon, double tol,
                            int max_iter, const FluidParams& p, double dt,
                            double smallness_threshold, double xp_p, double vacuum_margin) {
    p.validate();
    if (!(horizon >= dt && dt > 0)) throw std::invalid_argument("picard_iterate: bad (horizon, dt)");
    const Grid g = u0.grid();
    const std::int64_t M = std::llround(horizon / dt);

    PicardReport rep;
    rep.initial_norm = initial_smallness(u0, xp_p);
    rep.smallness_gate_ok = rep.initial_norm <= smallness_threshold;

    DyadicPartition part = build_partition(g);
    PropagatorTable tab = PropagatorTable::build(p, g, dt);

    rep.times.resize(M + 1);
    for (std::int64_t i = 0; i <= M; ++i) rep.times[i] = i * dt;

    // iterate 0: the linear flow
    std::vector<SpectralState> prev(M + 1, u0);
    for (std::int64_t i = 1; i <= M; ++i) {
        prev[i] = prev[i - 1];
        tab.apply(prev[i]);
        prev[i].time = i * dt;
    }

    for (int k = 1; k <= max_iter; ++k) {
        // nonlinearity frozen at the previous iterate
        std::vector<std::vector<SpectralField>> nprev(M + 1);
        for (std::int64_t i = 0; i <= M; ++i) nprev[i] = assemble_N(prev[i], p, vacuum_margin);

        std::vector<SpectralState> next(M + 1, u0);
        for (std::int64_t i = 0; i < M; ++i) {
            SpectralState s = next[i];
            tab.apply(s);
            tab.apply_source(s, nprev[i], 0.5 * dt);
            for (int ax = 0; ax < g.d; ++ax) {
                auto& dst = s.m[ax].coeffs;
                const auto& src = nprev[i + 1][ax].coeffs;
                for (std::size_t z = 0; z < dst.size(); ++z) dst[z] += 0.5 * dt * src[z];
            }
            s.time = (i + 1) * dt;
            next[i + 1] = std::move(s);
        }

        double dist = cl_distance(part, rep.times, next, prev, xp_p);
        rep.distances.push_back(dist);
        if (rep.distances.size() > 1) {
            double prev_d = rep.distances[rep.distances.size() - 2];
            rep.ratios.push_back(prev_d > 0 ? dist / prev_d : 0.0);
        }
        rep.iterations = k;
        prev = std::move(next);
        if (dist < tol) {
            rep.converged = true;
            break;
        }
    }
    rep.contraction_observed =
        !rep.ratios.empty() &&
        std::all_of(rep.ratios.begin(), rep.ratios.end(), [](double r) { return r < 1.0; });
    rep.limit = std::move(prev);
    return rep;
}

} // namespace nsk
