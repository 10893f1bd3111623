#include <doctest.h>

#include <cmath>

#include "nsk/integrator.hpp"

using namespace nsk;
constexpr double kInf = std::numeric_limits<double>::infinity();

namespace {

FluidParams default_params() {
    FluidParams p;
    p.mu = 1.0;
    p.lam = 0.0;
    p.kappa = 0.5;
    p.pressure = PressureLaw::gamma_law(0.5, 2.0); // gamma = 1
    return p;
}

SpectralState small_gaussian_state(const Grid& g, double amp) {
    SpectralState u(g);
    double c = g.box_len / 2;
    u.a = dealias(forward_transform(make_gaussian_field(g, {{{c, c, c}, g.box_len / 12, amp}})));
    u.m[0] = dealias(forward_transform(
        make_gaussian_field(g, {{{c * 0.8, c * 1.1, c}, g.box_len / 10, -amp}})));
    u.m[1] = dealias(forward_transform(
        make_gaussian_field(g, {{{c * 1.2, c * 0.9, c}, g.box_len / 14, 0.7 * amp}})));
    return u;
}

double state_dist(const SpectralState& x, const SpectralState& y) {
    SpectralState d = x - y;
    double m = fourier_lp_norm(d.a, kInf);
    for (const auto& mi : d.m) m = std::max(m, fourier_lp_norm(mi, kInf));
    return m;
}

double state_scale(const SpectralState& x) {
    double m = fourier_lp_norm(x.a, kInf);
    for (const auto& mi : x.m) m = std::max(m, fourier_lp_norm(mi, kInf));
    return m;
}

} // namespace

TEST_CASE("config validation") {
    IntegratorConfig cfg;
    cfg.dt = -1;
    CHECK_THROWS(cfg.validate());
    cfg.dt = 0.5;
    cfg.t_end = 0.1;
    CHECK_THROWS(cfg.validate());
    cfg.t_end = 1.0;
    cfg.vacuum_margin = 1.5;
    CHECK_THROWS(cfg.validate());
    cfg.vacuum_margin = 0.1;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("linear-only stepping equals the exact propagator for any dt") {
    Grid g(2, 32, 50.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.05);
    IntegratorConfig cfg;
    cfg.linear_only = true;
    for (double dt : {0.01, 0.37, 2.5}) {
        cfg.dt = dt;
        cfg.t_end = dt;
        Stepper st(g, p, cfg);
        SpectralState one = st.step(u);
        SpectralState ref = propagate(u, dt, p);
        CHECK(state_dist(one, ref) < 1e-13 * state_scale(ref));
    }
}

TEST_CASE("linear exactness: any step partition of [0,T] gives the same state") {
    Grid g(2, 32, 50.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.05);
    const double T = 2.0;
    SpectralState direct = propagate(u, T, p);

    for (int pieces : {4, 7, 16}) {
        IntegratorConfig cfg;
        cfg.linear_only = true;
        cfg.dt = T / pieces;
        cfg.t_end = T;
        Stepper st(g, p, cfg);
        SpectralState v = u;
        for (int i = 0; i < pieces; ++i) v = st.step(v);
        CHECK(state_dist(v, direct) < 1e-11 * state_scale(direct));
    }
}

TEST_CASE("duhamel_step: zero-mode conservation per step, ETD1 vs ETD2 agree at O(dt^2)") {
    Grid g(2, 32, 40.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.04);
    u.a.coeffs[0] = cplx{0.01, 0};
    u.m[0].coeffs[0] = cplx{-0.02, 0};

    SpectralState s1 = duhamel_step(u, 0.1, p, IntegratorConfig::Scheme::ETD1);
    SpectralState s2 = duhamel_step(u, 0.1, p, IntegratorConfig::Scheme::ETD2);
    CHECK(s1.a.coeffs[0] == u.a.coeffs[0]);
    CHECK(s2.a.coeffs[0] == u.a.coeffs[0]);
    CHECK(s1.m[0].coeffs[0] == u.m[0].coeffs[0]);
    CHECK(s2.m[0].coeffs[0] == u.m[0].coeffs[0]);
    CHECK(state_dist(s1, s2) < 0.1 * 0.1 * state_scale(u));
}

TEST_CASE("ETD2 order of accuracy: Richardson ratios in [3.3, 4.7]") {
    Grid g(2, 64, 40.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.08);
    const double T = 1.0;

    auto run = [&](double dt) {
        SpectralState v = u;
        PropagatorTable tab = PropagatorTable::build(p, g, dt);
        Stepper st(g, p, [&] {
            IntegratorConfig c;
            c.dt = dt;
            c.t_end = T;
            return c;
        }());
        int steps = static_cast<int>(std::llround(T / dt));
        for (int i = 0; i < steps; ++i) v = st.step(v);
        return v;
    };
    SpectralState ref = run(T / 160); // dt/8 reference
    double e1 = state_dist(run(T / 20), ref);
    double e2 = state_dist(run(T / 40), ref);
    double e3 = state_dist(run(T / 80), ref);
    double r1 = e1 / e2, r2 = e2 / e3;
    MESSAGE("Richardson ratios: ", r1, " ", r2, " (errors ", e1, " ", e2, " ", e3, ")");
    CHECK(r1 >= 3.3);
    CHECK(r1 <= 4.7);
    double order = std::log2(r1);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
}

TEST_CASE("zero-mode drift stays below 1e-11 over ten thousand steps") {
    Grid g(2, 16, 30.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.03);
    cplx a0 = u.a.coeffs[0], m0 = u.m[0].coeffs[0], m1 = u.m[1].coeffs[0];
    IntegratorConfig cfg;
    cfg.dt = 0.02;
    cfg.t_end = 200.0;
    Stepper st(g, p, cfg);
    SpectralState v = u;
    for (int i = 0; i < 10000; ++i) v = st.step(v);
    CHECK(std::abs(v.a.coeffs[0] - a0) < 1e-11);
    CHECK(std::abs(v.m[0].coeffs[0] - m0) < 1e-11);
    CHECK(std::abs(v.m[1].coeffs[0] - m1) < 1e-11);
}

TEST_CASE("run_simulation: zero data stays zero, linear mode matches propagate at snapshots") {
    Grid g(2, 32, 50.0);
    FluidParams p = default_params();
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 2.0;
    cfg.snapshot_cadence = 0.5;
    cfg.keep_snapshots = true;

    SpectralState zero(g);
    Trajectory tz = run_simulation(zero, p, cfg);
    CHECK(tz.completed);
    for (double v : tz.xp_value) CHECK(v == 0.0);
    for (const auto& s : tz.snapshots) CHECK(state_scale(s) == 0.0);

    cfg.linear_only = true;
    SpectralState u = small_gaussian_state(g, 0.05);
    Trajectory tl = run_simulation(u, p, cfg);
    REQUIRE(tl.completed);
    REQUIRE(tl.snapshots.size() == tl.times.size());
    for (std::size_t i = 0; i < tl.times.size(); ++i) {
        SpectralState ref = propagate(u, tl.times[i], p);
        CHECK(state_dist(tl.snapshots[i], ref) < 1e-12 * std::max(1e-300, state_scale(ref)));
    }
}

TEST_CASE("run_simulation: small-data boundedness of X_p and blow-up reporting") {
    Grid g(2, 64, 60.0);
    FluidParams p = default_params();
    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 10.0;
    cfg.snapshot_cadence = 0.5;

    SpectralState u = small_gaussian_state(g, 0.02);
    Trajectory tr = run_simulation(u, p, cfg);
    REQUIRE(tr.completed);
    double x0 = tr.xp_value.front();
    REQUIRE(x0 > 0);
    for (double v : tr.xp_value) CHECK(v <= 2.0 * x0); // frozen boundedness constant
    for (double v : tr.min_density) CHECK(v > 0.5);

    // vacuum breach: huge negative density bump aborts and reports failure
    SpectralState bad(g);
    bad.a = dealias(forward_transform(
        make_gaussian_field(g, {{{30, 30, 0}, 6.0, -0.97}})));
    Trajectory tb = run_simulation(bad, p, cfg);
    CHECK_FALSE(tb.completed);
    CHECK(!tb.failure.empty());
}

TEST_CASE("picard_iterate: zero data is an immediate fixed point") {
    Grid g(2, 32, 40.0);
    FluidParams p = default_params();
    SpectralState zero(g);
    PicardReport rep = picard_iterate(zero, 1.0, 1e-12, 5, p, 0.1);
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK(rep.distances.front() == 0.0);
    CHECK(state_scale(rep.limit.back()) == 0.0);
}

TEST_CASE("picard_iterate: contraction on small gaussian data, limit matches ETD2") {
    Grid g(2, 64, 40.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.05);
    const double T = 2.0, dt = 0.05, tol = 1e-7;
    PicardReport rep = picard_iterate(u, T, tol, 25, p, dt, /*smallness_threshold=*/1.0);
    REQUIRE(rep.converged);
    CHECK(rep.smallness_gate_ok);
    CHECK(rep.contraction_observed);
    REQUIRE(rep.ratios.size() >= 2);
    CHECK(rep.ratios[0] < 0.5);
    CHECK(rep.ratios[1] < 0.5);

    // two discretizations of the same Duhamel equation agree at the horizon
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_end = T;
    Stepper st(g, p, cfg);
    SpectralState v = u;
    int steps = static_cast<int>(std::llround(T / dt));
    for (int i = 0; i < steps; ++i) v = st.step(v);
    double d = state_dist(rep.limit.back(), v);
    MESSAGE("picard vs ETD2 at horizon: ", d, " (10 tol = ", 10 * tol, ")");
    CHECK(d <= 10 * tol);
}

TEST_CASE("picard_iterate: smallness gate flags large data without failing") {
    Grid g(2, 32, 40.0);
    FluidParams p = default_params();
    SpectralState u = small_gaussian_state(g, 0.05);
    PicardReport rep = picard_iterate(u, 0.5, 1e-9, 3, p, 0.05, /*smallness_threshold=*/1e-6);
    CHECK_FALSE(rep.smallness_gate_ok);
    CHECK(rep.initial_norm > 1e-6);
}
