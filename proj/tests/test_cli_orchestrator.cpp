#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsk/experiment.hpp"

using namespace nsk;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("nsk_test_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

const char* kMinimalConfig = R"({
  "kind": "simulate",
  "grid": {"d": 2, "n": 32, "box_len": 50.0},
  "integrator": {"dt": 0.1, "t_end": 1.0}
})";

} // namespace

TEST_CASE("parse_config: minimal document fills defaults and round-trips") {
    ExperimentConfig cfg = parse_config(kMinimalConfig);
    CHECK(cfg.grid.n == 32);
    CHECK(cfg.params.mu == 1.0); // default
    CHECK(cfg.integrator.scheme == IntegratorConfig::Scheme::ETD2);

    std::string echo = serialize_config(cfg);
    ExperimentConfig cfg2 = parse_config(echo);
    CHECK(serialize_config(cfg2) == echo);
}

TEST_CASE("parse_config: constraint violations are all reported and name the bound") {
    std::string bad = R"({
      "kind": "simulate",
      "grid": {"d": 2, "n": 32, "box_len": 50.0},
      "params": {"mu": -1.0, "kappa": -2.0}
    })";
    try {
        parse_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.violations.size() >= 2);
        bool mu_cited = false, kappa_cited = false;
        for (const auto& v : e.violations) {
            if (v.find("mu > 0") != std::string::npos) mu_cited = true;
            if (v.find("kappa") != std::string::npos) kappa_cited = true;
        }
        CHECK(mu_cited);
        CHECK(kappa_cited);
    }
}

TEST_CASE("parse_config: decay-fit p-range boundary acceptance and rejection") {
    auto cfg_with_p = [](double p) {
        std::ostringstream os;
        os << R"({"kind": "decay-fit", "grid": {"d": 2, "n": 32, "box_len": 50.0},)"
           << R"("norms": [{"s": 0, "p": )" << p << R"(, "sigma": 1}]})";
        return os.str();
    };
    CHECK_NOTHROW(parse_config(cfg_with_p(4.0))); // p = 2d/(d-1) = 4: boundary accepted
    try {
        parse_config(cfg_with_p(5.0));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool cited = false;
        for (const auto& v : e.violations)
            if (v.find("2d/(d-1)") != std::string::npos) cited = true;
        CHECK(cited);
    }
}

TEST_CASE("parse_config: unknown keys are rejected for typo safety") {
    std::string bad = R"({"kind": "simulate", "grdi": {"d": 2}})";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    std::string bad2 = R"({"kind": "simulate", "integrator": {"dt": 0.1, "tend": 1.0}})";
    CHECK_THROWS_AS(parse_config(bad2), ConfigError);
    CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
}

TEST_CASE("snapshot io: round trip exact, params-hash flag, truncation error") {
    Grid g(2, 32, 40.0);
    FluidParams p;
    SpectralState u(g);
    u.a = make_band_limited_random(g, 0.6 * g.xi_dealias(), 5);
    u.m[0] = make_band_limited_random(g, 0.6 * g.xi_dealias(), 6);
    u.m[1] = make_band_limited_random(g, 0.6 * g.xi_dealias(), 7);
    u.time = 2.75;

    fs::path dir = fresh_dir("snapshot");
    fs::path file = dir / "state.nsks";
    write_snapshot(file, u, p);

    SnapshotReadResult rd = read_snapshot(file, p);
    CHECK(rd.params_hash_matches);
    CHECK(rd.state.time == u.time);
    bool exact = true;
    for (std::size_t i = 0; i < u.a.coeffs.size(); ++i) {
        if (rd.state.a.coeffs[i] != u.a.coeffs[i]) exact = false;
        if (rd.state.m[0].coeffs[i] != u.m[0].coeffs[i]) exact = false;
        if (rd.state.m[1].coeffs[i] != u.m[1].coeffs[i]) exact = false;
    }
    CHECK(exact);

    FluidParams other = p;
    other.kappa *= 2;
    CHECK_FALSE(read_snapshot(file, other).params_hash_matches);

    // truncated file: clean error, no partial state
    std::string bytes = slurp(file);
    std::ofstream(dir / "trunc.nsks", std::ios::binary)
        << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS(read_snapshot(dir / "trunc.nsks", p));
    std::ofstream(dir / "badmagic.nsks", std::ios::binary) << "XXSNAP" << bytes;
    CHECK_THROWS(read_snapshot(dir / "badmagic.nsks", p));
    fs::remove_all(dir);
}

TEST_CASE("resume from snapshot continues identically to the uninterrupted run") {
    Grid g(2, 32, 40.0);
    FluidParams p;
    p.kappa = 0.5;
    SpectralState u(g);
    double c = g.box_len / 2;
    u.a = dealias(forward_transform(make_gaussian_field(g, {{{c, c, 0}, 3.0, 0.04}})));
    u.m[0] = dealias(forward_transform(make_gaussian_field(g, {{{c, c, 0}, 4.0, -0.03}})));

    IntegratorConfig cfg;
    cfg.dt = 0.05;
    cfg.t_end = 1.0;
    Stepper st(g, p, cfg);

    SpectralState straight = u;
    for (int i = 0; i < 20; ++i) straight = st.step(straight);

    SpectralState half = u;
    for (int i = 0; i < 10; ++i) half = st.step(half);
    fs::path dir = fresh_dir("resume");
    write_snapshot(dir / "mid.nsks", half, p);
    SpectralState resumed = read_snapshot(dir / "mid.nsks", p).state;
    for (int i = 0; i < 10; ++i) resumed = st.step(resumed);
    fs::remove_all(dir);

    SpectralState diff = straight - resumed;
    double scale = fourier_lp_norm(straight.a, 2.0);
    CHECK(fourier_lp_norm(diff.a, 2.0) <= 1e-12 * scale);
    CHECK(fourier_lp_norm(diff.m[0], 2.0) <= 1e-12 * scale);
}

TEST_CASE("run_experiment: zero-amplitude simulate yields all-zero norm columns") {
    fs::path dir = fresh_dir("zero_sim");
    std::ostringstream os;
    os << R"({"kind": "simulate", "grid": {"d": 2, "n": 32, "box_len": 50.0},)"
       << R"("initial": {"type": "zero"},)"
       << R"("integrator": {"dt": 0.1, "t_end": 1.0},)"
       << R"("norms": [{"s": 0, "p": 2, "sigma": 1, "field": "m"}],)"
       << R"("out_dir": ")" << dir.string() << R"("})";
    ExperimentConfig cfg = parse_config(os.str());
    CHECK(run_experiment(cfg) == RunStatus::Ok);

    std::string csv = slurp(dir / "norms.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line); // header
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        // every column except t and min_density must be exactly 0
        std::istringstream cells(line);
        std::string cell;
        int col = 0;
        while (std::getline(cells, cell, ',')) {
            if (col >= 2) CHECK(cell == "0");
            ++col;
        }
    }
    CHECK(rows > 0);
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("run_experiment: identical config and seed give byte-identical CSV") {
    auto run_once = [](const std::string& tag) {
        fs::path dir = fresh_dir(tag);
        std::ostringstream os;
        os << R"({"kind": "simulate", "grid": {"d": 2, "n": 32, "box_len": 50.0},)"
           << R"("initial": {"type": "random", "seed": 42, "xi_cut": 1.0, "amplitude": 0.01},)"
           << R"("integrator": {"dt": 0.1, "t_end": 2.0, "snapshot_cadence": 0.5},)"
           << R"("norms": [{"s": 0, "p": 2, "sigma": 1, "field": "m"}],)"
           << R"("out_dir": ")" << dir.string() << R"("})";
        ExperimentConfig cfg = parse_config(os.str());
        REQUIRE(run_experiment(cfg) == RunStatus::Ok);
        std::string csv = slurp(dir / "norms.csv");
        fs::remove_all(dir);
        return csv;
    };
    std::string first = run_once("det_a");
    std::string second = run_once("det_b");
    CHECK(first == second);
    CHECK(first.size() > 100);
}

TEST_CASE("run_experiment: vacuum breach reports INCOMPLETE and numerical failure") {
    fs::path dir = fresh_dir("vacuum");
    std::ostringstream os;
    os << R"({"kind": "simulate", "grid": {"d": 2, "n": 32, "box_len": 50.0},)"
       << R"("initial": {"type": "gaussian", "bumps":)"
       << R"( [{"center": [25, 25], "width": 5.0, "amplitude": -0.95, "component": "a"}]},)"
       << R"("integrator": {"dt": 0.1, "t_end": 1.0},)"
       << R"("out_dir": ")" << dir.string() << R"("})";
    ExperimentConfig cfg = parse_config(os.str());
    CHECK(run_experiment(cfg) == RunStatus::NumericalFailure);
    std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("INCOMPLETE") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("verify suite passes and writes per-check results") {
    fs::path dir = fresh_dir("verify");
    ExperimentConfig cfg;
    cfg.kind = "verify";
    cfg.out_dir = dir.string();
    CHECK(run_experiment(cfg) == RunStatus::Ok);
    std::string report = slurp(dir / "verify.json");
    CHECK(report.find("\"pass\": true") != std::string::npos);
    CHECK(report.find("\"pass\": false") == std::string::npos);
    CHECK(report.find("green_semigroup") != std::string::npos);
    CHECK(report.find("eigenvalue_residual") != std::string::npos);
    fs::remove_all(dir);
}

#ifdef NSK_CLI_PATH
TEST_CASE("cli: exit codes for config errors and verify") {
    fs::path dir = fresh_dir("cli");
    fs::path cfgfile = dir / "bad.json";
    std::ofstream(cfgfile) << R"({"kind": "simulate", "params": {"mu": -3}})";
    std::string base = std::string(NSK_CLI_PATH);

    int rc_bad = std::system((base + " simulate --config " + cfgfile.string() +
                              " --out " + (dir / "o1").string() + " >/dev/null 2>&1")
                                 .c_str());
    CHECK(WEXITSTATUS(rc_bad) == 2);

    int rc_missing = std::system((base + " simulate --config /nonexistent.json"
                                         " >/dev/null 2>&1")
                                     .c_str());
    CHECK(WEXITSTATUS(rc_missing) == 2);

    fs::path ok = dir / "sim.json";
    std::ofstream(ok) << R"({"grid": {"d": 2, "n": 32, "box_len": 50.0},
        "initial": {"type": "random", "seed": 3, "xi_cut": 1.0, "amplitude": 0.005},
        "integrator": {"dt": 0.1, "t_end": 0.5},
        "norms": [{"s": 0, "p": 2, "sigma": 1}]})";
    int rc_ok = std::system((base + " simulate --config " + ok.string() + " --out " +
                             (dir / "o2").string() + " --emit-plot-data >/dev/null 2>&1")
                                .c_str());
    CHECK(WEXITSTATUS(rc_ok) == 0);
    CHECK(fs::exists(dir / "o2" / "norms.csv"));
    CHECK(fs::exists(dir / "o2" / "plot.tsv"));
    fs::remove_all(dir);
}
#endif
