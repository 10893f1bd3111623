#include "nsk/experiment.hpp"

#include <json.hpp>

#include <bit>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nsk {

using nlohmann::json;

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error("config invalid:\n  " + [&] {
          std::string s;
          for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "\n  " : "") + v[i];
          return s;
      }()),
      violations(std::move(v)) {}

std::string NormRequest::name() const {
    std::ostringstream os;
    os << (spec.flavor == BesovSpec::Flavor::FourierBesov ? "FB" : "B");
    os << "_s" << spec.s << "_p";
    if (std::isinf(spec.p)) os << "inf"; else os << spec.p;
    os << "_sig";
    if (std::isinf(spec.sigma)) os << "inf"; else os << spec.sigma;
    os << "(" << field << ")";
    return os.str();
}

// --- parsing -----------------------------------------------------------------

namespace {

void check_keys(const json& j, const std::vector<std::string>& allowed,
                const std::string& ctx, std::vector<std::string>& errs) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) errs.push_back(ctx + ": unknown key '" + it.key() + "'");
    }
}

double num_or(const json& j, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    const auto& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "inf")
        return std::numeric_limits<double>::infinity();
    return v.get<double>();
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> errs;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("not valid JSON: ") + e.what()});
    }

    ExperimentConfig cfg;
    check_keys(j, {"kind", "grid", "params", "initial", "integrator", "norms", "log_linf",
                   "log_l1", "fits", "probe", "smallness_threshold", "j0", "out_dir", "seed",
                   "emit_plot_data", "save_snapshots"},
               "top level", errs);

    cfg.kind = j.value("kind", cfg.kind);
    if (cfg.kind != "simulate" && cfg.kind != "linear-probe" && cfg.kind != "kernel-probe" &&
        cfg.kind != "decay-fit" && cfg.kind != "verify")
        errs.push_back("kind: must be one of simulate|linear-probe|kernel-probe|decay-fit|verify");

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, {"d", "n", "box_len"}, "grid", errs);
        int d = g.value("d", 2), n = g.value("n", 256);
        double L = g.value("box_len", 200.0);
        try {
            cfg.grid = Grid(d, n, L);
        } catch (const std::exception& e) {
            errs.push_back(std::string("grid: ") + e.what());
        }
    }

    if (j.contains("params")) {
        const auto& p = j.at("params");
        check_keys(p, {"mu", "lambda", "kappa", "rho_star", "pressure"}, "params", errs);
        cfg.params.mu = p.value("mu", 1.0);
        cfg.params.lam = p.value("lambda", 0.0);
        cfg.params.kappa = p.value("kappa", 1.0);
        cfg.params.rho_star = p.value("rho_star", 1.0);
        if (p.contains("pressure")) {
            const auto& pr = p.at("pressure");
            check_keys(pr, {"kind", "A", "Gamma", "coeffs"}, "params.pressure", errs);
            std::string kind = pr.value("kind", "gamma_law");
            if (kind == "gamma_law")
                cfg.params.pressure = PressureLaw::gamma_law(pr.value("A", 0.5), pr.value("Gamma", 2.0));
            else if (kind == "polynomial")
                cfg.params.pressure = PressureLaw::polynomial(pr.value("coeffs", std::vector<double>{0.0, 1.0}));
            else
                errs.push_back("params.pressure.kind: must be gamma_law or polynomial");
        }
        if (!(cfg.params.mu > 0)) errs.push_back("params: standing assumption mu > 0 violated");
        if (!(cfg.params.nu() > 0)) errs.push_back("params: standing assumption nu = lambda + 2 mu > 0 violated");
        if (!(cfg.params.kappa > 0)) errs.push_back("params: kappa is a positive constant, got " + std::to_string(cfg.params.kappa));
        if (!(cfg.params.rho_star > 0)) errs.push_back("params: rho_star must be > 0");
        else if (!(cfg.params.pressure.dP(cfg.params.rho_star) > 0))
            errs.push_back("params: P'(rho_star) > 0 violated");
    }

    if (j.contains("initial")) {
        const auto& in = j.at("initial");
        check_keys(in, {"type", "bumps", "seed", "xi_cut", "amplitude", "envelope_power", "zero_mean"},
                   "initial", errs);
        std::string type = in.value("type", "gaussian");
        if (type == "gaussian") cfg.initial.type = InitialDataSpec::Type::Gaussian;
        else if (type == "random") cfg.initial.type = InitialDataSpec::Type::Random;
        else if (type == "zero") cfg.initial.type = InitialDataSpec::Type::Zero;
        else errs.push_back("initial.type: must be gaussian|random|zero");
        if (in.contains("bumps")) {
            for (const auto& b : in.at("bumps")) {
                check_keys(b, {"center", "width", "amplitude", "component"}, "initial.bumps[]", errs);
                InitialDataSpec::Bump bump;
                auto c = b.value("center", std::vector<double>{});
                for (std::size_t ax = 0; ax < c.size() && ax < 3; ++ax) bump.center[ax] = c[ax];
                bump.width = b.value("width", 1.0);
                bump.amplitude = b.value("amplitude", 1.0);
                bump.component = b.value("component", "a");
                if (!(bump.width > 0)) errs.push_back("initial.bumps[]: width must be > 0");
                if (bump.component != "a" && bump.component != "m0" && bump.component != "m1" &&
                    bump.component != "m2")
                    errs.push_back("initial.bumps[]: component must be a|m0|m1|m2");
                cfg.initial.bumps.push_back(bump);
            }
        }
        cfg.initial.seed = in.value("seed", cfg.initial.seed);
        cfg.initial.xi_cut = in.value("xi_cut", cfg.initial.xi_cut);
        cfg.initial.amplitude = in.value("amplitude", cfg.initial.amplitude);
        cfg.initial.envelope_power = in.value("envelope_power", cfg.initial.envelope_power);
        cfg.initial.zero_mean = in.value("zero_mean", cfg.initial.zero_mean);
    }

    if (j.contains("integrator")) {
        const auto& it = j.at("integrator");
        check_keys(it, {"dt", "scheme", "t_end", "snapshot_cadence", "vacuum_margin", "linear_only"},
                   "integrator", errs);
        cfg.integrator.dt = it.value("dt", cfg.integrator.dt);
        cfg.integrator.t_end = it.value("t_end", cfg.integrator.t_end);
        cfg.integrator.snapshot_cadence = it.value("snapshot_cadence", cfg.integrator.snapshot_cadence);
        cfg.integrator.vacuum_margin = it.value("vacuum_margin", cfg.integrator.vacuum_margin);
        cfg.integrator.linear_only = it.value("linear_only", cfg.integrator.linear_only);
        std::string scheme = it.value("scheme", "ETD2");
        if (scheme == "ETD1") cfg.integrator.scheme = IntegratorConfig::Scheme::ETD1;
        else if (scheme == "ETD2") cfg.integrator.scheme = IntegratorConfig::Scheme::ETD2;
        else errs.push_back("integrator.scheme: must be ETD1 or ETD2");
        if (!(cfg.integrator.dt > 0)) errs.push_back("integrator.dt: must be > 0");
        if (!(cfg.integrator.t_end >= cfg.integrator.dt))
            errs.push_back("integrator.t_end: must be >= dt");
    }

    if (j.contains("norms")) {
        for (const auto& n : j.at("norms")) {
            check_keys(n, {"s", "p", "sigma", "flavor", "field"}, "norms[]", errs);
            NormRequest r;
            r.spec.s = num_or(n, "s", 0.0);
            r.spec.p = num_or(n, "p", 2.0);
            r.spec.sigma = num_or(n, "sigma", 1.0);
            std::string flavor = n.value("flavor", "fourier_besov");
            if (flavor == "fourier_besov") r.spec.flavor = BesovSpec::Flavor::FourierBesov;
            else if (flavor == "besov") r.spec.flavor = BesovSpec::Flavor::Besov;
            else errs.push_back("norms[].flavor: must be fourier_besov or besov");
            r.field = n.value("field", "m");
            if (r.field != "a" && r.field != "m" && r.field != "state")
                errs.push_back("norms[].field: must be a|m|state");
            if (!(r.spec.p >= 1)) errs.push_back("norms[].p: must satisfy p >= 1");
            if (!(r.spec.sigma >= 1)) errs.push_back("norms[].sigma: must satisfy sigma >= 1");
            if (cfg.kind == "decay-fit") {
                double pmax = 2.0 * cfg.grid.d / (cfg.grid.d - 1.0);
                if (r.spec.p > pmax)
                    errs.push_back("norms[].p: decay-fit requires 1 <= p <= 2d/(d-1) = " +
                                   std::to_string(pmax) + " (got p = " + std::to_string(r.spec.p) + ")");
            }
            cfg.norms.push_back(r);
        }
    }
    cfg.log_linf = j.value("log_linf", cfg.log_linf);
    cfg.log_l1 = j.value("log_l1", cfg.log_l1);

    if (j.contains("fits")) {
        for (const auto& f : j.at("fits")) {
            check_keys(f, {"series", "window", "mode", "target", "tol"}, "fits[]", errs);
            FitRequest r;
            r.series = f.value("series", "");
            if (r.series.empty()) errs.push_back("fits[].series: required");
            if (f.contains("window")) {
                auto w = f.at("window").get<std::vector<double>>();
                if (w.size() != 2 || !(w[0] < w[1])) errs.push_back("fits[].window: need [t0, t1] with t0 < t1");
                else { r.t0 = w[0]; r.t1 = w[1]; }
            }
            std::string mode = f.value("mode", "pointwise");
            if (mode == "pointwise") r.mode = RateFit::Mode::Pointwise;
            else if (mode == "envelope") r.mode = RateFit::Mode::Envelope;
            else errs.push_back("fits[].mode: must be pointwise or envelope");
            if (f.contains("target")) r.target = f.at("target").get<double>();
            r.tol = f.value("tol", 0.1);
            cfg.fits.push_back(r);
        }
    }

    if (j.contains("probe")) {
        const auto& pb = j.at("probe");
        check_keys(pb, {"t0", "t1", "count", "t_deriv", "x_deriv"}, "probe", errs);
        cfg.probe.t0 = pb.value("t0", cfg.probe.t0);
        cfg.probe.t1 = pb.value("t1", cfg.probe.t1);
        cfg.probe.count = pb.value("count", cfg.probe.count);
        cfg.probe.t_deriv = pb.value("t_deriv", 0);
        if (pb.contains("x_deriv")) {
            auto xd = pb.at("x_deriv").get<std::vector<int>>();
            for (std::size_t ax = 0; ax < xd.size() && ax < 3; ++ax) cfg.probe.x_deriv[ax] = xd[ax];
        }
        if (!(cfg.probe.t0 > 0 && cfg.probe.t1 > cfg.probe.t0))
            errs.push_back("probe: need 0 < t0 < t1");
        if (cfg.probe.count < 8) errs.push_back("probe.count: need >= 8 samples for a fit");
    }

    cfg.smallness_threshold = j.value("smallness_threshold", cfg.smallness_threshold);
    if (j.contains("j0")) cfg.j0 = j.at("j0").get<int>();
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.emit_plot_data = j.value("emit_plot_data", cfg.emit_plot_data);
    cfg.save_snapshots = j.value("save_snapshots", cfg.save_snapshots);

    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = cfg.kind;
    j["grid"] = {{"d", cfg.grid.d}, {"n", cfg.grid.n}, {"box_len", cfg.grid.box_len}};
    json pr;
    if (cfg.params.pressure.kind == PressureLaw::Kind::GammaLaw)
        pr = {{"kind", "gamma_law"}, {"A", cfg.params.pressure.A}, {"Gamma", cfg.params.pressure.G}};
    else
        pr = {{"kind", "polynomial"}, {"coeffs", cfg.params.pressure.coeffs}};
    j["params"] = {{"mu", cfg.params.mu}, {"lambda", cfg.params.lam}, {"kappa", cfg.params.kappa},
                   {"rho_star", cfg.params.rho_star}, {"pressure", pr}};
    json in;
    in["type"] = cfg.initial.type == InitialDataSpec::Type::Gaussian ? "gaussian"
                 : cfg.initial.type == InitialDataSpec::Type::Random ? "random" : "zero";
    json bumps = json::array();
    for (const auto& b : cfg.initial.bumps)
        bumps.push_back({{"center", std::vector<double>(b.center.begin(), b.center.begin() + cfg.grid.d)},
                         {"width", b.width}, {"amplitude", b.amplitude}, {"component", b.component}});
    in["bumps"] = bumps;
    in["seed"] = cfg.initial.seed;
    in["xi_cut"] = cfg.initial.xi_cut;
    in["amplitude"] = cfg.initial.amplitude;
    in["envelope_power"] = cfg.initial.envelope_power;
    in["zero_mean"] = cfg.initial.zero_mean;
    j["initial"] = in;
    j["integrator"] = {{"dt", cfg.integrator.dt},
                       {"scheme", cfg.integrator.scheme == IntegratorConfig::Scheme::ETD1 ? "ETD1" : "ETD2"},
                       {"t_end", cfg.integrator.t_end},
                       {"snapshot_cadence", cfg.integrator.snapshot_cadence},
                       {"vacuum_margin", cfg.integrator.vacuum_margin},
                       {"linear_only", cfg.integrator.linear_only}};
    json norms = json::array();
    auto numj = [](double v) -> json {
        if (std::isinf(v)) return "inf";
        return v;
    };
    for (const auto& r : cfg.norms)
        norms.push_back({{"s", r.spec.s}, {"p", numj(r.spec.p)}, {"sigma", numj(r.spec.sigma)},
                         {"flavor", r.spec.flavor == BesovSpec::Flavor::FourierBesov ? "fourier_besov" : "besov"},
                         {"field", r.field}});
    j["norms"] = norms;
    j["log_linf"] = cfg.log_linf;
    j["log_l1"] = cfg.log_l1;
    json fits = json::array();
    for (const auto& f : cfg.fits) {
        json fj = {{"series", f.series}, {"window", {f.t0, f.t1}},
                   {"mode", f.mode == RateFit::Mode::Envelope ? "envelope" : "pointwise"},
                   {"tol", f.tol}};
        if (f.target) fj["target"] = *f.target;
        fits.push_back(fj);
    }
    j["fits"] = fits;
    j["probe"] = {{"t0", cfg.probe.t0}, {"t1", cfg.probe.t1}, {"count", cfg.probe.count},
                  {"t_deriv", cfg.probe.t_deriv},
                  {"x_deriv", std::vector<int>(cfg.probe.x_deriv.begin(), cfg.probe.x_deriv.begin() + cfg.grid.d)}};
    j["smallness_threshold"] = cfg.smallness_threshold;
    if (cfg.j0) j["j0"] = *cfg.j0;
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["emit_plot_data"] = cfg.emit_plot_data;
    j["save_snapshots"] = cfg.save_snapshots;
    return j.dump(2);
}

SpectralState build_initial_state(const ExperimentConfig& cfg) {
    SpectralState u(cfg.grid);
    const std::uint64_t seed = cfg.seed != 0 ? cfg.seed : cfg.initial.seed;
    switch (cfg.initial.type) {
        case InitialDataSpec::Type::Zero:
            break;
        case InitialDataSpec::Type::Gaussian: {
            std::vector<GaussianBump> per_comp[4];
            for (const auto& b : cfg.initial.bumps) {
                int slot = b.component == "a" ? 0 : 1 + (b.component[1] - '0');
                per_comp[slot].push_back({b.center, b.width, b.amplitude});
            }
            if (!per_comp[0].empty()) u.a = dealias(forward_transform(make_gaussian_field(cfg.grid, per_comp[0])));
            for (int ax = 0; ax < cfg.grid.d; ++ax)
                if (!per_comp[1 + ax].empty())
                    u.m[ax] = dealias(forward_transform(make_gaussian_field(cfg.grid, per_comp[1 + ax])));
            break;
        }
        case InitialDataSpec::Type::Random: {
            const double pw = cfg.initial.envelope_power;
            auto env = [pw](double r) { return std::pow(r, pw); };
            for (int c = 0; c <= cfg.grid.d; ++c) {
                SpectralField f = make_band_limited_random(cfg.grid, cfg.initial.xi_cut,
                                                           seed + 1000 * c, env);
                double scale = fourier_lp_norm(f, std::numeric_limits<double>::infinity());
                if (scale > 0) f *= cfg.initial.amplitude / scale;
                if (!cfg.initial.zero_mean) f.coeffs[0] = cfg.initial.amplitude;
                if (c == 0) u.a = std::move(f);
                else u.m[c - 1] = std::move(f);
            }
            break;
        }
    }
    return u;
}

// --- snapshot io -----------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "snapshot payload is little-endian; big-endian hosts unsupported");

std::uint64_t params_hash(const FluidParams& p) {
    char buf[256];
    int len = std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%d|%.17g|%.17g",
                            p.mu, p.lam, p.kappa, p.rho_star,
                            static_cast<int>(p.pressure.kind), p.pressure.A, p.pressure.G);
    std::string s(buf, len);
    for (double c : p.pressure.coeffs) {
        len = std::snprintf(buf, sizeof buf, "|%.17g", c);
        s.append(buf, len);
    }
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

static constexpr char kMagic[8] = {'N', 'S', 'K', 'S', 'N', 'A', 'P', '\1'};

void write_snapshot(const std::filesystem::path& file, const SpectralState& u,
                    const FluidParams& p) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_snapshot: cannot open " + file.string());
    os.write(kMagic, 8);
    auto put = [&](const void* ptr, std::size_t n) { os.write(static_cast<const char*>(ptr), n); };
    std::uint32_t version = 1, d = u.grid().d, n = u.grid().n;
    double L = u.grid().box_len, t = u.time;
    std::uint64_t ph = params_hash(p);
    put(&version, 4);
    put(&d, 4);
    put(&n, 4);
    put(&L, 8);
    put(&t, 8);
    put(&ph, 8);
    auto put_field = [&](const SpectralField& f) {
        put(f.coeffs.data(), f.coeffs.size() * sizeof(cplx));
    };
    put_field(u.a);
    for (const auto& mi : u.m) put_field(mi);
    if (!os) throw std::runtime_error("write_snapshot: write failed for " + file.string());
}

SnapshotReadResult read_snapshot(const std::filesystem::path& file, const FluidParams& p) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open " + file.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("read_snapshot: bad magic in " + file.string());
    auto get = [&](void* ptr, std::size_t n) {
        is.read(static_cast<char*>(ptr), n);
        if (!is) throw std::runtime_error("read_snapshot: truncated file " + file.string());
    };
    std::uint32_t version, d, n;
    double L, t;
    std::uint64_t ph;
    get(&version, 4);
    if (version != 1) throw std::runtime_error("read_snapshot: unsupported version");
    get(&d, 4);
    get(&n, 4);
    get(&L, 8);
    get(&t, 8);
    get(&ph, 8);
    Grid g(static_cast<int>(d), static_cast<int>(n), L);
    SnapshotReadResult out{SpectralState(g), ph == params_hash(p)};
    out.state.time = t;
    auto get_field = [&](SpectralField& f) {
        get(f.coeffs.data(), f.coeffs.size() * sizeof(cplx));
    };
    get_field(out.state.a);
    for (auto& mi : out.state.m) get_field(mi);
    // a trailing byte means the file does not match its own header
    is.peek();
    if (!is.eof()) throw std::runtime_error("read_snapshot: trailing bytes in " + file.string());
    return out;
}

// --- experiment driver --------------------------------------------------------

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_norm_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream os(path, std::ios::trunc);
    std::vector<std::string> cols;
    for (const auto& [k, v] : traj.series) cols.push_back(k); // std::map: sorted
    os << "t,min_density,X_p";
    for (const auto& c : cols) os << "," << c;
    os << "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << fmt(traj.times[i]) << "," << fmt(traj.min_density[i]) << "," << fmt(traj.xp_value[i]);
        for (const auto& c : cols) os << "," << fmt(traj.series.at(c)[i]);
        os << "\n";
    }
}

void write_plot_data(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream os(path, std::ios::trunc);
    os << "series\tt\tvalue\n";
    for (const auto& [name, vals] : traj.series)
        for (std::size_t i = 0; i < vals.size(); ++i)
            os << name << "\t" << fmt(traj.times[i]) << "\t" << fmt(vals[i]) << "\n";
    os << "min_density";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        os << "\nmin_density\t" << fmt(traj.times[i]) << "\t" << fmt(traj.min_density[i]);
    os << "\n";
}

json fit_to_json(const std::string& name, const RateFit& f, std::optional<double> target,
                 double tol) {
    json j = {{"series", name},
              {"exponent", f.exponent},
              {"amplitude", f.amplitude},
              {"window", {f.t0, f.t1}},
              {"residual_rms", f.residual_rms},
              {"mode", f.mode == RateFit::Mode::Envelope ? "envelope" : "pointwise"},
              {"samples", f.samples}};
    if (target) {
        j["target"] = *target;
        j["tol"] = tol;
        j["pass"] = std::abs(f.exponent - *target) <= tol;
    }
    return j;
}

std::vector<SimObserver> build_observers(const ExperimentConfig& cfg,
                                         std::shared_ptr<const SpectralState> u0,
                                         std::shared_ptr<const DyadicPartition> part) {
    std::vector<SimObserver> obs;
    for (const auto& req : cfg.norms) {
        BesovSpec spec = req.spec;
        std::string field = req.field;
        obs.push_back({req.name(), [part, spec, field](double, const SpectralState& u) {
            auto norm_of = [&](const SpectralField& f) {
                return spec.flavor == BesovSpec::Flavor::FourierBesov
                           ? fourier_besov_norm(*part, f, spec)
                           : besov_norm(*part, f, spec);
            };
            if (field == "a") return norm_of(u.a);
            if (field == "m") {
                double acc = 0;
                for (const auto& mi : u.m) {
                    double v = norm_of(mi);
                    acc += v * v;
                }
                return std::sqrt(acc);
            }
            return state_norm(*part, u, spec);
        }});
    }
    if (cfg.log_linf) {
        obs.push_back({"linf(a)", [](double, const SpectralState& u) {
            return phys_lq_norm(inverse_transform(u.a), std::numeric_limits<double>::infinity());
        }});
        obs.push_back({"linf(m)", [](double, const SpectralState& u) {
            double m = 0;
            for (const auto& mi : u.m)
                m = std::max(m, phys_lq_norm(inverse_transform(mi),
                                             std::numeric_limits<double>::infinity()));
            return m;
        }});
    }
    if (cfg.log_l1) {
        obs.push_back({"l1(a)", [](double, const SpectralState& u) {
            return phys_l1_dx(inverse_transform(u.a));
        }});
        obs.push_back({"l1(m)", [](double, const SpectralState& u) {
            double m = 0;
            for (const auto& mi : u.m) {
                double v = phys_l1_dx(inverse_transform(mi));
                m += v * v;
            }
            return std::sqrt(m);
        }});
    }

    if (cfg.kind == "linear-probe") {
        FluidParams p = cfg.params;
        // diffusion-wave splitting diagnostics, all streaming from u0
        obs.push_back({"solenoidal_linf", [u0, p](double t, const SpectralState&) {
            auto [sol0, c0] = helmholtz_project(u0->m);
            (void)c0;
            double m = 0;
            for (auto& s : sol0)
                m = std::max(m, phys_lq_norm(inverse_transform(heat_semigroup(s, t, p.lin_mu())),
                                             std::numeric_limits<double>::infinity()));
            return m;
        }});
        obs.push_back({"compressible_linf", [](double, const SpectralState& u) {
            auto [sol, comp] = helmholtz_project(u.m);
            (void)sol;
            double m = 0;
            for (auto& c : comp)
                m = std::max(m, phys_lq_norm(inverse_transform(c),
                                             std::numeric_limits<double>::infinity()));
            return m;
        }});
        obs.push_back({"dw_residual", [u0, p](double t, const SpectralState& u) {
            auto [sol0, c0] = helmholtz_project(u0->m);
            (void)c0;
            double m = phys_lq_norm(inverse_transform(u.a), std::numeric_limits<double>::infinity());
            for (int ax = 0; ax < u.grid().d; ++ax) {
                SpectralField diff = u.m[ax];
                diff -= heat_semigroup(sol0[ax], t, p.lin_mu());
                m = std::max(m, phys_lq_norm(inverse_transform(diff),
                                             std::numeric_limits<double>::infinity()));
            }
            return m;
        }});
        obs.push_back({"wave_approx_err", [u0, p](double t, const SpectralState& u) {
            auto [sol, comp] = helmholtz_project(u.m);
            (void)sol;
            std::vector<SpectralField> approx = wave_diffusion_approx(*u0, t, p);
            double m = 0;
            for (int ax = 0; ax < u.grid().d; ++ax) {
                CoeffArray tmp(approx[ax].grid.total());
                fft::inverse(approx[ax].grid, approx[ax].coeffs.data(), tmp.data());
                RealField cphys = inverse_transform(comp[ax]);
                double mx = 0;
                for (std::size_t z = 0; z < tmp.size(); ++z)
                    mx = std::max(mx, std::abs(cphys.samples[z] - tmp[z].real()));
                m = std::max(m, mx);
            }
            return m;
        }});
    }

    if (cfg.kind == "decay-fit") {
        FluidParams p = cfg.params;
        for (const auto& req : cfg.norms) {
            BesovSpec spec = req.spec;
            obs.push_back(linear_residual_observer("lin_residual_" + req.name(), u0, p, part, spec));
        }
    }
    return obs;
}

} // namespace

RunStatus run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(cfg.out_dir);

    json manifest;
    manifest["config"] = json::parse(serialize_config(cfg));
    manifest["version"] = "nsk 1.0.0";
    manifest["seed"] = cfg.seed != 0 ? cfg.seed : cfg.initial.seed;
    manifest["status"] = "INCOMPLETE";

    auto finish = [&](RunStatus status, const std::string& note) {
        manifest["status"] = (status == RunStatus::Ok) ? "COMPLETE" : ("INCOMPLETE: " + note);
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        std::ofstream(fs::path(cfg.out_dir) / "manifest.json") << manifest.dump(2) << "\n";
        return status;
    };

    try {
        if (cfg.kind == "verify") {
            auto checks = run_verify_suite();
            json out = json::array();
            bool all = true;
            for (const auto& c : checks) {
                out.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
                all = all && c.pass;
            }
            std::ofstream(fs::path(cfg.out_dir) / "verify.json") << out.dump(2) << "\n";
            return finish(all ? RunStatus::Ok : RunStatus::VerifyFailure,
                          all ? "" : "verification failure");
        }

        if (cfg.kind == "kernel-probe") {
            std::vector<double> times(cfg.probe.count);
            double lr = std::log(cfg.probe.t1 / cfg.probe.t0);
            for (int i = 0; i < cfg.probe.count; ++i)
                times[i] = cfg.probe.t0 * std::exp(lr * i / (cfg.probe.count - 1.0));
            KernelProbeResult res = kernel_decay_probe(cfg.params, cfg.grid, times,
                                                       cfg.probe.t_deriv, cfg.probe.x_deriv);
            int korder = cfg.probe.t_deriv;
            for (int ax = 0; ax < cfg.grid.d; ++ax) korder += cfg.probe.x_deriv[ax];
            double target = -((3.0 * cfg.grid.d - 3.0) / 4.0 + 0.5 * korder);
            double tol = 0.10 + 0.02 * korder;
            for (const auto& f : cfg.fits)
                if (f.series == "kernel_sup") tol = f.tol;
            json fits = json::array();
            fits.push_back(fit_to_json("kernel_sup", res.fit, target, tol));
            std::ofstream(fs::path(cfg.out_dir) / "fits.json") << fits.dump(2) << "\n";
            std::ofstream csv(fs::path(cfg.out_dir) / "norms.csv");
            csv << "t,kernel_sup\n";
            for (std::size_t i = 0; i < res.series.times.size(); ++i)
                csv << fmt(res.series.times[i]) << "," << fmt(res.series.values[i]) << "\n";
            return finish(RunStatus::Ok, "");
        }

        // stepping kinds: simulate | linear-probe | decay-fit
        IntegratorConfig icfg = cfg.integrator;
        if (cfg.kind == "linear-probe") icfg.linear_only = true;

        auto u0 = std::make_shared<const SpectralState>(build_initial_state(cfg));
        auto part = std::make_shared<const DyadicPartition>(build_partition(cfg.grid));

        if (cfg.kind == "simulate" && !icfg.linear_only) {
            double x0 = initial_smallness(*u0, 2.0);
            manifest["initial_smallness_X20"] = x0;
            manifest["smallness_gate_ok"] = x0 <= cfg.smallness_threshold;
        }
        // theorem-comparability diagnostics of the data
        {
            double l1a = phys_l1_dx(inverse_transform(u0->a));
            double l1m = 0;
            for (const auto& mi : u0->m) {
                double v = phys_l1_dx(inverse_transform(mi));
                l1m += v * v;
            }
            manifest["initial_l1_mass"] = l1a + std::sqrt(l1m);
            // low-frequency smallness D_{2,0} = sup_{j <= j0} 2^{-dj/p'} of the
            // blockwise pair norm; j0 defaults to the shell nearest the
            // eigenvalue regime-transition frequency
            const DyadicPartition& pt = *part;
            int j0 = cfg.j0 ? *cfg.j0 : default_j0(pt, transition_frequency(cfg.params));
            const double pprime = 2.0;
            auto ba = pt.block_lp(u0->a, pprime);
            std::vector<std::vector<double>> bm;
            for (const auto& mi : u0->m) bm.push_back(pt.block_lp(mi, pprime));
            double dlow = 0;
            for (int jj = 0; jj < pt.shells(); ++jj) {
                int j = pt.j_min + jj;
                if (j > j0) continue;
                double pair2 = ba[jj] * ba[jj];
                for (const auto& b : bm) pair2 += b[jj] * b[jj];
                double w = std::pow(2.0, -(cfg.grid.d / pprime) * j);
                dlow = std::max(dlow, w * std::sqrt(pair2));
            }
            manifest["initial_lowfreq_D20"] = dlow;
            manifest["j0_threshold"] = j0;
        }

        Trajectory traj = run_simulation(*u0, cfg.params, icfg, build_observers(cfg, u0, part));

        write_norm_csv(fs::path(cfg.out_dir) / "norms.csv", traj);
        if (cfg.emit_plot_data) write_plot_data(fs::path(cfg.out_dir) / "plot.tsv", traj);
        if (cfg.save_snapshots) {
            write_snapshot(fs::path(cfg.out_dir) / "state_final.nsks", traj.final_state, cfg.params);
        }

        json fits = json::array();
        for (const auto& f : cfg.fits) {
            auto it = traj.series.find(f.series);
            if (it == traj.series.end())
                throw ConfigError({"fits[].series: no logged series named '" + f.series + "'"});
            NormSeries s{f.series, traj.times, it->second};
            RateFit rf = fit_rate(s, f.t0, f.t1, f.mode);
            fits.push_back(fit_to_json(f.series, rf, f.target, f.tol));
        }
        if (!fits.empty())
            std::ofstream(fs::path(cfg.out_dir) / "fits.json") << fits.dump(2) << "\n";

        if (!traj.completed) return finish(RunStatus::NumericalFailure, traj.failure);
        return finish(RunStatus::Ok, "");
    } catch (const ConfigError&) {
        finish(RunStatus::ConfigFailure, "config error");
        throw;
    } catch (const VacuumError& e) {
        return finish(RunStatus::NumericalFailure, e.what());
    } catch (const BlowUpError& e) {
        return finish(RunStatus::NumericalFailure, e.what());
    }
}

// --- verify suite ---------------------------------------------------------------

namespace {

struct SuiteRng {
    std::uint64_t s;
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * ((next() >> 11) * 0x1.0p-53);
    }
};

CheckResult check(const std::string& name, double worst, double tol) {
    CheckResult r;
    r.name = name;
    r.pass = worst <= tol;
    r.detail = "worst " + fmt(worst) + " vs tol " + fmt(tol);
    return r;
}

// rescale so the physical sup norm equals amp (keeps i_fn clear of the margin)
void normalize_phys(SpectralField& f, double amp) {
    RealField phys = inverse_transform(f);
    double m = 0;
    for (double v : phys.samples) m = std::max(m, std::abs(v));
    if (m > 0) f *= amp / m;
}

} // namespace

std::vector<CheckResult> run_verify_suite(std::uint64_t seed) {
    std::vector<CheckResult> out;
    SuiteRng rng{seed};
    const Grid g(2, 64, 100.0);
    const double inf = std::numeric_limits<double>::infinity();

    { // transform round trip and Parseval
        double worst_rt = 0, worst_par = 0;
        for (int rep = 0; rep < 20; ++rep) {
            SpectralField f = make_band_limited_random(g, 0.8 * g.xi_dealias(), seed + rep);
            RealField phys = inverse_transform(f);
            SpectralField back = forward_transform(phys);
            double scale = fourier_lp_norm(f, 2.0);
            back -= f;
            worst_rt = std::max(worst_rt, fourier_lp_norm(back, 2.0) / scale);
            double lhs = phys_lq_norm(phys, 2.0);
            worst_par = std::max(worst_par, std::abs(lhs - scale) / scale);
        }
        out.push_back(check("fft_round_trip", worst_rt, 1e-12));
        out.push_back(check("parseval", worst_par, 1e-12));
    }

    { // multiplier composition and reality
        SpectralField f = make_band_limited_random(g, 0.8 * g.xi_dealias(), seed + 77);
        SpectralField two_step = riesz(bessel(f, 1.0), 0.5);
        SpectralField one_step = apply_multiplier(f, [](const std::array<double, 3>& xi) {
            double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            return cplx{std::pow(r2, 0.25) * std::sqrt(1.0 + r2), 0};
        }, cplx{0, 0});
        two_step -= one_step;
        out.push_back(check("multiplier_composition",
                            fourier_lp_norm(two_step, 2.0) / fourier_lp_norm(f, 2.0), 1e-13));
        double imx = 0;
        inverse_transform(riesz(bessel(f, -0.5), 1.0), &imx);
        out.push_back(check("hermitian_reality", imx / fourier_lp_norm(f, inf), 1e-10));
        SpectralField da = dealias(f);
        SpectralField dda = dealias(da);
        dda -= da;
        out.push_back(check("dealias_idempotent", fourier_lp_norm(dda, inf), 0.0));
    }

    { // partition of unity and Plancherel equivalence
        DyadicPartition part = build_partition(g);
        const FreqTable ft(g);
        double worst = 0;
        for_each_mode(g, [&](std::int64_t, const std::array<int, 3>& idx) {
            double r = std::sqrt(ft.abs2(idx, g.d));
            if (r <= 0) return;
            double s = 0;
            for (int j = part.j_min; j <= part.j_max; ++j) s += part.weight(j, r);
            worst = std::max(worst, std::abs(s - 1.0));
        });
        out.push_back(check("partition_of_unity", worst, 1e-12));

        double worst_pl = 0;
        for (int rep = 0; rep < 10; ++rep) {
            SpectralField f = make_band_limited_random(g, 0.8 * g.xi_dealias(), seed + 100 + rep);
            BesovSpec fb{0.3, 2.0, 1.0, BesovSpec::Flavor::FourierBesov};
            BesovSpec bs{0.3, 2.0, 1.0, BesovSpec::Flavor::Besov};
            double a = fourier_besov_norm(part, f, fb), b = besov_norm(part, f, bs);
            worst_pl = std::max(worst_pl, std::abs(a - b) / a);
        }
        out.push_back(check("plancherel_equivalence", worst_pl, 1e-10));
    }

    { // eigenvalues: characteristic-polynomial residual
        double worst = 0;
        for (int rep = 0; rep < 10000; ++rep) {
            FluidParams p;
            p.mu = rng.uniform(0.05, 3.0);
            p.lam = rng.uniform(-p.mu, 3.0);
            p.kappa = rng.uniform(0.02, 4.0);
            p.pressure = PressureLaw::gamma_law(rng.uniform(0.1, 2.0), rng.uniform(1.1, 3.0));
            double xi2 = std::pow(10.0, rng.uniform(-3, 3));
            EigenPair ev = eigenvalues(p, xi2);
            const double nu = p.lin_nu(), kap = p.lin_kappa(), g2 = p.gamma2();
            for (cplx l : {ev.lambda_plus, ev.lambda_minus}) {
                cplx res = l * l + nu * xi2 * l + xi2 * (g2 + kap * xi2);
                double denom = std::max(1.0, std::abs(l) * std::abs(l));
                worst = std::max(worst, std::abs(res) / denom);
            }
        }
        out.push_back(check("eigenvalue_residual", worst, 1e-10));
    }

    { // Green matrix: identity at t = 0, semigroup, hermitian symmetry
        double worst_id = 0, worst_semi = 0, worst_herm = 0;
        for (int rep = 0; rep < 1000; ++rep) {
            FluidParams p;
            p.mu = rng.uniform(0.05, 2.0);
            p.lam = rng.uniform(-p.mu, 2.0);
            p.kappa = rng.uniform(0.02, 3.0);
            p.pressure = PressureLaw::gamma_law(rng.uniform(0.1, 2.0), 2.0);
            std::array<double, 3> xi{rng.uniform(-3, 3), rng.uniform(-3, 3), 0};
            if (rep % 5 == 0) { // exercise the near-confluent branch
                double xc = transition_frequency(p);
                double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]);
                if (r > 0 && std::isfinite(xc)) {
                    xi[0] *= xc / r * (1.0 + rng.uniform(-1e-7, 1e-7));
                    xi[1] *= xc / r * (1.0 + rng.uniform(-1e-7, 1e-7));
                }
            }
            if (std::abs(xi[0]) + std::abs(xi[1]) < 1e-6) xi[0] = 0.5;
            double t = rng.uniform(0.0, 2.0), s = rng.uniform(0.0, 2.0);
            GreenMatrixEval g0 = green_matrix(p, 0.0, xi, 2);
            GreenMatrixEval gt = green_matrix(p, t, xi, 2);
            GreenMatrixEval gs = green_matrix(p, s, xi, 2);
            GreenMatrixEval gts = green_matrix(p, t + s, xi, 2);
            std::array<double, 3> mxi{-xi[0], -xi[1], 0};
            GreenMatrixEval gm = green_matrix(p, t, mxi, 2);
            double scale = 0;
            for (int i = 0; i < 3; ++i)
                for (int jx = 0; jx < 3; ++jx) scale = std::max(scale, std::abs(gts.at(i, jx)));
            for (int i = 0; i < 3; ++i)
                for (int jx = 0; jx < 3; ++jx) {
                    worst_id = std::max(worst_id,
                                        std::abs(g0.at(i, jx) - (i == jx ? 1.0 : 0.0)));
                    cplx prod{0, 0};
                    for (int k = 0; k < 3; ++k) prod += gt.at(i, k) * gs.at(k, jx);
                    worst_semi = std::max(worst_semi, std::abs(prod - gts.at(i, jx)) / std::max(scale, 1e-30));
                    worst_herm = std::max(worst_herm,
                                          std::abs(gm.at(i, jx) - std::conj(gt.at(i, jx))));
                }
        }
        out.push_back(check("green_identity_t0", worst_id, 0.0));
        out.push_back(check("green_semigroup", worst_semi, 1e-10));
        out.push_back(check("green_hermitian_symmetry", worst_herm, 1e-12));
    }

    { // Helmholtz projection: idempotent, orthogonal, divergence-free
        FluidParams p;
        std::vector<SpectralField> m;
        for (int ax = 0; ax < g.d; ++ax)
            m.push_back(make_band_limited_random(g, 0.8 * g.xi_dealias(), seed + 300 + ax));
        auto [sol, comp] = helmholtz_project(m);
        auto [sol2, comp2] = helmholtz_project(sol);
        double worst_idem = 0, scale = 0;
        for (int ax = 0; ax < g.d; ++ax) {
            scale = std::max(scale, fourier_lp_norm(sol[ax], inf));
            SpectralField d = sol2[ax];
            d -= sol[ax];
            worst_idem = std::max(worst_idem, fourier_lp_norm(d, inf));
            worst_idem = std::max(worst_idem, fourier_lp_norm(comp2[ax], inf));
        }
        out.push_back(check("helmholtz_idempotent", worst_idem / scale, 1e-12));
        double ip = 0, nrm = 0;
        for (int ax = 0; ax < g.d; ++ax) {
            ip += l2_inner(sol[ax], comp[ax]);
            nrm += l2_inner(m[ax], m[ax]);
        }
        out.push_back(check("helmholtz_orthogonal", std::abs(ip) / nrm, 1e-10));
        SpectralField div(g);
        for (int ax = 0; ax < g.d; ++ax) div += derivative(sol[ax], ax);
        out.push_back(check("helmholtz_divergence_free",
                            fourier_lp_norm(div, inf) / scale, 1e-12));
        (void)p;
    }

    { // nonlinearity: zero mode and quadratic scaling
        FluidParams p;
        SpectralState u(g);
        u.a = make_band_limited_random(g, 0.5 * g.xi_dealias(), seed + 400);
        normalize_phys(u.a, 0.05);
        for (int ax = 0; ax < g.d; ++ax) {
            u.m[ax] = make_band_limited_random(g, 0.5 * g.xi_dealias(), seed + 401 + ax);
            normalize_phys(u.m[ax], 0.05);
        }
        auto n1 = assemble_N(u, p);
        double zero_mode = 0, scale = 0;
        for (const auto& ni : n1) {
            zero_mode = std::max(zero_mode, std::abs(ni.coeffs[0]));
            scale = std::max(scale, fourier_lp_norm(ni, inf));
        }
        out.push_back(check("nonlinearity_zero_mode", zero_mode / std::max(scale, 1e-300), 1e-13));

        SpectralState uh = u;
        uh.a *= 0.5;
        for (auto& mi : uh.m) mi *= 0.5;
        auto n2 = assemble_N(uh, p);
        // quadratic leading order: ratio within 5% of 4 at these amplitudes
        double r1 = 0, r2 = 0;
        for (int ax = 0; ax < g.d; ++ax) {
            r1 += std::pow(fourier_lp_norm(n1[ax], 2.0), 2);
            r2 += std::pow(fourier_lp_norm(n2[ax], 2.0), 2);
        }
        double ratio = std::sqrt(r1 / r2);
        out.push_back(check("nonlinearity_quadratic_scaling", std::abs(ratio - 4.0), 0.2));
    }

    { // integrator conservation and linear exactness
        FluidParams p;
        p.kappa = 0.5;
        SpectralState u(g);
        u.a = make_band_limited_random(g, 0.4 * g.xi_dealias(), seed + 500);
        normalize_phys(u.a, 0.02);
        for (int ax = 0; ax < g.d; ++ax) {
            u.m[ax] = make_band_limited_random(g, 0.4 * g.xi_dealias(), seed + 501 + ax);
            normalize_phys(u.m[ax], 0.02);
        }
        cplx mean_a0 = u.a.coeffs[0], mean_m0 = u.m[0].coeffs[0];
        SpectralState v = u;
        for (int i = 0; i < 100; ++i) v = duhamel_step(v, 0.05, p, IntegratorConfig::Scheme::ETD2);
        double drift = std::max(std::abs(v.a.coeffs[0] - mean_a0), std::abs(v.m[0].coeffs[0] - mean_m0));
        out.push_back(check("zero_mode_conservation", drift, 1e-12));

        SpectralState w1 = propagate(propagate(u, 0.7, p), 1.1, p);
        SpectralState w2 = propagate(u, 1.8, p);
        double worst = 0, scale = 0;
        SpectralState dw = w1 - w2;
        scale = std::max({fourier_lp_norm(w2.a, 2.0), fourier_lp_norm(w2.m[0], 2.0),
                          fourier_lp_norm(w2.m[1], 2.0)});
        worst = std::max({fourier_lp_norm(dw.a, 2.0), fourier_lp_norm(dw.m[0], 2.0),
                          fourier_lp_norm(dw.m[1], 2.0)});
        out.push_back(check("propagator_semigroup_field", worst / scale, 1e-11));
    }

    { // snapshot round trip
        FluidParams p;
        SpectralState u(g);
        u.a = make_band_limited_random(g, 0.5 * g.xi_dealias(), seed + 600);
        u.time = 1.25;
        auto tmp = std::filesystem::temp_directory_path() / "nsk_verify_snapshot.nsks";
        write_snapshot(tmp, u, p);
        auto rd = read_snapshot(tmp, p);
        std::filesystem::remove(tmp);
        double worst = rd.params_hash_matches && rd.state.time == u.time ? 0.0 : 1.0;
        for (std::size_t i = 0; i < u.a.coeffs.size(); ++i)
            if (u.a.coeffs[i] != rd.state.a.coeffs[i]) worst = 1.0;
        out.push_back(check("snapshot_round_trip", worst, 0.0));
    }

    return out;
}

} // namespace nsk
