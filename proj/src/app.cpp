#include "beamnf/app.hpp"

#include "beamnf/dynamics.hpp"
#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"
#include "beamnf/norms.hpp"
#include "beamnf/spectral.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace beamnf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

json vec_json(const LatticeVector& a) { return a.coords(); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// Numbers array or {"from", "to", "points"}.
std::vector<double> axis(const json& j, const std::string& key, std::vector<std::string>& err) {
    if (j.is_array()) {
        std::vector<double> v;
        for (const auto& x : j) {
            if (!x.is_number()) {
                err.push_back(key + ": entries must be numbers");
                return {};
            }
            v.push_back(x.get<double>());
        }
        return v;
    }
    if (j.is_object() && j.contains("from") && j.contains("to") && j.contains("points")) {
        if (!j["points"].is_number_integer() || j["points"].get<long long>() < 1) {
            err.push_back(key + ".points: must be a positive integer");
            return {};
        }
        if (!j["from"].is_number() || !j["to"].is_number()) {
            err.push_back(key + ": from/to must be numbers");
            return {};
        }
        return linspace(j["from"].get<double>(), j["to"].get<double>(), j["points"].get<std::size_t>());
    }
    err.push_back(key + ": expected a number list or {from, to, points}");
    return {};
}

void check_rho(const std::vector<double>& rho, std::size_t n, const std::string& key, std::vector<std::string>& err) {
    if (rho.size() != n) err.push_back(key + ": expected " + std::to_string(n) + " entries, got " + std::to_string(rho.size()));
    for (double r : rho)
        if (!std::isfinite(r) || r < 0.0) {
            err.push_back(key + ": entries must be finite and >= 0");
            break;
        }
}

void check_mass_field(double m, const std::string& key, std::vector<std::string>& err) {
    if (!(m >= 1.0 && m <= 2.0)) err.push_back(key + ": mass " + fmt17(m) + " outside [1,2]");
}

template <class T>
bool read(const json& j, const char* key, T& out, std::vector<std::string>& err, const std::string& prefix = "") {
    if (!j.contains(key)) return false;
    try {
        out = j.at(key).get<T>();
        return true;
    } catch (const json::exception&) {
        err.push_back(prefix + key + ": wrong type");
        return false;
    }
}

void write_text(const fs::path& p, const std::string& text, Written& w) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + p.string());
    w.push_back(p);
}

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

double min_plus_discriminant(const ResonanceGeometry& g, const Eigen::MatrixXd& K) {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& cls : g.classes) {
        if (cls.size() != 2 || !g.is_plus(cls[0], cls[1])) continue;
        const double beta = 2 * K(2 * cls[0], 2 * cls[0] + 1), gamma = 2 * K(2 * cls[1], 2 * cls[1] + 1);
        const double alpha = 2 * K(2 * cls[0], 2 * cls[1]);
        const double delta = (beta + gamma) * (beta + gamma) - 4 * alpha * alpha;
        best = std::isnan(best) ? delta : std::min(best, delta);
    }
    return best;
}

// Signed zeros print as "-0"; drop the sign so reports do not depend on it.
double unsign_zero(double x) { return x == 0.0 ? 0.0 : x; }

json complex_json(cplx z) { return json::array({unsign_zero(z.real()), unsign_zero(z.imag())}); }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::invalid_argument("invalid config: " + join(msgs)), messages(std::move(msgs)) {}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", unsign_zero(x));
    return buf;
}

AnalysisConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config: not valid JSON (") + e.what() + ")"});
    }
    if (!j.is_object()) throw ConfigError({"config: top level must be an object"});

    std::vector<std::string> err;
    AnalysisConfig c;
    if (!read(j, "d", c.d, err)) err.push_back("d: required");
    std::vector<std::vector<std::int64_t>> pts;
    if (!read(j, "A", pts, err)) err.push_back("A: required list of integer vectors");
    if (c.d < 1 && j.contains("d")) err.push_back("d: must be >= 1");
    if (!pts.empty() && c.d >= 1) {
        bool shapes = true;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (static_cast<int>(pts[i].size()) != c.d) {
                err.push_back("A[" + std::to_string(i) + "]: expected " + std::to_string(c.d) + " coordinates");
                shapes = false;
            }
        if (shapes) {
            std::vector<LatticeVector> lv;
            for (auto& p : pts) lv.emplace_back(p);
            try {
                c.A = ModeSet(lv);
                const auto cls = classify_set(c.A);
                if (cls == SetClass::not_admissible)
                    err.push_back("A: not admissible (two points share a norm)");
            } catch (const std::exception& e) {
                err.push_back(std::string("A: ") + e.what());
            }
        }
    } else if (j.contains("A") && pts.empty()) {
        err.push_back("A: must not be empty");
    }

    if (!read(j, "m", c.m, err)) err.push_back("m: required");
    else check_mass_field(c.m, "m", err);
    if (!read(j, "rho", c.rho, err)) err.push_back("rho: required");
    else check_rho(c.rho, pts.size(), "rho", err);
    if (read(j, "nu", c.nu, err) && !(c.nu >= 0.0 && std::isfinite(c.nu))) err.push_back("nu: must be finite and >= 0");
    std::string reading;
    if (read(j, "reading", reading, err)) {
        try {
            c.reading = reading_from_string(reading);
        } catch (const std::exception&) {
            err.push_back("reading: expected \"literal\" or \"recounted\"");
        }
    }
    if (read(j, "seed", c.seed, err)) {}
    if (read(j, "threads", c.threads, err) && c.threads < 1) err.push_back("threads: must be >= 1");
    std::string out;
    if (read(j, "out_dir", out, err)) c.out_dir = out;

    if (j.contains("cutoffs")) {
        const auto& cu = j["cutoffs"];
        if (!cu.is_object()) err.push_back("cutoffs: must be an object");
        else {
            if (read(cu, "lambda", c.lambda_cutoff, err, "cutoffs.") && !(c.lambda_cutoff >= 0.0))
                err.push_back("cutoffs.lambda: must be >= 0");
            if (read(cu, "divisor_K", c.divisor_K, err, "cutoffs.") && c.divisor_K < 1)
                err.push_back("cutoffs.divisor_K: must be >= 1");
            if (read(cu, "divisor_N", c.divisor_N, err, "cutoffs.") && c.divisor_N < 0)
                err.push_back("cutoffs.divisor_N: must be >= 0");
        }
    }

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        SweepGrid g;
        g.m = s.contains("m") ? axis(s["m"], "sweep.m", err) : std::vector<double>{c.m};
        for (double m : g.m) check_mass_field(m, "sweep.m", err);
        if (s.contains("rho")) {
            try {
                g.rho = s["rho"].get<std::vector<std::vector<double>>>();
            } catch (const json::exception&) {
                err.push_back("sweep.rho: expected a list of action vectors");
            }
        }
        if (s.contains("rho_axis")) {
            const auto& ra = s["rho_axis"];
            int idx = -1;
            read(ra, "index", idx, err, "sweep.rho_axis.");
            if (idx < 0 || idx >= static_cast<int>(c.rho.size())) err.push_back("sweep.rho_axis.index: out of range");
            else
                for (double v : axis(ra, "sweep.rho_axis", err)) {
                    auto r = c.rho;
                    r[static_cast<std::size_t>(idx)] = v;
                    g.rho.push_back(r);
                }
        }
        if (g.rho.empty()) g.rho.push_back(c.rho);
        for (std::size_t i = 0; i < g.rho.size(); ++i) check_rho(g.rho[i], pts.size(), "sweep.rho[" + std::to_string(i) + "]", err);
        if (g.m.size() * g.rho.size() > 10000) err.push_back("sweep: more than 10^4 cells");
        c.sweep = g;
    }

    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        SimulateSection sim;
        sim.actions = c.rho;
        read(s, "actions", sim.actions, err, "simulate.");
        check_rho(sim.actions, pts.size(), "simulate.actions", err);
        if (read(s, "T", sim.T, err, "simulate.") && !(sim.T > 0.0)) err.push_back("simulate.T: must be > 0");
        if (read(s, "dt", sim.dt, err, "simulate.") && !(sim.dt > 0.0)) err.push_back("simulate.dt: must be > 0");
        if (sim.dt > sim.T) err.push_back("simulate.dt: must not exceed T");
        read(s, "cutoff", sim.cutoff, err, "simulate.");
        for (std::size_t i = 0; i < c.A.size(); ++i)
            if (c.A[i].norm() > sim.cutoff + 1e-12) {
                err.push_back("simulate.cutoff: must include every point of A");
                break;
            }
        read(s, "transverse_amplitude", sim.transverse_amplitude, err, "simulate.");
        read(s, "nonlinear", sim.nonlinear, err, "simulate.");
        if (read(s, "samples", sim.samples, err, "simulate.") && sim.samples < 2) err.push_back("simulate.samples: must be >= 2");
        c.simulate = sim;
    }

    if (j.contains("sample")) {
        const auto& s = j["sample"];
        read(s, "n", c.sample.n, err, "sample.");
        read(s, "R", c.sample.R, err, "sample.");
        read(s, "trials", c.sample.trials, err, "sample.");
        if (c.sample.n < 1) err.push_back("sample.n: must be >= 1");
        if (c.sample.trials < 1) err.push_back("sample.trials: must be >= 1");
    }
    if (j.contains("norms")) {
        const auto& s = j["norms"];
        read(s, "d", c.norms.d, err, "norms.");
        read(s, "R", c.norms.R, err, "norms.");
        read(s, "settings", c.norms.settings, err, "norms.");
        read(s, "trials", c.norms.trials, err, "norms.");
        for (const auto& st : c.norms.settings)
            if (st.size() != 3) {
                err.push_back("norms.settings: each entry is [gamma1, gamma2, kappa]");
                break;
            }
    }
    if (!err.empty()) throw ConfigError(err);
    return c;
}

AnalysisConfig load_config(const fs::path& file) {
    std::ifstream f(file);
    if (!f) throw ConfigError({"config: cannot read " + file.string()});
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string geometry_json(const ResonanceGeometry& g, SetClass cls) {
    json j;
    j["A"] = json::array();
    for (std::size_t i = 0; i < g.A.size(); ++i) j["A"].push_back(vec_json(g.A[i]));
    j["classification"] = to_string(cls);
    j["lambda_f"] = json::array();
    for (std::size_t i = 0; i < g.lambda_f.size(); ++i)
        j["lambda_f"].push_back({{"b", vec_json(g.lambda_f[i])}, {"ell", vec_json(g.A[static_cast<std::size_t>(g.ell[i])])}});
    auto pairs = [&](const std::vector<std::pair<int, int>>& ps) {
        json a = json::array();
        for (const auto& [x, y] : ps)
            a.push_back({vec_json(g.lambda_f[static_cast<std::size_t>(x)]), vec_json(g.lambda_f[static_cast<std::size_t>(y)])});
        return a;
    };
    j["plus_pairs"] = pairs(g.plus_pairs);
    j["minus_pairs"] = pairs(g.minus_pairs);
    j["classes"] = json::array();
    for (const auto& cl : g.classes) {
        json c = json::array();
        for (int i : cl) c.push_back(vec_json(g.lambda_f[static_cast<std::size_t>(i)]));
        j["classes"].push_back(c);
    }
    j["M"] = g.m();
    j["M0"] = g.m0;
    return j.dump(1);
}

namespace {

struct SpectrumData {
    ResonanceGeometry g;
    Eigen::MatrixXd K;
    SpectrumReport rep;
};

SpectrumData spectrum_of(const AnalysisConfig& cfg) {
    SpectrumData s;
    s.g = resonance_geometry(cfg.A);
    s.K = assemble_K(s.g, cfg.m, cfg.rho, cfg.reading);
    s.rep = classify_spectrum(build_H(s.K, s.g), default_tolerance(s.K));
    return s;
}

std::string spectrum_csv(const SpectrumData& s) {
    std::string out = "block,re,im,class\n";
    for (std::size_t j = 0; j < s.rep.blocks.size(); ++j) {
        const auto& b = s.rep.blocks[j];
        for (std::size_t r = 0; r < b.Lambda.size(); ++r) {
            // ±iΛ, and ±iΛ̄ for the other half of a quadruple.
            std::vector<cplx> lams{b.Lambda[r]};
            if (b.kinds[r] == EigenKind::complex_quadruple) lams.push_back(std::conj(b.Lambda[r]));
            for (const cplx L : lams)
                for (double sign : {1.0, -1.0}) {
                    const cplx h = sign * cplx(0.0, 1.0) * L;
                    out += std::to_string(j) + "," + fmt17(h.real()) + "," + fmt17(h.imag()) + "," + to_string(b.kinds[r]) + "\n";
                }
        }
    }
    return out;
}

std::string spectrum_json_of(const AnalysisConfig& cfg, const SpectrumData& s) {
    json j;
    j["verdict"] = s.rep.stable ? "stable" : "unstable";
    j["stable"] = s.rep.stable;
    j["reading"] = to_string(cfg.reading);
    j["tol"] = s.rep.tol;
    j["max_real_part"] = s.rep.max_real_part();
    j["eigenvalue_scale"] = "eigenvalues of iJK; the flow of nu<K zeta, zeta> runs at nu times these";
    j["nu"] = cfg.nu;
    j["counts"] = json::object();
    for (auto k : {EigenKind::elliptic, EigenKind::hyperbolic_real_pair, EigenKind::complex_quadruple, EigenKind::degenerate})
        j["counts"][to_string(k)] = s.rep.count(k);
    j["blocks"] = json::array();
    for (const auto& b : s.rep.blocks) {
        json jb;
        jb["members"] = json::array();
        for (int i : b.members) jb["members"].push_back(vec_json(s.g.lambda_f[static_cast<std::size_t>(i)]));
        jb["Lambda"] = json::array();
        jb["kinds"] = json::array();
        for (std::size_t r = 0; r < b.Lambda.size(); ++r) {
            jb["Lambda"].push_back(complex_json(b.Lambda[r]));
            jb["kinds"].push_back(to_string(b.kinds[r]));
        }
        jb["eigenvalues"] = json::array();
        for (Eigen::Index k = 0; k < b.eigenvalues.size(); ++k) jb["eigenvalues"].push_back(complex_json(b.eigenvalues[k]));
        j["blocks"].push_back(jb);
    }
    const double delta = min_plus_discriminant(s.g, s.K);
    j["min_plus_discriminant"] = std::isnan(delta) ? json(nullptr) : json(delta);
    return j.dump(1);
}

std::string divisors_csv(const AnalysisConfig& cfg) {
    std::string out = "kind,k,a,b,value,trivial_resonance\n";
    for (const auto& [dv, val] : enumerate_divisors(cfg.A, cfg.m, cfg.divisor_K, cfg.divisor_N)) {
        std::string k;
        for (auto x : dv.k) k += (k.empty() ? "" : " ") + std::to_string(x);
        out += to_string(dv.kind) + "," + csv_quote(k) + "," + csv_quote(dv.a ? dv.a->str() : "") + "," +
               csv_quote(dv.b ? dv.b->str() : "") + "," + fmt17(val.value) + "," + (val.trivial_resonance ? "1" : "0") + "\n";
    }
    return out;
}

BeamSimulationResult simulate_from(const AnalysisConfig& cfg) {
    const auto& s = *cfg.simulate;
    BeamSimulationConfig b;
    b.A = cfg.A;
    b.m = cfg.m;
    b.cutoff = s.cutoff;
    b.actions = s.actions;
    b.T = s.T;
    b.dt = s.dt;
    b.nonlinear = s.nonlinear;
    b.transverse_amplitude = s.transverse_amplitude;
    b.seed = cfg.seed;
    b.samples = s.samples;
    return simulate_truncated_beam(b);
}

std::string dynamics_csv(const BeamSimulationResult& r) {
    std::string out = "t,energy,transverse_norm\n";
    for (const auto& row : r.trajectory) out += fmt17(row.t) + "," + fmt17(row.energy) + "," + fmt17(row.transverse_norm) + "\n";
    return out;
}

}  // namespace

std::string spectrum_json(const AnalysisConfig& cfg) { return spectrum_json_of(cfg, spectrum_of(cfg)); }

Written run_report(const AnalysisConfig& cfg, const fs::path& out_dir) {
    // Compute everything before touching the filesystem.
    const auto g = resonance_geometry(cfg.A);
    const std::string geo = geometry_json(g, classify_set(cfg.A));
    const std::string nf = to_json(assemble_normal_form(cfg.A, cfg.m, cfg.rho, cfg.nu, cfg.lambda_cutoff, cfg.reading));
    const auto spec = spectrum_of(cfg);
    const std::string sj = spectrum_json_of(cfg, spec), sc = spectrum_csv(spec);
    const std::string dv = divisors_csv(cfg);
    std::optional<std::string> dyn;
    if (cfg.simulate) dyn = dynamics_csv(simulate_from(cfg));

    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "geometry.json", geo, w);
    write_text(out_dir / "normalform.json", nf, w);
    write_text(out_dir / "spectrum.json", sj, w);
    write_text(out_dir / "spectrum.csv", sc, w);
    write_text(out_dir / "divisors.csv", dv, w);
    if (dyn) write_text(out_dir / "dynamics.csv", *dyn, w);
    return w;
}

std::vector<SweepRow> run_sweep(const AnalysisConfig& cfg, const SweepGrid& grid) {
    const std::size_t cells = grid.m.size() * grid.rho.size();
    if (cells > 10000) throw ConfigError({"sweep: more than 10^4 cells"});
    const auto g = resonance_geometry(cfg.A);
    std::vector<SweepRow> rows(cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < cells;) {
            try {
                const double m = grid.m[i / grid.rho.size()];
                const auto& rho = grid.rho[i % grid.rho.size()];
                const auto K = assemble_K(g, m, rho, cfg.reading);
                const auto rep = classify_spectrum(build_H(K, g), default_tolerance(K));
                rows[i] = {m, rho, rep.stable, rep.max_real_part(),
                           min_divisor_scan(cfg.A, m, cfg.divisor_K, cfg.divisor_N).min_abs, min_plus_discriminant(g, K)};
            } catch (...) {
                std::lock_guard lk(fail_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

Written write_sweep(const AnalysisConfig& cfg, const SweepGrid& grid, const fs::path& out_dir) {
    const auto rows = run_sweep(cfg, grid);
    std::string out = "m";
    for (std::size_t i = 0; i < cfg.A.size(); ++i) out += ",rho_" + std::to_string(i);
    out += ",verdict,max_real_part,min_divisor,delta\n";
    for (const auto& r : rows) {
        out += fmt17(r.m);
        for (double x : r.rho) out += "," + fmt17(x);
        out += std::string(",") + (r.stable ? "stable" : "unstable") + "," + fmt17(r.max_real_part) + "," +
               fmt17(r.min_divisor) + "," + fmt17(r.delta) + "\n";
    }
    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "sweep.csv", out, w);
    return w;
}

Written run_divisors(const AnalysisConfig& cfg, const fs::path& out_dir) {
    const std::string dv = divisors_csv(cfg);
    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "divisors.csv", dv, w);
    return w;
}

Written run_sample(const AnalysisConfig& cfg, const fs::path& out_dir) {
    std::string out = "d,n,R,trials,frac_admissible,frac_strongly_admissible\n";
    for (double R : cfg.sample.R) {
        const auto t = sample_typicality(cfg.d, cfg.sample.n, R, cfg.sample.trials, cfg.seed, cfg.threads);
        out += std::to_string(cfg.d) + "," + std::to_string(cfg.sample.n) + "," + fmt17(R) + "," + std::to_string(t.trials) +
               "," + fmt17(t.frac_admissible) + "," + fmt17(t.frac_strongly_admissible) + "\n";
    }
    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "typicality.csv", out, w);
    return w;
}

Written run_simulate(const AnalysisConfig& cfg, const fs::path& out_dir) {
    if (!cfg.simulate) throw ConfigError({"simulate: section required"});
    const auto r = simulate_from(cfg);
    json j;
    j["energy_drift"] = r.energy_drift;
    j["action_drift"] = r.action_drift;
    j["transverse_growth"] = r.transverse_growth;
    j["lambda_f_growth"] = r.lambda_f_growth;
    j["T"] = r.final.t;
    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "dynamics.csv", dynamics_csv(r), w);
    write_text(out_dir / "dynamics.json", j.dump(1), w);
    return w;
}

Written run_norms_check(const AnalysisConfig& cfg, const fs::path& out_dir) {
    std::string out = "gamma1,gamma2,kappa,C,trials,product_violations,operator_violations,worst_product_ratio,worst_operator_ratio\n";
    for (const auto& s : cfg.norms.settings) {
        const auto r = norm_property_trials(cfg.norms.d, cfg.norms.R, s[0], s[1], s[2], cfg.norms.trials, cfg.seed);
        out += fmt17(s[0]) + "," + fmt17(s[1]) + "," + fmt17(s[2]) + "," + fmt17(r.C) + "," + std::to_string(r.trials) + "," +
               std::to_string(r.product_violations) + "," + std::to_string(r.operator_violations) + "," +
               fmt17(r.worst_product_ratio) + "," + fmt17(r.worst_operator_ratio) + "\n";
    }
    fs::create_directories(out_dir);
    Written w;
    write_text(out_dir / "norms.csv", out, w);
    return w;
}

}  // namespace beamnf
