// Acceptance run: one PASS/FAIL line per criterion. `acceptance --criterion N` runs one.
#include "beamnf/app.hpp"
#include "beamnf/dynamics.hpp"
#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"
#include "beamnf/hamalg.hpp"
#include "beamnf/norms.hpp"
#include "beamnf/normalform.hpp"
#include "beamnf/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace beamnf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

const ModeSet kA2({{0, 1}, {1, -1}});
const ModeSet kA3({{0, 1, 0}, {1, -1, 0}});

// β, γ, α of the two-mode Hamiltonian for A = {(0,1),(1,−1)}, written out directly.
struct TwoMode {
    double beta, gamma, alpha, delta;
};
TwoMode two_mode(double m, double r1, double r2) {
    const double pi = std::numbers::pi, l1 = std::sqrt(1 + m), l2 = std::sqrt(4 + m);
    TwoMode t;
    t.alpha = 6 / (4 * pi * pi) * std::sqrt(r1 * r2) / (l1 * l2);
    t.beta = 3 / (4 * pi * pi) / l1 * (r1 / l1 - 2 * r2 / l2);
    t.gamma = 3 / (4 * pi * pi) / l2 * (r2 / l2 - 2 * r1 / l1);
    t.delta = (t.beta + t.gamma) * (t.beta + t.gamma) - 4 * t.alpha * t.alpha;
    return t;
}

using PairSet = std::set<std::pair<LatticeVector, LatticeVector>>;

PairSet pair_set(const ResonanceGeometry& g, const std::vector<std::pair<int, int>>& ps) {
    PairSet s;
    for (auto [i, j] : ps) s.emplace(g.lambda_f[static_cast<std::size_t>(i)], g.lambda_f[static_cast<std::size_t>(j)]);
    return s;
}

Outcome criterion1() {
    Outcome o;
    const auto g = resonance_geometry(kA2);
    const std::set<LatticeVector> lf{{0, -1}, {1, 0}, {-1, 0}, {1, 1}, {-1, 1}, {-1, -1}};
    o.require(std::set<LatticeVector>(g.lambda_f.begin(), g.lambda_f.end()) == lf && g.lambda_f.size() == 6, "Lambda_f listing");
    o.require(pair_set(g, g.plus_pairs) == PairSet{{{0, -1}, {1, 1}}, {{1, 1}, {0, -1}}}, "plus pairs");
    o.require(g.minus_pairs.empty(), "minus pairs empty");
    o.require(g.m() == 5 && g.m0 == 4, "M=5, M0=4");

    double worst = -1e300;
    for (int k = 0; k <= 20; ++k) {
        const double m = 1.0 + 0.05 * k;
        const auto t = two_mode(m, 0.5, 0.5);
        worst = std::max(worst, t.delta);
        // Same Δ from the assembled K.
        const auto K = assemble_K(g, m, {0.5, 0.5});
        const int i = g.index_of({0, -1}), j = g.index_of({1, 1});
        const double beta = 2 * K(2 * i, 2 * i + 1), gamma = 2 * K(2 * j, 2 * j + 1), alpha = 2 * K(2 * i, 2 * j);
        const double dk = (beta + gamma) * (beta + gamma) - 4 * alpha * alpha;
        o.require(std::abs(dk - t.delta) <= 1e-12 * std::abs(t.delta), "K reproduces beta, gamma, alpha at m=" + num(m));
    }
    o.require(worst < -1e-6, "Delta < -1e-6 on 21 masses");
    o.note("max Delta over m grid " + num(worst));

    const auto K = assemble_K(g, 1.5, {0.5, 0.5});
    const auto rep = classify_spectrum(build_H(K, g), default_tolerance(K));
    double min_re = 1e300;
    for (const auto& b : rep.blocks)
        if (b.members.size() == 2)
            for (Eigen::Index k = 0; k < b.eigenvalues.size(); ++k) min_re = std::min(min_re, std::abs(b.eigenvalues[k].real()));
    o.require(min_re > 1e-6, "H5 eigenvalues have |Re| > 1e-6 at m=1.5");
    o.note("min |Re| of H5 eigenvalues " + num(min_re));
    return o;
}

Outcome criterion2() {
    Outcome o;
    const auto g = resonance_geometry(kA3);
    o.require(g.lambda_f.size() == 16, "|Lambda_f| = 16");
    const PairSet plus{{{0, -1, 0}, {1, 1, 0}}, {{1, 1, 0}, {0, -1, 0}}, {{1, 0, -1}, {0, 0, 1}},
                       {{0, 0, 1}, {1, 0, -1}}, {{1, 0, 1}, {0, 0, -1}}, {{0, 0, -1}, {1, 0, 1}}};
    o.require(pair_set(g, g.plus_pairs) == plus, "6 plus pairs as listed");
    o.require(g.minus_pairs.empty(), "minus set empty");
    o.require(g.m() == 13 && g.m0 == 10, "M=13, M0=10");
    o.require(classify_set(kA3) == SetClass::admissible, "admissible but not strongly admissible");
    std::size_t identical_checks = 0;
    for (const auto& rho : std::vector<std::vector<double>>{{0.5, 0.5}, {0.9, 0.2}, {0.1, 1.3}})
        for (double m : {1.0, 1.4, 2.0}) {
            const auto K = assemble_K(g, m, rho);
            const auto H = build_H(K, g);
            std::vector<Eigen::MatrixXcd> big;
            for (std::size_t j = 0; j < H.blocks.size(); ++j)
                if (H.blocks[j].size() > 1) big.push_back(H.block_matrix(j));
            o.require(big.size() == 3, "three nontrivial blocks");
            if (big.size() == 3) {
                o.require(big[0] == big[1] && big[0] == big[2], "exact block equality");
                ++identical_checks;
            }
        }
    o.note(std::to_string(identical_checks) + " (m, rho) points with identical blocks");
    return o;
}

Outcome criterion3() {
    Outcome o;
    struct Case {
        int d;
        ModeSet A;
    };
    for (const auto& [d, A] : {Case{1, ModeSet({LatticeVector{1}, LatticeVector{2}})}, Case{2, kA2}}) {
        const auto U = make_universe(d, 2.0);
        const auto r = verify_normal_form(U, A, 1.5);
        o.require(r.exact_zero && r.residual_terms == 0, "exact zero residual (d=" + std::to_string(d) + ")");
        o.note("d=" + std::to_string(d) + ": residual terms " + std::to_string(r.residual_terms) + ", h4 terms " +
               std::to_string(r.h4_terms));

        const auto diff = z4_plus_closed_form(U, A) - r.z4_plus;
        std::size_t doubled = 0;
        for (const auto& [mono, c] : diff.terms()) {
            const auto* truth = r.z4_plus.find(mono);
            if (truth && c == *truth) ++doubled;
        }
        o.require(diff.empty(), "z4+ matches the closed form (d=" + std::to_string(d) + ")");
        if (!diff.empty())
            o.note("d=" + std::to_string(d) + ": " + std::to_string(diff.size()) + " of " + std::to_string(r.z4_plus.size()) +
                   " z4+ terms differ, " + std::to_string(doubled) +
                   " of them I_l I_k (l != k in A) where the closed form is exactly twice the computed coefficient");
    }
    return o;
}

Outcome criterion4() {
    Outcome o;
    for (double m : {1.0, 1.25, 1.5, 1.75, 2.0}) {
        const auto s = frequency_gap_scan(900, m);
        o.require(s.violations == 0 && s.min_gap >= 0.25, "gap floor at m=" + num(m));
        o.note("m=" + num(m) + " min gap " + num(s.min_gap) + " over " + std::to_string(s.pairs) + " pairs");
    }
    return o;
}

Outcome criterion5() {
    Outcome o;
    // Five-point stencil: truncation O(h⁴), roundoff about 1e-16·λ²/h even at |a| = 30.
    const double h = 1e-3;
    auto diff = [h](const std::function<double(double)>& f, double m) {
        return (f(m - 2 * h) - 8 * f(m - h) + 8 * f(m + h) - f(m + 2 * h)) / (12 * h);
    };
    double worst_fd = 0.0;
    for (std::int64_t n2 : {0, 1, 2, 3, 5, 8, 13, 50, 200, 900})
        for (double m : {1.0 + 2 * h, 1.25, 1.5, 1.75, 2.0 - 2 * h}) {
            const auto d = freq_derivatives(n2, m, 3);
            std::vector<double> fd(3);
            fd[0] = diff([n2](double x) { return eigenfrequency_n2(n2, x); }, m);
            for (int j = 2; j <= 3; ++j)
                fd[static_cast<std::size_t>(j - 1)] =
                    diff([n2, j](double x) { return freq_derivatives(n2, x, j - 1)[static_cast<std::size_t>(j - 2)]; }, m);
            for (std::size_t j = 0; j < 3; ++j) worst_fd = std::max(worst_fd, std::abs(d[j] - fd[j]) / std::abs(fd[j]));
        }
    o.require(worst_fd <= 1e-6, "derivatives vs finite differences, rel 1e-6");
    o.note("worst rel FD error " + num(worst_fd));

    std::mt19937_64 rng(5);
    double worst_det = 0.0;
    for (int t = 0; t < 400; ++t) {
        const int p = 1 + t % 4;
        std::set<std::int64_t> s;
        while (static_cast<int>(s.size()) < p) s.insert(static_cast<std::int64_t>(rng() % 30));
        const std::vector<std::int64_t> n2s(s.begin(), s.end());
        const double m = 1.0 + static_cast<double>(rng() % 1001) / 1000.0;
        const double fac = derivative_determinant_factored(n2s, m);
        worst_det = std::max(worst_det, std::abs(derivative_determinant(n2s, m) - fac) / std::abs(fac));
    }
    o.require(worst_det <= 1e-9, "determinant vs factorisation, rel 1e-9");
    o.note("worst rel determinant error " + num(worst_det));
    return o;
}

Outcome criterion6() {
    Outcome o;
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> um(1.0, 2.0), ur(0.05, 1.0);
    std::size_t done = 0, skipped = 0, attempts = 0;
    double worst_symp = 0.0, worst_diag = 0.0;
    std::size_t kinds[4] = {0, 0, 0, 0};
    while (done < 100 && attempts < 5000) {
        ++attempts;
        const int d = 2 + static_cast<int>(rng() % 2), n = 2 + static_cast<int>(rng() % 2);
        const int bound = d == 2 ? 3 : 2;
        std::vector<LatticeVector> pts;
        std::set<std::int64_t> norms;
        for (int k = 0; k < n; ++k) {
            std::vector<std::int64_t> c(static_cast<std::size_t>(d));
            for (auto& x : c) x = static_cast<std::int64_t>(rng() % (2 * bound + 1)) - bound;
            LatticeVector v(c);
            if (v.norm2() == 0 || !norms.insert(v.norm2()).second) break;
            pts.push_back(v);
        }
        if (static_cast<int>(pts.size()) != n) continue;
        const ModeSet A(pts);
        const auto g = resonance_geometry(A);
        if (g.lambda_f.empty()) continue;
        std::vector<double> rho(A.size());
        for (auto& r : rho) r = ur(rng);
        const auto K = assemble_K(g, um(rng), rho);
        const auto H = build_H(K, g);
        SymplecticDiagonalization sd;
        try {
            sd = symplectic_diagonalize(H, default_tolerance(K));
        } catch (const DegenerateSpectrumError&) {
            ++skipped;
            continue;
        }
        const Eigen::Index N = H.matrix.rows() / 2;
        const Eigen::MatrixXcd J = symplectic_J(N).cast<cplx>();
        const Eigen::MatrixXcd iJ = cplx(0, 1) * J;
        worst_symp = std::max(worst_symp, (sd.U.transpose() * iJ * sd.U - J).cwiseAbs().maxCoeff());
        const Eigen::MatrixXcd D = sd.U.partialPivLu().solve(H.matrix * sd.U);
        worst_diag = std::max(worst_diag, (D - Eigen::MatrixXcd(sd.diag.asDiagonal())).cwiseAbs().maxCoeff());
        for (auto k : sd.kinds) ++kinds[static_cast<int>(k)];
        ++done;
    }
    o.require(done == 100, "100 configurations diagonalised");
    o.require(worst_symp <= 1e-8, "symplectic defect <= 1e-8");
    o.require(worst_diag <= 1e-8, "diagonalisation defect <= 1e-8");
    o.note(std::to_string(done) + " configs (" + std::to_string(skipped) + " degenerate skipped), max |tU(iJ)U-J| " +
           num(worst_symp) + ", max |U^-1 H U - diag| " + num(worst_diag) + ", pairs elliptic/real/quadruple " +
           std::to_string(kinds[0]) + "/" + std::to_string(kinds[1]) + "/" + std::to_string(kinds[2]));
    return o;
}

Outcome criterion7() {
    Outcome o;
    const auto g = resonance_geometry(kA2);
    int blk = -1;
    for (int j = 0; j < g.m(); ++j)
        if (g.classes[static_cast<std::size_t>(j)].size() == 2) blk = j;
    for (int r = 0; r < 2; ++r) {
        const auto pc = eigen_perturbation(kA2, 1.5, 0, {0.0, 1.0}, blk, r);
        const double k = pc.k1 + pc.k2;
        auto fd = [&](double eps) {
            const double L = tracked_eigenvalue(g, 1.5, blk, perturbation_path(2, 0, {0.0, 1.0}, eps), pc.lambda0);
            return 2.0 * (L - pc.lambda0) / (eps * eps);
        };
        const double f1 = fd(1e-2), f2 = fd(5e-3), rich = (4 * f2 - f1) / 3;
        const double rel = std::abs(rich - k) / std::abs(k);
        o.require(rel <= 1e-3, "k1+k2 vs extrapolated FD, member " + std::to_string(r));
        o.note("member " + std::to_string(r) + ": k1+k2=" + num(k) + " (k2=" + num(pc.k2) + "), FD eps=1e-2 " + num(f1) +
               ", eps=5e-3 " + num(f2) + ", extrapolated " + num(rich) + ", rel err " + num(rel));
    }
    return o;
}

Outcome criterion8() {
    Outcome o;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> inst;
    inst.emplace_back("2d rho=(.5,.5)", assemble_K(resonance_geometry(kA2), 1.5, {0.5, 0.5}));
    inst.emplace_back("3d rho=(.7,.7)", assemble_K(resonance_geometry(kA3), 1.2, {0.7, 0.7}));
    {
        const auto g = resonance_geometry(ModeSet({{2, 1}, {0, -1}, {1, 1}}));
        std::mt19937_64 rng(88);
        std::uniform_real_distribution<double> u(0.2, 1.0), um(1.0, 2.0);
        for (int t = 0; t < 50 && inst.size() < 5; ++t) {
            const auto K = assemble_K(g, um(rng), {u(rng), u(rng), u(rng)});
            if (classify_spectrum(build_H(K, g), default_tolerance(K)).max_real_part() > 1e-4)
                inst.emplace_back("3-point set #" + std::to_string(t), K);
        }
    }
    double worst = 0.0;
    for (const auto& [name, K] : inst) {
        std::vector<std::vector<int>> all(1);
        for (int i = 0; i < K.rows() / 2; ++i) all[0].push_back(i);
        const double sigma = classify_spectrum(build_H(K, all), 1e-12).max_real_part();
        const auto fit = linear_growth_rate(K, 40.0 / sigma, 0.05 / K.cwiseAbs().maxCoeff(), 5);
        worst = std::max(worst, std::abs(fit.rate - sigma) / sigma);
        o.require(std::abs(fit.rate - sigma) <= 0.05 * sigma, "growth rate within 5% for " + name);
    }
    o.note(std::to_string(inst.size()) + " hyperbolic instances, worst rel rate error " + num(worst));

    BeamSimulationConfig c;
    c.A = kA2;
    c.m = 1.5;
    c.cutoff = 2.0;
    c.actions = {0.5, 0.5};
    c.T = 100.0;
    c.dt = 0.01;
    c.nonlinear = false;
    c.transverse_amplitude = 1e-3;
    c.seed = 4;
    c.samples = 10;
    const auto sim = simulate_truncated_beam(c);
    o.require(sim.action_drift <= 1e-12, "linear flow conserves actions to 1e-12");
    o.note("linear action drift " + num(sim.action_drift));

    double defect = 0.0;
    for (const auto& [name, K] : inst) defect = std::max(defect, symplectic_defect(monodromy(K, 50.0)));
    o.require(defect <= 1e-8, "monodromy symplectic to 1e-8");
    o.note("max monodromy defect " + num(defect));
    return o;
}

Outcome criterion9() {
    Outcome o;
    struct Setting {
        int d;
        double R, g1, g2, kappa;
    };
    const std::vector<Setting> settings{{2, 4, 0.0, 0.0, 0.0}, {2, 4, 0.5, 1.0, 0.0}, {2, 4, 0.5, 2.0, 1.0},
                                        {2, 4, 1.0, 1.0, 1.0}, {2, 4, 0.2, 3.0, 2.0}, {2, 6, 0.5, 2.0, 1.0},
                                        {3, 2, 0.5, 1.0, 0.5}};
    std::size_t total = 0, bad = 0;
    double worst_p = 0.0, worst_op = 0.0;
    for (const auto& s : settings) {
        const auto r = norm_property_trials(s.d, s.R, s.g1, s.g2, s.kappa, 200, 2024);
        total += r.trials;
        bad += r.product_violations + r.operator_violations;
        worst_p = std::max(worst_p, r.worst_product_ratio);
        worst_op = std::max(worst_op, r.worst_operator_ratio);
    }
    o.require(bad == 0, "no violations");
    o.note(std::to_string(settings.size()) + " settings x 200 trials (" + std::to_string(total) + "), violations " +
           std::to_string(bad) + ", worst ratios product " + num(worst_p) + " operator " + num(worst_op));
    return o;
}

Outcome criterion10() {
    Outcome o;
    for (int d : {2, 3}) {
        double pa = -1, ps = -1;
        std::string row = "d=" + std::to_string(d) + ":";
        for (double R : {5.0, 10.0, 20.0, 40.0}) {
            const auto t = sample_typicality(d, 2, R, 10000, 2024, 1);
            o.require(t.frac_admissible >= pa && t.frac_strongly_admissible >= ps,
                      "nondecreasing at d=" + std::to_string(d) + " R=" + num(R));
            pa = t.frac_admissible;
            ps = t.frac_strongly_admissible;
            row += " R=" + num(R) + " (" + num(pa) + ", " + num(ps) + ")";
        }
        o.note(row);
    }
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome criterion11() {
    Outcome o;
    const std::string cfg_text = R"({"d": 2, "A": [[0,1],[1,-1]], "m": 1.5, "rho": [0.5,0.5], "seed": 11,
        "simulate": {"T": 5, "dt": 0.01, "samples": 100}})";
    const auto cfg = parse_config(cfg_text);
    const auto base = fs::temp_directory_path() / "beamnf_acceptance_determinism";
    fs::remove_all(base);
    const auto a = run_report(cfg, base / "a");
    run_report(parse_config(cfg_text), base / "b");
    std::size_t same = 0;
    for (const auto& f : a) {
        const bool eq = slurp(f) == slurp(base / "b" / f.filename());
        o.require(eq, f.filename().string() + " identical");
        same += eq;
    }
    o.note(std::to_string(same) + "/" + std::to_string(a.size()) + " files byte-identical");
    fs::remove_all(base);
    return o;
}

struct Criterion {
    const char* title;
    double budget_s;  // 0: no runtime requirement
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"2d resonance geometry, discriminant and hyperbolic H5", 1.0, criterion1},
        {"3d resonance geometry and identical blocks", 1.0, criterion2},
        {"Birkhoff identity and z4+ closed form", 30.0, criterion3},
        {"frequency gap floor 1/4", 10.0, criterion4},
        {"frequency derivatives and determinant factorisation", 0.0, criterion5},
        {"symplectic diagonalisation on 100 configurations", 0.0, criterion6},
        {"second-order eigenvalue perturbation vs finite differences", 0.0, criterion7},
        {"growth rate, linear action conservation, monodromy", 0.0, criterion8},
        {"weighted norm inequalities", 0.0, criterion9},
        {"typicality trend", 60.0, criterion10},
        {"report determinism", 0.0, criterion11},
    };
    std::size_t only = 0;
    if (argc == 3 && std::string(argv[1]) == "--criterion") only = std::stoul(argv[2]);
    else if (argc != 1) {
        std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
        return 2;
    }
    if (only > all.size()) {
        std::fprintf(stderr, "criterion must be in 1..%zu\n", all.size());
        return 2;
    }

    int failed = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (only && only != i + 1) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (all[i].budget_s > 0) o.require(secs < all[i].budget_s, "runtime under " + num(all[i].budget_s) + " s");
        std::printf("criterion %2zu: %s  %s [%.2f s]\n    %s\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].title, secs,
                    o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
