#include "beamnf/dynamics.hpp"
#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"
#include "beamnf/normalform.hpp"
#include "beamnf/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace beamnf;

namespace {

const double kPi = std::numbers::pi;

Eigen::MatrixXd plane_K(double m, std::vector<double> rho) {
    return assemble_K(resonance_geometry(ModeSet({{0, 1}, {1, -1}})), m, rho);
}

double eig_rate(const Eigen::MatrixXd& K) {
    std::vector<std::vector<int>> all(1);
    for (int i = 0; i < K.rows() / 2; ++i) all[0].push_back(i);
    return classify_spectrum(build_H(K, all), 1e-12).max_real_part();
}

// ∫_{T^d} u⁴ by the trapezoid rule on a grid fine enough to be exact for the truncated modes.
double quartic_by_quadrature(const TruncatedState& s, double m) {
    const int d = s.modes.front().dim();
    std::int64_t r = 0;
    for (const auto& a : s.modes)
        for (int k = 0; k < d; ++k) r = std::max<std::int64_t>(r, std::abs(a[k]));
    const int G = static_cast<int>(4 * r + 2);
    std::map<LatticeVector, std::size_t> idx;
    for (std::size_t a = 0; a < s.modes.size(); ++a) idx[s.modes[a]] = a;
    std::vector<std::complex<double>> uh(s.modes.size());
    for (std::size_t a = 0; a < s.modes.size(); ++a) {
        const std::size_t na = idx.at(-s.modes[a]);
        const std::complex<double> xa(s.p[a], -s.q[a]), xn(s.p[na], -s.q[na]);
        uh[a] = (xa + std::conj(xn)) / std::sqrt(2.0) / std::sqrt(2.0 * eigenfrequency(s.modes[a], m));
    }
    std::vector<int> x(static_cast<std::size_t>(d), 0);
    double sum = 0.0;
    std::size_t pts = 0;
    for (;;) {
        std::complex<double> u = 0.0;
        for (std::size_t a = 0; a < s.modes.size(); ++a) {
            double ph = 0.0;
            for (int k = 0; k < d; ++k) ph += static_cast<double>(s.modes[a][k]) * 2 * kPi * x[static_cast<std::size_t>(k)] / G;
            u += uh[a] * std::polar(1.0, ph);
        }
        u *= std::pow(2 * kPi, -0.5 * d);
        EXPECT_NEAR(u.imag(), 0.0, 1e-13);
        sum += std::pow(u.real(), 4);
        ++pts;
        int k = 0;
        while (k < d && x[static_cast<std::size_t>(k)] == G - 1) x[static_cast<std::size_t>(k++)] = 0;
        if (k == d) break;
        ++x[static_cast<std::size_t>(k)];
    }
    return sum * std::pow(2 * kPi, d) / static_cast<double>(pts);
}

BeamSimulationConfig one_d(double I, double T, double dt) {
    BeamSimulationConfig c;
    c.A = ModeSet({LatticeVector{1}});
    c.m = 1.5;
    c.cutoff = 2.0;
    c.actions = {I};
    c.T = T;
    c.dt = dt;
    c.seed = 7;
    return c;
}

}  // namespace

TEST(LinearGrowth, EllipticIsFlat) {
    const auto g = resonance_geometry(ModeSet({LatticeVector{1}, LatticeVector{2}}));
    const auto K = assemble_K(g, 1.3, {0.6, 0.4});
    const auto fit = linear_growth_rate(K, 200.0, 0.1, 1);
    EXPECT_LE(std::abs(fit.rate), 1e-3);
}

TEST(LinearGrowth, PlaneSetHyperbolicMatchesEigenvalues) {
    const auto K = plane_K(1.5, {0.5, 0.5});
    const double sigma = eig_rate(K);
    ASSERT_GT(sigma, 1e-3);
    const auto fit = linear_growth_rate(K, 40.0 / sigma, 0.5, 3);
    EXPECT_NEAR(fit.rate, sigma, 0.05 * sigma);
    // Doubling K doubles the rate.
    const auto fit2 = linear_growth_rate(2.0 * K, 20.0 / sigma, 0.25, 3);
    EXPECT_NEAR(fit2.rate, 2.0 * fit.rate, 0.05 * 2.0 * fit.rate);
}

TEST(LinearGrowth, RandomHyperbolicInstances) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.2, 1.0), um(1.0, 2.0);
    int checked = 0;
    const auto g = resonance_geometry(ModeSet({{2, 1}, {0, -1}, {1, 1}}));
    for (int t = 0; t < 40 && checked < 5; ++t) {
        const auto K = assemble_K(g, um(rng), {u(rng), u(rng), u(rng)});
        const double sigma = classify_spectrum(build_H(K, g), default_tolerance(K)).max_real_part();
        if (sigma < 1e-4) continue;
        const auto fit = linear_growth_rate(K, 40.0 / sigma, 0.05 / K.cwiseAbs().maxCoeff(), 5);
        EXPECT_NEAR(fit.rate, sigma, 0.05 * sigma);
        ++checked;
    }
    EXPECT_GT(checked, 0);
}

TEST(Monodromy, IsSymplectic) {
    EXPECT_LE(symplectic_defect(monodromy(plane_K(1.5, {0.5, 0.5}), 100.0)), 1e-8);
    const auto g = resonance_geometry(ModeSet({{0, 1, 0}, {1, -1, 0}}));
    EXPECT_LE(symplectic_defect(monodromy(assemble_K(g, 1.2, {0.9, 0.3}), 250.0)), 1e-8);
}

TEST(Simulation, LinearFlowIsExactRotation) {
    auto c = one_d(0.3, 50.0, 0.01);
    c.A = ModeSet({{0, 1}, {1, -1}});
    c.actions = {0.3, 0.2};
    c.transverse_amplitude = 1e-2;
    c.nonlinear = false;
    const auto r = simulate_truncated_beam(c);
    EXPECT_LE(r.action_drift, 1e-12);
    for (std::size_t a = 0; a < r.initial.modes.size(); ++a) {
        const std::complex<double> z0(r.initial.p[a], -r.initial.q[a]), z1(r.final.p[a], -r.final.q[a]);
        const double lam = eigenfrequency(r.initial.modes[a], c.m);
        EXPECT_LE(std::abs(z1 - z0 * std::polar(1.0, lam * r.final.t)), 1e-11);
    }
    EXPECT_NEAR(r.transverse_growth, 1.0, 1e-12);
}

TEST(Simulation, EnergyMatchesQuadrature) {
    for (int d : {1, 2}) {
        auto c = one_d(0.5, 0.01, 0.01);
        c.A = d == 1 ? ModeSet({LatticeVector{1}, LatticeVector{2}}) : ModeSet({{0, 1}, {1, -1}});
        c.actions = {0.5, 0.3};
        c.transverse_amplitude = 0.1;
        const auto r = simulate_truncated_beam(c);
        const auto& s = r.initial;
        double h2 = 0.0;
        for (std::size_t a = 0; a < s.modes.size(); ++a)
            h2 += eigenfrequency(s.modes[a], c.m) * 0.5 * (s.p[a] * s.p[a] + s.q[a] * s.q[a]);
        const double h = truncated_energy(s, c.m);
        EXPECT_NEAR(h, h2 + quartic_by_quadrature(s, c.m), 1e-12 * h) << d;
        EXPECT_NEAR(r.trajectory.front().energy, h, 1e-15 * h);
    }
}

TEST(Simulation, EnergyDriftSmallAtFineStep) {
    const auto r = simulate_truncated_beam(one_d(1e-2, 100.0, 1e-3));
    EXPECT_LE(r.energy_drift, 1e-6);
}

TEST(Simulation, SecondOrderInStep) {
    auto base = one_d(0.5, 10.0, 0.1);
    base.transverse_amplitude = 0.05;
    std::vector<double> drift;
    for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
        base.dt = dt;
        drift.push_back(simulate_truncated_beam(base).energy_drift);
    }
    for (std::size_t k = 0; k + 1 < drift.size(); ++k) {
        const double ratio = drift[k] / drift[k + 1];
        EXPECT_GT(ratio, 3.0) << k;
        EXPECT_LT(ratio, 5.0) << k;
    }
}

TEST(Simulation, SmallAmplitudeStableOneDimensional) {
    auto c = one_d(1e-4, 1000.0, 0.01);
    c.transverse_amplitude = 1e-6;
    c.samples = 50;
    const auto r = simulate_truncated_beam(c);
    EXPECT_LE(r.transverse_growth, 2.0);
    EXPECT_EQ(r.trajectory.size(), 50u);
}

TEST(Simulation, AbortsOnInstability) {
    auto c = one_d(50.0, 10.0, 0.5);
    EXPECT_THROW(simulate_truncated_beam(c), NumericalError);
}

TEST(Simulation, RejectsBadInput) {
    auto c = one_d(0.1, 1.0, 0.1);
    c.cutoff = 0.5;
    EXPECT_THROW(simulate_truncated_beam(c), DomainError);
    c = one_d(0.1, 1.0, 0.1);
    c.actions = {0.1, 0.2};
    EXPECT_THROW(simulate_truncated_beam(c), DimensionError);
    c = one_d(0.1, 1.0, 0.0);
    EXPECT_THROW(simulate_truncated_beam(c), DomainError);
    c = one_d(0.1, 1.0, 0.1);
    c.m = 3.0;
    EXPECT_THROW(simulate_truncated_beam(c), DomainError);
}
