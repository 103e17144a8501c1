#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"
#include "beamnf/hamalg.hpp"
#include "beamnf/normalform.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace beamnf;

namespace {

const double kPi = std::numbers::pi;

const ModeSet& plane_set() {
    static const ModeSet A({{0, 1}, {1, -1}});
    return A;
}

}  // namespace

TEST(Omega, ZeroCouplingIsBareFrequencies) {
    const auto A = plane_set();
    const auto o = assemble_omega(A, 1.3, {0.4, 0.7}, 0.0);
    EXPECT_EQ(o.omega[0], eigenfrequency(A[0], 1.3));
    EXPECT_EQ(o.omega[1], eigenfrequency(A[1], 1.3));
}

TEST(Omega, SingleModeMatrix) {
    const ModeSet A({LatticeVector{2}});
    const double m = 1.7;
    const auto o = assemble_omega(A, m, {0.5}, 0.1);
    const double lam = std::sqrt(16 + m);
    EXPECT_NEAR(o.M(0, 0), 3.0 / (2 * kPi * lam * lam), 1e-15);
    EXPECT_NEAR(o.omega[0], lam + 0.1 * 0.5 * 3.0 / (2 * kPi * lam * lam), 1e-14);
}

TEST(Omega, DeterminantStructure) {
    EXPECT_DOUBLE_EQ(omega_factor_matrix(2).determinant(), -15.0);
    EXPECT_DOUBLE_EQ(omega_factor_matrix(2, Reading::recounted).determinant(), -3.0);
    // Eigenvalues of 1 + t(𝟙 − I): 1 − t (n−1 times) and 1 + (n−1)t.
    for (int n = 1; n <= 6; ++n) {
        EXPECT_NEAR(omega_factor_matrix(n).determinant(), std::pow(-3.0, n - 1) * (4 * n - 3), 1e-8);
        EXPECT_NEAR(omega_factor_matrix(n, Reading::recounted).determinant(), std::pow(-1.0, n - 1) * (2 * n - 1),
                    1e-8);
    }
    const ModeSet A({{0, 1, 0}, {1, -1, 0}, {2, 0, 1}});
    const double m = 1.2;
    const auto o = assemble_omega(A, m, {0.3, 0.3, 0.3}, 1.0);
    double prod = 1.0;
    for (std::size_t i = 0; i < A.size(); ++i) prod *= std::pow(eigenfrequency(A[i], m), -2);
    const double closed = std::pow(3.0, 3) * std::pow(2 * kPi, -9) * prod * (9.0 * 9.0);
    EXPECT_NEAR(o.detM, closed, 1e-12 * std::abs(closed));
    EXPECT_TRUE(o.M.isApprox(o.M.transpose(), 0.0));
}

TEST(Omega, LinearInNu) {
    const auto A = plane_set();
    const std::vector<double> rho{0.2, 0.9};
    const auto o0 = assemble_omega(A, 1.5, rho, 0.0);
    const auto o1 = assemble_omega(A, 1.5, rho, 0.01);
    const auto o2 = assemble_omega(A, 1.5, rho, 0.02);
    EXPECT_TRUE(((o2.omega - o0.omega) - 2 * (o1.omega - o0.omega)).isZero(1e-14));
}

TEST(Omega, RejectsBadInput) {
    const auto A = plane_set();
    EXPECT_THROW(assemble_omega(A, 1.5, {0.5}, 0.1), DimensionError);
    EXPECT_THROW(assemble_omega(A, 1.5, {0.5, -0.1}, 0.1), DomainError);
    EXPECT_THROW(assemble_omega(A, 2.5, {0.5, 0.5}, 0.1), DomainError);
}

TEST(BigLambda, Examples) {
    const ModeSet A({LatticeVector{1}});
    EXPECT_EQ(assemble_lambda(A, 1.0, {1.0}, 0.0, LatticeVector{2}), std::sqrt(17.0));
    EXPECT_NEAR(assemble_lambda(A, 1.0, {1.0}, 0.01, LatticeVector{2}),
                std::sqrt(17.0) + 0.06 / (2 * kPi * std::sqrt(2.0) * std::sqrt(17.0)), 1e-15);
    EXPECT_THROW(assemble_lambda(A, 1.0, {1.0}, 0.01, LatticeVector{1}), std::invalid_argument);
    EXPECT_THROW(assemble_lambda(A, 1.0, {1.0}, 0.01, LatticeVector{-1}), std::invalid_argument);
}

TEST(BigLambda, DecaysLikeInverseSquareNorm) {
    // |Λ_a − λ_a| ⟨a⟩² ≤ 6ν(2π)^{-d} Σ ρ_ℓ/λ_ℓ because ⟨a⟩² ≤ λ_a.
    const auto A = plane_set();
    const std::vector<double> rho{0.6, 0.8};
    const double m = 1.4, nu = 0.05;
    const double bound = 6 * nu / (4 * kPi * kPi) * (rho[0] / eigenfrequency(A[0], m) + rho[1] / eigenfrequency(A[1], m));
    double sup = 0.0;
    for (std::int64_t n2 = 3; n2 <= 900; ++n2)
        for (const auto& a : sphere_points(2, n2)) {
            const double br2 = std::max<double>(1.0, static_cast<double>(n2));
            sup = std::max(sup, std::abs(assemble_lambda(A, m, rho, nu, a) - eigenfrequency(a, m)) * br2);
        }
    EXPECT_GT(sup, 0.0);
    EXPECT_LE(sup, bound);
}

TEST(K, PlaneSetBetaGammaAlpha) {
    const auto g = resonance_geometry(plane_set());
    const double m = 1.5;
    const std::vector<double> rho{0.5, 0.5};
    const auto K = assemble_K(g, m, rho);
    const double l1 = std::sqrt(2.5), l2 = std::sqrt(5.5);
    const double c = 3.0 / (4 * kPi * kPi);
    const double beta = c / l1 * (rho[0] / l1 - 2 * rho[1] / l2);
    const double gamma = c / l2 * (rho[1] / l2 - 2 * rho[0] / l1);
    const double alpha = 6.0 / (4 * kPi * kPi) * std::sqrt(rho[0] * rho[1]) / (l1 * l2);
    const int i1 = g.index_of(LatticeVector{0, -1}), i2 = g.index_of(LatticeVector{1, 1});
    EXPECT_NEAR(2 * K(2 * i1, 2 * i1 + 1), beta, 1e-12);
    EXPECT_NEAR(2 * mu(g, i1, m, rho), beta, 1e-12);
    EXPECT_NEAR(2 * mu(g, i2, m, rho), gamma, 1e-12);
    // ξ1ξ2 and η1η2 coefficients of the quadratic form.
    EXPECT_NEAR(K(2 * i1, 2 * i2) + K(2 * i2, 2 * i1), alpha, 1e-12);
    EXPECT_NEAR(K(2 * i1 + 1, 2 * i2 + 1) + K(2 * i2 + 1, 2 * i1 + 1), alpha, 1e-12);
}

TEST(K, StructuralInvariants) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.05, 1.0), um(1.0, 2.0);
    for (const auto& A : {plane_set(), ModeSet({{0, 1, 0}, {1, -1, 0}}), ModeSet({{1, 0}, {0, 2}}),
                          ModeSet({{2, 1}, {0, -1}, {1, 1}})}) {
        const auto g = resonance_geometry(A);
        for (int t = 0; t < 10; ++t) {
            std::vector<double> rho(A.size());
            for (auto& r : rho) r = u(rng);
            const double m = um(rng);
            const auto K = assemble_K(g, m, rho);
            EXPECT_EQ(K, K.transpose());
            const int N = static_cast<int>(g.lambda_f.size());
            for (int i = 0; i < N; ++i) {
                EXPECT_EQ(K(2 * i, 2 * i), 0.0);
                EXPECT_EQ(K(2 * i + 1, 2 * i + 1), 0.0);
                EXPECT_EQ(K(2 * i, 2 * i + 1), mu(g, i, m, rho));
                for (int j = 0; j < N; ++j) {
                    if (i == j) continue;
                    const bool coupled = K.block(2 * i, 2 * j, 2, 2).cwiseAbs().maxCoeff() > 0;
                    EXPECT_EQ(coupled, g.is_plus(i, j) || g.is_minus(i, j));
                    // μ depends on b only through |b|.
                    if (g.lambda_f[static_cast<std::size_t>(i)].norm2() == g.lambda_f[static_cast<std::size_t>(j)].norm2())
                        EXPECT_EQ(mu(g, i, m, rho), mu(g, j, m, rho));
                }
            }
        }
    }
}

TEST(K, OneDimensionalIsBlockDiagonal) {
    const auto g = resonance_geometry(ModeSet({LatticeVector{1}, LatticeVector{3}}));
    const auto K = assemble_K(g, 1.3, {0.4, 0.9});
    for (int i = 0; i < static_cast<int>(g.lambda_f.size()); ++i)
        for (int j = 0; j < static_cast<int>(g.lambda_f.size()); ++j)
            if (i != j) EXPECT_TRUE(K.block(2 * i, 2 * j, 2, 2).isZero(0.0));
}

TEST(K, ZeroActionsGiveZero) {
    const auto g = resonance_geometry(plane_set());
    EXPECT_TRUE(assemble_K(g, 1.5, {0.0, 0.0}).isZero(0.0));
}

TEST(K, CouplingScalesWithSqrtOfActions) {
    const auto g = resonance_geometry(ModeSet({{0, 1, 0}, {1, -1, 0}}));
    const std::vector<double> rho{0.3, 0.2}, rho4{1.2, 0.2};
    const auto K = assemble_K(g, 1.6, rho), K4 = assemble_K(g, 1.6, rho4);
    std::size_t seen = 0;
    for (const auto& [i, j] : g.plus_pairs) {
        const int own = (g.ell[static_cast<std::size_t>(i)] == 0) + (g.ell[static_cast<std::size_t>(j)] == 0);
        EXPECT_NEAR(K4(2 * i, 2 * j), std::pow(2.0, own) * K(2 * i, 2 * j), 1e-15);
        ++seen;
    }
    EXPECT_EQ(seen, 6u);
}

TEST(K, RealCoordinateForm) {
    const auto g = resonance_geometry(ModeSet({{2, 1}, {0, -1}, {1, 1}}));
    const auto K = assemble_K(g, 1.25, {0.7, 0.3, 0.5});
    const auto Kpq = K_to_pq(K);
    EXPECT_TRUE(Kpq.isApprox(Kpq.transpose(), 1e-14));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    const auto N = K.rows() / 2;
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd w(K.rows());
        for (auto& x : w) x = n(rng);
        Eigen::VectorXcd z(K.rows());
        for (Eigen::Index i = 0; i < N; ++i) {
            z[2 * i] = std::complex<double>(w[2 * i], -w[2 * i + 1]) / std::sqrt(2.0);
            z[2 * i + 1] = std::conj(z[2 * i]);
        }
        const std::complex<double> qz = (z.transpose() * K.cast<std::complex<double>>() * z)(0, 0);
        const double qw = w.dot(Kpq * w);
        EXPECT_NEAR(qz.real(), qw, 1e-12);
        EXPECT_NEAR(qz.imag(), 0.0, 1e-12);
    }
    // Diagonal blocks become μ·I.
    EXPECT_NEAR(Kpq(0, 0), K(0, 1), 1e-15);
    EXPECT_NEAR(Kpq(1, 1), K(0, 1), 1e-15);
}

TEST(NormalFormData, JsonRoundTrip) {
    const auto nf = assemble_normal_form(plane_set(), 1.5, {0.5, 0.5}, 0.01, 2.0);
    const auto j = nlohmann::json::parse(to_json(nf));
    EXPECT_EQ(j["K"].size(), 12u);
    EXPECT_EQ(j["K_labels"].size(), 12u);
    EXPECT_EQ(j["K"][0][1].get<double>(), nf.K(0, 1));
    EXPECT_EQ(j["reading"], "literal");
    // |a| ≤ 2 minus norms 1 and 2: 13 − 4 − 4 = 5 points.
    EXPECT_EQ(nf.big_lambda.size(), 5u);
}

namespace {

// Quadratic form on Λ_f read off z4 with ξ_ℓ = η_ℓ = √ρ_ℓ for ℓ ∈ A (angles removed),
// and the Ω-shift matrix read off the A-only part.
struct HamalgReadout {
    std::map<std::pair<Var, Var>, double> quad;
    Eigen::MatrixXd M;
};

HamalgReadout read_z4(const FloatPoly& z4, const ModeSet& A, const std::vector<double>& rho) {
    HamalgReadout out;
    const int n = static_cast<int>(A.size());
    out.M = Eigen::MatrixXd::Zero(n, n);
    auto idx = [&](const LatticeVector& a) {
        for (int i = 0; i < n; ++i)
            if (A[static_cast<std::size_t>(i)] == a) return i;
        return -1;
    };
    for (const auto& [mono, c] : z4.terms()) {
        std::vector<Var> rest;
        double w = 1.0;
        std::vector<int> amodes;
        for (const auto& v : mono.vars) {
            const int k = idx(v.mode);
            if (k < 0) {
                rest.push_back(v);
            } else {
                w *= std::sqrt(rho[static_cast<std::size_t>(k)]);
                if (!v.eta) amodes.push_back(k);
            }
        }
        EXPECT_NEAR(c.imag(), 0.0, 1e-15);
        if (rest.empty()) {
            // c I_k I_l: ∂²/∂I_k∂I_l.
            const int k = amodes[0], l = amodes[1];
            out.M(k, l) += (k == l ? 2.0 : 1.0) * c.real();
            if (k != l) out.M(l, k) += c.real();
        } else if (rest.size() == 2) {
            out.quad[{rest[0], rest[1]}] += w * c.real();
        }
    }
    return out;
}

}  // namespace

TEST(K, ConsistentWithBirkhoffNormalForm) {
    const ModeSet A = plane_set();
    const double m = 1.5;
    const std::vector<double> rho{0.35, 0.8};
    const auto U = make_universe(2, 2);
    const auto r = verify_normal_form(U, A, m);
    ASSERT_TRUE(r.exact_zero);
    const auto z4 = evaluate(r.z4, m);
    const auto h = read_z4(z4, A, rho);
    const auto g = resonance_geometry(A);

    // Ω-shift: the recounted M is exactly what the normal form produces; the literal
    // M doubles every off-diagonal entry.
    const auto lit = assemble_omega(A, m, rho, 1.0, Reading::literal);
    const auto rec = assemble_omega(A, m, rho, 1.0, Reading::recounted);
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
            EXPECT_NEAR(h.M(k, l), rec.M(k, l), 1e-15);
            EXPECT_NEAR(lit.M(k, l), (k == l ? 1.0 : 2.0) * h.M(k, l), 1e-15);
        }

    const auto Klit = assemble_K(g, m, rho, Reading::literal);
    const auto Krec = assemble_K(g, m, rho, Reading::recounted);
    const int N = static_cast<int>(g.lambda_f.size());
    const Eigen::VectorXd r_vec = Eigen::Map<const Eigen::VectorXd>(rho.data(), 2);
    for (int i = 0; i < N; ++i) {
        const auto& a = g.lambda_f[static_cast<std::size_t>(i)];
        const Var xa{a, false}, ea{a, true};
        // ξ_aη_a: z4 part minus the rotating-frame shift Σ_l M^l_{ℓ(a)} ρ_l.
        const double shift = (h.M.row(g.ell[static_cast<std::size_t>(i)]) * r_vec)(0);
        const double two_mu = h.quad.at({xa, ea}) - shift;
        EXPECT_NEAR(2 * Krec(2 * i, 2 * i + 1), two_mu, 1e-14) << a.str();
        // Literal μ differs by the doubled cross terms −6c Σ_{l≠ℓ(a)} ρ_l/(λ_lλ_a).
        double cross = 0.0;
        for (int l = 0; l < 2; ++l)
            if (l != g.ell[static_cast<std::size_t>(i)])
                cross += rho[static_cast<std::size_t>(l)] / (eigenfrequency(A[static_cast<std::size_t>(l)], m) *
                                                              eigenfrequency(a, m));
        EXPECT_NEAR(2 * Klit(2 * i, 2 * i + 1) - two_mu, -2 * c_star(2) * cross, 1e-14) << a.str();

        for (int j = i + 1; j < N; ++j) {
            const auto& b = g.lambda_f[static_cast<std::size_t>(j)];
            const Var xb{b, false}, eb{b, true};
            auto coef = [&](Var p, Var q) {
                if (q < p) std::swap(p, q);
                auto it = h.quad.find({p, q});
                return it == h.quad.end() ? 0.0 : it->second;
            };
            // Off-diagonal entries agree in both readings.
            EXPECT_NEAR(coef(xa, xb), 2 * Klit(2 * i, 2 * j), 1e-14);
            EXPECT_NEAR(coef(ea, eb), 2 * Klit(2 * i + 1, 2 * j + 1), 1e-14);
            EXPECT_NEAR(coef(xa, eb), 2 * Klit(2 * i, 2 * j + 1), 1e-14);
            EXPECT_NEAR(coef(ea, xb), 2 * Klit(2 * i + 1, 2 * j), 1e-14);
            EXPECT_EQ(Klit.block(2 * i, 2 * j, 2, 2), Krec.block(2 * i, 2 * j, 2, 2));
        }
    }
}
