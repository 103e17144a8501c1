#include "beamnf/norms.hpp"

#include "beamnf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace beamnf {

namespace {

void check_params(const WeightParams& w) {
    if (!(w.C > 0.0) || !std::isfinite(w.C)) throw DomainError("weight constant C must be positive");
    if (!std::isfinite(w.gamma1) || !std::isfinite(w.gamma2) || !std::isfinite(w.kappa))
        throw DomainError("weight exponents must be finite");
}

// Largest singular value of a 2×2 block.
double block_norm(const Eigen::Matrix2cd& B) {
    const double f = B.squaredNorm();
    const double det = std::abs(B.determinant());
    return std::sqrt(0.5 * (f + std::sqrt(std::max(0.0, f * f - 4.0 * det * det))));
}

Eigen::MatrixXd weight_table(const std::vector<LatticeVector>& sites, const WeightParams& w) {
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd E(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            E(i, j) = weight(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)], w);
    return E;
}

Eigen::MatrixXd block_norms(const BlockMatrix& A) {
    const auto n = static_cast<Eigen::Index>(A.sites.size());
    if (A.entries.rows() != 2 * n || A.entries.cols() != 2 * n)
        throw DimensionError("block matrix entries must be 2|sites| square");
    Eigen::MatrixXd N(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) N(i, j) = block_norm(A.entries.block<2, 2>(2 * i, 2 * j));
    return N;
}

double weighted_sum_norm(const Eigen::MatrixXd& N, const Eigen::MatrixXd& E) {
    const Eigen::MatrixXd P = N.cwiseProduct(E);
    return std::max(P.rowwise().sum().maxCoeff(), P.colwise().sum().maxCoeff());
}

Eigen::VectorXd site_weights(const std::vector<LatticeVector>& sites, double gamma1, double gamma2) {
    Eigen::VectorXd w(2 * static_cast<Eigen::Index>(sites.size()));
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const double v = std::exp(gamma1 * sites[i].norm()) * std::pow(sites[i].bracket(), gamma2);
        w[2 * static_cast<Eigen::Index>(i)] = w[2 * static_cast<Eigen::Index>(i) + 1] = v;
    }
    return w;
}

}  // namespace

double weight(const LatticeVector& a, const LatticeVector& b, const WeightParams& w) {
    check_params(w);
    const double pd = pseudo_dist(a, b).value;
    return w.C * std::exp(w.gamma1 * pd) * std::pow(std::max(pd, 1.0), w.gamma2) *
           std::pow(std::min(a.bracket(), b.bracket()), w.kappa);
}

std::vector<LatticeVector> ball_universe(int d, double R) {
    if (d < 1) throw DimensionError("dimension must be >= 1");
    if (!(R >= 0.0) || !std::isfinite(R)) throw DomainError("radius must be finite and >= 0");
    std::vector<LatticeVector> sites;
    const auto nmax = static_cast<std::int64_t>(std::floor(R * R + 1e-9));
    for (std::int64_t n2 = 0; n2 <= nmax; ++n2)
        for (auto& a : sphere_points(d, n2)) sites.push_back(std::move(a));
    return sites;
}

double vector_norm(const std::vector<LatticeVector>& sites, const Eigen::VectorXcd& zeta, double gamma1,
                   double gamma2) {
    if (zeta.size() != 2 * static_cast<Eigen::Index>(sites.size())) throw DimensionError("zeta must have 2|sites| entries");
    return zeta.cwiseProduct(site_weights(sites, gamma1, gamma2).cast<std::complex<double>>()).norm();
}

double matrix_norm(const BlockMatrix& A, const WeightParams& w) {
    return weighted_sum_norm(block_norms(A), weight_table(A.sites, w));
}

double operator_norm(const BlockMatrix& A, double gamma1, double gamma2) {
    const Eigen::VectorXd w = site_weights(A.sites, gamma1, gamma2);
    const Eigen::MatrixXcd S = w.cast<std::complex<double>>().asDiagonal() * A.entries *
                               w.cwiseInverse().cast<std::complex<double>>().asDiagonal();
    if (S.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
    return svd.singularValues()(0);
}

double b_matrix_norm(const BlockMatrix& A, const WeightParams& w, double m_star) {
    WeightParams shifted = w;
    shifted.gamma2 -= m_star;
    return operator_norm(A, w.gamma1, w.gamma2) + matrix_norm(A, shifted);
}

ConstantSearch minimal_constant_chain(const std::vector<LatticeVector>& sites, double gamma1, double gamma2,
                                      double kappa) {
    const WeightParams wk{gamma1, gamma2, kappa, 1.0}, w0{gamma1, gamma2, 0.0, 1.0};
    const Eigen::MatrixXd Ek = weight_table(sites, wk), E0 = weight_table(sites, w0);
    // With constant C the inequality reads C·e¹(a,b) ≤ C²·e¹(a,c)e¹(c,b), so C ≥ the ratio.
    ConstantSearch out;
    const auto n = static_cast<Eigen::Index>(sites.size());
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index b = 0; b < n; ++b) {
                const double r = Ek(a, b) / (E0(a, c) * Ek(c, b));
                if (r > out.C) {
                    out.C = r;
                    out.a = sites[static_cast<std::size_t>(a)];
                    out.b = sites[static_cast<std::size_t>(b)];
                    out.c = sites[static_cast<std::size_t>(c)];
                }
            }
    return out;
}

ConstantSearch minimal_constant_shift(const std::vector<LatticeVector>& sites, double gamma1, double gamma2,
                                      double kappa, double tgamma1, double tgamma2) {
    if (std::abs(tgamma1) > gamma1 || std::abs(tgamma2) > gamma2)
        throw DomainError("shift exponents must satisfy -gamma <= tilde gamma <= gamma");
    const WeightParams w{gamma1, gamma2, kappa, 1.0}, wt{tgamma1, tgamma2, kappa, 1.0};
    ConstantSearch out;
    if (sites.empty()) return out;
    const auto zero = LatticeVector::zero(sites.front().dim());
    for (const auto& a : sites)
        for (const auto& b : sites) {
            const double r = weight(a, zero, wt) / (weight(a, b, w) * weight(b, zero, wt));
            if (r > out.C) {
                out.C = r;
                out.a = a;
                out.b = b;
            }
        }
    return out;
}

NormTrialReport norm_property_trials(int d, double R, double gamma1, double gamma2, double kappa,
                                     std::size_t trials, std::uint64_t seed) {
    const auto sites = ball_universe(d, R);
    const auto n = static_cast<Eigen::Index>(sites.size());
    const std::vector<std::pair<double, double>> shifts{
        {gamma1, gamma2}, {-gamma1, -gamma2}, {gamma1, -gamma2}, {-gamma1, gamma2}, {0.0, 0.0}};

    NormTrialReport rep;
    rep.trials = trials;
    rep.C = minimal_constant_chain(sites, gamma1, gamma2, kappa).C;
    for (const auto& [t1, t2] : shifts) rep.C = std::max(rep.C, minimal_constant_shift(sites, gamma1, gamma2, kappa, t1, t2).C);

    const Eigen::MatrixXd Ek = weight_table(sites, {gamma1, gamma2, kappa, rep.C});
    const Eigen::MatrixXd E0 = weight_table(sites, {gamma1, gamma2, 0.0, rep.C});
    const double slack = 1.0 + 1e-12;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_matrix = [&](double density) {
        BlockMatrix M;
        M.sites = sites;
        M.entries = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (u(rng) >= density) continue;
                const double decay = std::exp(-gamma1 * pseudo_dist(sites[static_cast<std::size_t>(i)],
                                                                    sites[static_cast<std::size_t>(j)]).value);
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                        M.entries(2 * i + r, 2 * j + c) = decay * std::complex<double>(g(rng), g(rng));
            }
        return M;
    };

    for (std::size_t t = 0; t < trials; ++t) {
        const double density = 0.05 + 0.5 * u(rng);
        const auto A = random_matrix(density), B = random_matrix(density);
        const double nA0 = weighted_sum_norm(block_norms(A), E0);
        const double nAk = weighted_sum_norm(block_norms(A), Ek);
        const double nBk = weighted_sum_norm(block_norms(B), Ek);
        BlockMatrix AB{sites, A.entries * B.entries}, BA{sites, B.entries * A.entries};
        for (const auto& P : {AB, BA}) {
            const double lhs = weighted_sum_norm(block_norms(P), Ek), rhs = nA0 * nBk;
            if (rhs > 0.0) rep.worst_product_ratio = std::max(rep.worst_product_ratio, lhs / rhs);
            if (lhs > rhs * slack) ++rep.product_violations;
        }

        const auto [t1, t2] = shifts[t % shifts.size()];
        Eigen::VectorXcd z(2 * n);
        for (auto& v : z) v = std::complex<double>(g(rng), g(rng)) * std::exp(-std::abs(t1) * u(rng));
        const double lhs = vector_norm(sites, A.entries * z, t1, t2), rhs = nAk * vector_norm(sites, z, t1, t2);
        if (rhs > 0.0) rep.worst_operator_ratio = std::max(rep.worst_operator_ratio, lhs / rhs);
        if (lhs > rhs * slack) ++rep.operator_violations;
    }
    return rep;
}

}  // namespace beamnf
