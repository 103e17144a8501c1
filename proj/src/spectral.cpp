#include "beamnf/spectral.hpp"

#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace beamnf {

namespace {

const cplx I_unit(0.0, 1.0);

bool is_real(cplx z, double tol) { return std::abs(z.imag()) <= tol * (1.0 + std::abs(z)); }
bool is_imag(cplx z, double tol) { return std::abs(z.real()) <= tol * (1.0 + std::abs(z)); }

EigenKind kind_of(cplx Lambda, double tol) {
    if (std::abs(Lambda) <= tol) return EigenKind::degenerate;
    if (is_real(Lambda, tol)) return EigenKind::elliptic;
    if (is_imag(Lambda, tol)) return EigenKind::hyperbolic_real_pair;
    return EigenKind::complex_quadruple;
}

// Greedy λ ↔ −λ matching. Returns index pairs (i, j) with i the first unused index.
std::vector<std::pair<int, int>> pair_opposites(const Eigen::VectorXcd& ev) {
    const int n = static_cast<int>(ev.size());
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        used[static_cast<std::size_t>(i)] = true;
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double dist = std::abs(ev[j] + ev[i]);
            if (dist < bd) {
                bd = dist;
                best = j;
            }
        }
        if (best < 0) throw NumericalError("odd number of eigenvalues in a Hamiltonian block");
        used[static_cast<std::size_t>(best)] = true;
        out.emplace_back(i, best);
    }
    return out;
}

cplx pairing(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    // ᵗa (iJ) b without forming J.
    cplx s = 0.0;
    for (Eigen::Index k = 0; k + 1 < a.size(); k += 2) s += a[k] * b[k + 1] - a[k + 1] * b[k];
    return I_unit * s;
}

double krein(const Eigen::VectorXcd& z) {
    double s = 0.0;
    for (Eigen::Index k = 0; k + 1 < z.size(); k += 2) s += std::norm(z[k]) - std::norm(z[k + 1]);
    return s;
}

}  // namespace

Eigen::MatrixXd symplectic_J(Eigen::Index pairs) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * pairs, 2 * pairs);
    for (Eigen::Index i = 0; i < pairs; ++i) {
        J(2 * i, 2 * i + 1) = 1.0;
        J(2 * i + 1, 2 * i) = -1.0;
    }
    return J;
}

std::vector<int> HamiltonianOperator::coordinates(std::size_t j) const {
    std::vector<int> c;
    for (int i : blocks.at(j)) {
        c.push_back(2 * i);
        c.push_back(2 * i + 1);
    }
    return c;
}

Eigen::MatrixXcd HamiltonianOperator::block_matrix(std::size_t j) const {
    const auto c = coordinates(j);
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXcd B(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index s = 0; s < n; ++s) B(r, s) = matrix(c[static_cast<std::size_t>(r)], c[static_cast<std::size_t>(s)]);
    return B;
}

HamiltonianOperator build_H(const Eigen::MatrixXd& K, const std::vector<std::vector<int>>& blocks) {
    if (K.rows() != K.cols() || K.rows() % 2 != 0) throw DimensionError("K must be square of even size");
    if (!K.allFinite()) throw NumericalError("K has non-finite entries");
    if (K != K.transpose()) throw std::invalid_argument("K is not symmetric");
    const int N = static_cast<int>(K.rows() / 2);
    std::vector<int> owner(static_cast<std::size_t>(N), -1);
    for (std::size_t j = 0; j < blocks.size(); ++j)
        for (int i : blocks[j]) {
            if (i < 0 || i >= N || owner[static_cast<std::size_t>(i)] >= 0)
                throw std::invalid_argument("blocks must partition the pair indices");
            owner[static_cast<std::size_t>(i)] = static_cast<int>(j);
        }
    if (std::find(owner.begin(), owner.end(), -1) != owner.end())
        throw std::invalid_argument("blocks must partition the pair indices");

    HamiltonianOperator H;
    H.K = K;
    H.blocks = blocks;
    H.matrix = I_unit * (symplectic_J(N) * K).cast<cplx>();
    for (int r = 0; r < 2 * N; ++r)
        for (int s = 0; s < 2 * N; ++s)
            if (owner[static_cast<std::size_t>(r / 2)] != owner[static_cast<std::size_t>(s / 2)] && H.matrix(r, s) != 0.0)
                throw std::invalid_argument("K couples different blocks");
    return H;
}

double default_tolerance(const Eigen::MatrixXd& K) {
    const double k = K.size() ? K.cwiseAbs().maxCoeff() : 0.0;
    return 1e-9 * std::max(k, 1e-300);
}

std::string to_string(EigenKind k) {
    switch (k) {
        case EigenKind::elliptic: return "elliptic";
        case EigenKind::hyperbolic_real_pair: return "hyperbolic_real_pair";
        case EigenKind::complex_quadruple: return "complex_quadruple";
        case EigenKind::degenerate: return "degenerate";
    }
    return "?";
}

std::size_t SpectrumReport::count(EigenKind k) const {
    std::size_t c = 0;
    for (const auto& b : blocks) c += static_cast<std::size_t>(std::count(b.kinds.begin(), b.kinds.end(), k));
    return c;
}

double SpectrumReport::max_real_part() const {
    double r = 0.0;
    for (const auto& b : blocks)
        for (const auto& e : b.eigenvalues) r = std::max(r, e.real());
    return r;
}

SpectrumReport classify_spectrum(const HamiltonianOperator& H, double tol) {
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    SpectrumReport rep;
    rep.tol = tol;
    for (std::size_t j = 0; j < H.blocks.size(); ++j) {
        BlockSpectrum bs;
        bs.members = H.blocks[j];
        // JK is real; its eigenvalues are the Λ's, H's are iΛ.
        const Eigen::MatrixXd L = (-I_unit * H.block_matrix(j)).real();
        Eigen::EigenSolver<Eigen::MatrixXd> es(L, false);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on block " + std::to_string(j));
        const Eigen::VectorXcd ev = es.eigenvalues();
        bs.eigenvalues = I_unit * ev;
        const bool singleton = bs.members.size() == 1;
        for (const auto& [a, b] : pair_opposites(ev)) {
            (void)b;
            cplx Lam = ev[a];
            if (is_real(Lam, tol)) {
                // Singletons carry the sign of μ = K(ξ_b, η_b).
                const double mu_b = singleton ? H.K(2 * bs.members[0], 2 * bs.members[0] + 1) : 1.0;
                Lam = std::copysign(std::abs(Lam.real()), mu_b);
            } else if (is_imag(Lam, tol)) {
                Lam = cplx(0.0, std::abs(Lam.imag()));
            } else if (Lam.real() < 0.0) {
                Lam = -Lam;
            }
            bs.Lambda.push_back(Lam);
            bs.kinds.push_back(kind_of(Lam, tol));
            if (bs.kinds.back() == EigenKind::hyperbolic_real_pair || bs.kinds.back() == EigenKind::complex_quadruple)
                rep.stable = false;
        }
        rep.blocks.push_back(std::move(bs));
    }
    return rep;
}

Eigen::VectorXcd involution_I(const Eigen::VectorXcd& z) {
    Eigen::VectorXcd w(z.size());
    for (Eigen::Index k = 0; k + 1 < z.size(); k += 2) {
        w[k] = std::conj(z[k + 1]);
        w[k + 1] = std::conj(z[k]);
    }
    return w;
}

SymplecticDiagonalization symplectic_diagonalize(const HamiltonianOperator& H, double tol) {
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    const Eigen::Index dim = H.matrix.rows();
    SymplecticDiagonalization out;
    out.U = Eigen::MatrixXcd::Zero(dim, dim);
    out.U_real = Eigen::MatrixXcd::Zero(dim, dim);
    out.diag = Eigen::VectorXcd::Zero(dim);
    Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(dim, dim);
    const double s2 = 1.0 / std::sqrt(2.0);
    Eigen::Index col = 0;

    for (std::size_t j = 0; j < H.blocks.size(); ++j) {
        const auto coords = H.coordinates(j);
        const Eigen::MatrixXcd B = H.block_matrix(j);
        const Eigen::Index n = B.rows();
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(B, true);
        if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed on block " + std::to_string(j));
        const Eigen::VectorXcd h = es.eigenvalues();
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = a + 1; b < n; ++b)
                if (std::abs(h[a] - h[b]) <= tol)
                    throw DegenerateSpectrumError("block " + std::to_string(j) + " has eigenvalues closer than tol");
        Eigen::MatrixXcd V = es.eigenvectors();
        for (Eigen::Index a = 0; a < n; ++a) V.col(a).normalize();

        auto place = [&](Eigen::MatrixXcd& target, Eigen::Index c, const Eigen::VectorXcd& v) {
            for (Eigen::Index r = 0; r < n; ++r) target(coords[static_cast<std::size_t>(r)], c) = v[r];
        };

        const auto pairs = pair_opposites(h);
        std::vector<bool> done(pairs.size(), false);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (done[p]) continue;
            done[p] = true;
            auto [a, b] = pairs[p];
            const cplx Lam = -I_unit * h[a];
            const EigenKind kind = kind_of(Lam, tol);
            if (kind == EigenKind::degenerate) throw DegenerateSpectrumError("zero eigenvalue in block " + std::to_string(j));

            Eigen::VectorXcd z1 = V.col(a), z2 = V.col(b);
            if (kind == EigenKind::elliptic) {
                out.pairings.push_back(pairing(z1, z2));
                place(unit, col, z1);
                place(unit, col + 1, z2);
                // The eigenvector with positive Σ|ξ|²−|η|² goes first.
                if (krein(z1) < 0.0) {
                    std::swap(a, b);
                    z1 = V.col(a);
                }
                const double k = krein(z1);
                if (!(k > 0.0)) throw DegenerateSpectrumError("elliptic eigenvector with zero Krein form");
                z1 /= std::sqrt(k);
                z2 = -I_unit * involution_I(z1);
                place(out.U, col, z1);
                place(out.U, col + 1, z2);
                out.diag[col] = h[a];
                out.diag[col + 1] = -h[a];
                const Eigen::VectorXcd Iz1 = involution_I(z1);
                place(out.U_real, col, s2 * (z1 + Iz1));
                place(out.U_real, col + 1, I_unit * s2 * (z1 - Iz1));
                out.kinds.push_back(kind);
                col += 2;
            } else if (kind == EigenKind::hyperbolic_real_pair) {
                out.pairings.push_back(pairing(z1, z2));
                place(unit, col, z1);
                place(unit, col + 1, z2);
                for (auto* z : {&z1, &z2}) {
                    const cplx alpha = z->dot(involution_I(*z));  // I(z) = αz, |α| = 1
                    *z *= std::sqrt(alpha);
                }
                const cplx pi = pairing(z1, z2);
                z2 /= pi.real();
                place(out.U, col, z1);
                place(out.U, col + 1, z2);
                place(out.U_real, col, z1);
                place(out.U_real, col + 1, z2);
                out.diag[col] = h[a];
                out.diag[col + 1] = h[b];
                out.kinds.push_back(kind);
                col += 2;
            } else {
                // Partner pair carries conj(h_a), −conj(h_a).
                std::size_t q = pairs.size();
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t t = 0; t < pairs.size(); ++t) {
                    if (done[t]) continue;
                    const cplx ht = h[pairs[t].first];
                    const double dist = std::min(std::abs(ht - std::conj(h[a])), std::abs(ht + std::conj(h[a])));
                    if (dist < best) {
                        best = dist;
                        q = t;
                    }
                }
                if (q == pairs.size()) throw NumericalError("unpaired complex eigenvalue in block " + std::to_string(j));
                done[q] = true;
                const auto [c, d] = pairs[q];
                const Eigen::VectorXcd z3u = V.col(c), z4u = V.col(d);
                out.pairings.push_back(pairing(z1, z2));
                out.pairings.push_back(pairing(z3u, z4u));
                place(unit, col, z1);
                place(unit, col + 1, z2);
                place(unit, col + 2, z3u);
                place(unit, col + 3, z4u);

                z2 /= pairing(z1, z2);
                const Eigen::VectorXcd z3 = involution_I(z1), z4 = involution_I(z2);
                place(out.U, col, z1);
                place(out.U, col + 1, z2);
                place(out.U, col + 2, z3);
                place(out.U, col + 3, z4);
                out.diag[col] = h[a];
                out.diag[col + 1] = -h[a];
                out.diag[col + 2] = std::conj(h[a]);
                out.diag[col + 3] = -std::conj(h[a]);
                place(out.U_real, col, s2 * (z1 + z3));
                place(out.U_real, col + 1, s2 * (z2 + z4));
                place(out.U_real, col + 2, I_unit * s2 * (z1 - z3));
                place(out.U_real, col + 3, -I_unit * s2 * (z2 - z4));
                out.kinds.push_back(kind);
                out.kinds.push_back(kind);
                col += 4;
            }
        }
    }
    out.unit_det_abs = std::abs(unit.determinant());
    return out;
}

std::vector<double> perturbation_path(std::size_t n, int j_star, const std::vector<double>& x, double eps) {
    std::vector<double> rho(n);
    for (std::size_t j = 0; j < n; ++j)
        rho[j] = static_cast<int>(j) == j_star ? 1.0 : eps * eps * x[j] * x[j];
    return rho;
}

double tracked_eigenvalue(const ResonanceGeometry& g, double m, int block, const std::vector<double>& rho,
                          double target) {
    const auto H = build_H(assemble_K(g, m, rho), g);
    const Eigen::MatrixXd L = (-I_unit * H.block_matrix(static_cast<std::size_t>(block))).real();
    Eigen::EigenSolver<Eigen::MatrixXd> es(L, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    const Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < ev.size(); ++k)
        if (std::abs(ev[k] - target) < std::abs(ev[best] - target)) best = k;
    return ev[best].real();
}

PerturbationCoefficients eigen_perturbation(const ModeSet& A, double m, int j_star, const std::vector<double>& x,
                                            int block, int r) {
    check_mass(m);
    const int n = static_cast<int>(A.size());
    if (j_star < 0 || j_star >= n) throw std::out_of_range("j_star out of range");
    if (static_cast<int>(x.size()) != n) throw DimensionError("x must have one entry per element of A");
    for (int j = 0; j < n; ++j) {
        const double v = x[static_cast<std::size_t>(j)];
        if (j == j_star ? v != 0.0 : !(v > 0.0))
            throw DomainError("x must vanish at j_star and be positive elsewhere");
    }
    const auto g = resonance_geometry(A);
    if (block < 0 || block >= g.m()) throw std::out_of_range("block out of range");
    const auto& cls = g.classes[static_cast<std::size_t>(block)];
    if (r < 0 || r >= static_cast<int>(cls.size())) throw std::out_of_range("r out of range");

    const double cs = c_star(A.dim());
    const std::vector<double> rho_star = perturbation_path(A.size(), j_star, x, 0.0);
    const int b1 = cls[static_cast<std::size_t>(r)];
    const int jh = g.ell[static_cast<std::size_t>(b1)];  // j#
    auto lamA = [&](int j) { return eigenfrequency(A[static_cast<std::size_t>(j)], m); };

    PerturbationCoefficients pc;
    pc.lambda0 = mu(g, b1, m, rho_star);
    double sx = 0.0;
    for (int j = 0; j < n; ++j) sx += x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)] / lamA(j);
    const double xh = x[static_cast<std::size_t>(jh)];
    pc.k1 = cs / lamA(jh) * (3.0 * xh * xh / lamA(jh) - 2.0 * sx);

    const double scale = std::abs(cs) / (lamA(jh) * lamA(jh));
    if (std::abs(pc.lambda0) <= 1e-12 * scale)
        throw DegenerateSpectrumError("tracked eigenvalue vanishes at the base point");
    double S = 0.0;
    for (int bj : cls) {
        if (bj == b1) continue;
        const double mu_j = mu(g, bj, m, rho_star);
        const bool plus = g.is_plus(b1, bj), minus = g.is_minus(b1, bj);
        const int lj = g.ell[static_cast<std::size_t>(bj)];
        double phi = 0.0;
        if (jh == j_star)
            phi = x[static_cast<std::size_t>(lj)];
        else if (lj == j_star)
            phi = xh;
        const bool coupled = (plus || minus) && phi != 0.0;
        const double den = minus ? mu_j - pc.lambda0 : mu_j + pc.lambda0;
        if (coupled && std::abs(den) <= 1e-12 * scale)
            throw VanishingDenominatorError("mu(b_j) " + std::string(minus ? "-" : "+") + " mu(b_1) vanishes for b_j = " +
                                            g.lambda_f[static_cast<std::size_t>(bj)].str());
        if (!coupled && (std::abs(mu_j - pc.lambda0) <= 1e-12 * scale || std::abs(mu_j + pc.lambda0) <= 1e-12 * scale))
            throw DegenerateSpectrumError("tracked eigenvalue is not simple at the base point");
        if (!coupled) continue;
        const double lb = eigenfrequency(g.lambda_f[static_cast<std::size_t>(bj)], m);
        S += phi * phi / (lb * lb) / den;
    }
    pc.S = cs * cs / (lamA(jh) * lamA(jh)) * S;
    pc.k2 = -2.0 * pc.S;
    return pc;
}

}  // namespace beamnf
