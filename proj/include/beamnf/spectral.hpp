#pragma once

#include "beamnf/lattice.hpp"
#include "beamnf/normalform.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace beamnf {

using cplx = std::complex<double>;

// H = iJK on (ξ_b, η_b) pairs, J = ⊕[[0,1],[−1,0]]. Blocks are index sets into the
// pairs (one per equivalence class); H leaves each block's span invariant.
struct HamiltonianOperator {
    Eigen::MatrixXcd matrix;
    std::vector<std::vector<int>> blocks;
    Eigen::MatrixXd K;
    // Rows/columns of `matrix` for block j: 2i, 2i+1 for i in blocks[j].
    std::vector<int> coordinates(std::size_t j) const;
    Eigen::MatrixXcd block_matrix(std::size_t j) const;
};

Eigen::MatrixXd symplectic_J(Eigen::Index pairs);

// Rejects non-square, odd-sized or asymmetric K, and block lists that do not
// partition the pairs or that K couples.
HamiltonianOperator build_H(const Eigen::MatrixXd& K, const std::vector<std::vector<int>>& blocks);
inline HamiltonianOperator build_H(const Eigen::MatrixXd& K, const ResonanceGeometry& g) {
    return build_H(K, g.classes);
}

// 1e-9 · max(‖K‖_max, tiny).
double default_tolerance(const Eigen::MatrixXd& K);

enum class EigenKind { elliptic, hyperbolic_real_pair, complex_quadruple, degenerate };
std::string to_string(EigenKind k);

struct BlockSpectrum {
    std::vector<int> members;
    // One Λ per ± pair of H eigenvalues ±iΛ. Real Λ: elliptic. Imaginary Λ: real pair.
    std::vector<cplx> Lambda;
    std::vector<EigenKind> kinds;
    Eigen::VectorXcd eigenvalues;  // raw H eigenvalues
};

struct SpectrumReport {
    std::vector<BlockSpectrum> blocks;
    bool stable = true;  // no hyperbolic or quadruple content
    double tol = 0.0;
    std::size_t count(EigenKind k) const;
    double max_real_part() const;  // max Re of H eigenvalues
};

// Singleton blocks report Λ = μ(b,ρ) with its sign. Other real Λ are reported ≥ 0,
// and complex ones with Re ≥ 0, Im ≥ 0.
SpectrumReport classify_spectrum(const HamiltonianOperator& H, double tol);

struct SymplecticDiagonalization {
    Eigen::MatrixXcd U;       // columns z_1..z_2N, block by block
    Eigen::VectorXcd diag;    // H z_k = diag_k z_k
    Eigen::MatrixXcd U_real;  // columns p,q with I(p) = p, I(q) = q
    std::vector<EigenKind> kinds;  // one per column pair
    std::vector<cplx> pairings;    // π_l = ᵗz_{2l−1}(iJ)z_{2l} for unit eigenvectors
    double unit_det_abs = 0.0;     // |det| of the unit-eigenvector matrix
};

// I(ξ,η) = (η̄, ξ̄) per pair.
Eigen::VectorXcd involution_I(const Eigen::VectorXcd& z);

// U⁻¹HU = diag, ᵗU(iJ)U = J. Per pair: elliptic z_2 = −i I(z_1) (z_1 chosen with positive
// Σ|ξ|²−|η|²); real pair I(z_k) = z_k; quadruple z_3 = I(z_1), z_4 = I(z_2).
// Throws DegenerateSpectrumError if two eigenvalues of a block are within tol.
SymplecticDiagonalization symplectic_diagonalize(const HamiltonianOperator& H, double tol);

struct PerturbationCoefficients {
    double lambda0 = 0.0;  // μ(b_1, ρ_*)
    double k1 = 0.0;       // d²μ(b_1, ρ(ε))/dε² at 0
    double k2 = 0.0;       // second-order coupling contribution, = −2 S
    double S = 0.0;        // the sum C_*²/λ²Σ φ²/λ² (χ⁻/(μ_j−μ_1) + χ⁺/(μ_j+μ_1))
    // Λ(ε) = lambda0 + ½ε²(k1 + k2) + O(ε⁴)
};

// ρ(ε)_j = 1 at j_star and ε²x_j² elsewhere (indices into A). Tracks the eigenvalue of JK
// starting at μ(b_1, ρ_*) with b_1 = classes[block][r]. Requires x[j_star] = 0 and x_j > 0 otherwise.
PerturbationCoefficients eigen_perturbation(const ModeSet& A, double m, int j_star, const std::vector<double>& x,
                                            int block, int r);

// ρ(ε) as above.
std::vector<double> perturbation_path(std::size_t n, int j_star, const std::vector<double>& x, double eps);

// Eigenvalue of JK(ρ(ε)) restricted to the block, nearest to `target`.
double tracked_eigenvalue(const ResonanceGeometry& g, double m, int block, const std::vector<double>& rho,
                          double target);

}  // namespace beamnf
