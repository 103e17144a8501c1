#pragma once

#include "beamnf/lattice.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace beamnf {

// e_{γ,κ}(a,b) = C e^{γ₁[a−b]} max([a−b],1)^{γ₂} min(⟨a⟩,⟨b⟩)^κ
struct WeightParams {
    double gamma1 = 0.0, gamma2 = 0.0, kappa = 0.0, C = 1.0;
};

double weight(const LatticeVector& a, const LatticeVector& b, const WeightParams& w);

// Sites a ∈ Z^d with |a| ≤ R; the truncated stand-in for Z^d.
std::vector<LatticeVector> ball_universe(int d, double R);

// ‖ζ‖²_γ = Σ|ζ_a|² e^{2γ₁|a|}⟨a⟩^{2γ₂}; ζ holds a C² pair per site (entries 2i, 2i+1).
double vector_norm(const std::vector<LatticeVector>& sites, const Eigen::VectorXcd& zeta, double gamma1,
                   double gamma2);

// 2×2 blocks A_a^b at rows 2i..2i+1, columns 2j..2j+1 for sites[i], sites[j].
struct BlockMatrix {
    std::vector<LatticeVector> sites;
    Eigen::MatrixXcd entries;
    Eigen::Matrix2cd block(std::size_t i, std::size_t j) const { return entries.block<2, 2>(2 * i, 2 * j); }
};

// max(sup_a Σ_b ‖A_a^b‖e(a,b), sup_b Σ_a ‖A_a^b‖e(a,b)), ‖·‖ the operator norm of the block.
double matrix_norm(const BlockMatrix& A, const WeightParams& w);

// ‖A‖ as an operator on Y_γ.
double operator_norm(const BlockMatrix& A, double gamma1, double gamma2);

// ‖A‖_{B(Y_γ)} + |A|_{(γ₁,γ₂−m_*),κ}
double b_matrix_norm(const BlockMatrix& A, const WeightParams& w, double m_star);

struct ConstantSearch {
    double C = 1.0;  // smallest C ≥ 1 for which the inequality holds on every tuple
    LatticeVector a, b, c;  // a worst tuple (c unused for the two-point inequality)
};

// e_{γ,κ}(a,b) ≤ e_{γ,0}(a,c)e_{γ,κ}(c,b) for all a,b,c in the universe.
ConstantSearch minimal_constant_chain(const std::vector<LatticeVector>& sites, double gamma1, double gamma2,
                                      double kappa);

// e_{γ̃,κ}(a,0) ≤ e_{γ,κ}(a,b)e_{γ̃,κ}(b,0) for all a,b, with −γ ≤ γ̃ ≤ γ.
ConstantSearch minimal_constant_shift(const std::vector<LatticeVector>& sites, double gamma1, double gamma2,
                                      double kappa, double tgamma1, double tgamma2);

struct NormTrialReport {
    std::size_t trials = 0;
    std::size_t product_violations = 0;   // |AB|, |BA| > |A|_{γ,0}|B|_{γ,κ}
    std::size_t operator_violations = 0;  // ‖Aζ‖_γ̃ > |A|_{γ,κ}‖ζ‖_γ̃
    double worst_product_ratio = 0.0;
    double worst_operator_ratio = 0.0;
    double C = 1.0;  // constant used: max of the two minimal constants
};

// Random sparse block matrices on ball_universe(d, R) with fixed seed. γ̃ cycles through
// (±γ₁, ±γ₂) corners and 0.
NormTrialReport norm_property_trials(int d, double R, double gamma1, double gamma2, double kappa,
                                     std::size_t trials, std::uint64_t seed);

}  // namespace beamnf
