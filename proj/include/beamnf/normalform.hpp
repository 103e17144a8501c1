#pragma once

#include "beamnf/lattice.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace beamnf {

// C_* = 3(2π)^{-d}
double c_star(int d);

// How the A×A action products of z4⁺ enter M and μ.
//   literal:    M^ℓ_k = 3(4−3δ)/((2π)^d λ_kλ_ℓ) and μ as in the closed formula below.
//   recounted:  each unordered pair counted once, M^ℓ_k = 3(2−δ)/(...), μ = (C_*/2)ρ_{ℓ(a)}λ_a^{-2}.
enum class Reading { literal, recounted };
std::string to_string(Reading r);
Reading reading_from_string(const std::string& s);

struct OmegaData {
    Eigen::VectorXd omega;
    Eigen::MatrixXd M;  // M(k, ℓ) = M^ℓ_k
    double detM = 0.0;
};

// Ω_k = ω_k + ν Σ_ℓ M^ℓ_k ρ_ℓ. ρ is indexed like A.
OmegaData assemble_omega(const ModeSet& A, double m, const std::vector<double>& rho, double nu,
                         Reading reading = Reading::literal);

// Integer factor (4−3δ) or (2−δ) whose determinant fixes det M up to positive scalars.
Eigen::MatrixXd omega_factor_matrix(int n, Reading reading = Reading::literal);

// Λ_a = λ_a + 6ν(2π)^{-d} Σ_ℓ ρ_ℓ/(λ_ℓλ_a) for a ∉ A ∪ Λ_f.
double assemble_lambda(const ModeSet& A, double m, const std::vector<double>& rho, double nu,
                       const LatticeVector& a);

// μ(b,ρ) = C_*((3/2)ρ_{ℓ(b)}λ_b^{-2} − λ_b^{-1} Σ_l ρ_l λ_l^{-1}) for b ∈ Λ_f.
double mu(const ResonanceGeometry& g, int i, double m, const std::vector<double>& rho,
          Reading reading = Reading::literal);

// ν-free K in (ξ_b, η_b) pairs ordered like g.lambda_f: row 2i is ξ_{b_i}, row 2i+1 is η_{b_i}.
// ⟨Kζ,ζ⟩ = Σ K_ij ζ_i ζ_j, so the ξ_bη_b coefficient is 2μ(b,ρ). H = iJK with J = ⊕[[0,1],[−1,0]].
Eigen::MatrixXd assemble_K(const ResonanceGeometry& g, double m, const std::vector<double>& rho,
                           Reading reading = Reading::literal);

// Same quadratic form in real coordinates (p_b, q_b), using ξ = (p − iq)/√2.
Eigen::MatrixXd K_to_pq(const Eigen::MatrixXd& K);

struct NormalFormData {
    ResonanceGeometry geometry;
    double m = 0.0, nu = 0.0;
    std::vector<double> rho;
    Reading reading = Reading::literal;
    Eigen::VectorXd omega;
    Eigen::MatrixXd M;
    double detM = 0.0;
    std::map<LatticeVector, double> big_lambda;  // a ∉ A ∪ Λ_f with |a| ≤ lambda_cutoff
    Eigen::MatrixXd K;
};

NormalFormData assemble_normal_form(const ModeSet& A, double m, const std::vector<double>& rho, double nu,
                                    double lambda_cutoff, Reading reading = Reading::literal);

// JSON text (dump(1)); floats in shortest round-trip form.
std::string to_json(const NormalFormData& nf);

}  // namespace beamnf
