#pragma once

#include "beamnf/lattice.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace beamnf {

// Throws DomainError unless 1 <= m <= 2.
void check_mass(double m);
// True when m sits within 1e-6 of one of the exceptional masses 4/3, 5/3.
bool near_exceptional_mass(double m);

// λ_a = sqrt(|a|^4 + m)
double eigenfrequency(const LatticeVector& a, double m);
double eigenfrequency_n2(std::int64_t n2, double m);

// d^j λ / dm^j for j = 1..j_max.
std::vector<double> freq_derivatives(std::int64_t n2, double m, int j_max);
inline std::vector<double> freq_derivatives(const LatticeVector& a, double m, int j_max) {
    return freq_derivatives(a.norm2(), m, j_max);
}

// p x p matrix (d^j ω_l / dm^j), rows j = 1..p, columns l = 1..p.
Eigen::MatrixXd derivative_matrix(const std::vector<std::int64_t>& n2s, double m);
// Determinant by LU of derivative_matrix.
double derivative_determinant(const std::vector<std::int64_t>& n2s, double m);
// Same determinant through the closed product: sign * ∏Υ_j * ∏ω_l^{-1} * V(ω^{-2}).
double derivative_determinant_factored(const std::vector<std::int64_t>& n2s, double m);

enum class DivisorKind { D0, D1, D2plus, D2minus };
std::string to_string(DivisorKind k);

struct Divisor {
    DivisorKind kind = DivisorKind::D0;
    std::vector<std::int64_t> k;  // indexed by A
    std::optional<LatticeVector> a, b;
};

struct DivisorValue {
    double value = 0.0;
    bool trivial_resonance = false;
};

// ⟨ω,k⟩ (+λ_a) (±λ_b), with ω_i = λ_{a_i}. The resonance flag is decided by
// formal cancellation on squared norms.
DivisorValue divisor_eval(const Divisor& dv, const ModeSet& A, double m);
bool is_trivial_resonance(const Divisor& dv, const ModeSet& A);

struct DivisorScan {
    double min_abs = 0.0;
    Divisor argmin;
    std::size_t scanned = 0;        // non-trivial divisors visited
    std::size_t trivial_skipped = 0;
};

// Exhaustive minimum of |divisor| over k with |k|_1 <= K and a, b in Z^d \ A,
// |a|,|b| <= N. Points enter only through their squared norm, so each norm class
// is represented once (first lexicographic sphere point outside A).
DivisorScan min_divisor_scan(const ModeSet& A, double m, int K, int N);

// Representatives used by the scan.
std::vector<LatticeVector> norm_class_representatives(const ModeSet& A, int N);

// Every divisor in the scan range with its value (used for reports and oracles).
std::vector<std::pair<Divisor, DivisorValue>> enumerate_divisors(const ModeSet& A, double m, int K,
                                                                 int N);

struct MassExclusion {
    double fraction = 0.0;
    std::vector<double> masses;
    std::vector<double> minima;  // min_divisor_scan(m_i).min_abs
};

// Low-discrepancy masses m_i = 1 + frac(u0 + i/φ), u0 drawn from seed.
std::vector<double> sample_masses(std::size_t samples, std::uint64_t seed);
MassExclusion mass_exclusion_estimate(const ModeSet& A, double kappa, int K, int N,
                                      std::size_t samples, std::uint64_t seed);

struct GapScan {
    double min_gap = 0.0;
    std::int64_t argmin_n2a = 0, argmin_n2b = 0;
    std::size_t violations = 0;  // pairs with |λ_a - λ_b| < 1/4
    std::size_t pairs = 0;
};

// |λ_a - λ_b| over all distinct squared norms n2 <= max_n2 (covers every dimension).
GapScan frequency_gap_scan(std::int64_t max_n2, double m);

}  // namespace beamnf
