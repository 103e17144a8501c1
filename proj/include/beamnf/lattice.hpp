#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamnf {

// Integer point of Z^d. Squared norms are exact; floats only appear in views.
class LatticeVector {
public:
    LatticeVector() = default;
    explicit LatticeVector(std::vector<std::int64_t> coords);
    LatticeVector(std::initializer_list<std::int64_t> coords);

    static LatticeVector zero(int d);

    int dim() const { return static_cast<int>(c_.size()); }
    const std::vector<std::int64_t>& coords() const { return c_; }
    std::int64_t operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }

    std::int64_t norm2() const;
    double norm() const;
    // <a> = max(1, |a|)
    double bracket() const;
    bool is_zero() const;

    LatticeVector operator+(const LatticeVector& o) const;
    LatticeVector operator-(const LatticeVector& o) const;
    LatticeVector operator-() const;
    LatticeVector operator*(std::int64_t s) const;

    bool operator==(const LatticeVector&) const = default;
    std::strong_ordering operator<=>(const LatticeVector& o) const { return c_ <=> o.c_; }

    std::string str() const;

private:
    std::vector<std::int64_t> c_;
};

std::int64_t dot(const LatticeVector& a, const LatticeVector& b);

struct PseudoDistance {
    std::int64_t squared;  // exact min(|a-b|^2, |a+b|^2)
    double value;
};

// [a-b] = min(|a-b|, |a+b|)
PseudoDistance pseudo_dist(const LatticeVector& a, const LatticeVector& b);

// All x in Z^d with |x|^2 = n2, lexicographic order.
std::vector<LatticeVector> sphere_points(int d, std::int64_t n2);

// Number of x with |x| = |a| and |x - b| = |a - b|.
std::size_t angle_count(const LatticeVector& a, const LatticeVector& b);
// a ∠ b: at most two such points.
bool angle_check(const LatticeVector& a, const LatticeVector& b);

class ModeSet {
public:
    ModeSet() = default;
    explicit ModeSet(std::vector<LatticeVector> points);

    int dim() const { return d_; }
    std::size_t size() const { return pts_.size(); }
    const std::vector<LatticeVector>& points() const { return pts_; }
    const LatticeVector& operator[](std::size_t i) const { return pts_[i]; }
    bool contains(const LatticeVector& x) const;
    // Index of x in the set, or -1.
    int index_of(const LatticeVector& x) const;

private:
    int d_ = 0;
    std::vector<LatticeVector> pts_;
};

enum class SetClass { not_admissible, admissible, strongly_admissible };
std::string to_string(SetClass c);

SetClass classify_set(const ModeSet& A);

struct ResonanceGeometry {
    ModeSet A;
    // Ordered by (index of ℓ(b) in A, lexicographic).
    std::vector<LatticeVector> lambda_f;
    std::vector<int> ell;  // ell[i] = index into A of ℓ(lambda_f[i])
    // Ordered pairs of indices into lambda_f.
    std::vector<std::pair<int, int>> plus_pairs;
    std::vector<std::pair<int, int>> minus_pairs;
    // Partition of lambda_f (indices, ascending). Singletons first, then by minimal member.
    std::vector<std::vector<int>> classes;
    int m0 = 0;

    int m() const { return static_cast<int>(classes.size()); }
    int index_of(const LatticeVector& b) const;
    // Class index containing lambda_f[i].
    int class_of(int i) const;
    bool is_plus(int i, int j) const;
    bool is_minus(int i, int j) const;
};

ResonanceGeometry resonance_geometry(const ModeSet& A);

struct Block {
    std::vector<LatticeVector> members;
    double delta = 0.0;
    std::int64_t diameter_squared = 0;
    double diameter = 0.0;
};

// Block [a]_Δ: closure of a on its sphere under |a|=|b|, [a-b] <= Δ.
Block block_of(const LatticeVector& a, double delta, double universe_bound);

struct TypicalityResult {
    double frac_admissible = 0.0;
    double frac_strongly_admissible = 0.0;
    std::size_t trials = 0;
};

// Uniform n-point subsets of B(R) ∩ Z^d (with replacement, duplicates rejected).
// Trials are split into fixed chunks with derived seeds, so the result does not
// depend on the thread count.
TypicalityResult sample_typicality(int d, int n, double R, std::size_t trials,
                                   std::uint64_t seed, int threads = 1);

}  // namespace beamnf
