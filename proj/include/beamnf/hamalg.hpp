#pragma once

#include "beamnf/lattice.hpp"

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace beamnf {

// ---------------------------------------------------------------------------
// Exact coefficients
// ---------------------------------------------------------------------------

// Complex rational.
struct CQ {
    mpq_class re{0}, im{0};
    CQ() = default;
    CQ(mpq_class r, mpq_class i = 0) : re(std::move(r)), im(std::move(i)) {}
    CQ(long r) : re(r), im(0) {}
    static CQ I() { return CQ(0, 1); }

    bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
    CQ conj() const { return CQ(re, -im); }
    std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }
    std::string str() const;

    friend CQ operator+(const CQ& a, const CQ& b) { return CQ(a.re + b.re, a.im + b.im); }
    friend CQ operator-(const CQ& a, const CQ& b) { return CQ(a.re - b.re, a.im - b.im); }
    friend CQ operator-(const CQ& a) { return CQ(-a.re, -a.im); }
    friend CQ operator*(const CQ& a, const CQ& b) {
        return CQ(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
    }
    CQ& operator+=(const CQ& o) { re += o.re; im += o.im; return *this; }
    friend bool operator==(const CQ& a, const CQ& b) { return a.re == b.re && a.im == b.im; }
};
CQ operator/(const CQ& a, const CQ& b);

// Σ c_n λ_n with integer c_n, keyed by squared norm n, normalised (gcd 1, leading c > 0).
using LinForm = std::vector<std::pair<std::int64_t, std::int64_t>>;

// One symbolic factor shape: (2π)^twopi · ∏ λ_n^{e_n/2} / ∏ D_k.
struct AtomKey {
    int twopi = 0;
    std::vector<std::pair<std::int64_t, int>> lam;  // (n, e): λ_n^{e/2}
    std::vector<LinForm> dens;                      // sorted
    auto operator<=>(const AtomKey&) const = default;
};

// Numerator linear in the λ's: key -1 is the constant slot, key n >= 0 multiplies λ_n.
using Numerator = std::map<std::int64_t, CQ>;

// Finite sum of atoms with complex-rational linear numerators. All values are
// functions of m only, kept symbolic so that identities can be checked exactly.
class SymCoef {
public:
    SymCoef() = default;
    SymCoef(const CQ& c);  // constant
    static SymCoef atom(AtomKey key, const CQ& value);
    static SymCoef lambda(std::int64_t n2);  // λ_n

    bool is_zero() const { return atoms_.empty(); }
    // Cancels denominators proportional to their numerators and drops zeros.
    void simplify();
    SymCoef conj() const;
    std::complex<double> eval(double m) const;
    std::string str() const;
    const std::map<AtomKey, Numerator>& atoms() const { return atoms_; }

    SymCoef& operator+=(const SymCoef& o);
    SymCoef& operator-=(const SymCoef& o);
    friend SymCoef operator+(SymCoef a, const SymCoef& b) { return a += b; }
    friend SymCoef operator-(SymCoef a, const SymCoef& b) { return a -= b; }
    friend SymCoef operator-(const SymCoef& a) { return SymCoef() - a; }
    friend SymCoef operator*(const SymCoef& a, const SymCoef& b);
    friend bool operator==(const SymCoef& a, const SymCoef& b) { return a.atoms_ == b.atoms_; }

private:
    void add_atom(const AtomKey& k, const Numerator& n);
    std::map<AtomKey, Numerator> atoms_;
};

// Normalises Σ c_n λ_n. Returns the scalar pulled out (so that form == scale * normalised).
// Throws if the form is identically zero.
std::pair<LinForm, std::int64_t> normalize_linform(const std::map<std::int64_t, std::int64_t>& raw);

// ---------------------------------------------------------------------------
// Polynomials in (ξ_a, η_a)
// ---------------------------------------------------------------------------

struct Var {
    LatticeVector mode;
    bool eta = false;  // false: ξ, true: η
    auto operator<=>(const Var&) const = default;
};

// Sorted multiset of variables.
struct Monomial {
    std::vector<Var> vars;
    Monomial() = default;
    explicit Monomial(std::vector<Var> v);
    int degree() const { return static_cast<int>(vars.size()); }
    int count(const Var& v) const;
    Monomial without(const Var& v) const;  // removes one copy
    Monomial swapped() const;              // ξ <-> η
    // Σ_ξ mode − Σ_η mode = 0
    bool zero_momentum() const;
    // Product of actions ξ_a η_a only.
    bool is_action_product() const;
    std::string str() const;
    auto operator<=>(const Monomial&) const = default;
};
Monomial operator*(const Monomial& a, const Monomial& b);

template <class C>
struct CoefTraits;

template <>
struct CoefTraits<SymCoef> {
    static SymCoef from(const CQ& q) { return SymCoef(q); }
    static bool is_zero(const SymCoef& c) { return c.is_zero(); }
    static void normalize(SymCoef& c) { c.simplify(); }
    static SymCoef conj(const SymCoef& c) { return c.conj(); }
};

template <>
struct CoefTraits<std::complex<double>> {
    static std::complex<double> from(const CQ& q) { return q.to_complex(); }
    static bool is_zero(const std::complex<double>& c) { return c == std::complex<double>(0.0, 0.0); }
    static void normalize(std::complex<double>&) {}
    static std::complex<double> conj(const std::complex<double>& c) { return std::conj(c); }
};

template <class C>
class Poly {
public:
    using Traits = CoefTraits<C>;
    using Terms = std::map<Monomial, C>;

    const Terms& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    void add(const Monomial& m, const C& c) {
        auto [it, fresh] = terms_.try_emplace(m, c);
        if (!fresh) it->second += c;
    }
    // Simplifies coefficients and removes zeros.
    void normalize() {
        for (auto it = terms_.begin(); it != terms_.end();) {
            Traits::normalize(it->second);
            if (Traits::is_zero(it->second))
                it = terms_.erase(it);
            else
                ++it;
        }
    }
    const C* find(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? nullptr : &it->second;
    }

    Poly& operator+=(const Poly& o) {
        for (const auto& [m, c] : o.terms_) add(m, c);
        normalize();
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        const C minus_one = Traits::from(CQ(-1));
        for (const auto& [m, c] : o.terms_) add(m, minus_one * c);
        normalize();
        return *this;
    }
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b) {
        Poly r;
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add(ma * mb, ca * cb);
        r.normalize();
        return r;
    }
    Poly scaled(const C& s) const {
        Poly r;
        for (const auto& [m, c] : terms_) r.add(m, s * c);
        r.normalize();
        return r;
    }

    // Image under ξ <-> η with conjugated coefficients. Real iff equal to itself.
    Poly conjugate_swap() const {
        Poly r;
        for (const auto& [m, c] : terms_) r.add(m.swapped(), Traits::conj(c));
        r.normalize();
        return r;
    }
    bool all_zero_momentum() const {
        for (const auto& [m, c] : terms_)
            if (!m.zero_momentum()) return false;
        return true;
    }

private:
    Terms terms_;
};

using SymPoly = Poly<SymCoef>;
using FloatPoly = Poly<std::complex<double>>;

// {F,G} = i<∇_η F, ∇_ξ G> − i<∇_ξ F, ∇_η G>
template <class C>
Poly<C> poisson_bracket(const Poly<C>& F, const Poly<C>& G) {
    using T = CoefTraits<C>;
    Poly<C> r;
    for (const auto& [f, cf] : F.terms()) {
        for (const auto& [g, cg] : G.terms()) {
            const C fg = cf * cg;
            for (std::size_t p = 0; p < f.vars.size(); ++p) {
                const Var& v = f.vars[p];
                if (p > 0 && f.vars[p - 1] == v) continue;
                const Var dual{v.mode, !v.eta};
                const int k2 = g.count(dual);
                if (k2 == 0) continue;
                const int k1 = f.count(v);
                // η in F pairs with ξ in G with sign +i, ξ in F with η in G with −i.
                const CQ s = CQ(0, v.eta ? k1 * k2 : -k1 * k2);
                r.add(f.without(v) * g.without(dual), T::from(s) * fg);
            }
        }
    }
    r.normalize();
    return r;
}

FloatPoly evaluate(const SymPoly& p, double m);
// Value at a point; vars maps mode -> (ξ, η).
std::complex<double> evaluate_at(const FloatPoly& p,
                                 const std::map<LatticeVector, std::pair<std::complex<double>,
                                                                         std::complex<double>>>& z);
// Max |coefficient|.
double max_abs_coefficient(const FloatPoly& p);

// Canonical JSON term list: [{"monomial": ..., "re": ..., "im": ...}] sorted by monomial.
std::string to_json(const FloatPoly& p);

// ---------------------------------------------------------------------------
// Normal-form construction on a truncated universe {a : |a| <= cutoff}
// ---------------------------------------------------------------------------

struct Universe {
    int d = 1;
    std::vector<LatticeVector> modes;  // lexicographic within increasing |a|^2
    std::map<LatticeVector, int> index;
    bool contains(const LatticeVector& a) const { return index.count(a) > 0; }
};
Universe make_universe(int d, double cutoff);

SymPoly build_h2(const Universe& U);

struct H4Parts {
    SymPoly h40, h41, h42;
    SymPoly total() const { return h40 + h41 + h42; }
};
H4Parts build_h4(const Universe& U);

// Number of positions of the monomial whose mode lies in A (with multiplicity).
int a_count(const Monomial& m, const ModeSet& A);

// Throws VanishingDenominatorError naming the index tuple if a divisor vanishes
// formally or |divisor(m)| < 1e-12.
SymPoly build_chi4(const Universe& U, const ModeSet& A, double m);

struct NormalFormPieces {
    SymPoly z4;
    SymPoly q41, q42;
};
NormalFormPieces build_z4_q4(const Universe& U, const ModeSet& A);

// Closed forms in terms of the resonance geometry.
SymPoly z4_plus_closed_form(const Universe& U, const ModeSet& A);
SymPoly z4_minus2_closed_form(const Universe& U, const ResonanceGeometry& g);

struct NormalFormCheck {
    bool exact_zero = false;          // symbolic residual vanishes identically
    std::size_t residual_terms = 0;   // symbolic residual term count
    double residual_norm = 0.0;       // float-mode max |coefficient| of the residual
    SymPoly chi4, z4, z4_plus, z4_minus, z4_minus2, q4;
    std::size_t h4_terms = 0;
};

NormalFormCheck verify_normal_form(const Universe& U, const ModeSet& A, double m);

}  // namespace beamnf
