#include "beamnf/hamalg.hpp"

#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace beamnf {

// ---------------------------------------------------------------------------
// CQ, LinForm
// ---------------------------------------------------------------------------

std::string CQ::str() const {
    std::ostringstream os;
    os << '(' << re.get_str() << (sgn(im) < 0 ? "" : "+") << im.get_str() << "i)";
    return os.str();
}

CQ operator/(const CQ& a, const CQ& b) {
    const mpq_class n = b.re * b.re + b.im * b.im;
    if (sgn(n) == 0) throw std::domain_error("CQ: division by zero");
    const CQ num = a * b.conj();
    return CQ(num.re / n, num.im / n);
}

std::pair<LinForm, std::int64_t> normalize_linform(const std::map<std::int64_t, std::int64_t>& raw) {
    LinForm f;
    std::int64_t g = 0;
    for (auto [n, c] : raw) {
        if (c == 0) continue;
        f.emplace_back(n, c);
        g = std::gcd(g, c < 0 ? -c : c);
    }
    if (f.empty()) throw VanishingDenominatorError("divisor vanishes formally");
    const std::int64_t scale = f.front().second < 0 ? -g : g;
    for (auto& [n, c] : f) c /= scale;
    return {f, scale};
}

// ---------------------------------------------------------------------------
// SymCoef
// ---------------------------------------------------------------------------

namespace {

constexpr std::int64_t kConst = -1;

Numerator scaled(const Numerator& n, const CQ& s) {
    Numerator r;
    if (s.is_zero()) return r;
    for (const auto& [k, v] : n) r.emplace(k, v * s);
    return r;
}

bool is_constant(const Numerator& n) { return n.size() == 1 && n.begin()->first == kConst; }

void add_lam(std::vector<std::pair<std::int64_t, int>>& lam, std::int64_t n, int e) {
    auto it = std::lower_bound(lam.begin(), lam.end(), std::make_pair(n, INT32_MIN));
    if (it != lam.end() && it->first == n) {
        it->second += e;
        if (it->second == 0) lam.erase(it);
    } else if (e != 0) {
        lam.insert(it, {n, e});
    }
}

AtomKey merge_keys(const AtomKey& a, const AtomKey& b) {
    AtomKey k;
    k.twopi = a.twopi + b.twopi;
    k.lam = a.lam;
    for (auto [n, e] : b.lam) add_lam(k.lam, n, e);
    k.dens = a.dens;
    k.dens.insert(k.dens.end(), b.dens.begin(), b.dens.end());
    std::sort(k.dens.begin(), k.dens.end());
    return k;
}

// If num == s * D for some complex rational s, returns s.
std::optional<CQ> proportional(const Numerator& num, const LinForm& D) {
    if (num.size() != D.size()) return std::nullopt;
    std::optional<CQ> s;
    auto it = num.begin();
    for (const auto& [n, c] : D) {
        if (it->first != n) return std::nullopt;
        const CQ r = it->second / CQ(c);
        if (s && !(*s == r)) return std::nullopt;
        s = r;
        ++it;
    }
    return s;
}

}  // namespace

SymCoef::SymCoef(const CQ& c) {
    if (!c.is_zero()) atoms_[AtomKey{}] = Numerator{{kConst, c}};
}

SymCoef SymCoef::atom(AtomKey key, const CQ& value) {
    SymCoef s;
    std::sort(key.dens.begin(), key.dens.end());
    if (!value.is_zero()) s.atoms_[std::move(key)] = Numerator{{kConst, value}};
    return s;
}

SymCoef SymCoef::lambda(std::int64_t n2) {
    SymCoef s;
    s.atoms_[AtomKey{}] = Numerator{{n2, CQ(1)}};
    return s;
}

void SymCoef::add_atom(const AtomKey& k, const Numerator& n) {
    if (n.empty()) return;
    auto [it, fresh] = atoms_.try_emplace(k, Numerator{});
    auto& dst = it->second;
    for (const auto& [idx, v] : n) {
        auto [jt, f2] = dst.try_emplace(idx, v);
        if (!f2) {
            jt->second += v;
            if (jt->second.is_zero()) dst.erase(jt);
        } else if (v.is_zero()) {
            dst.erase(jt);
        }
    }
    if (dst.empty()) atoms_.erase(it);
}

SymCoef& SymCoef::operator+=(const SymCoef& o) {
    for (const auto& [k, n] : o.atoms_) add_atom(k, n);
    return *this;
}

SymCoef& SymCoef::operator-=(const SymCoef& o) {
    for (const auto& [k, n] : o.atoms_) add_atom(k, scaled(n, CQ(-1)));
    return *this;
}

SymCoef operator*(const SymCoef& a, const SymCoef& b) {
    SymCoef r;
    for (const auto& [ka, na] : a.atoms_) {
        for (const auto& [kb, nb] : b.atoms_) {
            const AtomKey k = merge_keys(ka, kb);
            if (is_constant(na)) {
                r.add_atom(k, scaled(nb, na.begin()->second));
            } else if (is_constant(nb)) {
                r.add_atom(k, scaled(na, nb.begin()->second));
            } else {
                // Two linear numerators: move one λ into the power map.
                for (const auto& [idx, v] : na) {
                    AtomKey k2 = k;
                    if (idx != kConst) add_lam(k2.lam, idx, 2);
                    r.add_atom(k2, scaled(nb, v));
                }
            }
        }
    }
    return r;
}

void SymCoef::simplify() {
    std::map<AtomKey, Numerator> old;
    old.swap(atoms_);
    for (auto& [key, num] : old) {
        AtomKey k = key;
        Numerator n = num;
        for (std::size_t t = 0; t < k.dens.size();) {
            if (auto s = proportional(n, k.dens[t])) {
                n = Numerator{{kConst, *s}};
                k.dens.erase(k.dens.begin() + static_cast<std::ptrdiff_t>(t));
                t = 0;
            } else {
                ++t;
            }
        }
        add_atom(k, n);
    }
}

SymCoef SymCoef::conj() const {
    SymCoef r;
    for (const auto& [k, n] : atoms_) {
        Numerator c;
        for (const auto& [idx, v] : n) c.emplace(idx, v.conj());
        r.atoms_.emplace(k, std::move(c));
    }
    return r;
}

std::complex<double> SymCoef::eval(double m) const {
    std::complex<double> total = 0.0;
    for (const auto& [k, n] : atoms_) {
        double f = std::pow(2.0 * std::numbers::pi, k.twopi);
        for (auto [n2, e] : k.lam) f *= std::pow(eigenfrequency_n2(n2, m), 0.5 * e);
        for (const auto& D : k.dens) {
            double v = 0.0;
            for (auto [n2, c] : D) v += static_cast<double>(c) * eigenfrequency_n2(n2, m);
            f /= v;
        }
        std::complex<double> num = 0.0;
        for (const auto& [idx, v] : n)
            num += v.to_complex() * (idx == kConst ? 1.0 : eigenfrequency_n2(idx, m));
        total += f * num;
    }
    return total;
}

std::string SymCoef::str() const {
    if (atoms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, n] : atoms_) {
        if (!first) os << " + ";
        first = false;
        os << '[';
        bool f2 = true;
        for (const auto& [idx, v] : n) {
            if (!f2) os << " + ";
            f2 = false;
            os << v.str();
            if (idx != kConst) os << "*L" << idx;
        }
        os << ']';
        if (k.twopi) os << "*(2pi)^" << k.twopi;
        for (auto [n2, e] : k.lam) os << "*L" << n2 << "^(" << e << "/2)";
        for (const auto& D : k.dens) {
            os << "/(";
            for (std::size_t i = 0; i < D.size(); ++i)
                os << (i ? (D[i].second < 0 ? "" : "+") : "") << D[i].second << "*L" << D[i].first;
            os << ')';
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Monomials
// ---------------------------------------------------------------------------

Monomial::Monomial(std::vector<Var> v) : vars(std::move(v)) { std::sort(vars.begin(), vars.end()); }

int Monomial::count(const Var& v) const {
    auto [lo, hi] = std::equal_range(vars.begin(), vars.end(), v);
    return static_cast<int>(hi - lo);
}

Monomial Monomial::without(const Var& v) const {
    Monomial r = *this;
    auto it = std::lower_bound(r.vars.begin(), r.vars.end(), v);
    if (it == r.vars.end() || !(*it == v)) throw std::logic_error("Monomial::without: variable absent");
    r.vars.erase(it);
    return r;
}

Monomial Monomial::swapped() const {
    std::vector<Var> v = vars;
    for (auto& x : v) x.eta = !x.eta;
    return Monomial(std::move(v));
}

bool Monomial::zero_momentum() const {
    if (vars.empty()) return true;
    LatticeVector s = LatticeVector::zero(vars.front().mode.dim());
    for (const auto& v : vars) s = v.eta ? s - v.mode : s + v.mode;
    return s.is_zero();
}

bool Monomial::is_action_product() const {
    // vars are sorted by (mode, eta): each mode must appear as equal ξ and η runs.
    std::size_t i = 0;
    while (i < vars.size()) {
        std::size_t j = i;
        int xi = 0, eta = 0;
        while (j < vars.size() && vars[j].mode == vars[i].mode) {
            (vars[j].eta ? eta : xi)++;
            ++j;
        }
        if (xi != eta) return false;
        i = j;
    }
    return true;
}

std::string Monomial::str() const {
    if (vars.empty()) return "1";
    std::string s;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i) s += '*';
        s += vars[i].eta ? "eta" : "xi";
        s += vars[i].mode.str();
    }
    return s;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    std::vector<Var> v;
    v.reserve(a.vars.size() + b.vars.size());
    std::merge(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(), std::back_inserter(v));
    Monomial r;
    r.vars = std::move(v);
    return r;
}

// ---------------------------------------------------------------------------
// Float views
// ---------------------------------------------------------------------------

FloatPoly evaluate(const SymPoly& p, double m) {
    FloatPoly r;
    for (const auto& [mono, c] : p.terms()) r.add(mono, c.eval(m));
    r.normalize();
    return r;
}

std::complex<double> evaluate_at(
    const FloatPoly& p,
    const std::map<LatticeVector, std::pair<std::complex<double>, std::complex<double>>>& z) {
    std::complex<double> total = 0.0;
    for (const auto& [mono, c] : p.terms()) {
        std::complex<double> t = c;
        for (const auto& v : mono.vars) {
            auto it = z.find(v.mode);
            if (it == z.end()) {
                t = 0.0;
                break;
            }
            t *= v.eta ? it->second.second : it->second.first;
        }
        total += t;
    }
    return total;
}

double max_abs_coefficient(const FloatPoly& p) {
    double r = 0.0;
    for (const auto& [m, c] : p.terms()) r = std::max(r, std::abs(c));
    return r;
}

std::string to_json(const FloatPoly& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, c] : p.terms())
        arr.push_back({{"monomial", m.str()}, {"re", c.real()}, {"im", c.imag()}});
    return arr.dump(1);
}

// ---------------------------------------------------------------------------
// Hamiltonians on a truncated universe
// ---------------------------------------------------------------------------

Universe make_universe(int d, double cutoff) {
    if (d < 1) throw DimensionError("make_universe: d must be >= 1");
    if (!(cutoff >= 0)) throw std::invalid_argument("make_universe: cutoff must be >= 0");
    Universe U;
    U.d = d;
    const auto max_n2 = static_cast<std::int64_t>(std::floor(cutoff * cutoff + 1e-9));
    for (std::int64_t n2 = 0; n2 <= max_n2; ++n2)
        for (auto& x : sphere_points(d, n2)) U.modes.push_back(std::move(x));
    for (std::size_t i = 0; i < U.modes.size(); ++i) U.index.emplace(U.modes[i], static_cast<int>(i));
    return U;
}

namespace {

using Tuple = std::array<LatticeVector, 4>;

std::string tuple_str(const Tuple& t) {
    return "(" + t[0].str() + "," + t[1].str() + "," + t[2].str() + "," + t[3].str() + ")";
}

// (2π)^{-d} / sqrt(λ_i λ_j λ_k λ_l), times extra denominators.
AtomKey quartic_key(int d, const Tuple& t) {
    AtomKey k;
    k.twopi = -d;
    for (const auto& a : t) add_lam(k.lam, a.norm2(), -1);
    return k;
}

// Signed sum of λ's; returns the symbolic key with the divisor attached and the scale pulled out.
std::pair<AtomKey, std::int64_t> with_divisor(AtomKey k, const Tuple& t, const std::array<int, 4>& sign,
                                               double m, const char* kind) {
    std::map<std::int64_t, std::int64_t> raw;
    for (int p = 0; p < 4; ++p) raw[t[static_cast<std::size_t>(p)].norm2()] += sign[static_cast<std::size_t>(p)];
    std::pair<LinForm, std::int64_t> nf;
    try {
        nf = normalize_linform(raw);
    } catch (const VanishingDenominatorError&) {
        throw VanishingDenominatorError(std::string("chi4: formally resonant divisor (") + kind +
                                        ") at tuple " + tuple_str(t));
    }
    double v = 0.0;
    for (int p = 0; p < 4; ++p)
        v += sign[static_cast<std::size_t>(p)] * eigenfrequency(t[static_cast<std::size_t>(p)], m);
    if (std::abs(v) < 1e-12)
        throw VanishingDenominatorError(std::string("chi4: divisor (") + kind + ") vanishes at m=" +
                                        std::to_string(m) + " for tuple " + tuple_str(t));
    k.dens.push_back(nf.first);
    std::sort(k.dens.begin(), k.dens.end());
    return {k, nf.second};
}

Monomial mono(const Tuple& t, std::array<bool, 4> eta) {
    return Monomial({Var{t[0], eta[0]}, Var{t[1], eta[1]}, Var{t[2], eta[2]}, Var{t[3], eta[3]}});
}

// Ordered tuples (i,j,k,l) over U with l fixed by the momentum rule of each shape.
enum class Shape { xxxx, xxxe, xxee };

template <class F>
void for_each_tuple(const Universe& U, Shape s, F&& f) {
    for (const auto& i : U.modes)
        for (const auto& j : U.modes)
            for (const auto& k : U.modes) {
                LatticeVector l;
                switch (s) {
                    case Shape::xxxx: l = -(i + j + k); break;  // i+j+k+l = 0
                    case Shape::xxxe: l = i + j + k; break;     // ξiξjξk ηl
                    case Shape::xxee: l = i + j - k; break;     // ξiξj ηkηl
                }
                if (U.contains(l)) f(Tuple{i, j, k, l});
            }
}

bool norms_match(const Tuple& t) {
    const auto a = t[0].norm2(), b = t[1].norm2(), c = t[2].norm2(), d = t[3].norm2();
    return (a == c && b == d) || (a == d && b == c);
}

int count_in(const Tuple& t, const ModeSet& A) {
    int c = 0;
    for (const auto& x : t) c += A.contains(x) ? 1 : 0;
    return c;
}

void check_universe(const Universe& U, const ModeSet& A) {
    if (A.dim() != U.d) throw DimensionError("mode set and universe dimensions differ");
    for (const auto& a : A.points())
        if (!U.contains(a)) throw std::invalid_argument("mode set point " + a.str() + " outside the universe");
}

const std::array<bool, 4> kXXXX{false, false, false, false};
const std::array<bool, 4> kEEEE{true, true, true, true};
const std::array<bool, 4> kXXXE{false, false, false, true};
const std::array<bool, 4> kEEEX{true, true, true, false};
const std::array<bool, 4> kXXEE{false, false, true, true};

}  // namespace

SymPoly build_h2(const Universe& U) {
    SymPoly h;
    for (const auto& a : U.modes) h.add(Monomial({Var{a, false}, Var{a, true}}), SymCoef::lambda(a.norm2()));
    h.normalize();
    return h;
}

H4Parts build_h4(const Universe& U) {
    H4Parts h;
    const int d = U.d;
    for_each_tuple(U, Shape::xxxx, [&](const Tuple& t) {
        const auto k = quartic_key(d, t);
        h.h40.add(mono(t, kXXXX), SymCoef::atom(k, CQ(mpq_class(1, 4))));
        h.h40.add(mono(t, kEEEE), SymCoef::atom(k, CQ(mpq_class(1, 4))));
    });
    for_each_tuple(U, Shape::xxxe, [&](const Tuple& t) {
        const auto k = quartic_key(d, t);
        h.h41.add(mono(t, kXXXE), SymCoef::atom(k, CQ(1)));
        h.h41.add(mono(t, kEEEX), SymCoef::atom(k, CQ(1)));
    });
    for_each_tuple(U, Shape::xxee, [&](const Tuple& t) {
        h.h42.add(mono(t, kXXEE), SymCoef::atom(quartic_key(d, t), CQ(mpq_class(3, 2))));
    });
    h.h40.normalize();
    h.h41.normalize();
    h.h42.normalize();
    return h;
}

int a_count(const Monomial& m, const ModeSet& A) {
    int c = 0;
    for (const auto& v : m.vars) c += A.contains(v.mode) ? 1 : 0;
    return c;
}

SymPoly build_chi4(const Universe& U, const ModeSet& A, double m) {
    check_mass(m);
    check_universe(U, A);
    const int d = U.d;
    SymPoly chi;
    const CQ mi = CQ(0, -1);  // −i
    for_each_tuple(U, Shape::xxxx, [&](const Tuple& t) {
        auto [k, s] = with_divisor(quartic_key(d, t), t, {1, 1, 1, 1}, m, "l_i+l_j+l_k+l_l");
        const CQ c = mi * CQ(mpq_class(1, 4)) / CQ(s);
        chi.add(mono(t, kXXXX), SymCoef::atom(k, c));
        chi.add(mono(t, kEEEE), SymCoef::atom(k, -c));
    });
    for_each_tuple(U, Shape::xxxe, [&](const Tuple& t) {
        if (count_in(t, A) < 2) return;
        auto [k, s] = with_divisor(quartic_key(d, t), t, {1, 1, 1, -1}, m, "l_i+l_j+l_k-l_l");
        const CQ c = mi / CQ(s);
        chi.add(mono(t, kXXXE), SymCoef::atom(k, c));
        chi.add(mono(t, kEEEX), SymCoef::atom(k, -c));
    });
    for_each_tuple(U, Shape::xxee, [&](const Tuple& t) {
        if (count_in(t, A) < 2 || norms_match(t)) return;
        auto [k, s] = with_divisor(quartic_key(d, t), t, {1, 1, -1, -1}, m, "l_i+l_j-l_k-l_l");
        chi.add(mono(t, kXXEE), SymCoef::atom(k, mi * CQ(mpq_class(3, 2)) / CQ(s)));
    });
    chi.normalize();
    return chi;
}

NormalFormPieces build_z4_q4(const Universe& U, const ModeSet& A) {
    check_universe(U, A);
    const int d = U.d;
    NormalFormPieces p;
    for_each_tuple(U, Shape::xxee, [&](const Tuple& t) {
        if (count_in(t, A) >= 2) {
            if (!norms_match(t)) return;
            AtomKey k;
            k.twopi = -d;
            add_lam(k.lam, t[0].norm2(), -2);
            add_lam(k.lam, t[1].norm2(), -2);
            p.z4.add(mono(t, kXXEE), SymCoef::atom(k, CQ(mpq_class(3, 2))));
        } else {
            p.q42.add(mono(t, kXXEE), SymCoef::atom(quartic_key(d, t), CQ(mpq_class(3, 2))));
        }
    });
    for_each_tuple(U, Shape::xxxe, [&](const Tuple& t) {
        if (count_in(t, A) >= 2) return;
        const auto k = quartic_key(d, t);
        p.q41.add(mono(t, kXXXE), SymCoef::atom(k, CQ(1)));
        p.q41.add(mono(t, kEEEX), SymCoef::atom(k, CQ(1)));
    });
    p.z4.normalize();
    p.q41.normalize();
    p.q42.normalize();
    return p;
}

namespace {

AtomKey inv_lambda_pair(int d, std::int64_t n1, std::int64_t n2) {
    AtomKey k;
    k.twopi = -d;
    add_lam(k.lam, n1, -2);
    add_lam(k.lam, n2, -2);
    return k;
}

}  // namespace

SymPoly z4_plus_closed_form(const Universe& U, const ModeSet& A) {
    check_universe(U, A);
    SymPoly z;
    for (const auto& l : A.points()) {
        for (const auto& k : U.modes) {
            const CQ c = CQ(mpq_class(3, 2)) * CQ(l == k ? 1 : 4);
            z.add(Monomial({Var{l, false}, Var{l, true}, Var{k, false}, Var{k, true}}),
                  SymCoef::atom(inv_lambda_pair(U.d, l.norm2(), k.norm2()), c));
        }
    }
    z.normalize();
    return z;
}

SymPoly z4_minus2_closed_form(const Universe& U, const ResonanceGeometry& g) {
    SymPoly z;
    auto pt = [&](int i) -> const LatticeVector& { return g.lambda_f[static_cast<std::size_t>(i)]; };
    auto lp = [&](int i) -> const LatticeVector& {
        return g.A[static_cast<std::size_t>(g.ell[static_cast<std::size_t>(i)])];
    };
    auto inside = [&](std::initializer_list<LatticeVector> xs) {
        return std::all_of(xs.begin(), xs.end(), [&](const auto& x) { return U.contains(x); });
    };
    for (auto [i, j] : g.plus_pairs) {
        const auto &a = pt(i), &b = pt(j), &la = lp(i), &lb = lp(j);
        if (!inside({a, b, la, lb})) continue;
        const auto k = inv_lambda_pair(U.d, a.norm2(), b.norm2());
        z.add(Monomial({Var{la, false}, Var{lb, false}, Var{a, true}, Var{b, true}}), SymCoef::atom(k, CQ(3)));
        z.add(Monomial({Var{la, true}, Var{lb, true}, Var{a, false}, Var{b, false}}), SymCoef::atom(k, CQ(3)));
    }
    for (auto [i, j] : g.minus_pairs) {
        const auto &a = pt(i), &b = pt(j), &la = lp(i), &lb = lp(j);
        if (!inside({a, b, la, lb})) continue;
        z.add(Monomial({Var{a, false}, Var{lb, false}, Var{la, true}, Var{b, true}}),
              SymCoef::atom(inv_lambda_pair(U.d, a.norm2(), b.norm2()), CQ(6)));
    }
    z.normalize();
    return z;
}

NormalFormCheck verify_normal_form(const Universe& U, const ModeSet& A, double m) {
    NormalFormCheck r;
    const SymPoly h2 = build_h2(U);
    const SymPoly h4 = build_h4(U).total();
    r.h4_terms = h4.size();
    r.chi4 = build_chi4(U, A, m);
    const auto pieces = build_z4_q4(U, A);
    r.z4 = pieces.z4;
    r.q4 = pieces.q41 + pieces.q42;

    const SymPoly residual = h4 + poisson_bracket(r.chi4, h2) - r.z4 - r.q4;
    r.residual_terms = residual.size();
    r.exact_zero = residual.empty();

    const FloatPoly resf = evaluate(h4, m) + poisson_bracket(evaluate(r.chi4, m), evaluate(h2, m)) -
                           evaluate(r.z4, m) - evaluate(r.q4, m);
    r.residual_norm = max_abs_coefficient(resf);

    for (const auto& [mono, c] : r.z4.terms()) {
        if (mono.is_action_product()) {
            r.z4_plus.add(mono, c);
        } else {
            r.z4_minus.add(mono, c);
            if (a_count(mono, A) == 2) r.z4_minus2.add(mono, c);
        }
    }
    return r;
}

}  // namespace beamnf
