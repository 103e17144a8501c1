#include "beamnf/frequencies.hpp"

#include "beamnf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

namespace beamnf {

void check_mass(double m) {
    if (!(m >= 1.0 && m <= 2.0))
        throw DomainError("mass m=" + std::to_string(m) + " outside [1,2]");
}

bool near_exceptional_mass(double m) {
    return std::abs(m - 4.0 / 3.0) < 1e-6 || std::abs(m - 5.0 / 3.0) < 1e-6;
}

double eigenfrequency_n2(std::int64_t n2, double m) {
    check_mass(m);
    const auto q = static_cast<double>(n2);
    return std::sqrt(q * q + m);
}

double eigenfrequency(const LatticeVector& a, double m) { return eigenfrequency_n2(a.norm2(), m); }

namespace {

// Υ_j = ∏_{l=0}^{j-1} (2l-1)/2
double upsilon(int j) {
    double u = 1.0;
    for (int l = 0; l < j; ++l) u *= (2.0 * l - 1.0) / 2.0;
    return u;
}

}  // namespace

std::vector<double> freq_derivatives(std::int64_t n2, double m, int j_max) {
    check_mass(m);
    const auto q = static_cast<double>(n2);
    const double base = q * q + m;
    std::vector<double> out;
    for (int j = 1; j <= j_max; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        out.push_back(sign * upsilon(j) * std::pow(base, 0.5 - j));
    }
    return out;
}

Eigen::MatrixXd derivative_matrix(const std::vector<std::int64_t>& n2s, double m) {
    const int p = static_cast<int>(n2s.size());
    Eigen::MatrixXd D(p, p);
    for (int l = 0; l < p; ++l) {
        const auto d = freq_derivatives(n2s[static_cast<std::size_t>(l)], m, p);
        for (int j = 0; j < p; ++j) D(j, l) = d[static_cast<std::size_t>(j)];
    }
    return D;
}

double derivative_determinant(const std::vector<std::int64_t>& n2s, double m) {
    if (n2s.empty()) return 1.0;
    return derivative_matrix(n2s, m).partialPivLu().determinant();
}

double derivative_determinant_factored(const std::vector<std::int64_t>& n2s, double m) {
    const int p = static_cast<int>(n2s.size());
    double v = ((p * (p + 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> x;
    for (int j = 1; j <= p; ++j) v *= upsilon(j);
    for (auto n2 : n2s) {
        const double w = eigenfrequency_n2(n2, m);
        v /= w;
        x.push_back(1.0 / (w * w));
    }
    for (int l = 0; l < p; ++l)
        for (int k = l + 1; k < p; ++k)
            v *= x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(l)];
    return v;
}

std::string to_string(DivisorKind k) {
    switch (k) {
        case DivisorKind::D0: return "D0";
        case DivisorKind::D1: return "D1";
        case DivisorKind::D2plus: return "D2plus";
        case DivisorKind::D2minus: return "D2minus";
    }
    return "?";
}

namespace {

void check_shape(const Divisor& dv, const ModeSet& A) {
    if (dv.k.size() != A.size()) throw DimensionError("divisor: k has wrong length");
    const bool need_a = dv.kind != DivisorKind::D0;
    const bool need_b = dv.kind == DivisorKind::D2plus || dv.kind == DivisorKind::D2minus;
    if (need_a != dv.a.has_value() || need_b != dv.b.has_value())
        throw std::invalid_argument("divisor: lattice points do not match kind " + to_string(dv.kind));
    if (dv.kind == DivisorKind::D0 &&
        std::all_of(dv.k.begin(), dv.k.end(), [](auto x) { return x == 0; }))
        throw std::invalid_argument("divisor: D0 requires k != 0");
}

int b_sign(DivisorKind k) { return k == DivisorKind::D2minus ? -1 : 1; }

}  // namespace

bool is_trivial_resonance(const Divisor& dv, const ModeSet& A) {
    check_shape(dv, A);
    std::map<std::int64_t, std::int64_t> formal;
    for (std::size_t i = 0; i < A.size(); ++i) formal[A[i].norm2()] += dv.k[i];
    if (dv.a) formal[dv.a->norm2()] += 1;
    if (dv.b) formal[dv.b->norm2()] += b_sign(dv.kind);
    return std::all_of(formal.begin(), formal.end(), [](const auto& kv) { return kv.second == 0; });
}

DivisorValue divisor_eval(const Divisor& dv, const ModeSet& A, double m) {
    check_shape(dv, A);
    double v = 0.0;
    for (std::size_t i = 0; i < A.size(); ++i)
        v += static_cast<double>(dv.k[i]) * eigenfrequency(A[i], m);
    if (dv.a) v += eigenfrequency(*dv.a, m);
    if (dv.b) v += b_sign(dv.kind) * eigenfrequency(*dv.b, m);
    return {v, is_trivial_resonance(dv, A)};
}

std::vector<LatticeVector> norm_class_representatives(const ModeSet& A, int N) {
    std::vector<LatticeVector> reps;
    for (std::int64_t n2 = 0; n2 <= static_cast<std::int64_t>(N) * N; ++n2) {
        for (const auto& x : sphere_points(A.dim(), n2)) {
            if (A.contains(x)) continue;
            reps.push_back(x);
            break;
        }
    }
    return reps;
}

namespace {

void for_each_k(std::size_t n, int K, const std::function<void(const std::vector<std::int64_t>&)>& f) {
    std::vector<std::int64_t> k(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int budget) {
        if (i == n) {
            f(k);
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            k[i] = v;
            rec(i + 1, budget - std::abs(v));
        }
        k[i] = 0;
    };
    rec(0, K);
}

template <class F>
void visit_divisors(const ModeSet& A, int K, int N, F&& f) {
    if (classify_set(A) == SetClass::not_admissible)
        throw AdmissibilityError("divisor scan: set is not admissible");
    if (K < 1 || N < 1) throw std::invalid_argument("divisor scan: K and N must be >= 1");
    const auto reps = norm_class_representatives(A, N);
    for_each_k(A.size(), K, [&](const std::vector<std::int64_t>& k) {
        Divisor dv;
        dv.k = k;
        if (std::any_of(k.begin(), k.end(), [](auto x) { return x != 0; })) {
            dv.kind = DivisorKind::D0;
            f(dv);
        }
        for (const auto& a : reps) {
            dv.kind = DivisorKind::D1;
            dv.a = a;
            dv.b.reset();
            f(dv);
            for (const auto& b : reps) {
                dv.b = b;
                dv.kind = DivisorKind::D2plus;
                f(dv);
                dv.kind = DivisorKind::D2minus;
                f(dv);
            }
        }
        dv.a.reset();
        dv.b.reset();
    });
}

}  // namespace

std::vector<std::pair<Divisor, DivisorValue>> enumerate_divisors(const ModeSet& A, double m, int K,
                                                                 int N) {
    std::vector<std::pair<Divisor, DivisorValue>> out;
    visit_divisors(A, K, N, [&](const Divisor& dv) { out.emplace_back(dv, divisor_eval(dv, A, m)); });
    return out;
}

DivisorScan min_divisor_scan(const ModeSet& A, double m, int K, int N) {
    check_mass(m);
    DivisorScan s;
    s.min_abs = std::numeric_limits<double>::infinity();
    visit_divisors(A, K, N, [&](const Divisor& dv) {
        const auto v = divisor_eval(dv, A, m);
        if (v.trivial_resonance) {
            ++s.trivial_skipped;
            return;
        }
        ++s.scanned;
        if (std::abs(v.value) < s.min_abs) {
            s.min_abs = std::abs(v.value);
            s.argmin = dv;
        }
    });
    return s;
}

std::vector<double> sample_masses(std::size_t samples, std::uint64_t seed) {
    // splitmix64 of the seed gives the offset of the golden-ratio sequence.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double u0 = static_cast<double>(z >> 11) * 0x1.0p-53;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    std::vector<double> ms(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        double u = u0 + static_cast<double>(i) * inv_phi;
        u -= std::floor(u);
        ms[i] = 1.0 + u;
    }
    return ms;
}

MassExclusion mass_exclusion_estimate(const ModeSet& A, double kappa, int K, int N,
                                      std::size_t samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mass_exclusion_estimate: samples must be >= 1");
    MassExclusion r;
    r.masses = sample_masses(samples, seed);
    std::size_t hit = 0;
    for (double m : r.masses) {
        const double v = min_divisor_scan(A, m, K, N).min_abs;
        r.minima.push_back(v);
        if (v < kappa) ++hit;
    }
    r.fraction = static_cast<double>(hit) / static_cast<double>(samples);
    return r;
}

GapScan frequency_gap_scan(std::int64_t max_n2, double m) {
    check_mass(m);
    GapScan g;
    g.min_gap = std::numeric_limits<double>::infinity();
    std::vector<double> lam(static_cast<std::size_t>(max_n2 + 1));
    for (std::int64_t n = 0; n <= max_n2; ++n) lam[static_cast<std::size_t>(n)] = eigenfrequency_n2(n, m);
    for (std::int64_t a = 0; a <= max_n2; ++a)
        for (std::int64_t b = a + 1; b <= max_n2; ++b) {
            const double gap = std::abs(lam[static_cast<std::size_t>(a)] - lam[static_cast<std::size_t>(b)]);
            ++g.pairs;
            if (gap < 0.25) ++g.violations;
            if (gap < g.min_gap) {
                g.min_gap = gap;
                g.argmin_n2a = a;
                g.argmin_n2b = b;
            }
        }
    return g;
}

}  // namespace beamnf
