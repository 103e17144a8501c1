#include "beamnf/lattice.hpp"

#include "beamnf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace beamnf {

namespace {

std::int64_t isqrt(std::int64_t n) {
    if (n < 0) return -1;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

void require_same_dim(const LatticeVector& a, const LatticeVector& b) {
    if (a.dim() != b.dim())
        throw DimensionError("dimension mismatch: " + a.str() + " vs " + b.str());
}

void sphere_rec(int d, int pos, std::int64_t rem, std::vector<std::int64_t>& cur,
                std::vector<LatticeVector>& out) {
    if (pos == d - 1) {
        const std::int64_t r = isqrt(rem);
        if (r * r != rem) return;
        cur[static_cast<std::size_t>(pos)] = -r;
        out.emplace_back(cur);
        if (r != 0) {
            cur[static_cast<std::size_t>(pos)] = r;
            out.emplace_back(cur);
        }
        return;
    }
    const std::int64_t r = isqrt(rem);
    for (std::int64_t x = -r; x <= r; ++x) {
        cur[static_cast<std::size_t>(pos)] = x;
        sphere_rec(d, pos + 1, rem - x * x, cur, out);
    }
}

}  // namespace

LatticeVector::LatticeVector(std::vector<std::int64_t> coords) : c_(std::move(coords)) {}
LatticeVector::LatticeVector(std::initializer_list<std::int64_t> coords) : c_(coords) {}

LatticeVector LatticeVector::zero(int d) {
    return LatticeVector(std::vector<std::int64_t>(static_cast<std::size_t>(d), 0));
}

std::int64_t LatticeVector::norm2() const {
    std::int64_t s = 0;
    for (auto x : c_) s += x * x;
    return s;
}

double LatticeVector::norm() const { return std::sqrt(static_cast<double>(norm2())); }

double LatticeVector::bracket() const { return std::max(1.0, norm()); }

bool LatticeVector::is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](auto x) { return x == 0; });
}

LatticeVector LatticeVector::operator+(const LatticeVector& o) const {
    require_same_dim(*this, o);
    std::vector<std::int64_t> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i] + o.c_[i];
    return LatticeVector(std::move(r));
}

LatticeVector LatticeVector::operator-(const LatticeVector& o) const {
    require_same_dim(*this, o);
    std::vector<std::int64_t> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = c_[i] - o.c_[i];
    return LatticeVector(std::move(r));
}

LatticeVector LatticeVector::operator-() const {
    std::vector<std::int64_t> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = -c_[i];
    return LatticeVector(std::move(r));
}

LatticeVector LatticeVector::operator*(std::int64_t s) const {
    std::vector<std::int64_t> r(c_.size());
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] = s * c_[i];
    return LatticeVector(std::move(r));
}

std::string LatticeVector::str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < c_.size(); ++i) os << (i ? "," : "") << c_[i];
    os << ')';
    return os.str();
}

std::int64_t dot(const LatticeVector& a, const LatticeVector& b) {
    require_same_dim(a, b);
    std::int64_t s = 0;
    for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
    return s;
}

PseudoDistance pseudo_dist(const LatticeVector& a, const LatticeVector& b) {
    require_same_dim(a, b);
    const std::int64_t sq = std::min((a - b).norm2(), (a + b).norm2());
    return {sq, std::sqrt(static_cast<double>(sq))};
}

std::vector<LatticeVector> sphere_points(int d, std::int64_t n2) {
    if (d < 1) throw DimensionError("sphere_points: d must be >= 1");
    std::vector<LatticeVector> out;
    if (n2 < 0) return out;
    std::vector<std::int64_t> cur(static_cast<std::size_t>(d), 0);
    sphere_rec(d, 0, n2, cur, out);
    return out;
}

std::size_t angle_count(const LatticeVector& a, const LatticeVector& b) {
    require_same_dim(a, b);
    const std::int64_t r2 = (a - b).norm2();
    std::size_t count = 0;
    for (const auto& x : sphere_points(a.dim(), a.norm2()))
        if ((x - b).norm2() == r2) ++count;
    return count;
}

bool angle_check(const LatticeVector& a, const LatticeVector& b) { return angle_count(a, b) <= 2; }

ModeSet::ModeSet(std::vector<LatticeVector> points) : pts_(std::move(points)) {
    if (pts_.empty()) throw std::invalid_argument("ModeSet: empty point list");
    d_ = pts_.front().dim();
    if (d_ < 1) throw DimensionError("ModeSet: dimension must be >= 1");
    std::set<LatticeVector> seen;
    for (const auto& p : pts_) {
        if (p.dim() != d_) throw DimensionError("ModeSet: mixed dimensions at " + p.str());
        if (!seen.insert(p).second) throw std::invalid_argument("ModeSet: duplicate point " + p.str());
    }
}

bool ModeSet::contains(const LatticeVector& x) const { return index_of(x) >= 0; }

int ModeSet::index_of(const LatticeVector& x) const {
    for (std::size_t i = 0; i < pts_.size(); ++i)
        if (pts_[i] == x) return static_cast<int>(i);
    return -1;
}

std::string to_string(SetClass c) {
    switch (c) {
        case SetClass::not_admissible: return "not_admissible";
        case SetClass::admissible: return "admissible";
        case SetClass::strongly_admissible: return "strongly_admissible";
    }
    return "?";
}

SetClass classify_set(const ModeSet& A) {
    const auto& P = A.points();
    std::set<std::int64_t> norms;
    for (const auto& p : P)
        if (!norms.insert(p.norm2()).second) return SetClass::not_admissible;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P.size(); ++j)
            if (i != j && !angle_check(P[i], P[i] + P[j])) return SetClass::admissible;
    return SetClass::strongly_admissible;
}

int ResonanceGeometry::index_of(const LatticeVector& b) const {
    for (std::size_t i = 0; i < lambda_f.size(); ++i)
        if (lambda_f[i] == b) return static_cast<int>(i);
    return -1;
}

int ResonanceGeometry::class_of(int i) const {
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (int k : classes[c])
            if (k == i) return static_cast<int>(c);
    return -1;
}

bool ResonanceGeometry::is_plus(int i, int j) const {
    return std::find(plus_pairs.begin(), plus_pairs.end(), std::make_pair(i, j)) != plus_pairs.end();
}

bool ResonanceGeometry::is_minus(int i, int j) const {
    return std::find(minus_pairs.begin(), minus_pairs.end(), std::make_pair(i, j)) !=
           minus_pairs.end();
}

ResonanceGeometry resonance_geometry(const ModeSet& A) {
    if (classify_set(A) == SetClass::not_admissible)
        throw AdmissibilityError("resonance_geometry: set is not admissible (two points share a norm)");
    ResonanceGeometry g;
    g.A = A;
    const int d = A.dim();
    for (std::size_t k = 0; k < A.size(); ++k) {
        for (auto& x : sphere_points(d, A[k].norm2())) {
            if (A.contains(x)) continue;
            g.lambda_f.push_back(std::move(x));
            g.ell.push_back(static_cast<int>(k));
        }
    }
    const int N = static_cast<int>(g.lambda_f.size());
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
            const auto& a = g.lambda_f[static_cast<std::size_t>(i)];
            const auto& b = g.lambda_f[static_cast<std::size_t>(j)];
            const auto& la = A[static_cast<std::size_t>(g.ell[static_cast<std::size_t>(i)])];
            const auto& lb = A[static_cast<std::size_t>(g.ell[static_cast<std::size_t>(j)])];
            if (la + lb == a + b) g.plus_pairs.emplace_back(i, j);
            if (i != j && la - lb == a - b) g.minus_pairs.emplace_back(i, j);
        }
    }

    // Union-find closure of a ~ b.
    std::vector<int> parent(static_cast<std::size_t>(N));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    auto unite = [&](int x, int y) { parent[static_cast<std::size_t>(find(x))] = find(y); };
    for (auto [i, j] : g.plus_pairs) unite(i, j);
    for (auto [i, j] : g.minus_pairs) unite(i, j);

    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < N; ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<int>> cls;
    for (auto& [root, members] : groups) cls.push_back(std::move(members));
    auto min_member = [&](const std::vector<int>& c) {
        LatticeVector best = g.lambda_f[static_cast<std::size_t>(c.front())];
        for (int k : c) best = std::min(best, g.lambda_f[static_cast<std::size_t>(k)]);
        return best;
    };
    std::sort(cls.begin(), cls.end(), [&](const auto& x, const auto& y) {
        const bool sx = x.size() == 1, sy = y.size() == 1;
        if (sx != sy) return sx;
        return min_member(x) < min_member(y);
    });
    g.classes = std::move(cls);
    g.m0 = static_cast<int>(std::count_if(g.classes.begin(), g.classes.end(),
                                          [](const auto& c) { return c.size() == 1; }));
    return g;
}

Block block_of(const LatticeVector& a, double delta, double universe_bound) {
    if (a.norm() > universe_bound + 1e-12)
        throw std::invalid_argument("block_of: point " + a.str() + " outside the universe bound");
    if (!(delta > 0)) throw std::invalid_argument("block_of: delta must be positive");
    const auto sphere = sphere_points(a.dim(), a.norm2());
    // Largest integer squared distance not exceeding delta^2.
    const auto limit = static_cast<std::int64_t>(std::floor(delta * delta * (1.0 + 1e-14)));
    std::vector<char> in(sphere.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < sphere.size(); ++i)
        if (sphere[i] == a) {
            in[i] = 1;
            stack.push_back(i);
        }
    while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < sphere.size(); ++j) {
            if (in[j]) continue;
            if (pseudo_dist(sphere[i], sphere[j]).squared <= limit) {
                in[j] = 1;
                stack.push_back(j);
            }
        }
    }
    Block b;
    b.delta = delta;
    for (std::size_t i = 0; i < sphere.size(); ++i)
        if (in[i]) b.members.push_back(sphere[i]);
    for (const auto& x : b.members)
        for (const auto& y : b.members)
            b.diameter_squared = std::max(b.diameter_squared, pseudo_dist(x, y).squared);
    b.diameter = std::sqrt(static_cast<double>(b.diameter_squared));
    return b;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Memoized strong-admissibility test: angle counts depend on (a, a+b) only,
// and sphere enumeration dominates the cost.
class SphereCache {
public:
    explicit SphereCache(int d) : d_(d) {}
    const std::vector<LatticeVector>& get(std::int64_t n2) {
        auto it = cache_.find(n2);
        if (it != cache_.end()) return it->second;
        return cache_.emplace(n2, sphere_points(d_, n2)).first->second;
    }

private:
    int d_;
    std::unordered_map<std::int64_t, std::vector<LatticeVector>> cache_;
};

SetClass classify_cached(const std::vector<LatticeVector>& P, SphereCache& cache) {
    std::set<std::int64_t> norms;
    for (const auto& p : P)
        if (!norms.insert(p.norm2()).second) return SetClass::not_admissible;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P.size(); ++j) {
            if (i == j) continue;
            const auto c = P[i] + P[j];
            const std::int64_t r2 = (P[i] - c).norm2();
            std::size_t count = 0;
            for (const auto& x : cache.get(P[i].norm2()))
                if ((x - c).norm2() == r2 && ++count > 2) return SetClass::admissible;
        }
    return SetClass::strongly_admissible;
}

}  // namespace

TypicalityResult sample_typicality(int d, int n, double R, std::size_t trials, std::uint64_t seed,
                                   int threads) {
    if (d < 1) throw DimensionError("sample_typicality: d must be >= 1");
    if (n < 1) throw std::invalid_argument("sample_typicality: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("sample_typicality: trials must be >= 1");
    const auto r = static_cast<std::int64_t>(std::floor(R));
    const std::int64_t R2 = static_cast<std::int64_t>(std::floor(R * R + 1e-9));
    // Ball population (needed to refuse impossible requests).
    std::size_t population = 0;
    for (std::int64_t n2 = 0; n2 <= R2 && population < static_cast<std::size_t>(n); ++n2)
        population += sphere_points(d, n2).size();
    if (population < static_cast<std::size_t>(n))
        throw std::invalid_argument("sample_typicality: radius too small to hold n distinct points");

    constexpr std::size_t kChunks = 64;
    std::vector<std::size_t> adm(kChunks, 0), strong(kChunks, 0);
    auto run_chunk = [&](std::size_t c) {
        const std::size_t lo = trials * c / kChunks, hi = trials * (c + 1) / kChunks;
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(c + 1)));
        std::uniform_int_distribution<std::int64_t> coord(-r, r);
        SphereCache cache(d);
        std::vector<LatticeVector> pts;
        for (std::size_t t = lo; t < hi; ++t) {
            for (;;) {
                pts.clear();
                for (int k = 0; k < n; ++k) {
                    std::vector<std::int64_t> x(static_cast<std::size_t>(d));
                    do {
                        for (auto& xi : x) xi = coord(rng);
                    } while (LatticeVector(x).norm2() > R2);
                    pts.emplace_back(std::move(x));
                }
                std::vector<LatticeVector> sorted = pts;
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) break;
            }
            const auto cls = classify_cached(pts, cache);
            if (cls != SetClass::not_admissible) ++adm[c];
            if (cls == SetClass::strongly_admissible) ++strong[c];
        }
    };
    const int nt = std::max(1, threads);
    if (nt == 1) {
        for (std::size_t c = 0; c < kChunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t c = static_cast<std::size_t>(w); c < kChunks; c += static_cast<std::size_t>(nt))
                    run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }
    TypicalityResult res;
    res.trials = trials;
    res.frac_admissible = static_cast<double>(std::accumulate(adm.begin(), adm.end(), std::size_t{0})) /
                          static_cast<double>(trials);
    res.frac_strongly_admissible =
        static_cast<double>(std::accumulate(strong.begin(), strong.end(), std::size_t{0})) /
        static_cast<double>(trials);
    return res;
}

}  // namespace beamnf
