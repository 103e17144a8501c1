#include "beamnf/dynamics.hpp"

#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"
#include "beamnf/spectral.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace beamnf {

namespace {

using cvec = std::vector<cplx>;

Eigen::MatrixXcd generator(const Eigen::MatrixXd& K) {
    if (K.rows() != K.cols() || K.rows() % 2 != 0) throw DimensionError("K must be square of even size");
    return cplx(0.0, 1.0) * (symplectic_J(K.rows() / 2) * K).cast<cplx>();
}

void check_horizon(double T, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(T >= dt) || !std::isfinite(T)) throw DomainError("T must be finite and at least dt");
}

// Index tables for the truncated quartic term: s2 = û*û on the sum set, (û³)_b = Σ_c s2_{b−c} û_c.
class TruncatedQuartic {
public:
    TruncatedQuartic(const std::vector<LatticeVector>& modes, double m) : n_(modes.size()) {
        std::map<LatticeVector, int> mode_index, sum_index;
        for (std::size_t i = 0; i < n_; ++i) mode_index[modes[i]] = static_cast<int>(i);
        lambda_.resize(n_);
        neg_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            lambda_[i] = eigenfrequency(modes[i], m);
            neg_[i] = static_cast<std::size_t>(mode_index.at(-modes[i]));
        }
        std::vector<LatticeVector> sums;
        pair_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                const auto s = modes[i] + modes[j];
                auto [it, fresh] = sum_index.emplace(s, static_cast<int>(sums.size()));
                if (fresh) sums.push_back(s);
                pair_[i * n_ + j] = static_cast<std::size_t>(it->second);
            }
        sum_neg_.resize(sums.size());
        for (std::size_t k = 0; k < sums.size(); ++k) sum_neg_[k] = static_cast<std::size_t>(sum_index.at(-sums[k]));
        triple_.assign(n_ * n_, -1);
        for (std::size_t b = 0; b < n_; ++b)
            for (std::size_t c = 0; c < n_; ++c) {
                auto it = sum_index.find(modes[b] - modes[c]);
                if (it != sum_index.end()) triple_[b * n_ + c] = it->second;
            }
        scale_ = std::pow(2.0 * std::numbers::pi, -modes.front().dim());
    }

    const std::vector<double>& lambda() const { return lambda_; }

    cvec uhat(const cvec& xi) const {
        cvec u(n_);
        for (std::size_t a = 0; a < n_; ++a)
            u[a] = (xi[a] + std::conj(xi[neg_[a]])) / (std::sqrt(2.0 * lambda_[a]));
        return u;
    }

    cvec square(const cvec& u) const {
        cvec s2(sum_neg_.size(), 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) s2[pair_[i * n_ + j]] += u[i] * u[j];
        return s2;
    }

    // ∫u⁴ = (2π)^{-d} Σ_k s2_k s2_{−k}
    double quartic(const cvec& s2) const {
        cplx h = 0.0;
        for (std::size_t k = 0; k < s2.size(); ++k) h += s2[k] * s2[sum_neg_[k]];
        return scale_ * h.real();
    }

    // ξ_b += i dt F_b/(√2√λ_b), F_b = 4(2π)^{-d}(û³)_b, i.e. v̂_b −= dt F_b.
    void kick(cvec& xi, double dt) const {
        const cvec u = uhat(xi);
        const cvec s2 = square(u);
        for (std::size_t b = 0; b < n_; ++b) {
            cplx cube = 0.0;
            for (std::size_t c = 0; c < n_; ++c) {
                const int k = triple_[b * n_ + c];
                if (k >= 0) cube += s2[static_cast<std::size_t>(k)] * u[c];
            }
            xi[b] += cplx(0.0, 1.0) * dt * 4.0 * scale_ * cube / std::sqrt(2.0 * lambda_[b]);
        }
    }

    double energy(const cvec& xi, bool nonlinear) const {
        double h = 0.0;
        for (std::size_t a = 0; a < n_; ++a) h += lambda_[a] * std::norm(xi[a]);
        if (nonlinear) h += quartic(square(uhat(xi)));
        return h;
    }

private:
    std::size_t n_;
    std::vector<double> lambda_;
    std::vector<std::size_t> neg_, pair_, sum_neg_;
    std::vector<int> triple_;
    double scale_ = 1.0;
};

std::vector<LatticeVector> ball_modes(int d, double cutoff) {
    if (!(cutoff >= 0.0) || !std::isfinite(cutoff)) throw DomainError("cutoff must be finite and >= 0");
    std::vector<LatticeVector> modes;
    const auto nmax = static_cast<std::int64_t>(std::floor(cutoff * cutoff + 1e-9));
    for (std::int64_t n2 = 0; n2 <= nmax; ++n2)
        for (auto& a : sphere_points(d, n2)) modes.push_back(std::move(a));
    return modes;
}

TruncatedState to_state(const std::vector<LatticeVector>& modes, const cvec& xi, double t) {
    TruncatedState s;
    s.modes = modes;
    s.t = t;
    for (const auto& z : xi) {
        s.p.push_back(std::sqrt(2.0) * z.real());
        s.q.push_back(-std::sqrt(2.0) * z.imag());
    }
    return s;
}

}  // namespace

GrowthFit linear_growth_rate(const Eigen::MatrixXd& K, double T, double dt, std::uint64_t seed) {
    check_horizon(T, dt);
    const Eigen::MatrixXcd P = (generator(K) * cplx(dt)).exp();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd z(K.rows());
    for (auto& v : z) v = cplx(g(rng), g(rng));
    z.normalize();

    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    std::vector<double> ts{0.0}, ls{0.0};
    double log_norm = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        z = P * z;
        const double nz = z.norm();
        if (!(nz > 0.0) || !std::isfinite(nz)) throw NumericalError("linear flow lost the state");
        log_norm += std::log(nz);
        z /= nz;
        ts.push_back(static_cast<double>(k) * dt);
        ls.push_back(log_norm);
    }
    const Eigen::Map<const Eigen::VectorXd> t(ts.data(), static_cast<Eigen::Index>(ts.size()));
    const Eigen::Map<const Eigen::VectorXd> l(ls.data(), static_cast<Eigen::Index>(ls.size()));
    const double tm = t.mean(), lm = l.mean();
    const Eigen::VectorXd tc = t.array() - tm;
    GrowthFit fit;
    fit.rate = tc.dot(l.array().matrix() - Eigen::VectorXd::Constant(l.size(), lm)) / tc.squaredNorm();
    fit.intercept = lm - fit.rate * tm;
    const Eigen::VectorXd res = l.array() - (fit.intercept + fit.rate * t.array());
    fit.residual_rms = std::sqrt(res.squaredNorm() / static_cast<double>(res.size()));
    return fit;
}

Eigen::MatrixXcd monodromy(const Eigen::MatrixXd& K, double T) {
    if (!std::isfinite(T)) throw DomainError("T must be finite");
    return (generator(K) * cplx(T)).exp();
}

double symplectic_defect(const Eigen::MatrixXcd& Phi) {
    const Eigen::MatrixXcd J = symplectic_J(Phi.rows() / 2).cast<cplx>();
    return (Phi.transpose() * J * Phi - J).cwiseAbs().maxCoeff();
}

double truncated_energy(const TruncatedState& s, double m) {
    if (s.modes.empty()) return 0.0;
    const TruncatedQuartic quartic(s.modes, m);
    cvec xi(s.modes.size());
    for (std::size_t a = 0; a < xi.size(); ++a) xi[a] = cplx(s.p[a], -s.q[a]) / std::sqrt(2.0);
    return quartic.energy(xi, true);
}

BeamSimulationResult simulate_truncated_beam(const BeamSimulationConfig& cfg) {
    check_mass(cfg.m);
    check_horizon(cfg.T, cfg.dt);
    if (cfg.A.size() == 0) throw DomainError("A is empty");
    if (cfg.actions.size() != cfg.A.size()) throw DimensionError("one action per element of A is required");
    for (double I : cfg.actions)
        if (!(I >= 0.0) || !std::isfinite(I)) throw DomainError("actions must be finite and >= 0");
    if (!(cfg.transverse_amplitude >= 0.0)) throw DomainError("transverse_amplitude must be >= 0");
    if (cfg.samples < 2) throw DomainError("samples must be at least 2");

    const auto modes = ball_modes(cfg.A.dim(), cfg.cutoff);
    const std::size_t n = modes.size();
    std::vector<int> role(n, 0);  // 0 other, 1 in A, 2 in Λ_f
    std::vector<std::size_t> where(cfg.A.size(), n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t j = 0; j < cfg.A.size(); ++j) {
            if (modes[a] == cfg.A[j]) {
                role[a] = 1;
                where[j] = a;
            } else if (role[a] == 0 && modes[a].norm2() == cfg.A[j].norm2()) {
                role[a] = 2;
            }
        }
    if (std::find(where.begin(), where.end(), n) != where.end())
        throw DomainError("cutoff must include every element of A");

    const TruncatedQuartic quartic(modes, cfg.m);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    cvec xi(n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
        if (role[a] != 1) xi[a] = std::polar(cfg.transverse_amplitude, phase(rng));
    for (std::size_t j = 0; j < cfg.A.size(); ++j) xi[where[j]] = std::polar(std::sqrt(cfg.actions[j]), phase(rng));

    auto norms = [&](const cvec& z) {
        double off = 0.0, lf = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (role[a] == 1) continue;
            off += 2.0 * std::norm(z[a]);
            if (role[a] == 2) lf += 2.0 * std::norm(z[a]);
        }
        return std::pair{off, lf};
    };

    BeamSimulationResult out;
    out.initial = to_state(modes, xi, 0.0);
    std::vector<double> I0(n);
    for (std::size_t a = 0; a < n; ++a) I0[a] = std::norm(xi[a]);
    const double h0 = quartic.energy(xi, cfg.nonlinear);
    if (!(h0 != 0.0)) throw DomainError("initial energy is zero; drift is undefined");
    const auto [off0, lf0] = norms(xi);
    double off_max = off0, lf_max = lf0;

    std::vector<cplx> half(n);
    for (std::size_t a = 0; a < n; ++a) half[a] = std::polar(1.0, 0.5 * quartic.lambda()[a] * cfg.dt);

    const auto steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    const std::size_t rows = std::min(cfg.samples - 1, steps);
    std::size_t next_row = 1;
    out.trajectory.push_back({0.0, h0, off0});
    for (std::size_t k = 1; k <= steps; ++k) {
        for (std::size_t a = 0; a < n; ++a) xi[a] *= half[a];
        if (cfg.nonlinear) quartic.kick(xi, cfg.dt);
        for (std::size_t a = 0; a < n; ++a) xi[a] *= half[a];

        const double t = static_cast<double>(k) * cfg.dt;
        const double h = quartic.energy(xi, cfg.nonlinear);
        const double drift = std::abs(h - h0) / std::abs(h0);
        if (!std::isfinite(h) || drift > 0.1)
            throw NumericalError("energy drift " + std::to_string(drift) + " exceeds 10% at t=" + std::to_string(t) +
                                 " (dt=" + std::to_string(cfg.dt) + ")");
        out.energy_drift = std::max(out.energy_drift, drift);
        for (std::size_t a = 0; a < n; ++a) out.action_drift = std::max(out.action_drift, std::abs(std::norm(xi[a]) - I0[a]));
        const auto [off, lf] = norms(xi);
        off_max = std::max(off_max, off);
        lf_max = std::max(lf_max, lf);
        if (k * rows >= next_row * steps) {
            out.trajectory.push_back({t, h, off});
            ++next_row;
        }
    }
    auto growth = [](double mx, double base) { return base > 0.0 ? mx / base : (mx > 0.0 ? INFINITY : 1.0); };
    out.transverse_growth = growth(off_max, off0);
    out.lambda_f_growth = growth(lf_max, lf0);
    out.final = to_state(modes, xi, static_cast<double>(steps) * cfg.dt);
    return out;
}

}  // namespace beamnf
