#include "beamnf/normalform.hpp"

#include "beamnf/errors.hpp"
#include "beamnf/frequencies.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>

namespace beamnf {

namespace {

void check_rho(const ModeSet& A, const std::vector<double>& rho) {
    if (rho.size() != A.size())
        throw DimensionError("rho has " + std::to_string(rho.size()) + " entries, A has " +
                             std::to_string(A.size()));
    for (double r : rho)
        if (!std::isfinite(r) || r < 0.0) throw DomainError("rho entries must be finite and >= 0");
}

double twopi_pow(int d) { return std::pow(2.0 * std::numbers::pi, -d); }

}  // namespace

double c_star(int d) { return 3.0 * twopi_pow(d); }

std::string to_string(Reading r) { return r == Reading::literal ? "literal" : "recounted"; }

Reading reading_from_string(const std::string& s) {
    if (s == "literal") return Reading::literal;
    if (s == "recounted") return Reading::recounted;
    throw std::invalid_argument("unknown reading '" + s + "' (expected literal or recounted)");
}

Eigen::MatrixXd omega_factor_matrix(int n, Reading reading) {
    const double off = reading == Reading::literal ? 4.0 : 2.0;
    Eigen::MatrixXd F = Eigen::MatrixXd::Constant(n, n, off);
    F.diagonal().setOnes();
    return F;
}

OmegaData assemble_omega(const ModeSet& A, double m, const std::vector<double>& rho, double nu, Reading reading) {
    check_mass(m);
    check_rho(A, rho);
    const int n = static_cast<int>(A.size());
    const int d = A.dim();
    OmegaData out;
    out.omega.resize(n);
    Eigen::VectorXd lam(n);
    for (int k = 0; k < n; ++k) lam[k] = out.omega[k] = eigenfrequency(A[static_cast<std::size_t>(k)], m);

    const Eigen::MatrixXd F = omega_factor_matrix(n, reading);
    out.M = (3.0 * twopi_pow(d)) * F.cwiseQuotient(lam * lam.transpose());
    // det M = 3^n (2π)^{-dn} ∏λ^{-2} det F, and det F never vanishes:
    // literal (−3)^{n−1}(4n−3), recounted (−1)^{n−1}(2n−1).
    const double detF = F.determinant();
    if (detF == 0.0 || !std::isfinite(detF)) throw NumericalError("singular omega factor matrix");
    out.detM = out.M.determinant();
    if (out.detM == 0.0) throw NumericalError("det M underflowed to zero");

    const Eigen::Map<const Eigen::VectorXd> r(rho.data(), n);
    out.omega += nu * out.M * r;
    return out;
}

double assemble_lambda(const ModeSet& A, double m, const std::vector<double>& rho, double nu,
                       const LatticeVector& a) {
    check_mass(m);
    check_rho(A, rho);
    if (a.dim() != A.dim()) throw DimensionError("mode dimension differs from A");
    if (A.contains(a)) throw std::invalid_argument("Λ_a requested for a ∈ A: " + a.str());
    for (std::size_t i = 0; i < A.size(); ++i)
        if (A[i].norm2() == a.norm2())
            throw std::invalid_argument("Λ_a requested for a ∈ Λ_f: " + a.str());
    const double la = eigenfrequency(a, m);
    double s = 0.0;
    for (std::size_t l = 0; l < A.size(); ++l) s += rho[l] / eigenfrequency(A[l], m);
    return la + 6.0 * nu * twopi_pow(A.dim()) * s / la;
}

double mu(const ResonanceGeometry& g, int i, double m, const std::vector<double>& rho, Reading reading) {
    check_mass(m);
    check_rho(g.A, rho);
    const auto& b = g.lambda_f.at(static_cast<std::size_t>(i));
    const double lb = eigenfrequency(b, m);
    const double own = rho[static_cast<std::size_t>(g.ell[static_cast<std::size_t>(i)])];
    const double cs = c_star(g.A.dim());
    if (reading == Reading::recounted) return 0.5 * cs * own / (lb * lb);
    double s = 0.0;
    for (std::size_t l = 0; l < g.A.size(); ++l) s += rho[l] / eigenfrequency(g.A[l], m);
    return cs * (1.5 * own / (lb * lb) - s / lb);
}

Eigen::MatrixXd assemble_K(const ResonanceGeometry& g, double m, const std::vector<double>& rho, Reading reading) {
    const int N = static_cast<int>(g.lambda_f.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int i = 0; i < N; ++i) K(2 * i, 2 * i + 1) = K(2 * i + 1, 2 * i) = mu(g, i, m, rho, reading);

    const double cs = c_star(g.A.dim());
    auto coupling = [&](int i, int j) {
        const auto& li = g.ell;
        return cs * std::sqrt(rho[static_cast<std::size_t>(li[static_cast<std::size_t>(i)])] *
                              rho[static_cast<std::size_t>(li[static_cast<std::size_t>(j)])]) /
               (eigenfrequency(g.lambda_f[static_cast<std::size_t>(i)], m) *
                eigenfrequency(g.lambda_f[static_cast<std::size_t>(j)], m));
    };
    // Ordered pairs: each unordered pair fills both (a,b) and (b,a) blocks.
    for (const auto& [i, j] : g.plus_pairs) {
        const double c = coupling(i, j);
        K(2 * i, 2 * j) = c;
        K(2 * i + 1, 2 * j + 1) = c;
    }
    for (const auto& [i, j] : g.minus_pairs) {
        const double c = coupling(i, j);
        K(2 * i, 2 * j + 1) = c;
        K(2 * i + 1, 2 * j) = c;
    }
    return K;
}

Eigen::MatrixXd K_to_pq(const Eigen::MatrixXd& K) {
    // ζ = T w with (ξ,η) = T (p,q), T = [[1,−i],[1,i]]/√2 per mode; ᵗT K T is real.
    const Eigen::Index n = K.rows() / 2;
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(K.rows(), K.cols());
    const double s = 1.0 / std::sqrt(2.0);
    const std::complex<double> I(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        T(2 * i, 2 * i) = s;
        T(2 * i, 2 * i + 1) = -I * s;
        T(2 * i + 1, 2 * i) = s;
        T(2 * i + 1, 2 * i + 1) = I * s;
    }
    const Eigen::MatrixXcd R = T.transpose() * K.cast<std::complex<double>>() * T;
    if (R.imag().cwiseAbs().maxCoeff() > 1e-12 * (1.0 + K.cwiseAbs().maxCoeff()))
        throw NumericalError("K is not real in (p,q) coordinates");
    return R.real();
}

NormalFormData assemble_normal_form(const ModeSet& A, double m, const std::vector<double>& rho, double nu,
                                    double lambda_cutoff, Reading reading) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("nu must be finite and >= 0");
    NormalFormData nf;
    nf.geometry = resonance_geometry(A);
    nf.m = m;
    nf.nu = nu;
    nf.rho = rho;
    nf.reading = reading;
    auto om = assemble_omega(A, m, rho, nu, reading);
    nf.omega = std::move(om.omega);
    nf.M = std::move(om.M);
    nf.detM = om.detM;
    nf.K = assemble_K(nf.geometry, m, rho, reading);

    const auto nmax = static_cast<std::int64_t>(std::floor(lambda_cutoff * lambda_cutoff + 1e-9));
    for (std::int64_t n2 = 0; n2 <= nmax; ++n2) {
        bool resonant = false;
        for (std::size_t l = 0; l < A.size(); ++l) resonant = resonant || A[l].norm2() == n2;
        if (resonant) continue;
        for (const auto& a : sphere_points(A.dim(), n2)) nf.big_lambda[a] = assemble_lambda(A, m, rho, nu, a);
    }
    return nf;
}

namespace {

nlohmann::json vec_json(const LatticeVector& a) {
    nlohmann::json j = nlohmann::json::array();
    for (int k = 0; k < a.dim(); ++k) j.push_back(a[k]);
    return j;
}

}  // namespace

std::string to_json(const NormalFormData& nf) {
    using nlohmann::json;
    const auto& g = nf.geometry;
    json j;
    j["m"] = nf.m;
    j["nu"] = nf.nu;
    j["rho"] = nf.rho;
    j["reading"] = to_string(nf.reading);
    j["A"] = json::array();
    for (std::size_t i = 0; i < g.A.size(); ++i) j["A"].push_back(vec_json(g.A[i]));
    j["omega"] = std::vector<double>(nf.omega.data(), nf.omega.data() + nf.omega.size());
    json M = json::array();
    for (Eigen::Index r = 0; r < nf.M.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(nf.M.cols()));
        for (Eigen::Index c = 0; c < nf.M.cols(); ++c) row[static_cast<std::size_t>(c)] = nf.M(r, c);
        M.push_back(row);
    }
    j["M"] = M;
    j["detM"] = nf.detM;
    json bl = json::array();
    for (const auto& [a, v] : nf.big_lambda) bl.push_back({{"a", vec_json(a)}, {"value", v}});
    j["big_lambda"] = bl;
    json labels = json::array();
    for (const auto& b : g.lambda_f) {
        labels.push_back({{"mode", vec_json(b)}, {"var", "xi"}});
        labels.push_back({{"mode", vec_json(b)}, {"var", "eta"}});
    }
    j["K_labels"] = labels;
    json K = json::array();
    for (Eigen::Index r = 0; r < nf.K.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(nf.K.cols()));
        for (Eigen::Index c = 0; c < nf.K.cols(); ++c) row[static_cast<std::size_t>(c)] = nf.K(r, c);
        K.push_back(row);
    }
    j["K"] = K;
    return j.dump(1);
}

}  // namespace beamnf
