#pragma once

#include "beamnf/lattice.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace beamnf {

// Linear flow ż = Hz with H = iJK, K in (ξ_b, η_b) pairs. In (p,q) coordinates this is the
// real Hamiltonian flow of ⟨Kζ,ζ⟩, so Re of H's eigenvalues are the growth rates.
struct GrowthFit {
    double rate = 0.0;       // least-squares slope of log‖z(t)‖
    double intercept = 0.0;
    double residual_rms = 0.0;
};

// Exact propagator exp(H dt) applied T/dt times to a random unit vector (seeded).
GrowthFit linear_growth_rate(const Eigen::MatrixXd& K, double T, double dt, std::uint64_t seed);

// Φ(T) = exp(HT).
Eigen::MatrixXcd monodromy(const Eigen::MatrixXd& K, double T);

// max |ᵗΦJΦ − J|.
double symplectic_defect(const Eigen::MatrixXcd& Phi);

// Fourier-truncated beam u_tt + Δ²u + mu + 4u³ = 0 on T^d, modes |a| ≤ cutoff, with
// u = (2π)^{-d/2} Σ û_a e^{iax} and ξ_a = (√λ_a û_a − i v̂_a/√λ_a)/√2 = (p_a − i q_a)/√2.
struct TruncatedState {
    std::vector<LatticeVector> modes;
    std::vector<double> p, q;
    double t = 0.0;
};

struct BeamSimulationConfig {
    ModeSet A;
    double m = 1.5;
    double cutoff = 2.0;
    std::vector<double> actions;        // I_a = |ξ_a|² for a ∈ A
    double T = 1.0, dt = 1e-2;
    bool nonlinear = true;
    double transverse_amplitude = 1e-6; // |ξ_a| of the random kick off A
    std::uint64_t seed = 0;
    std::size_t samples = 1000;         // recorded rows (≥ 2)
};

struct TrajectorySample {
    double t, energy, transverse_norm;
};

struct BeamSimulationResult {
    double energy_drift = 0.0;       // max |h(t) − h(0)| / |h(0)|
    double action_drift = 0.0;       // max over modes and t of |I_a(t) − I_a(0)|
    double transverse_growth = 0.0;  // max_t N(t)/N(0), N = Σ_{a∉A} (p_a² + q_a²)
    double lambda_f_growth = 0.0;    // same, restricted to Λ_f
    std::vector<TrajectorySample> trajectory;
    TruncatedState initial, final;
};

// Strang splitting: exact half rotation ξ_a ↦ e^{iλ_a dt/2}ξ_a, kick v̂ ↦ v̂ − 4dt(u³)^, half rotation.
// Throws NumericalError once the energy drifts by more than 10%.
BeamSimulationResult simulate_truncated_beam(const BeamSimulationConfig& cfg);

// h = Σλ_a|ξ_a|² + ∫u⁴ for a state on the truncated mode set.
double truncated_energy(const TruncatedState& s, double m);

}  // namespace beamnf
