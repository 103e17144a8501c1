#include "beamnf/app.hpp"
#include "beamnf/dynamics.hpp"
#include "beamnf/errors.hpp"
#include "beamnf/spectral.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace beamnf;

namespace {

ModeSet mode_set(const std::vector<std::vector<std::int64_t>>& pts) {
    std::vector<LatticeVector> v;
    for (const auto& p : pts) v.emplace_back(p);
    return ModeSet(std::move(v));
}

Reading reading_of(const std::string& s) { return reading_from_string(s); }

}  // namespace

PYBIND11_MODULE(_beamnf, mod) {
    mod.doc() = "Normal form and stability tools for the nonlinear beam equation";

    py::register_exception<DimensionError>(mod, "DimensionError", PyExc_ValueError);
    py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
    py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
    py::register_exception<DegenerateSpectrumError>(mod, "DegenerateSpectrumError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(mod, "NumericalError", PyExc_RuntimeError);

    mod.def("classify_set", [](const std::vector<std::vector<std::int64_t>>& A) { return to_string(classify_set(mode_set(A))); });

    mod.def("geometry_json", [](const std::vector<std::vector<std::int64_t>>& A) {
        const auto S = mode_set(A);
        return geometry_json(resonance_geometry(S), classify_set(S));
    });

    mod.def(
        "normal_form_json",
        [](const std::vector<std::vector<std::int64_t>>& A, double m, const std::vector<double>& rho, double nu,
           double cutoff, const std::string& reading) {
            return to_json(assemble_normal_form(mode_set(A), m, rho, nu, cutoff, reading_of(reading)));
        },
        py::arg("A"), py::arg("m"), py::arg("rho"), py::arg("nu") = 0.01, py::arg("cutoff") = 2.0,
        py::arg("reading") = "literal");

    mod.def(
        "assemble_K",
        [](const std::vector<std::vector<std::int64_t>>& A, double m, const std::vector<double>& rho,
           const std::string& reading) { return assemble_K(resonance_geometry(mode_set(A)), m, rho, reading_of(reading)); },
        py::arg("A"), py::arg("m"), py::arg("rho"), py::arg("reading") = "literal");

    mod.def("classes", [](const std::vector<std::vector<std::int64_t>>& A) { return resonance_geometry(mode_set(A)).classes; });

    mod.def(
        "classify_spectrum",
        [](const Eigen::MatrixXd& K, const std::vector<std::vector<int>>& blocks, std::optional<double> tol) {
            const auto rep = classify_spectrum(build_H(K, blocks), tol ? *tol : default_tolerance(K));
            py::dict d;
            d["stable"] = rep.stable;
            d["tol"] = rep.tol;
            d["max_real_part"] = rep.max_real_part();
            py::list bl;
            for (const auto& b : rep.blocks) {
                py::dict e;
                e["members"] = b.members;
                e["Lambda"] = b.Lambda;
                std::vector<std::string> kinds;
                for (auto k : b.kinds) kinds.push_back(to_string(k));
                e["kinds"] = kinds;
                e["eigenvalues"] = Eigen::VectorXcd(b.eigenvalues);
                bl.append(e);
            }
            d["blocks"] = bl;
            return d;
        },
        py::arg("K"), py::arg("blocks"), py::arg("tol") = std::nullopt);

    mod.def(
        "symplectic_diagonalize",
        [](const Eigen::MatrixXd& K, const std::vector<std::vector<int>>& blocks, std::optional<double> tol) {
            const auto H = build_H(K, blocks);
            const auto sd = symplectic_diagonalize(H, tol ? *tol : default_tolerance(K));
            std::vector<std::string> kinds;
            for (auto k : sd.kinds) kinds.push_back(to_string(k));
            return py::make_tuple(Eigen::MatrixXcd(sd.U), Eigen::VectorXcd(sd.diag), Eigen::MatrixXcd(sd.U_real), kinds,
                                  Eigen::MatrixXcd(H.matrix));
        },
        py::arg("K"), py::arg("blocks"), py::arg("tol") = std::nullopt);

    mod.def(
        "eigen_perturbation",
        [](const std::vector<std::vector<std::int64_t>>& A, double m, int j_star, const std::vector<double>& x, int block,
           int r) {
            const auto pc = eigen_perturbation(mode_set(A), m, j_star, x, block, r);
            py::dict d;
            d["lambda0"] = pc.lambda0;
            d["k1"] = pc.k1;
            d["k2"] = pc.k2;
            d["S"] = pc.S;
            return d;
        },
        py::arg("A"), py::arg("m"), py::arg("j_star"), py::arg("x"), py::arg("block"), py::arg("r"));

    mod.def(
        "linear_growth_rate",
        [](const Eigen::MatrixXd& K, double T, double dt, std::uint64_t seed) { return linear_growth_rate(K, T, dt, seed).rate; },
        py::arg("K"), py::arg("T"), py::arg("dt"), py::arg("seed") = 0);

    mod.def(
        "simulate",
        [](const std::vector<std::vector<std::int64_t>>& A, double m, const std::vector<double>& actions, double T,
           double dt, double cutoff, bool nonlinear, double transverse_amplitude, std::uint64_t seed, std::size_t samples) {
            BeamSimulationConfig c;
            c.A = mode_set(A);
            c.m = m;
            c.actions = actions;
            c.T = T;
            c.dt = dt;
            c.cutoff = cutoff;
            c.nonlinear = nonlinear;
            c.transverse_amplitude = transverse_amplitude;
            c.seed = seed;
            c.samples = samples;
            const auto r = simulate_truncated_beam(c);
            py::dict d;
            d["energy_drift"] = r.energy_drift;
            d["action_drift"] = r.action_drift;
            d["transverse_growth"] = r.transverse_growth;
            d["lambda_f_growth"] = r.lambda_f_growth;
            std::vector<std::array<double, 3>> traj;
            for (const auto& s : r.trajectory) traj.push_back({s.t, s.energy, s.transverse_norm});
            d["trajectory"] = traj;
            return d;
        },
        py::arg("A"), py::arg("m"), py::arg("actions"), py::arg("T"), py::arg("dt"), py::arg("cutoff") = 2.0,
        py::arg("nonlinear") = true, py::arg("transverse_amplitude") = 1e-6, py::arg("seed") = 0,
        py::arg("samples") = 1000);

    mod.def("validate_config", [](const std::string& text) { parse_config(text); });

    mod.def("run_report", [](const std::string& config_text, const std::filesystem::path& out_dir) {
        return run_report(parse_config(config_text), out_dir);
    });

    mod.def("run_sweep", [](const std::string& config_text, const std::filesystem::path& out_dir) {
        const auto cfg = parse_config(config_text);
        return write_sweep(cfg, cfg.sweep ? *cfg.sweep : SweepGrid{{cfg.m}, {cfg.rho}}, out_dir);
    });
}
