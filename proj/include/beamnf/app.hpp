#pragma once

#include "beamnf/lattice.hpp"
#include "beamnf/normalform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace beamnf {

// Field-level validation failure; every message names the offending key.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(std::vector<std::string> msgs);
    std::vector<std::string> messages;
};

struct SweepGrid {
    std::vector<double> m;                 // mass axis
    std::vector<std::vector<double>> rho;  // action vectors
};

struct SimulateSection {
    std::vector<double> actions;  // defaults to rho
    double T = 100.0, dt = 1e-2, cutoff = 2.0, transverse_amplitude = 1e-6;
    bool nonlinear = true;
    std::size_t samples = 1000;
};

struct SampleSection {
    int n = 2;
    std::vector<double> R{5, 10, 20, 40};
    std::size_t trials = 10000;
};

struct NormsSection {
    int d = 2;
    double R = 4.0;
    std::vector<std::vector<double>> settings{{0.0, 0.0, 0.0}, {0.5, 1.0, 0.0}, {0.5, 2.0, 1.0}};
    std::size_t trials = 200;
};

struct AnalysisConfig {
    int d = 0;
    ModeSet A;
    double m = 1.5;
    std::vector<double> rho;
    double nu = 0.01;
    Reading reading = Reading::literal;
    double lambda_cutoff = 2.0;  // |a| bound for the Λ_a table
    int divisor_K = 2;           // |k|_1 bound
    int divisor_N = 4;           // |a|,|b| bound
    std::uint64_t seed = 0;
    int threads = 1;
    std::optional<std::string> out_dir;
    std::optional<SweepGrid> sweep;
    std::optional<SimulateSection> simulate;
    SampleSection sample;
    NormsSection norms;
};

// Parses and validates (classify_set, m ∈ [1,2], shapes and signs). Throws ConfigError.
AnalysisConfig parse_config(const std::string& json_text);
AnalysisConfig load_config(const std::filesystem::path& file);

// Files written, in order.
using Written = std::vector<std::filesystem::path>;

// geometry.json, normalform.json, spectrum.json, spectrum.csv, divisors.csv, and dynamics.csv
// when the config has a simulate section.
Written run_report(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);

struct SweepRow {
    double m;
    std::vector<double> rho;
    bool stable;
    double max_real_part;
    double min_divisor;
    double delta;  // min discriminant (β+γ)²−4α² over two-member classes; NaN if there are none
};

// One row per (m, rho) cell, m-major. At most 10⁴ cells.
std::vector<SweepRow> run_sweep(const AnalysisConfig& cfg, const SweepGrid& grid);
Written write_sweep(const AnalysisConfig& cfg, const SweepGrid& grid, const std::filesystem::path& out_dir);

Written run_divisors(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
Written run_sample(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
Written run_simulate(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);
Written run_norms_check(const AnalysisConfig& cfg, const std::filesystem::path& out_dir);

// Report texts, shared with the Python module.
std::string geometry_json(const ResonanceGeometry& g, SetClass cls);
std::string spectrum_json(const AnalysisConfig& cfg);

// "%.17g"
std::string fmt17(double x);

}  // namespace beamnf
