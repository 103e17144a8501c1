#include "beamnf/app.hpp"
#include "beamnf/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <functional>
#include <iostream>

using namespace beamnf;

namespace {

struct Common {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", c.out_dir, "output directory (overrides BEAMNF_OUT_DIR and the config)");
    sub->add_option("--seed", c.seed, "RNG seed");
    sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
}

std::filesystem::path resolve_out_dir(const Common& c, const AnalysisConfig& cfg) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (const char* env = std::getenv("BEAMNF_OUT_DIR"); env && *env) return env;
    if (cfg.out_dir) return *cfg.out_dir;
    return ".";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Birkhoff normal form and stability analysis for the nonlinear beam equation on T^d"};
    app.require_subcommand(1);
    Common common;

    using Action = std::function<Written(const AnalysisConfig&, const std::filesystem::path&)>;
    std::vector<std::pair<CLI::App*, Action>> subs;
    auto add = [&](const char* name, const char* help, Action act) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, common);
        subs.emplace_back(sub, std::move(act));
    };
    add("analyze", "geometry, normal form, spectrum and divisor reports", run_report);
    add("sweep", "stability verdict over an (m, rho) grid", [](const AnalysisConfig& cfg, const std::filesystem::path& out) {
        const SweepGrid grid = cfg.sweep ? *cfg.sweep : SweepGrid{{cfg.m}, {cfg.rho}};
        return write_sweep(cfg, grid, out);
    });
    add("divisors", "small-divisor table", run_divisors);
    add("sample", "Monte Carlo typicality of admissible sets", run_sample);
    add("simulate", "integrate the truncated beam equation", run_simulate);
    add("norms-check", "random trials of the weighted matrix norm inequalities", run_norms_check);

    CLI11_PARSE(app, argc, argv);

    try {
        AnalysisConfig cfg = load_config(common.config);
        if (common.seed) cfg.seed = *common.seed;
        if (common.threads) cfg.threads = *common.threads;
        const auto out = resolve_out_dir(common, cfg);
        for (auto& [sub, act] : subs)
            if (sub->parsed())
                for (const auto& p : act(cfg, out)) std::cout << p.string() << "\n";
    } catch (const ConfigError& e) {
        for (const auto& m : e.messages) std::cerr << "config error: " << m << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
