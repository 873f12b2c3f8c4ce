#include "frd/commands.hpp"
#include "frd/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, missing = 3, error = 4 };

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-range multiscale decomposition of lattice Green's functions"};
    app.require_subcommand(1);
    std::string config_path, cache_dir;
    int threads = 0;
    bool override_dim = false;
    app.add_option("--config", config_path, "run configuration (key = value lines)");
    app.add_option("--cache-dir", cache_dir, "directory for cached Poisson tables");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--override-dimension-check", override_dim, "allow d < 3");

    frd::RunOptions opt;
    std::string out_dir;
    auto* decompose = app.add_subcommand("decompose", "build the covariances and reconstruction residuals");
    auto* verify = app.add_subcommand("verify", "check range, positivity, Poisson mass and symbol bounds");
    verify->add_flag("--require-cached", opt.require_cached, "fail instead of building missing Poisson tables");
    verify->add_flag("--inject-fault", opt.inject_fault, "perturb one kernel value beyond its range");
    auto* rates = app.add_subcommand("rates", "convergence rates against the fine-lattice proxy");
    auto* levy = app.add_subcommand("levy", "fractional Green's function decomposition and rates");
    auto* exp = app.add_subcommand("export", "plot-ready CSV slices of kernels and symbols");
    exp->add_option("--what", opt.export_what, "kernels, symbols or all")->check(CLI::IsMember({"kernels", "symbols", "all"}));
    for (auto* sc : {decompose, verify, rates, levy, exp}) sc->add_option("--output-dir", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        frd::RunConfig cfg = config_path.empty() ? frd::RunConfig{} : frd::load_config(config_path);
        if (!cache_dir.empty()) cfg.cache_dir = cache_dir;
        if (threads > 0) cfg.threads = threads;
        if (override_dim) cfg.allow_low_dimension = true;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        cfg.validate();

        if (*decompose) return frd::cmd_decompose(cfg, opt, std::cout);
        if (*verify) return frd::cmd_verify(cfg, opt, std::cout);
        if (*rates) return frd::cmd_rates(cfg, opt, std::cout);
        if (*levy) return frd::cmd_levy(cfg, opt, std::cout);
        if (*exp) return frd::cmd_export(cfg, opt, std::cout);
    } catch (const frd::MissingArtifacts& e) {
        std::cerr << "error: " << e.what() << "\n";
        return missing;
    } catch (const frd::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const frd::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const frd::InvalidScale& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return error;
    }
    return usage;
}
