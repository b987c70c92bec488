// pwlv: simulate, equilibria, uniqueness, verify.

#include <pwlv/cli.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct ConfigFlags {
    std::optional<std::string> config_path;
    pwlv::Overrides overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f, bool with_schedule) {
    auto& o = f.overrides;
    cmd->add_option("--config", f.config_path, "JSON config file");
    cmd->add_option("--preset", o.preset, "named scenario (see --list-presets)");
    cmd->add_option("--r", o.r, "prey growth rate");
    cmd->add_option("--lambda1", o.lambda1, "prey self-limitation");
    cmd->add_option("--lambda2", o.lambda2, "predation rate");
    cmd->add_option("--lambda3", o.lambda3, "conversion rate");
    cmd->add_option("--lambda4", o.lambda4, "predator death rate");
    if (!with_schedule) return;
    cmd->add_option("--seed", o.seed, "noise seed");
    cmd->add_option("--sigma1", o.sigma1, "prey noise intensity");
    cmd->add_option("--sigma2", o.sigma2, "predator noise intensity");
    cmd->add_option("--x0", o.x0, "initial prey");
    cmd->add_option("--y0", o.y0, "initial predator");
    cmd->add_option("--h", o.layout.h, "step size");
    cmd->add_option("--P", o.layout.horizon, "final time; breakpoints rescale");
    cmd->add_option("--P1", o.layout.p1, "first breakpoint");
    cmd->add_option("--P2", o.layout.p2, "second breakpoint");
    cmd->add_option("--delta", o.layout.delta, "order of every fractional segment");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise classical/fractional/stochastic Lotka-Volterra solver"};
    app.set_version_flag("--version", std::string(PWLV_VERSION));
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(0, 1);

    bool list_presets = false;
    app.add_flag("--list-presets", list_presets, "print preset names and exit");

    ConfigFlags sim_flags;
    pwlv::SimulateOptions sim_opts;
    std::string out_dir = ".";
    auto* sim = app.add_subcommand("simulate", "integrate and write timeseries.csv / phase.csv");
    add_config_flags(sim, sim_flags, true);
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--ensemble", sim_opts.ensemble, "run N consecutive seeds concurrently")
        ->check(CLI::PositiveNumber);

    ConfigFlags eq_flags;
    auto* eq = app.add_subcommand("equilibria", "equilibria, eigenvalues and stability classes");
    add_config_flags(eq, eq_flags, false);

    ConfigFlags uq_flags;
    pwlv::UniquenessOptions uq_opts;
    auto* uq = app.add_subcommand("uniqueness", "evaluate the uniqueness bound");
    add_config_flags(uq, uq_flags, false);
    uq->add_option("--k", uq_opts.k, "Lipschitz constant (default: k1 and k2 from the parameters)");
    uq->add_option("--delta", uq_opts.delta, "fractional order")->capture_default_str();
    uq->add_option("--T", uq_opts.horizon, "horizon")->capture_default_str();
    uq->add_option("--a", uq_opts.a, "boundary coefficient on y(0)")->capture_default_str();
    uq->add_option("--b", uq_opts.b, "boundary coefficient on y(T)")->capture_default_str();

    pwlv::VerifyOptions ver_opts;
    auto* ver = app.add_subcommand("verify", "run the numerical oracle suite");
    ver->add_option("--perturb-weights", ver_opts.weight_perturbation,
                    "add EPS to every extrapolating weight (sensitivity check)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? pwlv::kExitOk : pwlv::kExitConfig;
    }
    if (list_presets) {
        for (const auto& n : pwlv::preset_names()) std::cout << n << '\n';
        return pwlv::kExitOk;
    }

    if (app.get_subcommands().empty()) {
        std::cerr << "pwlv: a subcommand is required (simulate, equilibria, uniqueness, verify)\n";
        return pwlv::kExitConfig;
    }

    try {
        if (*sim) {
            const auto cfg = pwlv::resolve_config(sim_flags.config_path, sim_flags.overrides);
            sim_opts.out_dir = out_dir;
            for (const auto& p : pwlv::simulate(cfg, sim_opts)) std::cout << p.string() << '\n';
            return pwlv::kExitOk;
        }
        if (*eq) {
            const auto cfg = pwlv::resolve_config(eq_flags.config_path, eq_flags.overrides);
            std::cout << pwlv::equilibria_report(cfg.params);
            return pwlv::kExitOk;
        }
        if (*uq) {
            const auto cfg = pwlv::resolve_config(uq_flags.config_path, uq_flags.overrides);
            std::cout << pwlv::uniqueness_report(cfg.params, uq_opts).first;
            return pwlv::kExitOk;
        }
        if (*ver) {
            const auto [text, ok] = pwlv::verify_report(ver_opts);
            std::cout << text;
            return ok ? pwlv::kExitOk : pwlv::kExitVerify;
        }
    } catch (const pwlv::DivergenceError& e) {
        std::cerr << "pwlv: " << e.what() << '\n';
        return pwlv::kExitDivergence;
    } catch (const pwlv::ConfigError& e) {
        std::cerr << "pwlv: config error: " << e.what() << '\n';
        return pwlv::kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "pwlv: config error: " << e.what() << '\n';
        return pwlv::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "pwlv: " << e.what() << '\n';
        return 1;
    }
    return pwlv::kExitOk;
}
