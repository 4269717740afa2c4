#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "usrt/commands.hpp"

namespace {

void add_test_options(CLI::App* app, usrt::RunConfig& cfg) {
    app->add_option("--input,-i", cfg.input, "CSV with a y column or treated/control columns ('-' for stdin)")
        ->required();
    app->add_option("--score", cfg.score, "sign | wilcoxon | normal | redescending[:m,mlo,mhi]");
    app->add_option("--alpha", cfg.alpha, "level");
    app->add_option("--x0", cfg.x0, "boundary tuning fraction in (0,1]");
    app->add_option("--kind", cfg.kind, "uniform | fixed");
    app->add_option("--method", cfg.method, "fixed-test critical value: exact_sign | normal_approx | monte_carlo");
    app->add_option("--mc-reps", cfg.mc_reps, "replications for monte_carlo critical values");
    app->add_option("--seed", cfg.seed, "seed for monte_carlo critical values");
    app->add_flag("--drop-zeros", cfg.drop_zeros, "discard zero differences before ranking");
    app->add_option("--tie-tolerance", cfg.tie_tolerance, "treat |y| within this distance as tied");
}

} // namespace

int main(int argc, char** argv) {
    usrt::RunConfig cfg;
    std::string output;

    CLI::App app{"usrt: uniform general signed rank tests for sensitivity analysis"};
    app.require_subcommand(1);
    app.add_option("--output,-o", output, "write the report here instead of stdout");

    auto* test = app.add_subcommand("test", "run a sensitivity test on paired data");
    add_test_options(test, cfg);
    test->add_option("--gamma", cfg.gamma, "sensitivity parameter Gamma >= 1");

    auto* gamma = app.add_subcommand("gamma", "largest Gamma at which the test rejects");
    add_test_options(gamma, cfg);
    gamma->add_option("--gamma-max", cfg.gamma_max, "upper end of the Gamma grid");
    gamma->add_option("--gamma-points", cfg.gamma_points, "geometric grid size");
    gamma->add_option("--gamma-tol", cfg.gamma_tolerance, "bisection tolerance");

    auto* design = app.add_subcommand("design", "design sensitivity curve pi(x) as CSV");
    design->add_option("--score", cfg.score, "score function");
    design->add_option("--dist", cfg.dist, "normal:tau,sigma | laplace:.. | cauchy:.. | rare:base,scale[,eps,taubig]");
    design->add_option("--x-min", cfg.x_min, "smallest truncation fraction");
    design->add_option("--x-points", cfg.x_points, "number of log-spaced x values");

    auto* power = app.add_subcommand("power", "Monte Carlo power sweep as CSV");
    power->add_option("--dist", cfg.dist, "alternative distribution");
    power->add_option("--scores", cfg.scores, "score functions")->delimiter(';');
    power->add_option("--tests", cfg.kinds, "uniform and/or fixed")->delimiter(',');
    power->add_option("--n", cfg.n_values, "sample sizes")->delimiter(',');
    power->add_option("--gammas", cfg.gamma_values, "Gamma values")->delimiter(',');
    power->add_option("--alpha", cfg.alpha, "level");
    power->add_option("--x0", cfg.x0, "boundary tuning fraction");
    power->add_option("--reps", cfg.reps, "replications per cell");
    power->add_option("--seed", cfg.seed, "base seed");
    power->add_option("--method", cfg.method, "fixed-test critical value method");
    power->add_flag("--worst-case-null", cfg.worst_case_null, "draw Bernoulli(Gamma/(1+Gamma)) signs instead of data");
    power->add_option("--summary", cfg.summary, "also write a JSON summary to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        usrt::write_error(std::cerr, usrt::kExitConfig, "config", e.what());
        return usrt::kExitConfig;
    }

    for (auto* sub : {test, gamma, design, power}) {
        if (sub->parsed()) cfg.subcommand = sub->get_name();
    }
    return usrt::run_command(cfg, output, std::cout, std::cerr);
}
