// Command-line front end: mfg <solve|verify|mms|jacobian-check|sweep> --config <path> [flags]

#include "mfg/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace mfg::cli;

    CLI::App app{"Stationary congestion mean field game solver"};
    app.require_subcommand(1);

    CommandOptions opts;
    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
        sub->add_option("--seed", seed, "Seed for sampled checks (overrides config seed)");
        sub->add_flag("--dump-matrix", opts.dump_matrix, "Write Jacobians in Matrix Market format");
    };

    CLI::App* solve = app.add_subcommand("solve", "Continuation solve from lambda = 0 to 1");
    add_common(solve);
    CLI::App* verify = app.add_subcommand("verify", "Run diagnostics on stored fields");
    add_common(verify);
    verify->add_option("--u", opts.u_path, "Value function CSV")->required();
    verify->add_option("--m", opts.m_path, "Density CSV")->required();
    CLI::App* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    add_common(mms);
    CLI::App* jac = app.add_subcommand("jacobian-check", "Finite-difference and coercivity checks of the Jacobian");
    add_common(jac);
    CLI::App* sweep = app.add_subcommand("sweep", "Continuation over a parameter grid");
    add_common(sweep);
    sweep->add_option("--jobs", jobs, "Worker threads (default: available parallelism)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    configure_logging();
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--out") > 0) {
            opts.out_dir = out_dir;
        }
        if (sub->count("--seed") > 0) {
            opts.seed = seed;
        }
        if (sub == sweep && sub->count("--jobs") > 0) {
            opts.jobs = jobs;
        }
    }

    if (solve->parsed()) {
        return cmd_solve(opts);
    }
    if (verify->parsed()) {
        return cmd_verify(opts);
    }
    if (mms->parsed()) {
        return cmd_mms(opts);
    }
    if (jac->parsed()) {
        return cmd_jacobian_check(opts);
    }
    return cmd_sweep(opts);
}
