#include "mfg/commands.hpp"

#include "mfg/errors.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

namespace mfg::cli {

namespace fs = std::filesystem;

namespace {

constexpr double sup_slack = 1e-8;
constexpr double fd_tolerance = 1e-6;
constexpr int fd_directions = 20;

RunConfig load_with_overrides(const CommandOptions& opts)
{
    RunConfig cfg = load_run_config(opts.config_path);
    if (opts.out_dir) {
        cfg.output.directory = *opts.out_dir;
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
    }
    if (opts.dump_matrix) {
        cfg.output.dump_matrix = true;
    }
    return cfg;
}

std::string prepare_output(const RunConfig& cfg)
{
    fs::create_directories(cfg.output.directory);
    return cfg.output.directory;
}

std::string join(const std::string& dir, const std::string& name)
{
    return (fs::path(dir) / name).string();
}

// Runs `body` and maps library errors onto exit codes.
template <typename Body>
int guarded(const char* command, Body&& body)
{
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "mfg " << command << ": " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidArgument:
        case ErrorKind::Io: return exit_usage;
        default: return exit_failure;
        }
    } catch (const std::exception& e) {
        std::cerr << "mfg " << command << ": " << e.what() << '\n';
        return exit_usage;
    }
}

double last_residual(const ContinuationTrace& trace)
{
    if (trace.steps.empty() || trace.steps.back().newton.residual_history.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return trace.steps.back().newton.residual_history.back();
}

std::string format_number(double v)
{
    std::ostringstream out;
    out << std::setprecision(6) << std::scientific << v;
    return out.str();
}

void print_rows(const std::vector<VerifyRow>& rows)
{
    std::cout << std::left << std::setw(24) << "check" << std::setw(16) << "value" << std::setw(16) << "threshold"
              << "result\n";
    for (const auto& row : rows) {
        std::cout << std::left << std::setw(24) << row.check << std::setw(16) << format_number(row.value)
                  << std::setw(16) << format_number(row.threshold) << (row.pass ? "PASS" : "FAIL");
        if (!row.note.empty()) {
            std::cout << "  (" << row.note << ")";
        }
        std::cout << '\n';
    }
}

std::string r_label(const char* name, double r)
{
    std::ostringstream out;
    out << name << "[r=" << r << "]";
    return out.str();
}

Field power(const Field& f, double p)
{
    return f.map([p](double v) { return std::pow(v, p); });
}

Field abs(const Field& f)
{
    return f.map([](double v) { return std::abs(v); });
}

// The fields are checked at lambda = 1 unless they only solve the lambda = 0
// end of the homotopy.
double verification_lambda(const RunConfig& cfg, const State& state)
{
    const double identity_tol = 100.0 * cfg.newton.tol_residual;
    if (residual(cfg.problem, 1.0, state).sup_norm() <= identity_tol) {
        return 1.0;
    }
    return residual(cfg.problem, 0.0, state).sup_norm() <= identity_tol ? 0.0 : 1.0;
}

} // namespace

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("mfg");
    spdlog::set_default_logger(logger);
    const char* env = std::getenv("MFG_LOG");
    const std::string level = env != nullptr ? env : "error";
    if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else if (level == "info") {
        spdlog::set_level(spdlog::level::info);
    } else {
        spdlog::set_level(spdlog::level::err);
    }
}

double identity_budget(const GridSpec& grid, double scale)
{
    const double h = grid.h();
    return std::max(1e-8, 5.0 * h * h * scale);
}

// --- solve -----------------------------------------------------------------

int cmd_solve(const CommandOptions& opts)
{
    return guarded("solve", [&] {
        const RunConfig cfg = load_with_overrides(opts);
        const std::string dir = prepare_output(cfg);
        write_json(to_json(cfg), join(dir, "resolved_config.json"));

        const ContinuationResult run = continuation_solve(cfg.problem, cfg.newton, cfg.continuation, cfg.diagnostics);
        write_json(to_json(run.trace), join(dir, "trace.json"));
        write_field_csv(run.state.u, join(dir, "u.csv"));
        write_field_csv(run.state.m, join(dir, "m.csv"));
        if (cfg.output.dump_matrix) {
            write_matrix_market(assemble_jacobian(cfg.problem, run.trace.reached_lambda, run.state).matrix,
                                join(dir, "jacobian.mtx"));
        }
        if (!run.trace.success) {
            std::cerr << "mfg solve: " << run.trace.failure << '\n';
            return exit_failure;
        }
        std::cout << "reached lambda = 1 in " << run.trace.steps.size() - 1 << " steps; |F|_inf = "
                  << format_number(last_residual(run.trace)) << ", min(m) = " << format_number(run.state.m.min())
                  << '\n';
        return exit_ok;
    });
}

// --- verify ----------------------------------------------------------------

std::vector<VerifyRow> verify_state(const RunConfig& cfg, const State& state)
{
    const ProblemSpec& spec = cfg.problem;
    std::vector<VerifyRow> rows;

    const MassPositivity mp = mass_positivity_check(state);
    const double mass_tol = 10.0 * cfg.newton.tol_residual;
    rows.push_back({"min_m", mp.min_m, 0.0, mp.min_m > 0.0, "must be > 0"});
    if (!(mp.min_m > 0.0)) {
        return rows;
    }
    rows.push_back({"mass_defect", mp.mass_defect, mass_tol, mp.mass_defect <= mass_tol, "|int m - 1|"});

    const double lambda = verification_lambda(cfg, state);
    const double res = residual(spec, lambda, state).sup_norm();
    const double identity_tol = 100.0 * cfg.newton.tol_residual;
    rows.push_back({"residual", res, identity_tol, res <= identity_tol,
                    lambda == 1.0 ? "|F(1, u, m)|_inf" : "|F(0, u, m)|_inf, homotopy start"});

    const SupBoundResult sup = sup_bound_check(spec, state, lambda, sup_slack);
    rows.push_back({"sup_bound", sup.sup_u, sup.certified_bound + sup_slack, sup.pass, "|u|_inf <= certified bound"});

    for (double r : cfg.diagnostics.r_values) {
        if (!(r > spec.alpha)) {
            continue;
        }
        const InverseMoment im = inverse_moment(spec, state, r, lambda);
        rows.push_back({r_label("inverse_moment", r), im.value, im.bound, im.pass, "certified majorant"});

        const double cancel = cancellation_check(spec, state, r);
        const double exponent = r + 1.0 - spec.alpha;
        const Field flux = divergence(gradient(state.u).scaled(power(state.m, 1.0 - spec.alpha)));
        const double cancel_scale = integral(abs(laplacian(state.u)) * power(state.m, -r)) / r
                                    + integral(abs(flux) * power(state.m, -exponent)) / exponent;
        const double cancel_budget = identity_budget(spec.grid, cancel_scale);
        rows.push_back({r_label("cancellation", r), std::abs(cancel), cancel_budget, std::abs(cancel) <= cancel_budget,
                        "O(h^2) budget"});

        if (spec.sources) {
            continue;
        }
        if (res > identity_tol) {
            std::ostringstream note;
            note << "NotASolution: |F|_inf = " << format_number(res);
            rows.push_back({r_label("magic_identity", r), res, identity_tol, false, note.str()});
            continue;
        }
        const MagicIdentity mi = magic_identity_check(spec, state, r, lambda, cfg.newton.tol_residual);
        const double budget = identity_budget(spec.grid, std::abs(mi.lhs) + std::abs(mi.rhs));
        rows.push_back({r_label("magic_identity", r), mi.defect, budget, mi.defect <= budget, "O(h^2) budget"});
    }

    const LinearizedSystem sys = assemble_jacobian(spec, lambda, state);
    const CoercivityReport coercive = coercivity_check(sys, cfg.coercivity_samples, cfg.seed);
    rows.push_back({"coercivity_max_ratio", coercive.max_ratio, 0.0, coercive.passed(), "all samples B[w,w] < 0"});
    return rows;
}

int cmd_verify(const CommandOptions& opts)
{
    return guarded("verify", [&] {
        if (opts.u_path.empty() || opts.m_path.empty()) {
            throw Error(ErrorKind::InvalidArgument, "verify needs --u and --m field files");
        }
        const RunConfig cfg = load_with_overrides(opts);
        State state{read_field_csv(opts.u_path), read_field_csv(opts.m_path)};
        if (!(state.u.grid() == cfg.problem.grid) || !(state.m.grid() == cfg.problem.grid)) {
            throw Error(ErrorKind::InvalidConfig, "field grids do not match the configured problem grid");
        }
        const std::vector<VerifyRow> rows = verify_state(cfg, state);
        print_rows(rows);

        json report = json::array();
        bool all_pass = true;
        for (const auto& row : rows) {
            report.push_back({{"check", row.check},
                              {"value", row.value},
                              {"threshold", row.threshold},
                              {"pass", row.pass},
                              {"note", row.note}});
            all_pass = all_pass && row.pass;
        }
        const std::string dir = prepare_output(cfg);
        write_json({{"all_pass", all_pass}, {"checks", report}}, join(dir, "diagnostics.json"));
        return all_pass ? exit_ok : exit_failure;
    });
}

// --- mms -------------------------------------------------------------------

int cmd_mms(const CommandOptions& opts)
{
    return guarded("mms", [&] {
        const RunConfig cfg = load_with_overrides(opts);
        if (!cfg.mms) {
            throw Error(ErrorKind::InvalidConfig, "mms needs an 'mms' section in the config");
        }
        ManufacturedCase mms{cfg.problem, cfg.mms->u_exact, cfg.mms->m_exact};
        const std::vector<RateRow> rows = convergence_study(mms, cfg.mms->grids, cfg.newton, cfg.continuation);

        const std::string dir = prepare_output(cfg);
        std::ofstream csv(join(dir, "mms_rates.csv"));
        csv << "grid,error_u,error_m,rate_u,rate_m\n" << std::setprecision(17);
        std::cout << std::left << std::setw(8) << "grid" << std::setw(16) << "error_u" << std::setw(16) << "error_m"
                  << std::setw(10) << "rate_u" << "rate_m\n";
        for (const auto& row : rows) {
            auto rate = [&row](double v) -> std::string {
                if (row.exact) {
                    return "exact";
                }
                if (std::isnan(v)) {
                    return "";
                }
                std::ostringstream s;
                s << std::setprecision(17) << v;
                return s.str();
            };
            csv << row.n << ',' << row.error_u << ',' << row.error_m << ',' << rate(row.rate_u) << ','
                << rate(row.rate_m) << '\n';
            std::cout << std::left << std::setw(8) << row.n << std::setw(16) << format_number(row.error_u)
                      << std::setw(16) << format_number(row.error_m) << std::setw(10) << rate(row.rate_u).substr(0, 6)
                      << rate(row.rate_m).substr(0, 6) << '\n';
        }
        return exit_ok;
    });
}

// --- jacobian-check --------------------------------------------------------

int cmd_jacobian_check(const CommandOptions& opts)
{
    return guarded("jacobian-check", [&] {
        const RunConfig cfg = load_with_overrides(opts);
        const ProblemSpec& spec = cfg.problem;
        const std::string dir = prepare_output(cfg);

        struct Probe {
            std::string label;
            double lambda;
            State state;
        };
        std::vector<Probe> probes;
        probes.push_back({"initial", 0.0, exact_initial(spec)});

        ContinuationOptions half = cfg.continuation;
        half.target_lambda = 0.5;
        const ContinuationResult mid = continuation_solve(spec, cfg.newton, half);
        if (!mid.trace.success) {
            throw Error(ErrorKind::ContinuationStalled, "could not reach lambda = 0.5: " + mid.trace.failure);
        }
        probes.push_back({"mid_homotopy", 0.5, mid.state});
        const ContinuationResult full = continuation_solve(spec, cfg.newton, cfg.continuation);
        if (!full.trace.success) {
            throw Error(ErrorKind::ContinuationStalled, "could not reach lambda = 1: " + full.trace.failure);
        }
        probes.push_back({"converged", 1.0, full.state});

        json report = json::array();
        bool all_pass = true;
        std::cout << std::left << std::setw(14) << "state" << std::setw(8) << "lambda" << std::setw(18)
                  << "max_fd_rel_err" << std::setw(18) << "coercivity_max" << "result\n";
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const Probe& p = probes[i];
            const LinearizedSystem sys = assemble_jacobian(spec, p.lambda, p.state);
            const FiniteDifferenceCheck fd =
                finite_difference_check(spec, p.lambda, p.state, sys, fd_directions, cfg.seed + i);
            const CoercivityReport coercive = coercivity_check(sys, cfg.coercivity_samples, cfg.seed + 100 + i);
            const bool pass = fd.max_relative_error <= fd_tolerance && coercive.passed();
            all_pass = all_pass && pass;
            report.push_back({{"state", p.label},
                              {"lambda", p.lambda},
                              {"fd_directions", fd.directions},
                              {"max_relative_error", fd.max_relative_error},
                              {"coercivity", to_json(coercive)},
                              {"pass", pass}});
            std::cout << std::left << std::setw(14) << p.label << std::setw(8) << p.lambda << std::setw(18)
                      << format_number(fd.max_relative_error) << std::setw(18) << format_number(coercive.max_ratio)
                      << (pass ? "PASS" : "FAIL") << '\n';
            if (cfg.output.dump_matrix) {
                write_matrix_market(sys.matrix, join(dir, "jacobian_" + p.label + ".mtx"));
            }
        }
        write_json({{"all_pass", all_pass}, {"states", report}}, join(dir, "jacobian_check.json"));
        return all_pass ? exit_ok : exit_failure;
    });
}

// --- sweep -----------------------------------------------------------------

std::vector<SweepCell> run_sweep(const RunConfig& cfg, int jobs)
{
    if (!cfg.sweep) {
        throw Error(ErrorKind::InvalidConfig, "sweep needs a 'sweep' section in the config");
    }
    std::vector<SweepCell> cells;
    for (double a : cfg.sweep->alpha) {
        for (double k : cfg.sweep->kappa) {
            for (double amp : cfg.sweep->drift_amplitude) {
                SweepCell c;
                c.alpha = a;
                c.kappa = k;
                c.drift_amplitude = amp;
                cells.push_back(c);
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            SweepCell& c = cells[i];
            ProblemSpec spec = cfg.problem;
            spec.alpha = c.alpha;
            spec.potential.kappa = c.kappa;
            spec.drift = cfg.problem.drift.scaled(c.drift_amplitude);
            try {
                const ContinuationResult run = continuation_solve(spec, cfg.newton, cfg.continuation, cfg.diagnostics);
                c.success = run.trace.success;
                c.reached_lambda = run.trace.reached_lambda;
                c.min_m = run.state.m.min();
                c.sup_u = run.state.u.sup_norm();
                c.final_residual = last_residual(run.trace);
                for (const auto& s : run.trace.steps) {
                    c.iterations += s.newton.iterations;
                }
                c.failure = run.trace.failure;
            } catch (const std::exception& e) {
                c.success = false;
                c.failure = e.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return cells;
}

int cmd_sweep(const CommandOptions& opts)
{
    return guarded("sweep", [&] {
        const RunConfig cfg = load_with_overrides(opts);
        const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        const int jobs = opts.jobs.value_or(hw);
        if (jobs < 1) {
            throw Error(ErrorKind::InvalidArgument, "--jobs must be positive");
        }
        const std::vector<SweepCell> cells = run_sweep(cfg, jobs);

        const std::string dir = prepare_output(cfg);
        write_json(to_json(cfg), join(dir, "resolved_config.json"));
        std::ofstream csv(join(dir, "sweep.csv"));
        csv << "alpha,kappa,drift_amplitude,min_m,sup_u,iterations,success,reached_lambda,final_residual\n"
            << std::setprecision(17);
        int failures = 0;
        for (const auto& c : cells) {
            csv << c.alpha << ',' << c.kappa << ',' << c.drift_amplitude << ',' << c.min_m << ',' << c.sup_u << ','
                << c.iterations << ',' << (c.success ? "true" : "false") << ',' << c.reached_lambda << ','
                << c.final_residual << '\n';
            if (!c.success) {
                ++failures;
                std::cerr << "mfg sweep: cell alpha=" << c.alpha << " kappa=" << c.kappa
                          << " amplitude=" << c.drift_amplitude << " failed: " << c.failure << '\n';
            }
        }
        std::cout << cells.size() - static_cast<std::size_t>(failures) << "/" << cells.size() << " cells succeeded\n";
        return failures == 0 ? exit_ok : exit_failure;
    });
}

} // namespace mfg::cli
