#include "mfg/solver.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfg {

void NewtonOptions::validate() const
{
    if (!(tol_residual > 0.0) || max_iters < 1 || !(positivity_fraction > 0.0 && positivity_fraction < 1.0)
        || !(armijo_c > 0.0) || !(min_damping > 0.0)) {
        throw Error(ErrorKind::InvalidConfig,
                    "newton options must be positive with positivity_fraction in (0, 1)");
    }
}

void ContinuationOptions::validate() const
{
    if (!(initial_step > 0.0) || !(growth >= 1.0) || !(shrink > 0.0 && shrink < 1.0) || !(max_step > 0.0)
        || !(min_step > 0.0) || fast_iterations < 0 || max_attempts < 1
        || !(target_lambda > 0.0 && target_lambda <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "invalid continuation schedule");
    }
}

namespace {

bool lu_solve(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, Eigen::VectorXd& out)
{
    Eigen::SparseMatrix<double> colmajor = matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(colmajor);
    if (lu.info() != Eigen::Success) {
        return false;
    }
    out = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !out.allFinite()) {
        return false;
    }
    // A numerically singular factorization can still "succeed"; reject
    // solutions that do not satisfy the system.
    const double scale = rhs.lpNorm<Eigen::Infinity>() + 1.0;
    return (colmajor * out - rhs).lpNorm<Eigen::Infinity>() <= 1e-6 * scale;
}

} // namespace

Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, bool* pinned)
{
    if (pinned != nullptr) {
        *pinned = false;
    }
    Eigen::VectorXd x;
    if (lu_solve(matrix, rhs, x)) {
        return x;
    }

    // Replace row 0 by the mean-value constraint on the v block.
    const Eigen::Index N = matrix.rows() / 2;
    SparseMatrix pinned_matrix = matrix;
    for (SparseMatrix::InnerIterator it(pinned_matrix, 0); it; ++it) {
        it.valueRef() = 0.0;
    }
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index r = 0; r < pinned_matrix.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(pinned_matrix, r); it; ++it) {
            if (it.row() != 0) {
                t.emplace_back(it.row(), it.col(), it.value());
            }
        }
    }
    for (Eigen::Index c = 0; c < N; ++c) {
        t.emplace_back(0, c, 1.0);
    }
    pinned_matrix.setZero();
    pinned_matrix.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd pinned_rhs = rhs;
    pinned_rhs[0] = 0.0;
    if (lu_solve(pinned_matrix, pinned_rhs, x)) {
        if (pinned != nullptr) {
            *pinned = true;
        }
        return x;
    }
    throw Error(ErrorKind::LinearSolveFailure, "sparse LU factorization failed (singular Jacobian)");
}

NewtonResult newton_solve(const ProblemSpec& spec, double lambda, const State& s0, const NewtonOptions& opts)
{
    opts.validate();
    require_positive_density(s0.m);
    const GridSpec& g = spec.grid;

    State s = s0;
    NewtonReport report;
    double res = residual(spec, lambda, s).sup_norm();
    report.residual_history.push_back(res);

    while (!(res <= opts.tol_residual)) {
        if (report.iterations >= opts.max_iters) {
            report.final_min_m = s.m.min();
            std::ostringstream msg;
            msg << "no convergence in " << opts.max_iters << " iterations at lambda = " << lambda
                << " (|F|_inf = " << res << ")";
            throw NewtonFailure(ErrorKind::MaxItersExceeded, msg.str(), report);
        }

        const LinearizedSystem sys = assemble_jacobian(spec, lambda, s);
        Eigen::VectorXd delta;
        try {
            bool pinned = false;
            delta = solve_linear(sys.matrix, sys.rhs, &pinned);
            report.pinned_mean = report.pinned_mean || pinned;
        } catch (const Error& e) {
            report.final_min_m = s.m.min();
            throw NewtonFailure(ErrorKind::LinearSolveFailure, e.what(), report);
        }
        const Perturbation step = unstack(g, delta);

        const double m_floor = opts.positivity_fraction * s.m.min();
        double t = 1.0;
        bool accepted = false;
        State trial;
        double trial_res = 0.0;
        while (t >= opts.min_damping) {
            trial = State{s.u + t * step.v, s.m + t * step.f};
            if (trial.m.min() >= m_floor) {
                trial_res = residual(spec, lambda, trial).sup_norm();
                if (trial_res <= (1.0 - opts.armijo_c * t) * res) {
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) {
            report.final_min_m = s.m.min();
            std::ostringstream msg;
            msg << "damping fell below " << opts.min_damping << " at lambda = " << lambda << " (|F|_inf = " << res
                << ")";
            throw NewtonFailure(ErrorKind::NoDescent, msg.str(), report);
        }

        s = std::move(trial);
        res = trial_res;
        ++report.iterations;
        report.residual_history.push_back(res);
        report.damping_history.push_back(t);
        spdlog::debug("newton lambda={} iter={} t={} |F|={:.3e} min_m={:.6f}", lambda, report.iterations, t, res,
                      s.m.min());
    }

    report.converged = true;
    report.final_min_m = s.m.min();
    return NewtonResult{std::move(s), std::move(report)};
}

ContinuationResult continuation_solve(const ProblemSpec& spec, const NewtonOptions& newton,
                                      const ContinuationOptions& steps, const DiagnosticsOptions& diag)
{
    spec.validate();
    newton.validate();
    steps.validate();

    ContinuationResult result;
    result.state = exact_initial(spec);
    ContinuationTrace& trace = result.trace;

    // lambda = 0 is solved exactly; run Newton anyway so the trace records it.
    int attempts = 1;
    try {
        NewtonResult start = newton_solve(spec, 0.0, result.state, newton);
        result.state = std::move(start.state);
        trace.steps.push_back(ContinuationStep{0.0, std::move(start.report), snapshot(spec, 0.0, result.state, diag)});
    } catch (const Error& e) {
        trace.failure = std::string(to_string(ErrorKind::ContinuationStalled)) + ": no solution at lambda = 0: "
                        + e.what();
        trace.rejected.push_back(RejectedStep{0.0, 0.0, e.what()});
        return result;
    }

    double lambda = 0.0;
    double dl = std::min(steps.initial_step, steps.max_step);
    const double goal = steps.target_lambda;
    while (lambda < goal) {
        if (dl < steps.min_step) {
            std::ostringstream msg;
            msg << "step underflow below " << steps.min_step << " at lambda = " << lambda;
            trace.failure = std::string(to_string(ErrorKind::ContinuationStalled)) + ": " + msg.str();
            break;
        }
        if (attempts >= steps.max_attempts) {
            std::ostringstream msg;
            msg << "attempt budget of " << steps.max_attempts << " Newton solves exhausted at lambda = " << lambda;
            trace.failure = std::string(to_string(ErrorKind::ContinuationStalled)) + ": " + msg.str();
            break;
        }
        const double target = (lambda + dl >= goal) ? goal : lambda + dl;
        ++attempts;
        try {
            NewtonResult next = newton_solve(spec, target, result.state, newton);
            const int iters = next.report.iterations;
            result.state = std::move(next.state);
            trace.steps.push_back(
                ContinuationStep{target, std::move(next.report), snapshot(spec, target, result.state, diag)});
            spdlog::debug("continuation accepted lambda={} step={} iterations={}", target, target - lambda, iters);
            lambda = target;
            if (iters <= steps.fast_iterations) {
                dl = std::min(dl * steps.growth, steps.max_step);
            }
        } catch (const Error& e) {
            trace.rejected.push_back(RejectedStep{target, target - lambda, e.what()});
            spdlog::debug("continuation rejected lambda={} ({}), shrinking step", target, e.what());
            dl *= steps.shrink;
        }
    }

    trace.reached_lambda = lambda;
    trace.success = lambda >= goal;
    if (!trace.success) {
        spdlog::error("continuation stalled: {}", trace.failure);
    }
    return result;
}

std::vector<PerturbationStep> perturbation_solve(const ProblemSpec& spec, const std::vector<double>& eps_sequence,
                                                 const NewtonOptions& newton, const ContinuationOptions& steps)
{
    if (eps_sequence.empty()) {
        throw Error(ErrorKind::InvalidArgument, "epsilon sequence is empty");
    }
    for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
        if (!(eps_sequence[i] > 0.0) || (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))) {
            throw Error(ErrorKind::InvalidArgument, "epsilon sequence must be positive and strictly decreasing");
        }
    }

    std::vector<PerturbationStep> out;
    for (double eps : eps_sequence) {
        ProblemSpec perturbed = spec;
        perturbed.epsilon_monotone = eps;
        PerturbationStep step;
        step.epsilon = eps;
        if (!out.empty()) {
            try {
                NewtonResult warm = newton_solve(perturbed, 1.0, out.back().state, newton);
                step.state = std::move(warm.state);
                step.warm_started = true;
                step.newton_iterations = warm.report.iterations;
            } catch (const Error& e) {
                spdlog::info("warm start at eps={} failed ({}), running full continuation", eps, e.what());
            }
        }
        if (!step.warm_started) {
            ContinuationResult run = continuation_solve(perturbed, newton, steps);
            if (!run.trace.success) {
                std::ostringstream msg;
                msg << "perturbation path failed at eps = " << eps << ": " << run.trace.failure;
                throw Error(ErrorKind::ContinuationStalled, msg.str());
            }
            step.state = std::move(run.state);
            for (const auto& s : run.trace.steps) {
                step.newton_iterations += s.newton.iterations;
            }
        }
        out.push_back(std::move(step));
    }
    return out;
}

} // namespace mfg
