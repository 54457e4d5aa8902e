#pragma once

#include "mfg/diagnostics.hpp"
#include "mfg/errors.hpp"
#include "mfg/linearization.hpp"
#include "mfg/problem.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace mfg {

struct NewtonOptions {
    double tol_residual = 1e-10;
    int max_iters = 50;
    double positivity_fraction = 0.1;
    double armijo_c = 1e-4;
    double min_damping = 1e-6;

    void validate() const;
};

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history; // sup-norm of F, one entry per iterate
    std::vector<double> damping_history;  // accepted step fraction per iteration
    double final_min_m = 0.0;
    bool pinned_mean = false; // a mean-value row replaced a singular pivot
};

/// Raised by newton_solve; carries the partial report for post-mortem.
class NewtonFailure : public Error {
public:
    NewtonFailure(ErrorKind kind, const std::string& message, NewtonReport report)
        : Error(kind, message), report_(std::move(report))
    {
    }
    [[nodiscard]] const NewtonReport& report() const noexcept { return report_; }

private:
    NewtonReport report_;
};

struct NewtonResult {
    State state;
    NewtonReport report;
};

/// Solves J delta = rhs by sparse LU. If the factorization reports a
/// singular matrix, the first row is replaced by the mean-value constraint
/// sum(delta_v) = 0 and the solve is retried; `pinned` reports whether that
/// happened. Throws LinearSolveFailure if both attempts fail.
Eigen::VectorXd solve_linear(const SparseMatrix& matrix, const Eigen::VectorXd& rhs, bool* pinned = nullptr);

/// Damped Newton at fixed lambda. Step fractions t in {1, 1/2, ...} must keep
/// m + t dm >= positivity_fraction * min(m) and satisfy the Armijo decrease of
/// the residual sup-norm. Throws NewtonFailure (LinearSolveFailure, NoDescent,
/// MaxItersExceeded).
NewtonResult newton_solve(const ProblemSpec& spec, double lambda, const State& s0, const NewtonOptions& opts);

struct ContinuationOptions {
    double initial_step = 0.1;
    double growth = 1.5;
    double shrink = 0.5;
    double max_step = 0.25;
    double min_step = 1e-6;
    int fast_iterations = 3; // grow the step after a solve this quick
    int max_attempts = 2000; // hard budget on Newton solves per run
    double target_lambda = 1.0; // < 1 stops part way along the homotopy

    void validate() const;
};

struct ContinuationStep {
    double lambda = 0.0;
    NewtonReport newton;
    DiagnosticsSnapshot diagnostics;
};

struct RejectedStep {
    double lambda = 0.0;
    double step = 0.0;
    std::string reason;
};

struct ContinuationTrace {
    std::vector<ContinuationStep> steps; // accepted steps, lambda strictly increasing
    std::vector<RejectedStep> rejected;  // failed attempts, in order
    double reached_lambda = 0.0;
    bool success = false;
    std::string failure; // empty on success
};

struct ContinuationResult {
    State state; // last accepted state
    ContinuationTrace trace;
};

/// Tracks F(lambda, .) = 0 from the exact lambda = 0 state up to
/// target_lambda (1 by default); the last step is clamped onto the target.
/// Never throws on numerical failure: a stalled run returns success = false
/// with the trace and the last accepted state.
ContinuationResult continuation_solve(const ProblemSpec& spec, const NewtonOptions& newton,
                                      const ContinuationOptions& steps, const DiagnosticsOptions& diag = {});

struct PerturbationStep {
    double epsilon = 0.0;
    State state;
    bool warm_started = false; // solved by Newton at lambda = 1 from the previous epsilon
    int newton_iterations = 0;
};

/// Solves the problem with V + eps arctan(m) for each eps in a strictly
/// decreasing positive sequence. Throws ContinuationStalled if some eps fails.
std::vector<PerturbationStep> perturbation_solve(const ProblemSpec& spec, const std::vector<double>& eps_sequence,
                                                 const NewtonOptions& newton, const ContinuationOptions& steps);

} // namespace mfg
