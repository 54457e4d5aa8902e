#pragma once

// Manufactured solutions: pick closed-form trigonometric (u*, m*), evaluate
// the continuous operators on them analytically, and append the result as
// sources so (u*, m*) solves F(1, u, m) = S exactly in the continuum. Solving
// the augmented discrete system on a sequence of grids measures the order of
// the scheme.

#include "mfg/problem.hpp"
#include "mfg/solver.hpp"

#include <array>
#include <vector>

namespace mfg {

struct TrigMode {
    std::array<int, 2> k{0, 0}; // wave numbers per axis
    double cos_coef = 0.0;
    double sin_coef = 0.0;
};

/// c + sum a cos(2 pi k.x) + b sin(2 pi k.x).
struct TrigSeries {
    double constant = 0.0;
    std::vector<TrigMode> modes;

    [[nodiscard]] double value(const std::array<double, 2>& x) const;
    [[nodiscard]] std::array<double, 2> gradient(const std::array<double, 2>& x) const;
    [[nodiscard]] double laplacian(const std::array<double, 2>& x) const;
    /// constant - sum(|a| + |b|): a lower bound on the series.
    [[nodiscard]] double lower_bound() const;
    [[nodiscard]] Field sample(const GridSpec& grid) const;
};

struct ManufacturedCase {
    ProblemSpec spec; // grid is replaced per study level; sources are ignored
    TrigSeries u_exact;
    TrigSeries m_exact;
};

/// Pointwise continuous residual of the lambda = 1 system at (u*, m*).
std::array<double, 2> continuous_operator(const ProblemSpec& spec, const TrigSeries& u, const TrigSeries& m,
                                          const std::array<double, 2>& x);

/// Sources on `grid`. Throws NotPositive if m* can touch zero.
Sources mms_source(const ManufacturedCase& mms, const GridSpec& grid);

/// The case's problem on `grid` with the sources appended.
ProblemSpec augmented_spec(const ManufacturedCase& mms, const GridSpec& grid);

struct RateRow {
    int n = 0;
    double error_u = 0.0;
    double error_m = 0.0;
    double rate_u = 0.0; // NaN on the first row
    double rate_m = 0.0;
    bool exact = false;  // both errors at roundoff level
    int newton_iterations = 0;
};

/// Solves the augmented system on each grid (n doubling) and fits the
/// observed order from successive error ratios. Needs at least 3 grids.
std::vector<RateRow> convergence_study(const ManufacturedCase& mms, const std::vector<int>& ns,
                                       const NewtonOptions& newton, const ContinuationOptions& steps = {});

} // namespace mfg
