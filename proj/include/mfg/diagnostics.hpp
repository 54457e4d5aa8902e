#pragma once

// Numerical checks of the a-priori estimates and integral identities satisfied
// by solutions: sup bound on u, mass and positivity of m, inverse moments of m
// against the explicit Young-inequality majorant, the Laplacian/flux
// cancellation, the rearranged moment identity, and the monotonicity gap used
// for uniqueness.
//
// Identities that rely on the chain rule hold only up to O(h^2) on the grid;
// callers check them by refinement, not equality.

#include "mfg/problem.hpp"

#include <vector>

namespace mfg {

struct DiagnosticsOptions {
    std::vector<double> r_values{1.0, 2.0, 4.0};
};

struct MomentEntry {
    double r = 0.0;
    double value = 0.0; // integral of m^{-(r+1-alpha)}
    double bound = 0.0; // 2 (r+1-alpha) (C_r^1 + C_r^2)
    bool pass = false;
};

struct IdentityEntry {
    double r = 0.0;
    double value = 0.0;
};

struct DiagnosticsSnapshot {
    double sup_u = 0.0;
    double sup_bound_V = 0.0;
    double min_m = 0.0;
    double mass_defect = 0.0;
    std::vector<MomentEntry> inverse_moments;
    std::vector<IdentityEntry> cancellation_residuals;
    std::vector<IdentityEntry> magic_residuals; // empty when sources are appended
};

struct SupBoundResult {
    double sup_u = 0.0;
    double certified_bound = 0.0;
    bool pass = false;
};

/// |u|_inf against the certified potential bound at `lambda`, with an
/// absolute slack `tolerance`.
SupBoundResult sup_bound_check(const ProblemSpec& spec, const State& s, double lambda = 1.0,
                               double tolerance = 1e-8);

struct MassPositivity {
    double mass_defect = 0.0; // |integral(m) - 1|
    double min_m = 0.0;
};

MassPositivity mass_positivity_check(const State& s);

/// Young-inequality constants of the inverse-moment estimate, for a generic
/// constant C.
double young_constant_c1(double alpha, double r, double C);
double young_constant_c2(double alpha, double r, double C);

struct InverseMoment {
    double value = 0.0;
    double bound = 0.0;
    double generic_constant = 0.0; // the C instantiated from certified bounds
    double c1 = 0.0;
    double c2 = 0.0;
    bool pass = false;
};

/// integral of m^{-(r+1-alpha)} and its certified majorant. The generic
/// constant is |W|_inf + |u|_inf(certified) + |lambda b|_inf^2 + 1/(r+1-alpha) + 1.
/// Throws BadExponent if r <= alpha.
InverseMoment inverse_moment(const ProblemSpec& spec, const State& s, double r, double lambda = 1.0);

/// integral Lap u / (r m^r) - integral div(m^{1-alpha} Du) / ((r+1-alpha) m^{r+1-alpha}).
/// Zero in the continuum. Throws BadExponent if r <= alpha.
double cancellation_check(const ProblemSpec& spec, const State& s, double r);

struct MagicIdentity {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0; // |lhs - rhs|
};

/// Both sides of the moment identity obtained by dividing the first equation
/// by r m^r, the second by (r+1-alpha) m^{r+1-alpha}, and subtracting:
///
///   lhs = int m^{-(r+1-a)}/(r+1-a) + |Du|^2/(2r m^{r+a}) + |Dm|^2/m^{r+2-a}
///   rhs = int W/(r m^r) - u/(r m^r) + m^{-(r-a)}/(r+1-a)
///             - lambda b.Du/(r m^r) - lambda div(b) m^{-(r-a)}/(r-a)
///
/// with W the homotopy potential at `lambda`. Throws BadExponent if r <= alpha
/// and NotASolution if |F(lambda, s)|_inf > 100 * tol.
MagicIdentity magic_identity_check(const ProblemSpec& spec, const State& s, double r, double lambda = 1.0,
                                   double tol = 1e-10);

/// Same evaluation without the solution guard.
MagicIdentity magic_identity_terms(const ProblemSpec& spec, const State& s, double r, double lambda = 1.0);

struct MonotonicityGap {
    double lhs = 0.0;
    double rhs = 0.0;
    std::vector<double> theta;
    std::vector<double> di_dtheta;
    std::vector<double> lower_bound; // (1 - alpha/2) int m_theta^{1-alpha} |D(u1-u0)|^2
    double i_one_direct = 0.0;       // I(1) from its definition (equals lhs)
    double i_one_trapezoid = 0.0;    // composite trapezoid of dI/dtheta over the samples
};

/// Monotonicity pairing of two states at lambda = 1 (potential includes the
/// eps arctan term). dI/dtheta is sampled on 11 equispaced theta values.
/// Throws NonPositiveDensity if any m_theta is not strictly positive.
MonotonicityGap monotonicity_gap(const ProblemSpec& spec, const State& s0, const State& s1);

/// Everything above that applies at an arbitrary accepted state.
DiagnosticsSnapshot snapshot(const ProblemSpec& spec, double lambda, const State& s,
                             const DiagnosticsOptions& opts = {});

} // namespace mfg
