#pragma once

// Problem builders shared by the unit tests and the acceptance binary.

#include "mfg/problem.hpp"
#include "mfg/verification.hpp"

#include <cmath>
#include <random>

namespace mfg::testing {

/// 1-D suite problem: V = 0.5 cos(2 pi x) + kappa arctan(m), b = 0.3 sin(2 pi x).
inline ProblemSpec suite_problem(double alpha, double kappa, int n = 128)
{
    ProblemSpec spec;
    spec.grid = GridSpec::make(1, n);
    spec.alpha = alpha;
    spec.potential.form = PotentialForm::Separable;
    spec.potential.kappa = kappa;
    spec.potential.a.cos = {0.5};
    spec.potential.a.sin = {0.0};
    spec.drift = DriftSpec::zero(1);
    spec.drift.sin[0][0] = 0.3;
    return spec;
}

/// 2-D problem with coupled harmonics in both coefficients.
inline ProblemSpec planar_problem(double alpha, int n = 24)
{
    ProblemSpec spec;
    spec.grid = GridSpec::make(2, n);
    spec.alpha = alpha;
    spec.potential.form = PotentialForm::Saturating;
    spec.potential.kappa = 0.8;
    spec.potential.a.cos = {0.4, -0.2};
    spec.potential.a.sin = {0.1, 0.3};
    spec.drift = DriftSpec::zero(2);
    spec.drift.offset = {0.1, -0.05};
    spec.drift.sin[0][0] = 0.25;
    spec.drift.cos[1][0] = 0.15;
    spec.drift.sin[1][1] = -0.2;
    return spec;
}

/// Smooth positive state with a few harmonics; `phase` shifts the pattern.
inline State trig_state(const GridSpec& grid, double u_amp, double m_amp, double phase)
{
    const double tau = 2.0 * std::acos(-1.0);
    State s{Field::sample(grid,
                          [&](const std::array<double, 2>& x) {
                              return u_amp * (std::sin(tau * x[0] + phase) + 0.5 * std::cos(2.0 * tau * x[1]));
                          }),
            Field::sample(grid, [&](const std::array<double, 2>& x) {
                return 1.0 + m_amp * (std::cos(tau * x[0] - phase) * 0.7 + 0.3 * std::sin(tau * (x[0] + x[1])));
            })};
    return s;
}

/// Field with i.i.d. uniform [-1, 1] values.
inline Field random_field(const GridSpec& grid, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Field f(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        f[k] = U(rng);
    }
    return f;
}

inline double sup_distance(const State& a, const State& b)
{
    return std::max((a.u - b.u).sup_norm(), (a.m - b.m).sup_norm());
}

} // namespace mfg::testing
