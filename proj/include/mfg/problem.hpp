#pragma once

// Stationary congestion MFG on the unit torus,
//
//   u - Lap u + |Du|^2 / (2 m^alpha) + b.Du = V(x, m)
//   m - Lap m - div(m^(1-alpha) Du) - div(m b) = 1,
//
// embedded in the homotopy
//
//   F(lambda, u, m) = ( u - Lap u + |Du|^2/(2m^alpha) + lambda b.Du - W_lambda(x, m),
//                       m - Lap m - div(m^(1-alpha) Du) - lambda div(b m) - 1 )
//
// with W_lambda = lambda (V + eps arctan m) + (1 - lambda) arctan m. At lambda = 0
// the pair (pi/4, 1) solves F = 0 whatever alpha, V, b and eps are.

#include "mfg/torus_grid.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfg {

/// c + sum_i cos_i cos(2 pi x_i) + sin_i sin(2 pi x_i), one harmonic per axis.
struct AxisHarmonics {
    double constant = 0.0;
    std::vector<double> cos; // length dim
    std::vector<double> sin; // length dim

    [[nodiscard]] double operator()(const std::array<double, 2>& x) const;
    [[nodiscard]] double sup_bound() const;
};

enum class PotentialForm {
    Separable,  // a(x) + kappa * arctan(m)
    Saturating, // a(x) + kappa * m / (1 + m)
    XOnly,      // a(x)
};

std::string to_string(PotentialForm form);
PotentialForm potential_form_from_string(const std::string& name);

struct PotentialSpec {
    PotentialForm form = PotentialForm::Separable;
    double kappa = 1.0;
    AxisHarmonics a;

    [[nodiscard]] double value(const std::array<double, 2>& x, double m) const;
    [[nodiscard]] double dm(double m) const;
    /// Certified sup |V| over the torus and m > 0.
    [[nodiscard]] double sup_bound() const;
    [[nodiscard]] bool strictly_increasing() const;
};

/// b_i(x) = offset_i + sum_j cos_ij cos(2 pi x_j) + sin_ij sin(2 pi x_j).
struct DriftSpec {
    std::vector<double> offset;            // length dim
    std::vector<std::vector<double>> cos;  // dim x dim
    std::vector<std::vector<double>> sin;  // dim x dim

    static DriftSpec zero(int dim);

    [[nodiscard]] double component(int i, const std::array<double, 2>& x) const;
    [[nodiscard]] double divergence(const std::array<double, 2>& x) const;
    /// Certified sup |b| (Euclidean).
    [[nodiscard]] double sup_bound() const;
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] DriftSpec scaled(double s) const;
};

/// Right-hand sides appended to the two equations (manufactured solutions).
struct Sources {
    Field hjb;
    Field fp;
};

struct ProblemSpec {
    GridSpec grid;
    double alpha = 0.5;
    PotentialSpec potential;
    DriftSpec drift;
    double epsilon_monotone = 0.0;
    std::optional<Sources> sources;

    /// Throws InvalidConfig when the grid, alpha, coefficient shapes or
    /// sources are inconsistent. Alpha outside [0, 1) is rejected unless
    /// `allow_alpha_up_to_two` is set (used for coercivity experiments).
    void validate(bool allow_alpha_up_to_two = false) const;

    /// Homotopy potential W_lambda(x, m) and its m-derivative.
    [[nodiscard]] double homotopy_potential(double lambda, const std::array<double, 2>& x, double m) const;
    [[nodiscard]] double homotopy_potential_dm(double lambda, double m) const;

    /// Certified sup |W_lambda|: |V|_inf + eps pi/2 at lambda = 1,
    /// max(|V|_inf, pi/2) + eps pi/2 otherwise.
    [[nodiscard]] double potential_sup_bound(double lambda) const;

    [[nodiscard]] Field sample_drift_component(int i) const;
    [[nodiscard]] VectorField sample_drift() const;
};

struct State {
    Field u;
    Field m;
};

struct Residual {
    Field hjb; // first component of F
    Field fp;  // second component of F

    [[nodiscard]] double sup_norm() const;
};

/// Throws NonPositiveDensity if min(m) <= 0.
void require_positive_density(const Field& m);

/// F(lambda, u, m) minus any appended sources.
Residual residual(const ProblemSpec& spec, double lambda, const State& s);

/// The lambda = 0 solution (pi/4, 1).
State exact_initial(const ProblemSpec& spec);

/// g = Du / m^alpha.
VectorField drift_field(const ProblemSpec& spec, const State& s);

} // namespace mfg
