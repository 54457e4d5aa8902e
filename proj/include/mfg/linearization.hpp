#pragma once

// Discrete Frechet derivative of F(lambda, ., .) at a state, stored as one
// 2N x 2N sparse matrix acting on the stacked perturbation (v, f):
//
//   [ A_vv  A_vf ] [v]
//   [ A_fv  A_ff ] [f]
//
// The blocks are built from the same stencil matrices that `residual` uses,
// so the matrix is the exact Jacobian of the discrete residual.

#include "mfg/problem.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mfg {

/// Perturbation direction w = (v, f) paired with a State.
struct Perturbation {
    Field v;
    Field f;
};

Eigen::VectorXd stack(const Field& first, const Field& second);
Eigen::VectorXd stack(const State& s);
Eigen::VectorXd stack(const Perturbation& w);
Perturbation unstack(const GridSpec& grid, const Eigen::VectorXd& x);

struct LinearizedSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs; // -F(lambda, base_state)
    State base_state;
    double lambda = 0.0;

    [[nodiscard]] const GridSpec& grid() const noexcept { return base_state.u.grid(); }
    [[nodiscard]] Perturbation apply(const Perturbation& w) const;
};

LinearizedSystem assemble_jacobian(const ProblemSpec& spec, double lambda, const State& s);

/// (v, f) -> (f, -v).
Perturbation apply_P(const Perturbation& w);

/// B[w1, w2] = h^dim <J w1, P w2>.
double bilinear_form(const LinearizedSystem& sys, const Perturbation& w1, const Perturbation& w2);

struct CoercivityReport {
    int samples = 0;
    /// Largest (least negative) B[w,w] / (|Dv|^2 + |f|^2) over the samples.
    double max_ratio = 0.0;
    double min_ratio = 0.0;
    /// Empirical coercivity constant, -max_ratio.
    double estimated_constant = 0.0;
    int non_negative_samples = 0;
    [[nodiscard]] bool passed() const noexcept { return samples > 0 && non_negative_samples == 0; }
};

/// Samples random directions with zero-mean v and checks B[w,w] < 0.
/// Throws DegenerateState if the base density is not strictly positive.
CoercivityReport coercivity_check(const LinearizedSystem& sys, int n_samples, std::uint64_t seed);

struct FiniteDifferenceCheck {
    int directions = 0;
    double max_relative_error = 0.0; // max over directions of |Jw - FD|_inf / |Jw|_inf
    std::vector<double> relative_errors;
};

/// Compares J w against the central difference (F(s + eps w) - F(s - eps w)) / (2 eps)
/// of the residual for random directions w. Only `residual` is used on the
/// finite-difference side.
FiniteDifferenceCheck finite_difference_check(const ProblemSpec& spec, double lambda, const State& s,
                                              const LinearizedSystem& sys, int directions, std::uint64_t seed,
                                              double eps = 1e-6);

/// Writes the matrix in Matrix Market coordinate format.
void write_matrix_market(const SparseMatrix& matrix, const std::string& path);

} // namespace mfg
