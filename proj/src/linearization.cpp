#include "mfg/linearization.hpp"

#include "mfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>

namespace mfg {

Eigen::VectorXd stack(const Field& first, const Field& second)
{
    const auto N = static_cast<Eigen::Index>(first.size());
    Eigen::VectorXd x(2 * N);
    for (Eigen::Index i = 0; i < N; ++i) {
        x[i] = first[static_cast<std::size_t>(i)];
        x[N + i] = second[static_cast<std::size_t>(i)];
    }
    return x;
}

Eigen::VectorXd stack(const State& s)
{
    return stack(s.u, s.m);
}

Eigen::VectorXd stack(const Perturbation& w)
{
    return stack(w.v, w.f);
}

Perturbation unstack(const GridSpec& grid, const Eigen::VectorXd& x)
{
    const auto N = static_cast<Eigen::Index>(grid.size());
    if (x.size() != 2 * N) {
        throw Error(ErrorKind::InvalidArgument, "stacked vector length does not match grid");
    }
    Perturbation w{Field(grid), Field(grid)};
    for (Eigen::Index i = 0; i < N; ++i) {
        w.v[static_cast<std::size_t>(i)] = x[i];
        w.f[static_cast<std::size_t>(i)] = x[N + i];
    }
    return w;
}

Perturbation LinearizedSystem::apply(const Perturbation& w) const
{
    const Eigen::VectorXd y = matrix * stack(w);
    return unstack(grid(), y);
}

namespace {

// Places the four N x N blocks into one 2N x 2N matrix.
SparseMatrix block_matrix(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c, const SparseMatrix& d)
{
    const Eigen::Index N = a.rows();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(a.nonZeros() + b.nonZeros() + c.nonZeros() + d.nonZeros()));
    auto push = [&t](const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0) {
        for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
            for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
                t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
            }
        }
    };
    push(a, 0, 0);
    push(b, 0, N);
    push(c, N, 0);
    push(d, N, N);
    SparseMatrix out(2 * N, 2 * N);
    out.setFromTriplets(t.begin(), t.end());
    out.prune(0.0);
    return out;
}

} // namespace

LinearizedSystem assemble_jacobian(const ProblemSpec& spec, double lambda, const State& s)
{
    require_positive_density(s.m);
    const GridSpec& g = spec.grid;
    const double alpha = spec.alpha;

    const VectorField du = gradient(s.u);
    const Field du_sq = norm_squared(du);
    const Field m_neg_alpha = s.m.map([alpha](double m) { return std::pow(m, -alpha); });
    const Field m_neg_alpha_1 = s.m.map([alpha](double m) { return std::pow(m, -alpha - 1.0); });
    const Field m_flux = s.m.map([alpha](double m) { return std::pow(m, 1.0 - alpha); });

    const SparseMatrix I = identity_matrix(g);
    const SparseMatrix L = laplacian_matrix(g);
    std::vector<SparseMatrix> D;
    for (int axis = 0; axis < g.dim; ++axis) {
        D.push_back(partial_matrix(g, axis));
    }

    // Zeroth-order coefficient of f in the first row.
    Field c_vf(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        c_vf[k] = -0.5 * alpha * du_sq[k] * m_neg_alpha_1[k] - spec.homotopy_potential_dm(lambda, s.m[k]);
    }

    SparseMatrix A_vv = I - L;
    SparseMatrix A_fv(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
    SparseMatrix A_ff = I - L;
    const bool with_drift = lambda != 0.0 && !spec.drift.is_zero();
    for (int axis = 0; axis < g.dim; ++axis) {
        const auto& Di = D[static_cast<std::size_t>(axis)];
        A_vv += SparseMatrix(diagonal_matrix(du[axis] * m_neg_alpha) * Di);
        A_fv -= SparseMatrix(Di * diagonal_matrix(m_flux) * Di);
        A_ff -= (1.0 - alpha) * SparseMatrix(Di * diagonal_matrix(m_neg_alpha * du[axis]));
        if (with_drift) {
            const Field bi = spec.sample_drift_component(axis);
            A_vv += lambda * SparseMatrix(diagonal_matrix(bi) * Di);
            A_ff -= lambda * SparseMatrix(Di * diagonal_matrix(bi));
        }
    }
    const SparseMatrix A_vf = diagonal_matrix(c_vf);

    const Residual r = residual(spec, lambda, s);
    LinearizedSystem sys;
    sys.matrix = block_matrix(A_vv, A_vf, A_fv, A_ff);
    sys.rhs = -stack(r.hjb, r.fp);
    sys.base_state = s;
    sys.lambda = lambda;
    return sys;
}

Perturbation apply_P(const Perturbation& w)
{
    return Perturbation{w.f, -w.v};
}

double bilinear_form(const LinearizedSystem& sys, const Perturbation& w1, const Perturbation& w2)
{
    const Eigen::VectorXd jw1 = sys.matrix * stack(w1);
    const Eigen::VectorXd pw2 = stack(apply_P(w2));
    return sys.grid().cell_volume() * jw1.dot(pw2);
}

CoercivityReport coercivity_check(const LinearizedSystem& sys, int n_samples, std::uint64_t seed)
{
    const Field& m = sys.base_state.m;
    if (!(m.min() > 0.0)) {
        throw Error(ErrorKind::DegenerateState, "coercivity needs a strictly positive base density");
    }
    const GridSpec& g = sys.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    CoercivityReport report;
    report.max_ratio = -std::numeric_limits<double>::infinity();
    report.min_ratio = std::numeric_limits<double>::infinity();
    for (int sample = 0; sample < n_samples; ++sample) {
        Perturbation w{Field(g), Field(g)};
        for (std::size_t k = 0; k < g.size(); ++k) {
            w.v[k] = normal(rng);
            w.f[k] = normal(rng);
        }
        w.v += -grid_sum(w.v) / static_cast<double>(g.size());

        const double b = bilinear_form(sys, w, w);
        const double denom = integral(norm_squared(gradient(w.v))) + integral(w.f * w.f);
        const double ratio = b / denom;
        report.max_ratio = std::max(report.max_ratio, ratio);
        report.min_ratio = std::min(report.min_ratio, ratio);
        if (!(b < 0.0)) {
            ++report.non_negative_samples;
        }
        ++report.samples;
    }
    report.estimated_constant = -report.max_ratio;
    return report;
}

FiniteDifferenceCheck finite_difference_check(const ProblemSpec& spec, double lambda, const State& s,
                                              const LinearizedSystem& sys, int directions, std::uint64_t seed,
                                              double eps)
{
    const GridSpec& g = spec.grid;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);

    FiniteDifferenceCheck out;
    for (int d = 0; d < directions; ++d) {
        Perturbation w{Field(g), Field(g)};
        for (std::size_t k = 0; k < g.size(); ++k) {
            w.v[k] = uniform(rng);
            w.f[k] = uniform(rng);
        }
        // Keep m + eps f positive for any admissible base state.
        const double scale_f = std::min(1.0, 0.5 * s.m.min() / eps);
        w.f *= scale_f;

        const Residual plus = residual(spec, lambda, State{s.u + eps * w.v, s.m + eps * w.f});
        const Residual minus = residual(spec, lambda, State{s.u - eps * w.v, s.m - eps * w.f});
        const Eigen::VectorXd fd = (stack(plus.hjb, plus.fp) - stack(minus.hjb, minus.fp)) / (2.0 * eps);
        const Eigen::VectorXd jw = sys.matrix * stack(w);
        const double rel = (jw - fd).lpNorm<Eigen::Infinity>() / jw.lpNorm<Eigen::Infinity>();
        out.relative_errors.push_back(rel);
        out.max_relative_error = std::max(out.max_relative_error, rel);
        ++out.directions;
    }
    return out;
}

void write_matrix_market(const SparseMatrix& matrix, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    }
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
        for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

} // namespace mfg
