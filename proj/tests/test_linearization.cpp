#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "mfg/errors.hpp"
#include "mfg/linearization.hpp"
#include "mfg/solver.hpp"

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace mfg;
using namespace mfg::testing;

namespace {

double inner(const Perturbation& a, const Perturbation& b)
{
    return grid_sum(a.v * b.v) + grid_sum(a.f * b.f);
}

Eigen::MatrixXd block(const SparseMatrix& J, Eigen::Index r, Eigen::Index c, Eigen::Index N)
{
    return Eigen::MatrixXd(J).block(r * N, c * N, N, N);
}

} // namespace

TEST_CASE("block structure at the homotopy start")
{
    for (double alpha : {0.0, 0.5, 0.9}) {
        const ProblemSpec spec = suite_problem(alpha, 1.0, 16);
        const LinearizedSystem sys = assemble_jacobian(spec, 0.0, exact_initial(spec));
        const auto N = static_cast<Eigen::Index>(spec.grid.size());
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(N, N);
        const Eigen::MatrixXd L(laplacian_matrix(spec.grid));
        const Eigen::MatrixXd D(partial_matrix(spec.grid, 0));

        CHECK((block(sys.matrix, 0, 0, N) - (I - L)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((block(sys.matrix, 0, 1, N) + 0.5 * I).cwiseAbs().maxCoeff() <= 1e-15);
        CHECK((block(sys.matrix, 1, 0, N) + D * D).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((block(sys.matrix, 1, 1, N) - (I - L)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(sys.rhs.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("constant v direction")
{
    const ProblemSpec spec = planar_problem(0.5, 8);
    const LinearizedSystem sys = assemble_jacobian(spec, 0.0, exact_initial(spec));
    const Perturbation w{Field(spec.grid, 2.5), Field(spec.grid, 0.0)};
    const Perturbation Jw = sys.apply(w);
    CHECK((Jw.v - Field(spec.grid, 2.5)).sup_norm() <= 1e-13);
    CHECK(Jw.f.sup_norm() <= 1e-13);
}

TEST_CASE("finite-difference agreement on general states")
{
    for (ProblemSpec spec : {suite_problem(0.5, 1.0, 32), planar_problem(0.75, 10)}) {
        spec.epsilon_monotone = 0.2;
        for (double lambda : {0.0, 0.3, 1.0}) {
            const State s = trig_state(spec.grid, 0.4, 0.5, 0.9);
            const LinearizedSystem sys = assemble_jacobian(spec, lambda, s);
            const FiniteDifferenceCheck fd = finite_difference_check(spec, lambda, s, sys, 20, 3);
            CHECK(fd.directions == 20);
            CHECK(fd.max_relative_error <= 1e-6);
        }
    }
}

TEST_CASE("finite-difference check catches a wrong sign")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 16);
    const State s = trig_state(spec.grid, 0.4, 0.5, 0.3);
    LinearizedSystem sys = assemble_jacobian(spec, 1.0, s);
    const auto N = static_cast<Eigen::Index>(spec.grid.size());
    sys.matrix.coeffRef(0, N) *= -1.0;
    CHECK(finite_difference_check(spec, 1.0, s, sys, 20, 3).max_relative_error > 1e-3);
}

TEST_CASE("P is a quarter rotation")
{
    std::mt19937_64 rng(1);
    const GridSpec g = GridSpec::make(1, 16);
    const Perturbation w{random_field(g, rng), random_field(g, rng)};
    const Perturbation pw = apply_P(w);
    CHECK((pw.v - w.f).sup_norm() == 0.0);
    CHECK((pw.f + w.v).sup_norm() == 0.0);
    const Perturbation ppw = apply_P(pw);
    CHECK((ppw.v + w.v).sup_norm() == 0.0);
    CHECK((ppw.f + w.f).sup_norm() == 0.0);
    CHECK(std::abs(inner(pw, w)) <= 1e-14);

    const Perturbation one = apply_P(Perturbation{Field(g, 1.0), Field(g, 0.0)});
    CHECK(one.v.sup_norm() == 0.0);
    CHECK((one.f + Field(g, 1.0)).sup_norm() == 0.0);
}

TEST_CASE("bilinear form")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 32);
    const LinearizedSystem init = assemble_jacobian(spec, 0.0, exact_initial(spec));
    const GridSpec& g = spec.grid;
    for (double mu : {-2.0, 0.5, 3.0}) {
        const Perturbation a{Field(g, mu), Field(g, 0.0)};
        const Perturbation b{Field(g, 0.0), Field(g, mu)};
        CHECK(bilinear_form(init, a, b) == doctest::Approx(mu * mu).epsilon(1e-13));
    }

    const Perturbation kernel{Field(g, 1.0), Field(g, 0.0)};
    CHECK(std::abs(bilinear_form(init, kernel, kernel)) <= 1e-14);

    std::mt19937_64 rng(8);
    const State s = trig_state(g, 0.3, 0.4, 0.1);
    const LinearizedSystem sys = assemble_jacobian(spec, 0.7, s);
    const Perturbation w1{random_field(g, rng), random_field(g, rng)};
    const Perturbation w2{random_field(g, rng), random_field(g, rng)};
    const Perturbation w3{random_field(g, rng), random_field(g, rng)};
    const Perturbation comb{2.0 * w1.v + (-3.0) * w2.v, 2.0 * w1.f + (-3.0) * w2.f};
    const double lhs = bilinear_form(sys, comb, w3);
    const double rhs = 2.0 * bilinear_form(sys, w1, w3) - 3.0 * bilinear_form(sys, w2, w3);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("continuity bound of the bilinear form")
{
    // Summation by parts turns every term of B into a coefficient times a
    // pairing of (v, f, forward differences) of w1 and w2; the compact
    // Laplacian pairs as D+ against D+, and centered differences are
    // dominated by forward ones in L2. C is the sum of the coefficient norms.
    std::mt19937_64 rng(4);
    const ProblemSpec spec = suite_problem(0.5, 1.0, 32);
    const double alpha = spec.alpha;
    const State s = trig_state(spec.grid, 0.3, 0.4, 0.5);
    const LinearizedSystem sys = assemble_jacobian(spec, 1.0, s);
    const Field du = gradient(s.u)[0];
    const double b = spec.drift.sup_bound();
    const double g = (du * s.m.map([&](double m) { return std::pow(m, -alpha); })).sup_norm();
    const double c = (du * du * s.m.map([&](double m) { return 0.5 * alpha * std::pow(m, -alpha - 1.0); })
                      + s.m.map([&](double m) { return spec.homotopy_potential_dm(1.0, m); }))
                         .sup_norm();
    const double flux = s.m.map([&](double m) { return std::pow(m, 1.0 - alpha); }).sup_norm();
    const double C = 4.0 + g + 2.0 * b + c + flux + (1.0 - alpha) * g;

    auto forward = [&](const Field& f) {
        Field d(spec.grid);
        for (std::size_t k = 0; k < spec.grid.size(); ++k) {
            d[k] = (f[spec.grid.neighbor(k, 0, 1)] - f[k]) / spec.grid.h();
        }
        return d;
    };
    auto h1 = [&](const Perturbation& w) {
        const Field dv = forward(w.v);
        const Field df = forward(w.f);
        return std::sqrt(integral(w.v * w.v) + integral(dv * dv) + integral(w.f * w.f) + integral(df * df));
    };
    double sharpest = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Perturbation w1{random_field(spec.grid, rng), random_field(spec.grid, rng)};
        const Perturbation w2{random_field(spec.grid, rng), random_field(spec.grid, rng)};
        const double ratio = std::abs(bilinear_form(sys, w1, w2)) / (h1(w1) * h1(w2));
        sharpest = std::max(sharpest, ratio);
        CHECK(ratio <= C);
    }
    CHECK(sharpest > 0.0);
}

TEST_CASE("coercivity at the homotopy start")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 32);
    const LinearizedSystem init = assemble_jacobian(spec, 0.0, exact_initial(spec));
    const CoercivityReport rep = coercivity_check(init, 200, 2);
    CHECK(rep.passed());
    CHECK(rep.samples == 200);
    CHECK(rep.max_ratio <= -0.5 + 1e-8);
    CHECK(rep.min_ratio >= -1.0 - 1e-8);
    CHECK(rep.estimated_constant == doctest::Approx(-rep.max_ratio));

    std::mt19937_64 rng(6);
    for (int i = 0; i < 10; ++i) {
        const Field f = random_field(spec.grid, rng);
        const Perturbation w{Field(spec.grid, 0.0), f};
        CHECK(bilinear_form(init, w, w) / integral(f * f) == doctest::Approx(-0.5).epsilon(1e-12));
    }
}

TEST_CASE("coercivity at general positive states, including alpha >= 1")
{
    for (double alpha : {0.0, 0.5, 0.9, 1.5}) {
        const ProblemSpec spec = suite_problem(alpha, 1.0, 32);
        const State s = trig_state(spec.grid, 0.05, 0.2, 0.4);
        const CoercivityReport rep = coercivity_check(assemble_jacobian(spec, 1.0, s), 200, 13);
        CHECK(rep.passed());
    }
    const ProblemSpec spec = suite_problem(0.5, 1.0, 16);
    State s = exact_initial(spec);
    const LinearizedSystem sys = assemble_jacobian(spec, 0.0, s);
    LinearizedSystem broken = sys;
    broken.base_state.m[2] = -1.0;
    CHECK_THROWS_AS(coercivity_check(broken, 10, 1), Error);
}

TEST_CASE("coercivity is deterministic in the seed")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 32);
    const LinearizedSystem sys = assemble_jacobian(spec, 1.0, trig_state(spec.grid, 0.2, 0.3, 0.0));
    CHECK(coercivity_check(sys, 50, 77).max_ratio == coercivity_check(sys, 50, 77).max_ratio);
}

TEST_CASE("matrix market output")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 8);
    const LinearizedSystem sys = assemble_jacobian(spec, 0.0, exact_initial(spec));
    const auto path = std::filesystem::temp_directory_path() / "mfg_test_jacobian.mtx";
    write_matrix_market(sys.matrix, path.string());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
    std::string line;
    while (std::getline(in, line) && line.starts_with("%")) {
    }
    std::istringstream dims(line);
    long rows = 0, cols = 0, nnz = 0;
    dims >> rows >> cols >> nnz;
    CHECK(rows == 16);
    CHECK(cols == 16);
    CHECK(nnz == sys.matrix.nonZeros());
}
