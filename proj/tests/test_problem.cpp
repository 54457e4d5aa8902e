#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

#include "mfg/errors.hpp"
#include "mfg/problem.hpp"
#include "mfg/verification.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mfg;
using namespace mfg::testing;

namespace {
constexpr double tau = 2.0 * std::numbers::pi;
}

TEST_CASE("validation")
{
    ProblemSpec spec = suite_problem(0.5, 1.0);
    CHECK_NOTHROW(spec.validate());

    spec.alpha = 1.2;
    try {
        spec.validate();
        FAIL("alpha = 1.2 accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidConfig);
        CHECK(std::string(e.what()).find("(A1)") != std::string::npos);
    }
    CHECK_NOTHROW(spec.validate(true));
    spec.alpha = 2.0;
    CHECK_THROWS_AS(spec.validate(true), Error);

    ProblemSpec neg = suite_problem(0.5, -1.0);
    CHECK_THROWS_AS(neg.validate(), Error);
    ProblemSpec bad_eps = suite_problem(0.5, 1.0);
    bad_eps.epsilon_monotone = -0.1;
    CHECK_THROWS_AS(bad_eps.validate(), Error);
}

TEST_CASE("potential catalog is nondecreasing in m")
{
    for (PotentialForm form : {PotentialForm::Separable, PotentialForm::Saturating, PotentialForm::XOnly}) {
        PotentialSpec p;
        p.form = form;
        p.kappa = 0.7;
        p.a.cos = {0.5};
        p.a.sin = {0.2};
        for (double m : {1e-6, 0.1, 1.0, 10.0, 1e6}) {
            CHECK(p.dm(m) >= 0.0);
            CHECK(std::abs(p.value({0.3, 0.0}, m)) <= p.sup_bound() + 1e-15);
        }
        CHECK(p.strictly_increasing() == (form != PotentialForm::XOnly));
        CHECK(potential_form_from_string(to_string(form)) == form);
    }
    CHECK_THROWS_AS(potential_form_from_string("quadratic"), Error);
}

TEST_CASE("exact homotopy start")
{
    for (ProblemSpec spec : {suite_problem(0.0, 1.0), suite_problem(0.9, 0.5), planar_problem(0.5, 12)}) {
        spec.epsilon_monotone = 0.3;
        const State s = exact_initial(spec);
        const Residual r = residual(spec, 0.0, s);
        CHECK(r.sup_norm() == 0.0);
        CHECK(integral(s.m) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(s.u.sup_norm() == doctest::Approx(std::numbers::pi / 4.0));
        CHECK(s.u.sup_norm() <= spec.potential_sup_bound(0.0));
    }
}

TEST_CASE("constant solution of a constant problem")
{
    ProblemSpec spec = suite_problem(0.5, 0.0);
    spec.potential.form = PotentialForm::XOnly;
    spec.potential.a.cos = {0.0};
    spec.potential.a.constant = 0.37;
    spec.drift = DriftSpec::zero(1);
    const State s{Field(spec.grid, 0.37), Field(spec.grid, 1.0)};
    CHECK(residual(spec, 1.0, s).sup_norm() <= 1e-15);
}

TEST_CASE("residual refuses non-positive densities")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0);
    State s = exact_initial(spec);
    s.m[3] = 0.0;
    try {
        (void)residual(spec, 0.5, s);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonPositiveDensity);
    }
}

TEST_CASE("discrete mass identity")
{
    std::mt19937_64 rng(5);
    for (ProblemSpec spec : {suite_problem(0.3, 1.0), planar_problem(0.6, 12)}) {
        for (double lambda : {0.0, 0.4, 1.0}) {
            State s{random_field(spec.grid, rng), random_field(spec.grid, rng)};
            s.m = s.m.map([](double v) { return 1.2 + 0.5 * v; });
            const Residual r = residual(spec, lambda, s);
            CHECK(integral(s.m) - 1.0 == doctest::Approx(integral(r.fp)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("residual is Lipschitz in lambda")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0);
    const State s = trig_state(spec.grid, 0.3, 0.4, 0.2);
    const Residual r0 = residual(spec, 0.2, s);
    const Residual r1 = residual(spec, 0.7, s);
    // |d/dlambda F| <= |b|_inf |Du|_inf + |V|_inf + pi/2 (first row), |div(bm)|_inf (second row)
    const double du = sup_norm(gradient(s.u));
    const double bm = divergence(spec.sample_drift().scaled(s.m)).sup_norm();
    const double L = std::max(spec.drift.sup_bound() * du + spec.potential.sup_bound() + std::numbers::pi / 2.0, bm);
    CHECK(std::max((r1.hjb - r0.hjb).sup_norm(), (r1.fp - r0.fp).sup_norm()) <= L * 0.5 + 1e-12);
}

TEST_CASE("manufactured pair has an O(h^2) residual")
{
    ManufacturedCase mms{suite_problem(0.5, 1.0, 64), {}, {}};
    mms.u_exact = {0.0, {TrigMode{{1, 0}, 0.0, 0.1}}};
    mms.m_exact = {1.0, {TrigMode{{1, 0}, 0.5, 0.0}}};
    std::vector<double> res;
    for (int n : {64, 128}) {
        const GridSpec g = GridSpec::make(1, n);
        const ProblemSpec aug = augmented_spec(mms, g);
        res.push_back(residual(aug, 1.0, State{mms.u_exact.sample(g), mms.m_exact.sample(g)}).sup_norm());
    }
    const double h = 1.0 / 64.0;
    CHECK(res[0] <= 200.0 * h * h);
    CHECK(std::log2(res[0] / res[1]) >= 1.9);
}

TEST_CASE("drift field")
{
    const ProblemSpec spec = suite_problem(0.5, 1.0, 24);
    const Field zero_u(spec.grid, 2.0);
    const Field m = Field::sample(spec.grid, [](const auto& x) { return 1.0 + 0.5 * std::cos(tau * x[0]); });
    CHECK(sup_norm(drift_field(spec, State{zero_u, m})) == 0.0);

    const Field u = Field::sample(spec.grid, [](const auto& x) { return 0.1 * std::sin(tau * x[0]); });
    const VectorField g1 = drift_field(spec, State{u, Field(spec.grid, 1.0)});
    CHECK((g1[0] - gradient(u)[0]).sup_norm() == 0.0);

    // pointwise oracle for the continuous feedback 0.2 pi cos(2 pi x) / sqrt(1 + 0.5 cos(2 pi x))
    const VectorField g = drift_field(spec, State{u, m});
    const double h = spec.grid.h();
    const double fd_scale = std::sin(tau * h) / (tau * h); // centered difference of sin(2 pi x)
    CHECK(g[0][0] == doctest::Approx(0.51301993206474563822 * fd_scale).epsilon(1e-13));
    CHECK(g[0][3] == doctest::Approx(0.38188022957900351469 * fd_scale).epsilon(1e-13));
    CHECK(g[0][8] == doctest::Approx(-0.36275987284684357012 * fd_scale).epsilon(1e-13));
}

TEST_CASE("drift coefficients")
{
    // divergence is analytic; the discrete one agrees to O(h^2)
    std::vector<double> err;
    for (int n : {16, 32}) {
        const ProblemSpec spec = planar_problem(0.5, n);
        const VectorField b = spec.sample_drift();
        const Field exact = Field::sample(spec.grid, [&](const auto& x) { return spec.drift.divergence(x); });
        err.push_back((divergence(b) - exact).sup_norm());
        CHECK(sup_norm(b) <= spec.drift.sup_bound() + 1e-15);
    }
    CHECK(err[0] / err[1] >= 3.5);
    const ProblemSpec spec = planar_problem(0.5, 16);
    CHECK(spec.drift.scaled(0.0).is_zero());
}
