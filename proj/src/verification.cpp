#include "mfg/verification.hpp"

#include "mfg/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mfg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double roundoff_error = 1e-12;

double phase(const TrigMode& mode, const std::array<double, 2>& x)
{
    return two_pi * (mode.k[0] * x[0] + mode.k[1] * x[1]);
}

} // namespace

double TrigSeries::value(const std::array<double, 2>& x) const
{
    double v = constant;
    for (const auto& mode : modes) {
        const double p = phase(mode, x);
        v += mode.cos_coef * std::cos(p) + mode.sin_coef * std::sin(p);
    }
    return v;
}

std::array<double, 2> TrigSeries::gradient(const std::array<double, 2>& x) const
{
    std::array<double, 2> g{0.0, 0.0};
    for (const auto& mode : modes) {
        const double p = phase(mode, x);
        const double dphase = -mode.cos_coef * std::sin(p) + mode.sin_coef * std::cos(p);
        g[0] += two_pi * mode.k[0] * dphase;
        g[1] += two_pi * mode.k[1] * dphase;
    }
    return g;
}

double TrigSeries::laplacian(const std::array<double, 2>& x) const
{
    double v = 0.0;
    for (const auto& mode : modes) {
        const double p = phase(mode, x);
        const double k2 = static_cast<double>(mode.k[0] * mode.k[0] + mode.k[1] * mode.k[1]);
        v -= two_pi * two_pi * k2 * (mode.cos_coef * std::cos(p) + mode.sin_coef * std::sin(p));
    }
    return v;
}

double TrigSeries::lower_bound() const
{
    double s = constant;
    for (const auto& mode : modes) {
        s -= std::abs(mode.cos_coef) + std::abs(mode.sin_coef);
    }
    return s;
}

Field TrigSeries::sample(const GridSpec& grid) const
{
    return Field::sample(grid, [this](const std::array<double, 2>& x) { return value(x); });
}

std::array<double, 2> continuous_operator(const ProblemSpec& spec, const TrigSeries& u, const TrigSeries& m,
                                          const std::array<double, 2>& x)
{
    const double alpha = spec.alpha;
    const int dim = spec.grid.dim;
    const double uv = u.value(x);
    const double mv = m.value(x);
    const auto du = u.gradient(x);
    const auto dm = m.gradient(x);
    const double lap_u = u.laplacian(x);
    const double lap_m = m.laplacian(x);

    double du_sq = 0.0;
    double du_dm = 0.0;
    double b_du = 0.0;
    double b_dm = 0.0;
    for (int i = 0; i < dim; ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const double bi = spec.drift.component(i, x);
        du_sq += du[ii] * du[ii];
        du_dm += du[ii] * dm[ii];
        b_du += bi * du[ii];
        b_dm += bi * dm[ii];
    }

    const double hjb = uv - lap_u + du_sq / (2.0 * std::pow(mv, alpha)) + b_du - spec.homotopy_potential(1.0, x, mv);
    // div(m^{1-a} Du) = (1-a) m^{-a} Dm.Du + m^{1-a} Lap u ;  div(m b) = m div b + b.Dm
    const double flux_div = (1.0 - alpha) * std::pow(mv, -alpha) * du_dm + std::pow(mv, 1.0 - alpha) * lap_u;
    const double drift_div = mv * spec.drift.divergence(x) + b_dm;
    const double fp = mv - lap_m - flux_div - drift_div - 1.0;
    return {hjb, fp};
}

Sources mms_source(const ManufacturedCase& mms, const GridSpec& grid)
{
    if (!(mms.m_exact.lower_bound() > 0.0)) {
        std::ostringstream msg;
        msg << "manufactured density is not bounded away from zero (constant minus amplitudes = "
            << mms.m_exact.lower_bound() << ")";
        throw Error(ErrorKind::NotPositive, msg.str());
    }
    ProblemSpec spec = mms.spec;
    spec.grid = grid;
    Sources out{Field(grid), Field(grid)};
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto s = continuous_operator(spec, mms.u_exact, mms.m_exact, grid.point(k));
        out.hjb[k] = s[0];
        out.fp[k] = s[1];
    }
    return out;
}

ProblemSpec augmented_spec(const ManufacturedCase& mms, const GridSpec& grid)
{
    ProblemSpec spec = mms.spec;
    spec.grid = grid;
    spec.sources = mms_source(mms, grid);
    return spec;
}

std::vector<RateRow> convergence_study(const ManufacturedCase& mms, const std::vector<int>& ns,
                                       const NewtonOptions& newton, const ContinuationOptions& steps)
{
    if (ns.size() < 3) {
        throw Error(ErrorKind::InvalidArgument, "convergence study needs at least 3 grids");
    }
    for (std::size_t i = 1; i < ns.size(); ++i) {
        if (ns[i] != 2 * ns[i - 1]) {
            throw Error(ErrorKind::InvalidArgument, "each grid must double the previous one");
        }
    }

    std::vector<RateRow> rows;
    for (int n : ns) {
        const GridSpec grid = GridSpec::make(mms.spec.grid.dim, n);
        const ProblemSpec spec = augmented_spec(mms, grid);
        spec.validate();

        State solution;
        int iterations = 0;
        try {
            NewtonResult direct = newton_solve(spec, 1.0, exact_initial(spec), newton);
            solution = std::move(direct.state);
            iterations = direct.report.iterations;
        } catch (const Error& e) {
            spdlog::info("mms n={}: direct Newton failed ({}), falling back to continuation", n, e.what());
            ContinuationResult run = continuation_solve(spec, newton, steps);
            if (!run.trace.success) {
                throw Error(ErrorKind::ContinuationStalled, "mms solve failed at n = " + std::to_string(n));
            }
            solution = std::move(run.state);
            for (const auto& s : run.trace.steps) {
                iterations += s.newton.iterations;
            }
        }

        RateRow row;
        row.n = n;
        row.error_u = (solution.u - mms.u_exact.sample(grid)).sup_norm();
        row.error_m = (solution.m - mms.m_exact.sample(grid)).sup_norm();
        row.exact = row.error_u < roundoff_error && row.error_m < roundoff_error;
        row.rate_u = std::numeric_limits<double>::quiet_NaN();
        row.rate_m = std::numeric_limits<double>::quiet_NaN();
        row.newton_iterations = iterations;
        if (!rows.empty() && !row.exact) {
            const RateRow& prev = rows.back();
            row.rate_u = std::log2(prev.error_u / row.error_u);
            row.rate_m = std::log2(prev.error_m / row.error_m);
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace mfg
