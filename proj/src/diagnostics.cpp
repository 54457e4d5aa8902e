#include "mfg/diagnostics.hpp"

#include "mfg/errors.hpp"

#include <cmath>
#include <sstream>

namespace mfg {

namespace {

void require_exponent(double alpha, double r)
{
    if (!(r > alpha)) {
        std::ostringstream msg;
        msg << "moment exponent r = " << r << " must exceed alpha = " << alpha;
        throw Error(ErrorKind::BadExponent, msg.str());
    }
}

Field power(const Field& m, double p)
{
    return m.map([p](double x) { return std::pow(x, p); });
}

Field homotopy_potential_field(const ProblemSpec& spec, double lambda, const Field& m)
{
    Field w(spec.grid);
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = spec.homotopy_potential(lambda, spec.grid.point(k), m[k]);
    }
    return w;
}

} // namespace

SupBoundResult sup_bound_check(const ProblemSpec& spec, const State& s, double lambda, double tolerance)
{
    SupBoundResult out;
    out.sup_u = s.u.sup_norm();
    out.certified_bound = spec.potential_sup_bound(lambda);
    out.pass = out.sup_u <= out.certified_bound + tolerance;
    return out;
}

MassPositivity mass_positivity_check(const State& s)
{
    return MassPositivity{std::abs(integral(s.m) - 1.0), s.m.min()};
}

double young_constant_c1(double alpha, double r, double C)
{
    const double s = r + 1.0 - alpha;
    return (1.0 - alpha) * std::pow(4.0, r / (1.0 - alpha)) * std::pow(C, s / (1.0 - alpha)) / (r * s);
}

double young_constant_c2(double alpha, double r, double C)
{
    const double s = r + 1.0 - alpha;
    return std::pow(4.0, r - alpha) * std::pow(C, s) * std::pow(r - alpha, r - alpha - 1.0) / std::pow(s, s);
}

InverseMoment inverse_moment(const ProblemSpec& spec, const State& s, double r, double lambda)
{
    const double alpha = spec.alpha;
    require_exponent(alpha, r);
    require_positive_density(s.m);
    const double exponent = r + 1.0 - alpha;

    InverseMoment out;
    out.value = integral(power(s.m, -exponent));
    const double w_bound = spec.potential_sup_bound(lambda);
    const double b_bound = lambda * spec.drift.sup_bound();
    out.generic_constant = w_bound + w_bound + b_bound * b_bound + 1.0 / exponent + 1.0;
    out.c1 = young_constant_c1(alpha, r, out.generic_constant);
    out.c2 = young_constant_c2(alpha, r, out.generic_constant);
    out.bound = 2.0 * exponent * (out.c1 + out.c2);
    out.pass = std::isfinite(out.value) && out.value <= out.bound;
    return out;
}

double cancellation_check(const ProblemSpec& spec, const State& s, double r)
{
    const double alpha = spec.alpha;
    require_exponent(alpha, r);
    require_positive_density(s.m);
    const double exponent = r + 1.0 - alpha;

    const Field lap_term = laplacian(s.u) * power(s.m, -r) * (1.0 / r);
    const Field flux_div = divergence(gradient(s.u).scaled(power(s.m, 1.0 - alpha)));
    const Field flux_term = flux_div * power(s.m, -exponent) * (1.0 / exponent);
    return integral(lap_term) - integral(flux_term);
}

MagicIdentity magic_identity_terms(const ProblemSpec& spec, const State& s, double r, double lambda)
{
    const double alpha = spec.alpha;
    require_exponent(alpha, r);
    require_positive_density(s.m);
    const double exponent = r + 1.0 - alpha;

    const VectorField du = gradient(s.u);
    const VectorField dm = gradient(s.m);
    const Field m_neg_r = power(s.m, -r);
    const Field m_neg_r_alpha = power(s.m, alpha - r);

    MagicIdentity out;
    out.lhs = integral(power(s.m, -exponent)) / exponent
              + integral(norm_squared(du) * power(s.m, -(r + alpha))) / (2.0 * r)
              + integral(norm_squared(dm) * power(s.m, -(r + 2.0 - alpha)));

    const Field w = homotopy_potential_field(spec, lambda, s.m);
    double rhs = integral(w * m_neg_r) / r - integral(s.u * m_neg_r) / r + integral(m_neg_r_alpha) / exponent;
    if (lambda != 0.0 && !spec.drift.is_zero()) {
        const VectorField b = spec.sample_drift();
        rhs -= lambda * integral(dot(b, du) * m_neg_r) / r;
        rhs -= lambda * integral(divergence(b) * m_neg_r_alpha) / (r - alpha);
    }
    out.rhs = rhs;
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

MagicIdentity magic_identity_check(const ProblemSpec& spec, const State& s, double r, double lambda, double tol)
{
    require_exponent(spec.alpha, r);
    const double res = residual(spec, lambda, s).sup_norm();
    if (res > 100.0 * tol) {
        std::ostringstream msg;
        msg << "state is not a solution: |F|_inf = " << res << " exceeds " << 100.0 * tol;
        throw Error(ErrorKind::NotASolution, msg.str());
    }
    return magic_identity_terms(spec, s, r, lambda);
}

MonotonicityGap monotonicity_gap(const ProblemSpec& spec, const State& s0, const State& s1)
{
    const double alpha = spec.alpha;
    require_positive_density(s0.m);
    require_positive_density(s1.m);

    const VectorField du0 = gradient(s0.u);
    const VectorField du1 = gradient(s1.u);
    const Field dm = s1.m - s0.m;              // m1 - m0
    const VectorField dw = gradient(s1.u - s0.u); // D(u1 - u0)
    const Field dw_sq = norm_squared(dw);

    MonotonicityGap out;
    const Field h0 = 0.5 * (norm_squared(du0) * power(s0.m, -alpha));
    const Field h1 = 0.5 * (norm_squared(du1) * power(s1.m, -alpha));
    const Field flux_gap = dot(du0.scaled(power(s0.m, 1.0 - alpha)), dw)
                           - dot(du1.scaled(power(s1.m, 1.0 - alpha)), dw); // (m0 Du0 - m1 Du1).D(u0-u1)
    out.lhs = integral((h1 - h0) * (-1.0 * dm)) + integral(-1.0 * flux_gap);

    const Field w0 = homotopy_potential_field(spec, 1.0, s0.m);
    const Field w1 = homotopy_potential_field(spec, 1.0, s1.m);
    out.rhs = integral((w1 - w0) * (-1.0 * dm));

    constexpr int samples = 11;
    for (int j = 0; j < samples; ++j) {
        const double theta = static_cast<double>(j) / (samples - 1);
        const Field m_theta = s0.m + theta * dm;
        require_positive_density(m_theta);
        const VectorField du_theta = gradient(s0.u + theta * (s1.u - s0.u));

        const Field t1 = dot(du_theta, dw) * dm * power(m_theta, -alpha);
        const Field t2 = norm_squared(du_theta) * dm * dm * power(m_theta, -1.0 - alpha);
        const Field t3 = power(m_theta, 1.0 - alpha) * dw_sq;
        const double i3 = integral(t3);

        out.theta.push_back(theta);
        out.di_dtheta.push_back(-alpha * integral(t1) + 0.5 * alpha * integral(t2) + i3);
        out.lower_bound.push_back((1.0 - 0.5 * alpha) * i3);
    }

    // I(1) straight from its definition, with theta = 1.
    const Field i_first = (h1 - h0) * dm;
    const Field i_second = dot(du1.scaled(power(s1.m, 1.0 - alpha)), dw) - dot(du0.scaled(power(s0.m, 1.0 - alpha)), dw);
    out.i_one_direct = -integral(i_first) + integral(i_second);

    double trap = 0.0;
    for (int j = 0; j + 1 < samples; ++j) {
        trap += 0.5 * (out.di_dtheta[static_cast<std::size_t>(j)] + out.di_dtheta[static_cast<std::size_t>(j) + 1])
                * (out.theta[static_cast<std::size_t>(j) + 1] - out.theta[static_cast<std::size_t>(j)]);
    }
    out.i_one_trapezoid = trap;
    return out;
}

DiagnosticsSnapshot snapshot(const ProblemSpec& spec, double lambda, const State& s, const DiagnosticsOptions& opts)
{
    DiagnosticsSnapshot snap;
    const SupBoundResult sup = sup_bound_check(spec, s, lambda);
    snap.sup_u = sup.sup_u;
    snap.sup_bound_V = sup.certified_bound;
    const MassPositivity mp = mass_positivity_check(s);
    snap.min_m = mp.min_m;
    snap.mass_defect = mp.mass_defect;
    if (!(mp.min_m > 0.0)) {
        return snap;
    }
    for (double r : opts.r_values) {
        if (!(r > spec.alpha)) {
            continue;
        }
        const InverseMoment im = inverse_moment(spec, s, r, lambda);
        snap.inverse_moments.push_back(MomentEntry{r, im.value, im.bound, im.pass});
        snap.cancellation_residuals.push_back(IdentityEntry{r, cancellation_check(spec, s, r)});
        if (!spec.sources) {
            const MagicIdentity mi = magic_identity_terms(spec, s, r, lambda);
            snap.magic_residuals.push_back(IdentityEntry{r, mi.lhs - mi.rhs});
        }
    }
    return snap;
}

} // namespace mfg
