#include "mfg/problem.hpp"

#include "mfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mfg {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double abs_sum(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) {
        s += std::abs(x);
    }
    return s;
}

} // namespace

double AxisHarmonics::operator()(const std::array<double, 2>& x) const
{
    double v = constant;
    for (std::size_t i = 0; i < cos.size(); ++i) {
        v += cos[i] * std::cos(two_pi * x[i]);
    }
    for (std::size_t i = 0; i < sin.size(); ++i) {
        v += sin[i] * std::sin(two_pi * x[i]);
    }
    return v;
}

double AxisHarmonics::sup_bound() const
{
    return std::abs(constant) + abs_sum(cos) + abs_sum(sin);
}

std::string to_string(PotentialForm form)
{
    switch (form) {
    case PotentialForm::Separable: return "separable";
    case PotentialForm::Saturating: return "saturating";
    case PotentialForm::XOnly: return "x_only";
    }
    return "separable";
}

PotentialForm potential_form_from_string(const std::string& name)
{
    if (name == "separable") {
        return PotentialForm::Separable;
    }
    if (name == "saturating") {
        return PotentialForm::Saturating;
    }
    if (name == "x_only") {
        return PotentialForm::XOnly;
    }
    throw Error(ErrorKind::InvalidConfig, "unknown potential form '" + name + "'");
}

double PotentialSpec::value(const std::array<double, 2>& x, double m) const
{
    switch (form) {
    case PotentialForm::Separable: return a(x) + kappa * std::atan(m);
    case PotentialForm::Saturating: return a(x) + kappa * m / (1.0 + m);
    case PotentialForm::XOnly: return a(x);
    }
    return a(x);
}

double PotentialSpec::dm(double m) const
{
    switch (form) {
    case PotentialForm::Separable: return kappa / (1.0 + m * m);
    case PotentialForm::Saturating: return kappa / ((1.0 + m) * (1.0 + m));
    case PotentialForm::XOnly: return 0.0;
    }
    return 0.0;
}

double PotentialSpec::sup_bound() const
{
    switch (form) {
    case PotentialForm::Separable: return a.sup_bound() + kappa * std::numbers::pi / 2.0;
    case PotentialForm::Saturating: return a.sup_bound() + kappa;
    case PotentialForm::XOnly: return a.sup_bound();
    }
    return a.sup_bound();
}

bool PotentialSpec::strictly_increasing() const
{
    return form != PotentialForm::XOnly && kappa > 0.0;
}

// --- DriftSpec -------------------------------------------------------------

DriftSpec DriftSpec::zero(int dim)
{
    const auto d = static_cast<std::size_t>(dim);
    return DriftSpec{std::vector<double>(d, 0.0), std::vector<std::vector<double>>(d, std::vector<double>(d, 0.0)),
                     std::vector<std::vector<double>>(d, std::vector<double>(d, 0.0))};
}

double DriftSpec::component(int i, const std::array<double, 2>& x) const
{
    const auto ii = static_cast<std::size_t>(i);
    double v = offset[ii];
    for (std::size_t j = 0; j < cos[ii].size(); ++j) {
        v += cos[ii][j] * std::cos(two_pi * x[j]) + sin[ii][j] * std::sin(two_pi * x[j]);
    }
    return v;
}

double DriftSpec::divergence(const std::array<double, 2>& x) const
{
    double v = 0.0;
    for (std::size_t i = 0; i < offset.size(); ++i) {
        v += two_pi * (-cos[i][i] * std::sin(two_pi * x[i]) + sin[i][i] * std::cos(two_pi * x[i]));
    }
    return v;
}

double DriftSpec::sup_bound() const
{
    double sq = 0.0;
    for (std::size_t i = 0; i < offset.size(); ++i) {
        const double ci = std::abs(offset[i]) + abs_sum(cos[i]) + abs_sum(sin[i]);
        sq += ci * ci;
    }
    return std::sqrt(sq);
}

bool DriftSpec::is_zero() const
{
    return sup_bound() == 0.0;
}

DriftSpec DriftSpec::scaled(double s) const
{
    DriftSpec out = *this;
    for (std::size_t i = 0; i < out.offset.size(); ++i) {
        out.offset[i] *= s;
        for (auto& c : out.cos[i]) {
            c *= s;
        }
        for (auto& c : out.sin[i]) {
            c *= s;
        }
    }
    return out;
}

// --- ProblemSpec -----------------------------------------------------------

void ProblemSpec::validate(bool allow_alpha_up_to_two) const
{
    if (grid.dim != 1 && grid.dim != 2) {
        throw Error(ErrorKind::InvalidConfig, "dim must be 1 or 2");
    }
    if (grid.n < 8) {
        throw Error(ErrorKind::InvalidConfig, "n must be at least 8");
    }
    const double alpha_cap = allow_alpha_up_to_two ? 2.0 : 1.0;
    if (!(alpha >= 0.0 && alpha < alpha_cap)) {
        std::ostringstream msg;
        msg << "alpha = " << alpha << " violates assumption (A1): the congestion exponent must satisfy 0 <= alpha < "
            << alpha_cap;
        throw Error(ErrorKind::InvalidConfig, msg.str());
    }
    if (!(potential.kappa >= 0.0) || !std::isfinite(potential.kappa)) {
        throw Error(ErrorKind::InvalidConfig,
                    "potential kappa must be finite and >= 0 so V is non-decreasing in m (assumption (A2))");
    }
    if (!(epsilon_monotone >= 0.0) || !std::isfinite(epsilon_monotone)) {
        throw Error(ErrorKind::InvalidConfig, "epsilon_monotone must be finite and >= 0");
    }
    const auto d = static_cast<std::size_t>(grid.dim);
    if (potential.a.cos.size() != d || potential.a.sin.size() != d) {
        throw Error(ErrorKind::InvalidConfig, "potential a_cos and a_sin need one entry per axis");
    }
    if (drift.offset.size() != d || drift.cos.size() != d || drift.sin.size() != d) {
        throw Error(ErrorKind::InvalidConfig, "drift needs one row per component");
    }
    for (std::size_t i = 0; i < d; ++i) {
        if (drift.cos[i].size() != d || drift.sin[i].size() != d) {
            throw Error(ErrorKind::InvalidConfig, "drift coefficient rows need one entry per axis");
        }
    }
    if (!std::isfinite(potential.sup_bound()) || !std::isfinite(drift.sup_bound())) {
        throw Error(ErrorKind::InvalidConfig, "coefficients must be finite");
    }
    if (sources) {
        if (!(sources->hjb.grid() == grid) || !(sources->fp.grid() == grid)) {
            throw Error(ErrorKind::InvalidConfig, "sources must live on the problem grid");
        }
    }
}

double ProblemSpec::homotopy_potential(double lambda, const std::array<double, 2>& x, double m) const
{
    const double v0 = std::atan(m);
    return lambda * (potential.value(x, m) + epsilon_monotone * v0) + (1.0 - lambda) * v0;
}

double ProblemSpec::homotopy_potential_dm(double lambda, double m) const
{
    const double dv0 = 1.0 / (1.0 + m * m);
    return lambda * (potential.dm(m) + epsilon_monotone * dv0) + (1.0 - lambda) * dv0;
}

double ProblemSpec::potential_sup_bound(double lambda) const
{
    const double eps_part = epsilon_monotone * std::numbers::pi / 2.0;
    if (lambda >= 1.0) {
        return potential.sup_bound() + eps_part;
    }
    return std::max(potential.sup_bound(), std::numbers::pi / 2.0) + eps_part;
}

Field ProblemSpec::sample_drift_component(int i) const
{
    return Field::sample(grid, [&](const std::array<double, 2>& x) { return drift.component(i, x); });
}

VectorField ProblemSpec::sample_drift() const
{
    std::vector<Field> comps;
    for (int i = 0; i < grid.dim; ++i) {
        comps.push_back(sample_drift_component(i));
    }
    return VectorField(std::move(comps));
}

// --- Residual --------------------------------------------------------------

double Residual::sup_norm() const
{
    return std::max(hjb.sup_norm(), fp.sup_norm());
}

void require_positive_density(const Field& m)
{
    const double lo = m.min();
    if (!(lo > 0.0)) {
        std::ostringstream msg;
        msg << "density must be strictly positive, min(m) = " << lo;
        throw Error(ErrorKind::NonPositiveDensity, msg.str());
    }
}

Residual residual(const ProblemSpec& spec, double lambda, const State& s)
{
    require_positive_density(s.m);
    const GridSpec& g = spec.grid;
    const double alpha = spec.alpha;

    const VectorField du = gradient(s.u);
    const Field du_sq = norm_squared(du);
    const Field m_pow_neg_alpha = s.m.map([alpha](double m) { return std::pow(m, -alpha); });
    const Field m_pow_flux = s.m.map([alpha](double m) { return std::pow(m, 1.0 - alpha); });

    Field hjb = s.u - laplacian(s.u) + 0.5 * (du_sq * m_pow_neg_alpha);
    Field fp = s.m - laplacian(s.m) - divergence(du.scaled(m_pow_flux));

    if (lambda != 0.0 && !spec.drift.is_zero()) {
        const VectorField b = spec.sample_drift();
        hjb += lambda * dot(b, du);
        fp -= lambda * divergence(b.scaled(s.m));
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        hjb[k] -= spec.homotopy_potential(lambda, g.point(k), s.m[k]);
        fp[k] -= 1.0;
    }
    if (spec.sources) {
        hjb -= spec.sources->hjb;
        fp -= spec.sources->fp;
    }
    return Residual{std::move(hjb), std::move(fp)};
}

State exact_initial(const ProblemSpec& spec)
{
    return State{Field(spec.grid, std::numbers::pi / 4.0), Field(spec.grid, 1.0)};
}

VectorField drift_field(const ProblemSpec& spec, const State& s)
{
    require_positive_density(s.m);
    const double alpha = spec.alpha;
    return gradient(s.u).scaled(s.m.map([alpha](double m) { return std::pow(m, -alpha); }));
}

} // namespace mfg
