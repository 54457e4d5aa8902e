#include "mfg/io.hpp"

#include "mfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <regex>
#include <sstream>

namespace mfg {

namespace {

void check_object(const json& j, const std::string& context)
{
    if (!j.is_object()) {
        throw Error(ErrorKind::InvalidConfig, context + " must be a JSON object");
    }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& context)
{
    check_object(j, context);
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) {
            throw Error(ErrorKind::InvalidConfig, "unknown key '" + item.key() + "' in " + context);
        }
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& context)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, context + "." + key + ": " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key, const std::string& context)
{
    if (!j.contains(key)) {
        throw Error(ErrorKind::InvalidConfig, "missing key '" + std::string(key) + "' in " + context);
    }
    return get_or<T>(j, key, T{}, context);
}

std::vector<double> sized_or_zero(const json& j, const char* key, std::size_t dim, const std::string& context)
{
    auto v = get_or<std::vector<double>>(j, key, std::vector<double>(dim, 0.0), context);
    if (v.size() != dim) {
        throw Error(ErrorKind::InvalidConfig, context + "." + key + " needs " + std::to_string(dim) + " entries");
    }
    return v;
}

std::vector<std::vector<double>> matrix_or_zero(const json& j, const char* key, std::size_t dim,
                                                const std::string& context)
{
    auto v = get_or<std::vector<std::vector<double>>>(
        j, key, std::vector<std::vector<double>>(dim, std::vector<double>(dim, 0.0)), context);
    if (v.size() != dim || std::any_of(v.begin(), v.end(), [dim](const auto& row) { return row.size() != dim; })) {
        throw Error(ErrorKind::InvalidConfig,
                    context + "." + key + " must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
    }
    return v;
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

} // namespace

// --- Problem ---------------------------------------------------------------

ProblemSpec problem_from_json(const json& j)
{
    const std::string ctx = "problem";
    check_keys(j, {"dim", "n", "alpha", "potential", "drift", "epsilon_monotone"}, ctx);

    ProblemSpec spec;
    const int dim = require<int>(j, "dim", ctx);
    const int n = require<int>(j, "n", ctx);
    if (dim != 1 && dim != 2) {
        throw Error(ErrorKind::InvalidConfig, "problem.dim must be 1 or 2");
    }
    if (n < 8) {
        throw Error(ErrorKind::InvalidConfig, "problem.n must be at least 8");
    }
    spec.grid = GridSpec{dim, n};
    spec.alpha = require<double>(j, "alpha", ctx);
    spec.epsilon_monotone = get_or<double>(j, "epsilon_monotone", 0.0, ctx);
    const auto d = static_cast<std::size_t>(dim);

    const json pot = j.contains("potential") ? j.at("potential") : json::object();
    const std::string pctx = "problem.potential";
    check_keys(pot, {"form", "kappa", "a_const", "a_cos", "a_sin"}, pctx);
    spec.potential.form = potential_form_from_string(get_or<std::string>(pot, "form", "separable", pctx));
    spec.potential.kappa = get_or<double>(pot, "kappa", 1.0, pctx);
    spec.potential.a.constant = get_or<double>(pot, "a_const", 0.0, pctx);
    spec.potential.a.cos = sized_or_zero(pot, "a_cos", d, pctx);
    spec.potential.a.sin = sized_or_zero(pot, "a_sin", d, pctx);

    const json drift = j.contains("drift") ? j.at("drift") : json::object();
    const std::string dctx = "problem.drift";
    check_keys(drift, {"offset", "cos", "sin"}, dctx);
    spec.drift.offset = sized_or_zero(drift, "offset", d, dctx);
    spec.drift.cos = matrix_or_zero(drift, "cos", d, dctx);
    spec.drift.sin = matrix_or_zero(drift, "sin", d, dctx);

    spec.validate();
    return spec;
}

json to_json(const ProblemSpec& spec)
{
    json j;
    j["dim"] = spec.grid.dim;
    j["n"] = spec.grid.n;
    j["alpha"] = spec.alpha;
    j["potential"] = {{"form", to_string(spec.potential.form)},
                      {"kappa", spec.potential.kappa},
                      {"a_const", spec.potential.a.constant},
                      {"a_cos", spec.potential.a.cos},
                      {"a_sin", spec.potential.a.sin}};
    j["drift"] = {{"offset", spec.drift.offset}, {"cos", spec.drift.cos}, {"sin", spec.drift.sin}};
    j["epsilon_monotone"] = spec.epsilon_monotone;
    return j;
}

TrigSeries trig_series_from_json(const json& j)
{
    const std::string ctx = "trig series";
    check_keys(j, {"constant", "modes"}, ctx);
    TrigSeries s;
    s.constant = get_or<double>(j, "constant", 0.0, ctx);
    if (j.contains("modes")) {
        if (!j.at("modes").is_array()) {
            throw Error(ErrorKind::InvalidConfig, "trig series modes must be an array");
        }
        for (const auto& m : j.at("modes")) {
            check_keys(m, {"k", "cos", "sin"}, "trig mode");
            TrigMode mode;
            const auto k = require<std::vector<int>>(m, "k", "trig mode");
            if (k.empty() || k.size() > 2) {
                throw Error(ErrorKind::InvalidConfig, "trig mode k needs 1 or 2 wave numbers");
            }
            mode.k = {k[0], k.size() > 1 ? k[1] : 0};
            mode.cos_coef = get_or<double>(m, "cos", 0.0, "trig mode");
            mode.sin_coef = get_or<double>(m, "sin", 0.0, "trig mode");
            s.modes.push_back(mode);
        }
    }
    return s;
}

json to_json(const TrigSeries& series)
{
    json modes = json::array();
    for (const auto& m : series.modes) {
        modes.push_back({{"k", {m.k[0], m.k[1]}}, {"cos", m.cos_coef}, {"sin", m.sin_coef}});
    }
    return {{"constant", series.constant}, {"modes", modes}};
}

// --- Run config ------------------------------------------------------------

RunConfig run_config_from_json(const json& j)
{
    check_keys(j, {"problem", "solver", "diagnostics", "output", "seed", "sweep", "mms"}, "config");
    RunConfig cfg;
    if (!j.contains("problem")) {
        throw Error(ErrorKind::InvalidConfig, "missing key 'problem' in config");
    }
    cfg.problem = problem_from_json(j.at("problem"));
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "config");

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        const std::string ctx = "solver";
        check_keys(s, {"tol_residual", "max_iters", "positivity_fraction", "armijo_c", "min_damping", "continuation"},
                   ctx);
        cfg.newton.tol_residual = get_or<double>(s, "tol_residual", cfg.newton.tol_residual, ctx);
        cfg.newton.max_iters = get_or<int>(s, "max_iters", cfg.newton.max_iters, ctx);
        cfg.newton.positivity_fraction = get_or<double>(s, "positivity_fraction", cfg.newton.positivity_fraction, ctx);
        cfg.newton.armijo_c = get_or<double>(s, "armijo_c", cfg.newton.armijo_c, ctx);
        cfg.newton.min_damping = get_or<double>(s, "min_damping", cfg.newton.min_damping, ctx);
        if (s.contains("continuation")) {
            const json& c = s.at("continuation");
            const std::string cctx = "solver.continuation";
            check_keys(c, {"initial_step", "growth", "shrink", "max_step", "min_step", "fast_iterations",
                           "max_attempts"},
                       cctx);
            auto& co = cfg.continuation;
            co.initial_step = get_or<double>(c, "initial_step", co.initial_step, cctx);
            co.growth = get_or<double>(c, "growth", co.growth, cctx);
            co.shrink = get_or<double>(c, "shrink", co.shrink, cctx);
            co.max_step = get_or<double>(c, "max_step", co.max_step, cctx);
            co.min_step = get_or<double>(c, "min_step", co.min_step, cctx);
            co.fast_iterations = get_or<int>(c, "fast_iterations", co.fast_iterations, cctx);
            co.max_attempts = get_or<int>(c, "max_attempts", co.max_attempts, cctx);
        }
    }
    cfg.newton.validate();
    cfg.continuation.validate();

    if (j.contains("diagnostics")) {
        const json& d = j.at("diagnostics");
        check_keys(d, {"r_values", "coercivity_samples"}, "diagnostics");
        cfg.diagnostics.r_values = get_or<std::vector<double>>(d, "r_values", cfg.diagnostics.r_values, "diagnostics");
        cfg.coercivity_samples = get_or<int>(d, "coercivity_samples", cfg.coercivity_samples, "diagnostics");
        for (double r : cfg.diagnostics.r_values) {
            if (!(r > cfg.problem.alpha)) {
                throw Error(ErrorKind::InvalidConfig, "diagnostics.r_values must all exceed alpha");
            }
        }
        if (cfg.coercivity_samples < 1) {
            throw Error(ErrorKind::InvalidConfig, "diagnostics.coercivity_samples must be positive");
        }
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, {"directory", "dump_matrix"}, "output");
        cfg.output.directory = get_or<std::string>(o, "directory", cfg.output.directory, "output");
        cfg.output.dump_matrix = get_or<bool>(o, "dump_matrix", cfg.output.dump_matrix, "output");
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, {"alpha", "kappa", "drift_amplitude"}, "sweep");
        SweepConfig sw;
        sw.alpha = get_or<std::vector<double>>(s, "alpha", {cfg.problem.alpha}, "sweep");
        sw.kappa = get_or<std::vector<double>>(s, "kappa", {cfg.problem.potential.kappa}, "sweep");
        sw.drift_amplitude = get_or<std::vector<double>>(s, "drift_amplitude", sw.drift_amplitude, "sweep");
        if (sw.alpha.empty() || sw.kappa.empty() || sw.drift_amplitude.empty()) {
            throw Error(ErrorKind::InvalidConfig, "sweep axes must be non-empty");
        }
        for (double a : sw.alpha) {
            if (!(a >= 0.0 && a < 1.0)) {
                throw Error(ErrorKind::InvalidConfig, "sweep alpha values violate assumption (A1): 0 <= alpha < 1");
            }
        }
        for (double k : sw.kappa) {
            if (!(k >= 0.0)) {
                throw Error(ErrorKind::InvalidConfig, "sweep kappa values must be >= 0");
            }
        }
        cfg.sweep = sw;
    }

    if (j.contains("mms")) {
        const json& m = j.at("mms");
        check_keys(m, {"u_exact", "m_exact", "grids"}, "mms");
        MmsConfig mc;
        mc.u_exact = trig_series_from_json(require<json>(m, "u_exact", "mms"));
        mc.m_exact = trig_series_from_json(require<json>(m, "m_exact", "mms"));
        mc.grids = require<std::vector<int>>(m, "grids", "mms");
        if (mc.grids.size() < 3) {
            throw Error(ErrorKind::InvalidConfig, "mms.grids needs at least 3 levels");
        }
        for (std::size_t i = 0; i < mc.grids.size(); ++i) {
            if (mc.grids[i] < 8 || (i > 0 && mc.grids[i] != 2 * mc.grids[i - 1])) {
                throw Error(ErrorKind::InvalidConfig, "mms.grids must start at >= 8 and double each level");
            }
        }
        if (!(mc.m_exact.lower_bound() > 0.0)) {
            throw Error(ErrorKind::InvalidConfig, "mms.m_exact must stay strictly positive");
        }
        cfg.mms = mc;
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::InvalidConfig, "cannot read config file " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "config " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

json to_json(const RunConfig& cfg)
{
    json j;
    j["problem"] = to_json(cfg.problem);
    const auto& n = cfg.newton;
    const auto& c = cfg.continuation;
    j["solver"] = {{"tol_residual", n.tol_residual},
                   {"max_iters", n.max_iters},
                   {"positivity_fraction", n.positivity_fraction},
                   {"armijo_c", n.armijo_c},
                   {"min_damping", n.min_damping},
                   {"continuation",
                    {{"initial_step", c.initial_step},
                     {"growth", c.growth},
                     {"shrink", c.shrink},
                     {"max_step", c.max_step},
                     {"min_step", c.min_step},
                     {"fast_iterations", c.fast_iterations},
                     {"max_attempts", c.max_attempts}}}};
    j["diagnostics"] = {{"r_values", cfg.diagnostics.r_values}, {"coercivity_samples", cfg.coercivity_samples}};
    j["output"] = {{"directory", cfg.output.directory}, {"dump_matrix", cfg.output.dump_matrix}};
    j["seed"] = cfg.seed;
    if (cfg.sweep) {
        j["sweep"] = {{"alpha", cfg.sweep->alpha},
                      {"kappa", cfg.sweep->kappa},
                      {"drift_amplitude", cfg.sweep->drift_amplitude}};
    }
    if (cfg.mms) {
        j["mms"] = {{"u_exact", to_json(cfg.mms->u_exact)},
                    {"m_exact", to_json(cfg.mms->m_exact)},
                    {"grids", cfg.mms->grids}};
    }
    return j;
}

// --- Reports ---------------------------------------------------------------

json to_json(const NewtonReport& r)
{
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"residual_history", r.residual_history},
            {"damping_history", r.damping_history},
            {"final_min_m", r.final_min_m},
            {"pinned_mean", r.pinned_mean}};
}

json to_json(const DiagnosticsSnapshot& s)
{
    json moments = json::array();
    for (const auto& m : s.inverse_moments) {
        moments.push_back({{"r", m.r}, {"value", number_or_null(m.value)}, {"bound", number_or_null(m.bound)},
                           {"pass", m.pass}});
    }
    auto identity_list = [](const std::vector<IdentityEntry>& entries) {
        json out = json::array();
        for (const auto& e : entries) {
            out.push_back({{"r", e.r}, {"value", number_or_null(e.value)}});
        }
        return out;
    };
    return {{"sup_u", s.sup_u},
            {"sup_bound_V", s.sup_bound_V},
            {"min_m", s.min_m},
            {"mass_defect", s.mass_defect},
            {"inverse_moments", moments},
            {"cancellation_residuals", identity_list(s.cancellation_residuals)},
            {"magic_residuals", identity_list(s.magic_residuals)}};
}

json to_json(const ContinuationTrace& t)
{
    json steps = json::array();
    for (const auto& s : t.steps) {
        steps.push_back({{"lambda", s.lambda}, {"newton", to_json(s.newton)}, {"diagnostics", to_json(s.diagnostics)}});
    }
    json rejected = json::array();
    for (const auto& r : t.rejected) {
        rejected.push_back({{"lambda", r.lambda}, {"step", r.step}, {"reason", r.reason}});
    }
    return {{"reached_lambda", t.reached_lambda},
            {"success", t.success},
            {"failure", t.failure},
            {"steps", steps},
            {"rejected", rejected}};
}

json to_json(const CoercivityReport& r)
{
    return {{"samples", r.samples},
            {"max_ratio", r.max_ratio},
            {"min_ratio", r.min_ratio},
            {"estimated_constant", r.estimated_constant},
            {"non_negative_samples", r.non_negative_samples},
            {"passed", r.passed()}};
}

// --- Field CSV -------------------------------------------------------------

void write_field_csv(const Field& field, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    }
    const GridSpec& g = field.grid();
    out << "# n=" << g.n << " dim=" << g.dim << '\n';
    out << std::setprecision(17);
    if (g.dim == 1) {
        for (double v : field.values()) {
            out << v << '\n';
        }
        return;
    }
    const auto n = static_cast<std::size_t>(g.n);
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t col = 0; col < n; ++col) {
            if (col > 0) {
                out << ',';
            }
            out << field[row * n + col];
        }
        out << '\n';
    }
}

Field read_field_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot read field file " + path);
    }
    std::string header;
    std::getline(in, header);
    static const std::regex header_re(R"(^#\s*n=(\d+)\s+dim=(\d+)\s*$)");
    std::smatch match;
    if (!std::regex_match(header, match, header_re)) {
        throw Error(ErrorKind::Io, path + ": expected header '# n=<n> dim=<d>'");
    }
    const int n = std::stoi(match[1].str());
    const int dim = std::stoi(match[2].str());
    if ((dim != 1 && dim != 2) || n < 8) {
        throw Error(ErrorKind::Io, path + ": unsupported grid in header");
    }
    const GridSpec grid{dim, n};

    std::vector<double> values;
    values.reserve(grid.size());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::size_t cols = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (!std::isfinite(v)) {
                    throw Error(ErrorKind::Io, path + ": non-finite value");
                }
                values.push_back(v);
            } catch (const std::logic_error&) {
                throw Error(ErrorKind::Io, path + ": cannot parse value '" + cell + "'");
            }
            ++cols;
        }
        const std::size_t expected_cols = dim == 1 ? 1 : static_cast<std::size_t>(n);
        if (cols != expected_cols) {
            throw Error(ErrorKind::Io, path + ": row " + std::to_string(rows) + " has " + std::to_string(cols)
                                           + " values, expected " + std::to_string(expected_cols));
        }
    }
    if (values.size() != grid.size()) {
        throw Error(ErrorKind::Io, path + ": expected " + std::to_string(grid.size()) + " values, found "
                                       + std::to_string(values.size()));
    }
    return Field(grid, std::move(values));
}

void write_json(const json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
}

} // namespace mfg
