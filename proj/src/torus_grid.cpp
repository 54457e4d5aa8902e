#include "mfg/torus_grid.hpp"

#include "mfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfg {

GridSpec GridSpec::make(int dim, int n)
{
    if (dim != 1 && dim != 2) {
        throw Error(ErrorKind::InvalidArgument, "grid dim must be 1 or 2, got " + std::to_string(dim));
    }
    if (n < 8) {
        throw Error(ErrorKind::InvalidArgument, "grid needs at least 8 points per axis, got " + std::to_string(n));
    }
    return GridSpec{dim, n};
}

double GridSpec::cell_volume() const noexcept
{
    return dim == 1 ? h() : h() * h();
}

std::size_t GridSpec::size() const noexcept
{
    const auto nn = static_cast<std::size_t>(n);
    return dim == 1 ? nn : nn * nn;
}

std::size_t GridSpec::stride(int axis) const noexcept
{
    return (dim == 2 && axis == 0) ? static_cast<std::size_t>(n) : 1;
}

int GridSpec::axis_index(std::size_t flat, int axis) const noexcept
{
    return static_cast<int>((flat / stride(axis)) % static_cast<std::size_t>(n));
}

std::size_t GridSpec::neighbor(std::size_t flat, int axis, int offset) const noexcept
{
    const int i = axis_index(flat, axis);
    const int j = ((i + offset) % n + n) % n;
    const auto s = stride(axis);
    return flat - static_cast<std::size_t>(i) * s + static_cast<std::size_t>(j) * s;
}

double GridSpec::coordinate(std::size_t flat, int axis) const noexcept
{
    return static_cast<double>(axis_index(flat, axis)) / static_cast<double>(n);
}

std::array<double, 2> GridSpec::point(std::size_t flat) const noexcept
{
    return {coordinate(flat, 0), dim == 2 ? coordinate(flat, 1) : 0.0};
}

// --- Field -----------------------------------------------------------------

Field::Field(const GridSpec& grid, double value) : grid_(grid), values_(grid.size(), value) {}

Field::Field(const GridSpec& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    "field length " + std::to_string(values_.size()) + " does not match grid size "
                        + std::to_string(grid_.size()));
    }
}

Field Field::sample(const GridSpec& grid, const std::function<double(const std::array<double, 2>&)>& f)
{
    Field out(grid);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out.values_[k] = f(grid.point(k));
    }
    return out;
}

bool Field::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::min() const
{
    return *std::min_element(values_.begin(), values_.end());
}

double Field::max() const
{
    return *std::max_element(values_.begin(), values_.end());
}

double Field::sup_norm() const
{
    double s = 0.0;
    for (double v : values_) {
        s = std::max(s, std::abs(v));
    }
    return s;
}

namespace {

void require_same_grid(const GridSpec& a, const GridSpec& b)
{
    if (!(a == b)) {
        throw Error(ErrorKind::InvalidArgument, "fields live on different grids");
    }
}

} // namespace

Field& Field::operator+=(const Field& other)
{
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

Field& Field::operator-=(const Field& other)
{
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

Field& Field::operator*=(const Field& other)
{
    require_same_grid(grid_, other.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] *= other.values_[i];
    }
    return *this;
}

Field& Field::operator*=(double s)
{
    for (double& v : values_) {
        v *= s;
    }
    return *this;
}

Field& Field::operator+=(double s)
{
    for (double& v : values_) {
        v += s;
    }
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(Field a, const Field& b) { return a *= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }
Field operator+(Field a, double s) { return a += s; }
Field operator-(Field a) { return a *= -1.0; }

// --- VectorField -----------------------------------------------------------

VectorField::VectorField(const GridSpec& grid) : grid_(grid)
{
    components_.assign(static_cast<std::size_t>(grid.dim), Field(grid));
}

VectorField::VectorField(std::vector<Field> components) : components_(std::move(components))
{
    if (components_.empty()) {
        throw Error(ErrorKind::InvalidArgument, "vector field needs at least one component");
    }
    grid_ = components_.front().grid();
    if (static_cast<int>(components_.size()) != grid_.dim) {
        throw Error(ErrorKind::InvalidArgument, "vector field component count must equal grid dim");
    }
    for (const auto& c : components_) {
        require_same_grid(grid_, c.grid());
    }
}

VectorField VectorField::scaled(const Field& w) const
{
    VectorField out = *this;
    for (auto& c : out.components_) {
        c *= w;
    }
    return out;
}

Field dot(const VectorField& a, const VectorField& b)
{
    Field out(a.grid());
    for (int i = 0; i < a.dim(); ++i) {
        out += a[i] * b[i];
    }
    return out;
}

Field norm_squared(const VectorField& a)
{
    return dot(a, a);
}

double sup_norm(const VectorField& a)
{
    const Field sq = norm_squared(a);
    return std::sqrt(sq.max());
}

// --- Operators -------------------------------------------------------------

Field partial(const Field& f, int axis)
{
    const GridSpec& g = f.grid();
    const double inv2h = 0.5 * static_cast<double>(g.n);
    Field out(g);
    for (std::size_t k = 0; k < f.size(); ++k) {
        out[k] = (f[g.neighbor(k, axis, +1)] - f[g.neighbor(k, axis, -1)]) * inv2h;
    }
    return out;
}

VectorField gradient(const Field& f)
{
    std::vector<Field> comps;
    comps.reserve(static_cast<std::size_t>(f.grid().dim));
    for (int axis = 0; axis < f.grid().dim; ++axis) {
        comps.push_back(partial(f, axis));
    }
    return VectorField(std::move(comps));
}

Field divergence(const VectorField& F)
{
    Field out(F.grid());
    for (int axis = 0; axis < F.dim(); ++axis) {
        out += partial(F[axis], axis);
    }
    return out;
}

Field laplacian(const Field& f)
{
    const GridSpec& g = f.grid();
    const double inv_h2 = static_cast<double>(g.n) * static_cast<double>(g.n);
    Field out(g);
    for (std::size_t k = 0; k < f.size(); ++k) {
        double acc = 0.0;
        for (int axis = 0; axis < g.dim; ++axis) {
            // Differences of neighbours first: keeps roundoff O(eps |f'| h) rather than O(eps |f|).
            const double fwd = f[g.neighbor(k, axis, +1)] - f[k];
            const double bwd = f[k] - f[g.neighbor(k, axis, -1)];
            acc += fwd - bwd;
        }
        out[k] = acc * inv_h2;
    }
    return out;
}

double grid_sum(const Field& f)
{
    double s = 0.0;
    for (double v : f.values()) {
        s += v;
    }
    return s;
}

double integral(const Field& f)
{
    return f.grid().cell_volume() * grid_sum(f);
}

// --- Matrix forms ----------------------------------------------------------

SparseMatrix partial_matrix(const GridSpec& grid, int axis)
{
    const auto N = static_cast<Eigen::Index>(grid.size());
    const double inv2h = 0.5 * static_cast<double>(grid.n);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(2 * N));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        t.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, +1)), inv2h);
        t.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, -1)), -inv2h);
    }
    SparseMatrix D(N, N);
    D.setFromTriplets(t.begin(), t.end());
    return D;
}

SparseMatrix laplacian_matrix(const GridSpec& grid)
{
    const auto N = static_cast<Eigen::Index>(grid.size());
    const double inv_h2 = static_cast<double>(grid.n) * static_cast<double>(grid.n);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(1 + 2 * grid.dim));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        t.emplace_back(row, row, -2.0 * grid.dim * inv_h2);
        for (int axis = 0; axis < grid.dim; ++axis) {
            t.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, +1)), inv_h2);
            t.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, -1)), inv_h2);
        }
    }
    SparseMatrix L(N, N);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

SparseMatrix identity_matrix(const GridSpec& grid)
{
    const auto N = static_cast<Eigen::Index>(grid.size());
    SparseMatrix I(N, N);
    I.setIdentity();
    return I;
}

SparseMatrix diagonal_matrix(const Field& f)
{
    const auto N = static_cast<Eigen::Index>(f.size());
    SparseMatrix D(N, N);
    D.reserve(Eigen::VectorXi::Constant(N, 1));
    for (Eigen::Index i = 0; i < N; ++i) {
        D.insert(i, i) = f[static_cast<std::size_t>(i)];
    }
    D.makeCompressed();
    return D;
}

} // namespace mfg
