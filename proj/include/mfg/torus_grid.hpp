#pragma once

// Uniform periodic grids on the unit torus and the finite-difference
// operators shared by the residual, the Jacobian and the diagnostics.
//
// Stencils:
//   partial / gradient / divergence : centered, (f(x+h) - f(x-h)) / 2h
//   laplacian                       : compact,  (f(x+h) - 2f(x) + f(x-h)) / h^2
//
// The centered first difference is skew-adjoint under grid_sum, so every
// discrete integration by parts that pairs a divergence with a gradient is
// exact up to roundoff. The compact Laplacian is not divergence(gradient(.)).

#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfg {

struct GridSpec {
    int dim = 1;
    int n = 64; // points per axis

    /// Throws InvalidArgument unless dim is 1 or 2 and n >= 8.
    static GridSpec make(int dim, int n);

    [[nodiscard]] double h() const noexcept { return 1.0 / static_cast<double>(n); }
    [[nodiscard]] double cell_volume() const noexcept;
    [[nodiscard]] std::size_t size() const noexcept;
    /// Flat-index step along `axis`; axis 0 is the slowest.
    [[nodiscard]] std::size_t stride(int axis) const noexcept;
    [[nodiscard]] int axis_index(std::size_t flat, int axis) const noexcept;
    [[nodiscard]] std::size_t neighbor(std::size_t flat, int axis, int offset) const noexcept;
    [[nodiscard]] double coordinate(std::size_t flat, int axis) const noexcept;
    [[nodiscard]] std::array<double, 2> point(std::size_t flat) const noexcept;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Real grid function. Values are row-major with axis 0 slowest.
class Field {
public:
    Field() = default;
    explicit Field(const GridSpec& grid, double value = 0.0);
    Field(const GridSpec& grid, std::vector<double> values);

    /// Samples f at every grid point; f receives (x0, x1) with x1 = 0 in 1-D.
    static Field sample(const GridSpec& grid,
                        const std::function<double(const std::array<double, 2>&)>& f);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] const std::vector<double>& data() const noexcept { return values_; }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    [[nodiscard]] bool all_finite() const noexcept;
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double sup_norm() const;

    /// Returns a new field with g applied pointwise.
    template <typename Fn>
    [[nodiscard]] Field map(Fn&& g) const
    {
        Field out(grid_);
        for (std::size_t i = 0; i < values_.size(); ++i) {
            out.values_[i] = g(values_[i]);
        }
        return out;
    }

    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);
    Field& operator*=(const Field& other);
    Field& operator*=(double s);
    Field& operator+=(double s);

private:
    GridSpec grid_{};
    std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
Field operator+(Field a, double s);
Field operator-(Field a);

/// dim component fields on a shared grid.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridSpec& grid);
    explicit VectorField(std::vector<Field> components);

    [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(components_.size()); }
    [[nodiscard]] Field& operator[](int axis) { return components_.at(static_cast<std::size_t>(axis)); }
    [[nodiscard]] const Field& operator[](int axis) const { return components_.at(static_cast<std::size_t>(axis)); }

    /// Scales every component pointwise by w.
    [[nodiscard]] VectorField scaled(const Field& w) const;

private:
    GridSpec grid_{};
    std::vector<Field> components_;
};

/// Pointwise Euclidean inner product a . b.
Field dot(const VectorField& a, const VectorField& b);
/// Pointwise |a|^2.
Field norm_squared(const VectorField& a);
double sup_norm(const VectorField& a);

Field partial(const Field& f, int axis);
VectorField gradient(const Field& f);
Field divergence(const VectorField& F);
Field laplacian(const Field& f);

double grid_sum(const Field& f);
/// h^dim * grid_sum: the periodic trapezoid rule on the unit torus.
double integral(const Field& f);

// Sparse matrix forms of the same stencils, used by Jacobian assembly. Row
// and column indices are the flat grid indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseMatrix partial_matrix(const GridSpec& grid, int axis);
SparseMatrix laplacian_matrix(const GridSpec& grid);
SparseMatrix identity_matrix(const GridSpec& grid);
SparseMatrix diagonal_matrix(const Field& f);

} // namespace mfg
