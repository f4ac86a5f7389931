#pragma once

#include "dilagrad/mesh.hpp"

#include <functional>
#include <vector>

namespace dilagrad {

/// Highest per-cell polynomial degree a PiecewiseField can carry.
inline constexpr int kMaxFieldDegree = 4;

/// Element-wise polynomial with arbitrary jumps between cells.
///
/// Each cell stores monomial coefficients in the cell's local (barycentric)
/// coordinates xi = (lambda_1, ..., lambda_d). Evaluation is cell-relative:
/// on a shared face the value depends on which cell is asked, which is how
/// one-sided limits are taken.
class PiecewiseField {
public:
    /// Per-cell closure; the returned values must be a polynomial of degree
    /// <= `degree` on each cell for the representation to be exact.
    using CellFunction = std::function<double(int cell, const Vec3& x)>;
    using PointFunction = std::function<double(const Vec3& x)>;

    PiecewiseField() = default;

    static PiecewiseField constant(MeshPtr mesh, double value);
    /// Interpolates at the degree-`degree` principal lattice of every cell.
    static PiecewiseField interpolate(MeshPtr mesh, int degree, const CellFunction& fn, int continuity_class = 1);
    static PiecewiseField from_global(MeshPtr mesh, int degree, const PointFunction& fn);

    const MeshPtr& mesh() const noexcept { return mesh_; }
    int degree() const noexcept { return degree_; }
    /// Regularity of each cell restriction advertised to callers (0 or 1);
    /// polynomials are smooth per cell, so this only records intent.
    int continuity_class() const noexcept { return continuity_class_; }

    /// Throws InvalidArgument if x is outside the closed cell.
    double eval(int cell, const Vec3& x) const;
    Vec3 grad(int cell, const Vec3& x) const;

    /// Same, without the point-in-cell check (for quadrature points).
    double eval_unchecked(int cell, const Vec3& x) const;
    Vec3 grad_unchecked(int cell, const Vec3& x) const;

    PiecewiseField scaled(double a) const;
    /// a * this + b * other; both fields must share the mesh.
    PiecewiseField combined(double a, const PiecewiseField& other, double b) const;

private:
    MeshPtr mesh_;
    int degree_ = 0;
    int continuity_class_ = 1;
    int num_coeffs_ = 1;
    std::vector<double> coeffs_; // num_cells * num_coeffs_
};

/// A vector field assembled from one PiecewiseField per component.
struct PiecewiseVectorField {
    std::vector<PiecewiseField> components; ///< size = mesh dim

    Vec3 eval(int cell, const Vec3& x) const;
    double divergence(int cell, const Vec3& x) const;
};

/// Monomial exponents of total degree <= p in d variables, graded order.
std::vector<std::array<int, 3>> monomial_exponents(int d, int p);

} // namespace dilagrad
