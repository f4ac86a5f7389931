#pragma once

#include "dilagrad/field.hpp"
#include "dilagrad/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dilagrad {

/// Continuous P1 vector field on a body-fitted mesh. Vertices on faces with
/// one of `dirichlet_zero_markers` carry V = 0.
struct VelocityField {
    MeshPtr mesh;
    std::vector<Vec3> nodal;
    std::vector<std::string> dirichlet_zero_markers;

    /// Samples fn at the vertices and zeroes the marked ones.
    static VelocityField interpolate(MeshPtr mesh, const std::function<Vec3(const Vec3&)>& fn,
                                     std::vector<std::string> dirichlet_zero_markers = {});

    Vec3 eval(int cell, const Vec3& x) const;
    /// (grad V)_ij = d V_i / d x_j, constant per cell; zero third row/column in 2D.
    Mat3 grad(int cell) const;
    double divergence(int cell) const;
    /// Per-cell linear components, for use where a PiecewiseVectorField is expected.
    PiecewiseVectorField as_piecewise() const;
};

/// Vertices moved by x + t V(x). Throws TangledMeshError on a non-positive cell volume.
Mesh deform_mesh(const Mesh& mesh, const VelocityField& v, double t);

struct JacobianIdentities {
    double divergence = 0.0;            ///< div V
    double tangential_divergence = 0.0; ///< div V - n . (grad V) n
};

/// div V on `cell` and the tangential divergence for the unit normal n.
JacobianIdentities jacobian_identities(const VelocityField& v, int cell, const Vec3& n);

/// det(I + t grad V) on a cell.
double volume_factor(const VelocityField& v, int cell, double t);
/// det(DT_t) |DT_t^{-T} n| on a cell.
double surface_factor(const VelocityField& v, int cell, const Vec3& n, double t);

/// int_Omega (fdot + f div V) over the whole fitted mesh.
double dj1_weak(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fdot);
/// int_{dOmega} (fdot + f div_T V) over all boundary faces.
double dj2_weak(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fdot);
/// int_Omega f' + int_{dOmega} f V.n
double dj1_strong(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fprime);
/// int_{dOmega} f' + (df/dn) V.n; flat facets, so no curvature term.
double dj2_strong(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fprime);

struct FittedJump {
    int face = -1;
    Vec3 value = Vec3::Zero(); ///< q1 n1 + q2 n2 at the given point
};

/// Jump of q across an interior face at point x.
FittedJump fitted_jump(const PiecewiseField& q, int face, const Vec3& x);

struct FittedIbpResult {
    double lhs = 0.0;
    double rhs_boundary = 0.0;
    double rhs_jump = 0.0;
    double residual = 0.0;
};

/// int_Omega (div psi) q + sum_K int_K psi . grad q
///   = int_{dOmega} n . psi q + int_{interior faces} psi . [[q]].
FittedIbpResult ibp_fitted(const VelocityField& psi, const PiecewiseField& q);

/// Determinant of the leading dim x dim block.
double det_block(const Mat3& m, int dim);

} // namespace dilagrad
