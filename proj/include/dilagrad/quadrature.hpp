#pragma once

#include "dilagrad/mesh.hpp"

#include <span>
#include <vector>

namespace dilagrad {

struct QuadPoint {
    Vec3 point;
    double weight;
};

using QuadRule = std::vector<QuadPoint>;

/// Highest polynomial degree quadrature_simplex integrates exactly.
inline constexpr int kMaxQuadratureDegree = 20;

/// Quadrature on the k-simplex spanned by `vertices` (k = vertices.size() - 1,
/// 0 <= k <= 3) embedded in 3D. Exact for polynomials of total degree
/// <= `degree`; weights sum to the simplex measure. Degrees 0 and 1 use the
/// centroid; higher degrees use collapsed Gauss-Jacobi tensor rules.
QuadRule quadrature_simplex(std::span<const Vec3> vertices, int degree);

/// Convenience overload for a mesh cell.
QuadRule quadrature_cell(const Mesh& mesh, int cell, int degree);

/// Gauss-Jacobi nodes/weights on [-1, 1] for weight (1 - x)^alpha (1 + x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace dilagrad
