#pragma once

#include "dilagrad/levelset.hpp"
#include "dilagrad/quadrature.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dilagrad {

/// A k-simplex stored by its k+1 corner points.
struct Simplex {
    std::array<Vec3, 4> v;
    int n = 0; ///< number of corners

    std::span<const Vec3> points() const { return {v.data(), static_cast<size_t>(n)}; }
    double measure() const { return simplex_measure(points()); }
};

struct CellQuadPoint {
    int cell;
    Vec3 point;
    double weight;
};

using CellQuadRule = std::vector<CellQuadPoint>;

/// Intersection of one cell with Omega and with the zero level set.
struct CutCell {
    int cell = -1;
    CellStatus status = CellStatus::Outside;
    /// Zero set of phi in the closed cell: segment endpoints (2D) or an
    /// ordered triangle / quadrilateral (3D). Can be lower dimensional
    /// (a vertex or an edge), in which case its measure is zero.
    std::vector<Vec3> boundary_patch;
    std::vector<Simplex> interior_simplices; ///< decomposition of {phi <= 0} in K
    std::vector<Simplex> exterior_simplices; ///< decomposition of {phi >= 0} in K
    Vec3 normal = Vec3::Zero(); ///< grad phi / |grad phi|, outward from Omega
    double grad_norm = 0.0;

    double patch_measure() const;
    double interior_measure() const;
    double exterior_measure() const;
};

/// Throws DegenerateCellError if phi vanishes on the whole cell.
CutCell cut_cell(const LevelSetFunction& phi, int cell);

/// Where the zero level set meets an interior face S, with the frame
/// n_k = t_k x nS and co-normals m_k = t_k x n_{patch k}. Index k = 0, 1
/// follows mesh.face(f).cells.
struct FacePatch {
    int face = -1;
    std::array<int, 2> cells{kNoCell, kNoCell};
    std::vector<Vec3> cut_locus; ///< one point (2D) or segment endpoints (3D)
    Vec3 nS = Vec3::Zero();      ///< in S, pointing to where phi|_S grows
    double dnS_phi = 0.0;        ///< derivative of phi along nS (> 0)
    std::array<Vec3, 2> face_normal; ///< outward normal n_k of K_k on S
    std::array<Vec3, 2> tS;
    std::array<Vec3, 2> patch_normal;
    std::array<Vec3, 2> conormal;

    double locus_measure() const;
};

/// Face patch of an interior face whose vertex signs change strictly.
/// `signs` overrides the vertex signs (see effective_signs); empty means the
/// plain signs of phi. Returns nullopt for boundary faces and faces without a
/// strict sign change. Throws AlignmentError if phi vanishes on all of S and
/// the signs do not resolve the face.
std::optional<FacePatch> face_patch(const LevelSetFunction& phi, int face, std::span<const int> signs = {});

/// True if the signs (plain when empty) contain both -1 and +1 on cell c.
bool is_sign_cut(const Mesh& mesh, int cell, std::span<const int> signs);

/// Zero set of a linear function on a simplex given by corner points and
/// values; `signs` decide which edges cross (a zero value with nonzero sign
/// is a crossing located at that corner). Points are deduplicated and, for
/// polygons, ordered around their centroid.
std::vector<Vec3> simplex_zero_set(std::span<const Vec3> pts, std::span<const double> vals, std::span<const int> signs);

/// {value <= 0} (keep_negative) or {value >= 0} part of a simplex, as simplices.
std::vector<Simplex> clip_simplex(std::span<const Vec3> pts, std::span<const double> vals, bool keep_negative);

/// Quadrature over Omega: full rules on inside cells, sub-simplex rules on cut cells.
CellQuadRule quadrature_domain(const LevelSetFunction& phi, const DomainDecomposition& dec, int degree);
CellQuadRule quadrature_domain(const LevelSetFunction& phi, int degree);

/// Quadrature over a (possibly degenerate) planar patch polygon; a
/// quadrilateral is split along its shorter diagonal.
QuadRule quadrature_patch(std::span<const Vec3> patch, int dim, int degree);

/// Quadrature over the polygonal boundary {phi = 0} of Omega. Each face lying
/// in the zero set is counted once, from the cell on the Omega side.
CellQuadRule quadrature_boundary(const LevelSetFunction& phi, int degree);

/// Quadrature over the cut locus of a face patch. In 2D a single point of weight 1.
QuadRule quadrature_facecut(const FacePatch& fp, int dim, int degree);

/// Cells contributing a boundary patch when boundary integrals are routed
/// through `signs`; see effective_signs.
std::vector<int> sign_cut_cells(const LevelSetFunction& phi, std::span<const int> signs);

/// JSON debug dump of all cut cells and face patches.
std::string cut_geometry_json(const LevelSetFunction& phi);

} // namespace dilagrad
