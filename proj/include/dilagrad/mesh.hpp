#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dilagrad {

/// Points and vectors are always stored with three components; 2D data lives
/// in the z = 0 plane so that cross products follow one code path.
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr int kNoCell = -1;

/// A codimension-1 simplex. For boundary faces cells[1] == kNoCell.
struct Face {
    std::array<int, 3> vertices{-1, -1, -1}; ///< first `dim` entries used
    std::array<int, 2> cells{kNoCell, kNoCell};
    std::array<int, 2> local{-1, -1}; ///< local face index (= opposite vertex slot) in each cell

    bool is_boundary() const noexcept { return cells[1] == kNoCell; }
};

/// A codimension-2 simplex of a tetrahedral mesh (an edge) with its incident faces.
struct Subface {
    std::array<int, 2> vertices{-1, -1};
    std::vector<int> faces;
};

/// Raw mesh description as read from disk or produced by a generator.
struct MeshData {
    int dim = 2;
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> cells; ///< first dim+1 entries used
    std::map<int, std::string> boundary_markers; ///< face index -> label
};

/// Conforming simplicial triangulation of the hold-all with face/subface
/// adjacency. Immutable after construction.
///
/// Faces are numbered by first appearance when walking cells in order and,
/// within a cell, local faces 0..dim (local face i is opposite vertex i).
class Mesh {
public:
    int dim() const noexcept { return dim_; }
    int num_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
    int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
    int num_faces() const noexcept { return static_cast<int>(faces_.size()); }
    int num_subfaces() const noexcept { return static_cast<int>(subfaces_.size()); }

    const Vec3& vertex(int v) const { return vertices_[v]; }
    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    std::span<const int> cell(int c) const { return {cells_[c].data(), static_cast<size_t>(dim_ + 1)}; }
    const Face& face(int f) const { return faces_[f]; }
    std::span<const int> face_vertices(int f) const { return {faces_[f].vertices.data(), static_cast<size_t>(dim_)}; }
    const Subface& subface(int e) const { return subfaces_[e]; }
    int cell_face(int c, int local) const { return cell_faces_[c][local]; }
    const std::vector<int>& vertex_cells(int v) const { return vertex_cells_[v]; }

    /// Signed volume (area in 2D); strictly positive for every cell.
    double cell_volume(int c) const { return volumes_[c]; }
    double total_volume() const;
    double face_measure(int f) const;
    /// Outward unit normal of face f seen from faces[f].cells[side].
    /// The two sides of an interior face return exact negatives.
    Vec3 face_normal(int f, int side) const;
    /// Outward unit normal of local face `local` of cell c.
    Vec3 cell_face_normal(int c, int local) const;

    /// Affine map of cell c: x = x0 + J xi, with J's third column e3 in 2D.
    const Mat3& jacobian(int c) const { return jac_[c]; }
    const Mat3& inverse_jacobian(int c) const { return inv_jac_[c]; }
    std::array<double, 4> barycentric(int c, const Vec3& x) const;
    bool contains(int c, const Vec3& x) const;
    /// Vertex position of local vertex i of cell c.
    const Vec3& cell_vertex(int c, int i) const { return vertices_[cells_[c][i]]; }

    /// Bounding-box diagonal of the hold-all.
    double diameter() const noexcept { return diameter_; }
    /// Absolute tolerance for point-in-cell and coincidence tests.
    double geom_tol() const noexcept { return 1e-12 * diameter_; }

    std::optional<std::string> boundary_label(int f) const;
    const std::map<int, std::string>& boundary_markers() const noexcept { return markers_; }
    std::vector<int> faces_with_label(const std::string& label) const;
    std::vector<int> boundary_faces() const;
    /// Vertices lying on some face carrying the label.
    std::vector<char> label_vertex_mask(const std::string& label) const;
    std::vector<char> boundary_vertex_mask() const;

    /// Same topology, new vertex positions. Throws TangledMeshError if a cell
    /// volume is not strictly positive.
    Mesh with_vertices(std::vector<Vec3> vertices) const;

    MeshData data() const;

private:
    friend Mesh compute_adjacency(MeshData data);

    void compute_geometry();

    int dim_ = 2;
    std::vector<Vec3> vertices_;
    std::vector<std::array<int, 4>> cells_;
    std::vector<Face> faces_;
    std::vector<Subface> subfaces_;
    std::vector<std::array<int, 4>> cell_faces_;
    std::vector<std::vector<int>> vertex_cells_;
    std::map<int, std::string> markers_;
    std::vector<double> volumes_;
    std::vector<Mat3> jac_;
    std::vector<Mat3> inv_jac_;
    std::vector<Vec3> face_geo_normal_; ///< unit normal, outward from cells[0]
    double diameter_ = 0.0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Validates raw data and builds faces, subfaces and adjacency.
/// Throws TopologyError for non-conforming input and InvalidArgument for
/// degenerate or negatively oriented cells.
Mesh compute_adjacency(MeshData data);

/// Criss-cross (2D, 4 triangles per square around a center vertex) or Kuhn
/// (3D, 6 tetrahedra per cube) mesh of the box origin + [0, extent].
/// Boundary faces are labelled xmin, xmax, ymin, ymax, zmin, zmax.
Mesh build_structured_mesh(int dim, std::span<const int> cells_per_axis, std::span<const double> extent,
                           std::span<const double> origin = {});

inline MeshPtr make_shared_mesh(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

/// Measure of the k-simplex spanned by points (k = points.size() - 1) embedded in 3D.
double simplex_measure(std::span<const Vec3> points);

} // namespace dilagrad
