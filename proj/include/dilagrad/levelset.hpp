#pragma once

#include "dilagrad/mesh.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace dilagrad {

/// Direction of a one-sided limit t -> 0.
enum class Side { FromAbove, FromBelow };

const char* to_string(Side side) noexcept;

enum class CellStatus { Inside, Outside, Cut };
enum class FaceStatus { Inside, Outside, Cut, Aligned };

const char* to_string(CellStatus s) noexcept;
const char* to_string(FaceStatus s) noexcept;

/// Gradients of the barycentric coordinates of cell c (constant per cell).
std::array<Vec3, 4> barycentric_gradients(const Mesh& mesh, int c);

/// Continuous, cell-wise linear function given by nodal values.
/// Omega = {phi < 0}; exact nodal zeros are kept as they are.
class LevelSetFunction {
public:
    LevelSetFunction() = default;
    LevelSetFunction(MeshPtr mesh, std::vector<double> nodal_values);

    const MeshPtr& mesh() const noexcept { return mesh_; }
    const std::vector<double>& nodal_values() const noexcept { return values_; }
    double value(int v) const { return values_[v]; }

    /// Barycentric interpolation inside cell c (no containment check).
    double eval(int cell, const Vec3& x) const;
    Vec3 grad(int cell) const;

private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// The P1 hat function of one vertex.
struct HatPerturbation {
    int center_node = -1;

    double nodal_value(int v) const noexcept { return v == center_node ? 1.0 : 0.0; }
    /// w(x) for x in the closed cell.
    double eval(const Mesh& mesh, int cell, const Vec3& x) const;
    Vec3 grad(const Mesh& mesh, int cell) const;
    /// Cells of the closed star of the center node.
    const std::vector<int>& support_cells(const Mesh& mesh) const { return mesh.vertex_cells(center_node); }
    bool touches_cell(const Mesh& mesh, int cell) const;
};

struct DomainDecomposition {
    std::vector<CellStatus> cells;
    std::vector<FaceStatus> faces;
    std::vector<int> aligned_faces;
    /// True iff no face lies in the zero level set.
    bool no_aligned_faces = true;
    /// phi >= 0 everywhere: Omega is empty. A status, not an error.
    bool empty_domain = false;
    /// Vertices on the hold-all boundary with phi <= 0 (compact embedding violated there).
    std::vector<int> boundary_vertices_not_positive;

    int count(CellStatus s) const;
};

/// Throws DegenerateCellError if phi vanishes on a whole cell.
DomainDecomposition classify(const LevelSetFunction& phi);

LevelSetFunction perturb(const LevelSetFunction& phi, const HatPerturbation& w, double t);

inline constexpr double kInfiniteStep = std::numeric_limits<double>::infinity();

/// 0.5 * min |phi(x)| / w(x) over vertices with w(x) > 0 and phi(x) != 0.
/// Returns kInfiniteStep when no vertex bounds the step or supp w misses
/// every cut and inside cell.
double t_max_estimate(const LevelSetFunction& phi, const HatPerturbation& w);

/// Finite top of a Taylor-test ladder: t_max_estimate when finite, else half
/// the smallest nonzero |phi| on the star of the center node (or the mesh
/// diameter if there is none).
double ladder_top(const LevelSetFunction& phi, const HatPerturbation& w);

/// nodal_values[i] = fn(vertex i); non-finite values are rejected.
LevelSetFunction sample_analytic(MeshPtr mesh, const std::function<double(const Vec3&)>& fn);

/// Sign of phi at each vertex, with exact zeros replaced by the sign phi + t w
/// takes for small t on the given side (zero where w vanishes). This is the
/// vertex sign pattern of phi_t on (0, t_max] (or its mirror for t < 0).
std::vector<int> effective_signs(const LevelSetFunction& phi, const HatPerturbation& w, Side side);
/// Plain signs of the nodal values (-1, 0, +1).
std::vector<int> plain_signs(const LevelSetFunction& phi);

} // namespace dilagrad
