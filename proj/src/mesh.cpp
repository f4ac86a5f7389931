#include "dilagrad/mesh.hpp"

#include "dilagrad/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dilagrad {

namespace {

template <size_t N>
std::string format_tuple(const std::array<int, N>& a, int n)
{
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < n; ++i) {
        if (i > 0) os << ", ";
        os << a[i];
    }
    os << ')';
    return os.str();
}

Vec3 face_geometric_normal(int dim, std::span<const Vec3> pts)
{
    if (dim == 2) {
        const Vec3 e = pts[1] - pts[0];
        return Vec3(e.y(), -e.x(), 0.0).normalized();
    }
    return (pts[1] - pts[0]).cross(pts[2] - pts[0]).normalized();
}

} // namespace

double simplex_measure(std::span<const Vec3> points)
{
    // closed forms; a Gram determinant loses half the digits on slivers
    switch (points.size()) {
    case 1: return 1.0;
    case 2: return (points[1] - points[0]).norm();
    case 3: return 0.5 * (points[1] - points[0]).cross(points[2] - points[0]).norm();
    case 4: {
        Mat3 e;
        for (int i = 0; i < 3; ++i) e.col(i) = points[i + 1] - points[0];
        return std::abs(e.determinant()) / 6.0;
    }
    default: throw InvalidArgument("simplex_measure: expected 1 to 4 points");
    }
}

double Mesh::total_volume() const
{
    double s = 0.0;
    for (double v : volumes_) s += v;
    return s;
}

double Mesh::face_measure(int f) const
{
    std::array<Vec3, 3> pts;
    for (int i = 0; i < dim_; ++i) pts[i] = vertices_[faces_[f].vertices[i]];
    return simplex_measure(std::span<const Vec3>(pts.data(), dim_));
}

Vec3 Mesh::face_normal(int f, int side) const
{
    return side == 0 ? face_geo_normal_[f] : Vec3(-face_geo_normal_[f]);
}

Vec3 Mesh::cell_face_normal(int c, int local) const
{
    const int f = cell_faces_[c][local];
    return faces_[f].cells[0] == c && faces_[f].local[0] == local ? face_normal(f, 0) : face_normal(f, 1);
}

std::array<double, 4> Mesh::barycentric(int c, const Vec3& x) const
{
    const Vec3 xi = inv_jac_[c] * (x - vertices_[cells_[c][0]]);
    std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        lam[i + 1] = xi[i];
        s += xi[i];
    }
    lam[0] = 1.0 - s;
    return lam;
}

bool Mesh::contains(int c, const Vec3& x) const
{
    const auto lam = barycentric(c, x);
    // barycentric tolerance relative to cell size
    const double h = std::cbrt(std::abs(volumes_[c])) + 1e-300;
    const double tol = geom_tol() / h + 1e-13;
    for (int i = 0; i <= dim_; ++i)
        if (lam[i] < -tol) return false;
    if (dim_ == 2 && std::abs(x.z()) > geom_tol()) return false;
    return true;
}

std::optional<std::string> Mesh::boundary_label(int f) const
{
    const auto it = markers_.find(f);
    if (it == markers_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> Mesh::faces_with_label(const std::string& label) const
{
    std::vector<int> out;
    for (const auto& [f, l] : markers_)
        if (l == label) out.push_back(f);
    return out;
}

std::vector<int> Mesh::boundary_faces() const
{
    std::vector<int> out;
    for (int f = 0; f < num_faces(); ++f)
        if (faces_[f].is_boundary()) out.push_back(f);
    return out;
}

std::vector<char> Mesh::label_vertex_mask(const std::string& label) const
{
    std::vector<char> mask(vertices_.size(), 0);
    for (int f : faces_with_label(label))
        for (int v : face_vertices(f)) mask[v] = 1;
    return mask;
}

std::vector<char> Mesh::boundary_vertex_mask() const
{
    std::vector<char> mask(vertices_.size(), 0);
    for (int f = 0; f < num_faces(); ++f)
        if (faces_[f].is_boundary())
            for (int v : face_vertices(f)) mask[v] = 1;
    return mask;
}

void Mesh::compute_geometry()
{
    const int nc = num_cells();
    volumes_.assign(nc, 0.0);
    jac_.assign(nc, Mat3::Identity());
    inv_jac_.assign(nc, Mat3::Identity());
    double fact = dim_ == 2 ? 2.0 : 6.0;
    for (int c = 0; c < nc; ++c) {
        Mat3 j = Mat3::Identity();
        const Vec3& x0 = vertices_[cells_[c][0]];
        for (int i = 0; i < dim_; ++i) j.col(i) = vertices_[cells_[c][i + 1]] - x0;
        jac_[c] = j;
        volumes_[c] = j.determinant() / fact;
        if (volumes_[c] > 0.0) inv_jac_[c] = j.inverse();
    }
    face_geo_normal_.assign(faces_.size(), Vec3::Zero());
    for (int f = 0; f < num_faces(); ++f) {
        std::array<Vec3, 3> pts;
        for (int i = 0; i < dim_; ++i) pts[i] = vertices_[faces_[f].vertices[i]];
        Vec3 n = face_geometric_normal(dim_, std::span<const Vec3>(pts.data(), dim_));
        // orient outward from cells[0]: away from its opposite vertex
        const int c = faces_[f].cells[0];
        const Vec3& opp = vertices_[cells_[c][faces_[f].local[0]]];
        if (n.dot(pts[0] - opp) < 0.0) n = -n;
        face_geo_normal_[f] = n;
    }
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& v : vertices_) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    diameter_ = vertices_.empty() ? 0.0 : (hi - lo).norm();
}

Mesh Mesh::with_vertices(std::vector<Vec3> vertices) const
{
    if (vertices.size() != vertices_.size()) throw InvalidArgument("with_vertices: vertex count mismatch");
    Mesh m = *this;
    m.vertices_ = std::move(vertices);
    m.compute_geometry();
    for (int c = 0; c < m.num_cells(); ++c) {
        if (!(m.volumes_[c] > 0.0)) {
            throw TangledMeshError("cell " + std::to_string(c) + " has non-positive volume "
                                       + std::to_string(m.volumes_[c]),
                                   c);
        }
    }
    return m;
}

MeshData Mesh::data() const
{
    return MeshData{dim_, vertices_, cells_, markers_};
}

Mesh compute_adjacency(MeshData data)
{
    if (data.dim != 2 && data.dim != 3) throw InvalidArgument("mesh dimension must be 2 or 3");
    const int d = data.dim;
    const int nv = static_cast<int>(data.vertices.size());
    Mesh m;
    m.dim_ = d;
    m.vertices_ = std::move(data.vertices);
    m.cells_ = std::move(data.cells);
    for (auto& v : m.vertices_) {
        if (!v.allFinite()) throw InvalidArgument("mesh vertex with non-finite coordinates");
        if (d == 2) v.z() = 0.0;
    }
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int i = 0; i <= d; ++i) {
            const int v = m.cells_[c][i];
            if (v < 0 || v >= nv)
                throw TopologyError("cell " + std::to_string(c) + " references invalid vertex " + std::to_string(v));
        }
        for (int i = d + 1; i < 4; ++i) m.cells_[c][i] = -1;
    }

    std::map<std::array<int, 3>, int> face_index;
    m.cell_faces_.assign(m.cells_.size(), {-1, -1, -1, -1});
    for (int c = 0; c < m.num_cells(); ++c) {
        for (int lf = 0; lf <= d; ++lf) {
            std::array<int, 3> verts{-1, -1, -1};
            int k = 0;
            for (int i = 0; i <= d; ++i)
                if (i != lf) verts[k++] = m.cells_[c][i];
            std::array<int, 3> key = verts;
            std::sort(key.begin(), key.begin() + d);
            auto [it, inserted] = face_index.try_emplace(key, m.num_faces());
            if (inserted) {
                Face f;
                f.vertices = verts;
                f.cells[0] = c;
                f.local[0] = lf;
                m.faces_.push_back(f);
            } else {
                Face& f = m.faces_[it->second];
                if (f.cells[1] != kNoCell) {
                    throw TopologyError("non-conforming mesh: face " + std::to_string(it->second) + " "
                                        + format_tuple(key, d) + " is shared by more than two cells");
                }
                if (f.cells[0] == c) {
                    throw TopologyError("cell " + std::to_string(c) + " repeats face " + format_tuple(key, d));
                }
                f.cells[1] = c;
                f.local[1] = lf;
            }
            m.cell_faces_[c][lf] = it->second;
        }
    }

    if (d == 3) {
        std::map<std::array<int, 2>, int> edge_index;
        for (int f = 0; f < m.num_faces(); ++f) {
            const auto& fv = m.faces_[f].vertices;
            for (int i = 0; i < 3; ++i) {
                std::array<int, 2> key{fv[i], fv[(i + 1) % 3]};
                if (key[0] > key[1]) std::swap(key[0], key[1]);
                auto [it, inserted] = edge_index.try_emplace(key, m.num_subfaces());
                if (inserted) m.subfaces_.push_back(Subface{key, {}});
                m.subfaces_[it->second].faces.push_back(f);
            }
        }
    }

    m.vertex_cells_.assign(nv, {});
    for (int c = 0; c < m.num_cells(); ++c)
        for (int i = 0; i <= d; ++i) m.vertex_cells_[m.cells_[c][i]].push_back(c);

    for (const auto& [f, label] : data.boundary_markers) {
        if (f < 0 || f >= m.num_faces())
            throw TopologyError("boundary marker references invalid face " + std::to_string(f));
        if (!m.faces_[f].is_boundary())
            throw TopologyError("boundary marker '" + label + "' placed on interior face " + std::to_string(f));
    }
    m.markers_ = std::move(data.boundary_markers);

    m.compute_geometry();
    for (int c = 0; c < m.num_cells(); ++c) {
        if (!(m.volumes_[c] > 0.0)) {
            throw InvalidArgument("cell " + std::to_string(c) + " has non-positive signed volume "
                                  + std::to_string(m.volumes_[c]));
        }
    }
    return m;
}

Mesh build_structured_mesh(int dim, std::span<const int> cells_per_axis, std::span<const double> extent,
                           std::span<const double> origin)
{
    if (dim != 2 && dim != 3) throw InvalidArgument("structured mesh dimension must be 2 or 3");
    if (static_cast<int>(cells_per_axis.size()) != dim || static_cast<int>(extent.size()) != dim)
        throw InvalidArgument("cells_per_axis and extent need one entry per axis");
    if (!origin.empty() && static_cast<int>(origin.size()) != dim)
        throw InvalidArgument("origin needs one entry per axis");
    for (int i = 0; i < dim; ++i) {
        if (cells_per_axis[i] < 1) throw InvalidArgument("cells_per_axis must be >= 1");
        if (!(extent[i] > 0.0) || !std::isfinite(extent[i])) throw InvalidArgument("extent must be positive");
    }
    Vec3 o = Vec3::Zero();
    for (int i = 0; i < static_cast<int>(origin.size()); ++i) o[i] = origin[i];

    MeshData md;
    md.dim = dim;
    if (dim == 2) {
        const int nx = cells_per_axis[0], ny = cells_per_axis[1];
        const double hx = extent[0] / nx, hy = extent[1] / ny;
        auto corner = [&](int i, int j) { return j * (nx + 1) + i; };
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) md.vertices.push_back(o + Vec3(i * hx, j * hy, 0.0));
        const int base = static_cast<int>(md.vertices.size());
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) md.vertices.push_back(o + Vec3((i + 0.5) * hx, (j + 0.5) * hy, 0.0));
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const int a = corner(i, j), b = corner(i + 1, j), c = corner(i + 1, j + 1), d = corner(i, j + 1);
                const int mid = base + j * nx + i;
                md.cells.push_back({a, b, mid, -1});
                md.cells.push_back({b, c, mid, -1});
                md.cells.push_back({c, d, mid, -1});
                md.cells.push_back({d, a, mid, -1});
            }
        }
    } else {
        const int nx = cells_per_axis[0], ny = cells_per_axis[1], nz = cells_per_axis[2];
        const Vec3 h(extent[0] / nx, extent[1] / ny, extent[2] / nz);
        auto id = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
        for (int k = 0; k <= nz; ++k)
            for (int j = 0; j <= ny; ++j)
                for (int i = 0; i <= nx; ++i) md.vertices.push_back(o + Vec3(i * h.x(), j * h.y(), k * h.z()));
        static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    for (const auto& p : perms) {
                        std::array<int, 3> step{0, 0, 0};
                        std::array<int, 4> tet{};
                        tet[0] = id(i, j, k);
                        for (int s = 0; s < 3; ++s) {
                            step[p[s]] = 1;
                            tet[s + 1] = id(i + step[0], j + step[1], k + step[2]);
                        }
                        Mat3 jm;
                        for (int s = 0; s < 3; ++s) jm.col(s) = md.vertices[tet[s + 1]] - md.vertices[tet[0]];
                        if (jm.determinant() < 0.0) std::swap(tet[2], tet[3]);
                        md.cells.push_back(tet);
                    }
                }
            }
        }
    }

    Mesh topo = compute_adjacency(md);
    // label boundary faces by the box side they lie on
    static const char* names[3][2] = {{"xmin", "xmax"}, {"ymin", "ymax"}, {"zmin", "zmax"}};
    const double tol = topo.geom_tol();
    for (int f = 0; f < topo.num_faces(); ++f) {
        if (!topo.face(f).is_boundary()) continue;
        Vec3 centroid = Vec3::Zero();
        for (int v : topo.face_vertices(f)) centroid += topo.vertex(v);
        centroid /= dim;
        for (int a = 0; a < dim; ++a) {
            if (std::abs(centroid[a] - o[a]) <= tol) md.boundary_markers[f] = names[a][0];
            else if (std::abs(centroid[a] - (o[a] + extent[a])) <= tol) md.boundary_markers[f] = names[a][1];
        }
    }
    return compute_adjacency(std::move(md));
}

} // namespace dilagrad
