#include "dilagrad/levelset.hpp"

#include "dilagrad/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dilagrad {

const char* to_string(Side side) noexcept { return side == Side::FromAbove ? "from_above" : "from_below"; }

const char* to_string(CellStatus s) noexcept
{
    switch (s) {
    case CellStatus::Inside: return "inside";
    case CellStatus::Outside: return "outside";
    case CellStatus::Cut: return "cut";
    }
    return "?";
}

const char* to_string(FaceStatus s) noexcept
{
    switch (s) {
    case FaceStatus::Inside: return "inside";
    case FaceStatus::Outside: return "outside";
    case FaceStatus::Cut: return "cut";
    case FaceStatus::Aligned: return "aligned";
    }
    return "?";
}

std::array<Vec3, 4> barycentric_gradients(const Mesh& mesh, int c)
{
    const Mat3& inv = mesh.inverse_jacobian(c);
    std::array<Vec3, 4> g{};
    g[0] = Vec3::Zero();
    for (int i = 1; i <= mesh.dim(); ++i) {
        g[i] = inv.row(i - 1).transpose();
        if (mesh.dim() == 2) g[i].z() = 0.0;
        g[0] -= g[i];
    }
    return g;
}

LevelSetFunction::LevelSetFunction(MeshPtr mesh, std::vector<double> nodal_values)
    : mesh_(std::move(mesh)), values_(std::move(nodal_values))
{
    if (!mesh_) throw InvalidArgument("LevelSetFunction: null mesh");
    if (static_cast<int>(values_.size()) != mesh_->num_vertices())
        throw InvalidArgument("LevelSetFunction: expected one value per vertex");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("LevelSetFunction: non-finite nodal value");
}

double LevelSetFunction::eval(int cell, const Vec3& x) const
{
    const auto lam = mesh_->barycentric(cell, x);
    const auto verts = mesh_->cell(cell);
    double s = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) s += lam[i] * values_[verts[i]];
    return s;
}

Vec3 LevelSetFunction::grad(int cell) const
{
    const auto g = barycentric_gradients(*mesh_, cell);
    const auto verts = mesh_->cell(cell);
    Vec3 out = Vec3::Zero();
    for (size_t i = 0; i < verts.size(); ++i) out += values_[verts[i]] * g[i];
    return out;
}

double HatPerturbation::eval(const Mesh& mesh, int cell, const Vec3& x) const
{
    const auto verts = mesh.cell(cell);
    for (size_t i = 0; i < verts.size(); ++i)
        if (verts[i] == center_node) return mesh.barycentric(cell, x)[i];
    return 0.0;
}

Vec3 HatPerturbation::grad(const Mesh& mesh, int cell) const
{
    const auto verts = mesh.cell(cell);
    for (size_t i = 0; i < verts.size(); ++i)
        if (verts[i] == center_node) return barycentric_gradients(mesh, cell)[i];
    return Vec3::Zero();
}

bool HatPerturbation::touches_cell(const Mesh& mesh, int cell) const
{
    const auto verts = mesh.cell(cell);
    return std::find(verts.begin(), verts.end(), center_node) != verts.end();
}

int DomainDecomposition::count(CellStatus s) const { return static_cast<int>(std::count(cells.begin(), cells.end(), s)); }

DomainDecomposition classify(const LevelSetFunction& phi)
{
    const Mesh& m = *phi.mesh();
    DomainDecomposition d;
    d.cells.resize(m.num_cells());
    d.faces.resize(m.num_faces());
    bool any_negative = false;
    for (int c = 0; c < m.num_cells(); ++c) {
        bool neg = false, pos = false;
        for (int v : m.cell(c)) {
            neg |= phi.value(v) < 0.0;
            pos |= phi.value(v) > 0.0;
        }
        if (!neg && !pos) throw DegenerateCellError("level set vanishes on all of cell " + std::to_string(c));
        d.cells[c] = (neg && pos) ? CellStatus::Cut : (neg ? CellStatus::Inside : CellStatus::Outside);
        any_negative |= neg;
    }
    for (int f = 0; f < m.num_faces(); ++f) {
        bool neg = false, pos = false;
        for (int v : m.face_vertices(f)) {
            neg |= phi.value(v) < 0.0;
            pos |= phi.value(v) > 0.0;
        }
        if (!neg && !pos) {
            d.faces[f] = FaceStatus::Aligned;
            d.aligned_faces.push_back(f);
        } else {
            d.faces[f] = (neg && pos) ? FaceStatus::Cut : (neg ? FaceStatus::Inside : FaceStatus::Outside);
        }
    }
    d.no_aligned_faces = d.aligned_faces.empty();
    d.empty_domain = !any_negative;
    const auto bmask = m.boundary_vertex_mask();
    for (int v = 0; v < m.num_vertices(); ++v)
        if (bmask[v] && phi.value(v) <= 0.0) d.boundary_vertices_not_positive.push_back(v);
    return d;
}

LevelSetFunction perturb(const LevelSetFunction& phi, const HatPerturbation& w, double t)
{
    std::vector<double> vals = phi.nodal_values();
    if (w.center_node < 0 || w.center_node >= static_cast<int>(vals.size()))
        throw InvalidArgument("perturb: hat center out of range");
    vals[w.center_node] += t;
    return LevelSetFunction(phi.mesh(), std::move(vals));
}

double t_max_estimate(const LevelSetFunction& phi, const HatPerturbation& w)
{
    const Mesh& m = *phi.mesh();
    if (w.center_node < 0 || w.center_node >= m.num_vertices())
        throw InvalidArgument("t_max_estimate: hat center out of range");
    bool meets_domain = false;
    for (int c : w.support_cells(m))
        for (int v : m.cell(c)) meets_domain |= phi.value(v) < 0.0;
    if (!meets_domain) return kInfiniteStep;
    // w is nonzero only at its center among the vertices
    const double p = phi.value(w.center_node);
    if (p == 0.0) return kInfiniteStep;
    return 0.5 * std::abs(p);
}

double ladder_top(const LevelSetFunction& phi, const HatPerturbation& w)
{
    const double t = t_max_estimate(phi, w);
    if (std::isfinite(t)) return t;
    const Mesh& m = *phi.mesh();
    double best = kInfiniteStep;
    for (int c : w.support_cells(m))
        for (int v : m.cell(c))
            if (phi.value(v) != 0.0) best = std::min(best, 0.5 * std::abs(phi.value(v)));
    return std::isfinite(best) ? best : m.diameter();
}

LevelSetFunction sample_analytic(MeshPtr mesh, const std::function<double(const Vec3&)>& fn)
{
    std::vector<double> vals(mesh->num_vertices());
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        vals[v] = fn(mesh->vertex(v));
        if (!std::isfinite(vals[v]))
            throw InvalidArgument("sample_analytic: non-finite value at vertex " + std::to_string(v));
    }
    return LevelSetFunction(std::move(mesh), std::move(vals));
}

std::vector<int> plain_signs(const LevelSetFunction& phi)
{
    std::vector<int> s(phi.nodal_values().size());
    for (size_t i = 0; i < s.size(); ++i) s[i] = (phi.nodal_values()[i] > 0.0) - (phi.nodal_values()[i] < 0.0);
    return s;
}

std::vector<int> effective_signs(const LevelSetFunction& phi, const HatPerturbation& w, Side side)
{
    auto s = plain_signs(phi);
    if (w.center_node >= 0 && w.center_node < static_cast<int>(s.size()) && s[w.center_node] == 0)
        s[w.center_node] = side == Side::FromAbove ? 1 : -1;
    return s;
}

} // namespace dilagrad
