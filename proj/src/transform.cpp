#include "dilagrad/transform.hpp"

#include "dilagrad/errors.hpp"
#include "dilagrad/levelset.hpp"
#include "dilagrad/quadrature.hpp"

#include <cmath>

namespace dilagrad {

namespace {

QuadRule face_rule(const Mesh& m, int f, int degree)
{
    std::array<Vec3, 3> pts;
    const auto fv = m.face_vertices(f);
    for (size_t i = 0; i < fv.size(); ++i) pts[i] = m.vertex(fv[i]);
    return quadrature_simplex(std::span<const Vec3>(pts.data(), fv.size()), degree);
}

Mat3 identity_block(int dim)
{
    Mat3 id = Mat3::Identity();
    if (dim == 2) id(2, 2) = 0.0;
    return id;
}

} // namespace

double det_block(const Mat3& m, int dim)
{
    if (dim == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return m.determinant();
}

VelocityField VelocityField::interpolate(MeshPtr mesh, const std::function<Vec3(const Vec3&)>& fn,
                                         std::vector<std::string> dirichlet_zero_markers)
{
    VelocityField v;
    v.nodal.resize(mesh->num_vertices());
    for (int i = 0; i < mesh->num_vertices(); ++i) {
        v.nodal[i] = fn(mesh->vertex(i));
        if (mesh->dim() == 2) v.nodal[i].z() = 0.0;
        if (!v.nodal[i].allFinite()) throw InvalidArgument("velocity field is not finite at vertex " + std::to_string(i));
    }
    for (const auto& label : dirichlet_zero_markers) {
        const auto mask = mesh->label_vertex_mask(label);
        for (int i = 0; i < mesh->num_vertices(); ++i)
            if (mask[i]) v.nodal[i] = Vec3::Zero();
    }
    v.mesh = std::move(mesh);
    v.dirichlet_zero_markers = std::move(dirichlet_zero_markers);
    return v;
}

Vec3 VelocityField::eval(int cell, const Vec3& x) const
{
    const auto lam = mesh->barycentric(cell, x);
    const auto verts = mesh->cell(cell);
    Vec3 s = Vec3::Zero();
    for (size_t i = 0; i < verts.size(); ++i) s += lam[i] * nodal[verts[i]];
    return s;
}

Mat3 VelocityField::grad(int cell) const
{
    const auto g = barycentric_gradients(*mesh, cell);
    const auto verts = mesh->cell(cell);
    Mat3 out = Mat3::Zero();
    for (size_t i = 0; i < verts.size(); ++i) out += nodal[verts[i]] * g[i].transpose();
    return out;
}

double VelocityField::divergence(int cell) const { return grad(cell).trace(); }

PiecewiseVectorField VelocityField::as_piecewise() const
{
    PiecewiseVectorField pv;
    for (int k = 0; k < mesh->dim(); ++k)
        pv.components.push_back(
            PiecewiseField::interpolate(mesh, 1, [&](int c, const Vec3& x) { return eval(c, x)[k]; }));
    return pv;
}

Mesh deform_mesh(const Mesh& mesh, const VelocityField& v, double t)
{
    if (static_cast<int>(v.nodal.size()) != mesh.num_vertices())
        throw InvalidArgument("deform_mesh: velocity field does not match the mesh");
    std::vector<Vec3> pts = mesh.vertices();
    for (size_t i = 0; i < pts.size(); ++i) pts[i] += t * v.nodal[i];
    return mesh.with_vertices(std::move(pts));
}

JacobianIdentities jacobian_identities(const VelocityField& v, int cell, const Vec3& n)
{
    const Mat3 g = v.grad(cell);
    JacobianIdentities out;
    out.divergence = g.trace();
    out.tangential_divergence = out.divergence - n.dot(g * n);
    return out;
}

double volume_factor(const VelocityField& v, int cell, double t)
{
    const int d = v.mesh->dim();
    return det_block(identity_block(d) + t * v.grad(cell), d);
}

double surface_factor(const VelocityField& v, int cell, const Vec3& n, double t)
{
    const int d = v.mesh->dim();
    Mat3 dt = identity_block(d) + t * v.grad(cell);
    if (d == 2) dt(2, 2) = 1.0;
    const Vec3 cof = dt.transpose().lu().solve(n);
    return det_block(dt, d) * cof.norm();
}

double dj1_weak(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fdot)
{
    const Mesh& m = *v.mesh;
    const int deg = std::max(f.degree(), fdot.degree());
    double s = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        const double dv = v.divergence(c);
        for (const auto& q : quadrature_cell(m, c, deg))
            s += q.weight * (fdot.eval_unchecked(c, q.point) + f.eval_unchecked(c, q.point) * dv);
    }
    return s;
}

double dj2_weak(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fdot)
{
    const Mesh& m = *v.mesh;
    const int deg = std::max(f.degree(), fdot.degree());
    double s = 0.0;
    for (int face : m.boundary_faces()) {
        const int c = m.face(face).cells[0];
        const double td = jacobian_identities(v, c, m.face_normal(face, 0)).tangential_divergence;
        for (const auto& q : face_rule(m, face, deg))
            s += q.weight * (fdot.eval_unchecked(c, q.point) + f.eval_unchecked(c, q.point) * td);
    }
    return s;
}

double dj1_strong(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fprime)
{
    const Mesh& m = *v.mesh;
    double s = 0.0;
    for (int c = 0; c < m.num_cells(); ++c)
        for (const auto& q : quadrature_cell(m, c, fprime.degree())) s += q.weight * fprime.eval_unchecked(c, q.point);
    for (int face : m.boundary_faces()) {
        const int c = m.face(face).cells[0];
        const Vec3 n = m.face_normal(face, 0);
        for (const auto& q : face_rule(m, face, f.degree() + 1))
            s += q.weight * f.eval_unchecked(c, q.point) * v.eval(c, q.point).dot(n);
    }
    return s;
}

double dj2_strong(const VelocityField& v, const PiecewiseField& f, const PiecewiseField& fprime)
{
    const Mesh& m = *v.mesh;
    double s = 0.0;
    for (int face : m.boundary_faces()) {
        const int c = m.face(face).cells[0];
        const Vec3 n = m.face_normal(face, 0);
        for (const auto& q : face_rule(m, face, std::max(fprime.degree(), f.degree())))
            s += q.weight
                 * (fprime.eval_unchecked(c, q.point)
                    + f.grad_unchecked(c, q.point).dot(n) * v.eval(c, q.point).dot(n));
    }
    return s;
}

FittedJump fitted_jump(const PiecewiseField& q, int face, const Vec3& x)
{
    const Mesh& m = *q.mesh();
    const Face& F = m.face(face);
    if (F.is_boundary()) throw InvalidArgument("fitted_jump: face " + std::to_string(face) + " is on the boundary");
    FittedJump j;
    j.face = face;
    j.value = q.eval_unchecked(F.cells[0], x) * m.face_normal(face, 0) + q.eval_unchecked(F.cells[1], x) * m.face_normal(face, 1);
    return j;
}

FittedIbpResult ibp_fitted(const VelocityField& psi, const PiecewiseField& q)
{
    const Mesh& m = *psi.mesh;
    const int deg = q.degree() + 1;
    FittedIbpResult r;
    for (int c = 0; c < m.num_cells(); ++c) {
        const double dv = psi.divergence(c);
        for (const auto& p : quadrature_cell(m, c, deg))
            r.lhs += p.weight * (dv * q.eval_unchecked(c, p.point) + psi.eval(c, p.point).dot(q.grad_unchecked(c, p.point)));
    }
    for (int f = 0; f < m.num_faces(); ++f) {
        const Face& F = m.face(f);
        const int c = F.cells[0];
        for (const auto& p : face_rule(m, f, deg)) {
            if (F.is_boundary())
                r.rhs_boundary += p.weight * m.face_normal(f, 0).dot(psi.eval(c, p.point)) * q.eval_unchecked(c, p.point);
            else
                r.rhs_jump += p.weight * psi.eval(c, p.point).dot(fitted_jump(q, f, p.point).value);
        }
    }
    r.residual = std::abs(r.lhs - r.rhs_boundary - r.rhs_jump);
    return r;
}

} // namespace dilagrad
