#include "dilagrad/fem.hpp"

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/errors.hpp"
#include "dilagrad/quadrature.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include <cmath>

namespace dilagrad {

namespace {

// Per-cell region of Omega used for assembly and integration.
struct CellRegion {
    double measure = 0.0;
    std::vector<Simplex> simplices; // empty means the whole cell
    bool whole = false;
};

std::vector<CellRegion> cell_regions(const Mesh& m, const LevelSetFunction* phi, double& min_cut_fraction)
{
    std::vector<CellRegion> out(m.num_cells());
    min_cut_fraction = 1.0;
    std::optional<DomainDecomposition> dec;
    if (phi) dec = classify(*phi);
    for (int c = 0; c < m.num_cells(); ++c) {
        if (!phi || dec->cells[c] == CellStatus::Inside) {
            out[c].whole = true;
            out[c].measure = m.cell_volume(c);
        } else if (dec->cells[c] == CellStatus::Cut) {
            const CutCell cc = cut_cell(*phi, c);
            out[c].simplices = cc.interior_simplices;
            out[c].measure = cc.interior_measure();
            min_cut_fraction = std::min(min_cut_fraction, out[c].measure / m.cell_volume(c));
        }
    }
    return out;
}

QuadRule region_rule(const Mesh& m, int c, const CellRegion& reg, int degree)
{
    if (reg.whole) return quadrature_cell(m, c, degree);
    QuadRule out;
    for (const auto& s : reg.simplices) {
        const auto q = quadrature_simplex(s.points(), degree);
        out.insert(out.end(), q.begin(), q.end());
    }
    return out;
}

std::vector<CellRegion> regions_of(const FemSolution& sol)
{
    double unused = 0.0;
    return cell_regions(*sol.mesh, sol.phi ? &*sol.phi : nullptr, unused);
}

QuadRule face_rule(const Mesh& m, int f, int degree)
{
    std::array<Vec3, 3> pts;
    const auto fv = m.face_vertices(f);
    for (size_t i = 0; i < fv.size(); ++i) pts[i] = m.vertex(fv[i]);
    return quadrature_simplex(std::span<const Vec3>(pts.data(), fv.size()), degree);
}

FemSolution solve_impl(MeshPtr mesh, const LevelSetFunction* phi, const AffineSource& r, const std::string& label)
{
    const Mesh& m = *mesh;
    if (m.dim() != 2) throw UnsupportedError("the model problem is implemented in 2D only");
    if (m.faces_with_label(label).empty())
        throw ConstraintError("no boundary face carries the Dirichlet label '" + label + "'");
    FemSolution sol;
    sol.mesh = mesh;
    sol.regime = phi ? Regime::Cut : Regime::Fitted;
    if (phi) sol.phi = *phi;
    sol.source = r;
    sol.dirichlet_label = label;
    sol.r = PiecewiseField::from_global(mesh, 1, [&](const Vec3& x) { return r(x); });
    sol.u.assign(m.num_vertices(), 0.0);
    sol.dirichlet = m.label_vertex_mask(label);
    sol.active.assign(m.num_vertices(), 0);

    const auto regions = cell_regions(m, phi, sol.min_cut_fraction);
    bool any = false;
    for (int c = 0; c < m.num_cells(); ++c) {
        if (regions[c].measure <= 0.0) continue;
        any = true;
        for (int v : m.cell(c))
            if (!sol.dirichlet[v]) sol.active[v] = 1;
    }
    if (!any) {
        sol.empty_domain = true;
        return sol;
    }
    // some Dirichlet vertex must touch Omega, otherwise the problem is pure Neumann
    bool anchored = false;
    for (int f : m.faces_with_label(label)) {
        const int c = m.face(f).cells[0];
        if (regions[c].measure > 0.0) {
            if (!phi) anchored = true;
            for (int v : m.face_vertices(f)) anchored |= phi && phi->value(v) < 0.0;
        }
    }
    if (!anchored) throw ConstraintError("Omega does not touch the Dirichlet boundary '" + label + "'");

    std::vector<int> dof(m.num_vertices(), -1);
    int n = 0;
    for (int v = 0; v < m.num_vertices(); ++v)
        if (sol.active[v]) dof[v] = n++;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < m.num_cells(); ++c) {
        const auto& reg = regions[c];
        if (reg.measure <= 0.0) continue;
        const auto g = barycentric_gradients(m, c);
        const auto verts = m.cell(c);
        for (int i = 0; i < 3; ++i) {
            if (dof[verts[i]] < 0) continue;
            for (int j = 0; j < 3; ++j)
                if (dof[verts[j]] >= 0) trip.emplace_back(dof[verts[i]], dof[verts[j]], reg.measure * g[i].dot(g[j]));
        }
        for (const auto& q : region_rule(m, c, reg, 2)) {
            const auto lam = m.barycentric(c, q.point);
            const double rv = r(q.point);
            for (int i = 0; i < 3; ++i)
                if (dof[verts[i]] >= 0) b[dof[verts[i]]] += q.weight * rv * lam[i];
        }
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw SolverError("sparse LDLT factorization failed", sol.min_cut_fraction);
    const Eigen::VectorXd x = ldlt.solve(b);
    if (ldlt.info() != Eigen::Success || !x.allFinite())
        throw SolverError("sparse LDLT solve failed", sol.min_cut_fraction);
    const double bn = b.norm();
    sol.linear_residual = bn > 0.0 ? (A * x - b).norm() / bn : (A * x).norm();
    if (!(sol.linear_residual < 1e-6))
        throw SolverError("linear residual " + std::to_string(sol.linear_residual) + " too large", sol.min_cut_fraction);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (dof[v] >= 0) sol.u[v] = x[dof[v]];
    return sol;
}

bool is_neumann(const Mesh& m, int f, const std::string& label)
{
    const auto l = m.boundary_label(f);
    return !l || *l != label;
}

} // namespace

Vec3 FemSolution::grad(int cell) const
{
    const auto g = barycentric_gradients(*mesh, cell);
    const auto verts = mesh->cell(cell);
    Vec3 out = Vec3::Zero();
    for (size_t i = 0; i < verts.size(); ++i) out += u[verts[i]] * g[i];
    return out;
}

double FemSolution::eval(int cell, const Vec3& x) const
{
    const auto lam = mesh->barycentric(cell, x);
    const auto verts = mesh->cell(cell);
    double s = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) s += lam[i] * u[verts[i]];
    return s;
}

int FemSolution::num_active() const
{
    int n = 0;
    for (char a : active) n += a != 0;
    return n;
}

std::string FemSolution::to_json() const
{
    nlohmann::json j;
    j["regime"] = regime == Regime::Fitted ? "fitted" : "cut";
    j["nodal_values"] = u;
    std::vector<int> act;
    for (size_t i = 0; i < active.size(); ++i)
        if (active[i]) act.push_back(static_cast<int>(i));
    j["active_dofs"] = act;
    j["empty_domain"] = empty_domain;
    j["min_cut_fraction"] = min_cut_fraction;
    j["linear_residual"] = linear_residual;
    return j.dump(1);
}

FemSolution solve_fitted(MeshPtr mesh, const AffineSource& r, const std::string& dirichlet_label)
{
    return solve_impl(std::move(mesh), nullptr, r, dirichlet_label);
}

FemSolution solve_cut(MeshPtr mesh, const LevelSetFunction& phi, const AffineSource& r, const std::string& dirichlet_label)
{
    if (phi.mesh() != mesh) throw InvalidArgument("solve_cut: level set lives on a different mesh");
    return solve_impl(std::move(mesh), &phi, r, dirichlet_label);
}

double compliance(const FemSolution& sol)
{
    if (sol.empty_domain) return 0.0;
    const Mesh& m = *sol.mesh;
    const auto regions = regions_of(sol);
    double s = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        if (regions[c].measure <= 0.0) continue;
        for (const auto& q : region_rule(m, c, regions[c], 2)) s += q.weight * sol.source(q.point) * sol.eval(c, q.point);
    }
    return s;
}

double dirichlet_energy(const FemSolution& sol)
{
    if (sol.empty_domain) return 0.0;
    const auto regions = regions_of(sol);
    double s = 0.0;
    for (int c = 0; c < sol.mesh->num_cells(); ++c)
        if (regions[c].measure > 0.0) s += regions[c].measure * sol.grad(c).squaredNorm();
    return s;
}

double model_dj_continuous(const FemSolution& sol, const VelocityField& v)
{
    if (sol.regime != Regime::Fitted) throw InvalidArgument("model_dj_continuous needs a fitted solution");
    const Mesh& m = *sol.mesh;
    double s = 0.0;
    for (int f : m.boundary_faces()) {
        if (!is_neumann(m, f, sol.dirichlet_label)) continue;
        const int c = m.face(f).cells[0];
        const Vec3 n = m.face_normal(f, 0);
        const double g2 = sol.grad(c).squaredNorm();
        for (const auto& q : face_rule(m, f, 3))
            s += q.weight * n.dot(v.eval(c, q.point)) * (2.0 * sol.source(q.point) * sol.eval(c, q.point) - g2);
    }
    return s;
}

double model_dj_fitted_volume(const FemSolution& sol, const VelocityField& v)
{
    if (sol.regime != Regime::Fitted) throw InvalidArgument("model_dj_fitted_volume needs a fitted solution");
    const Mesh& m = *sol.mesh;
    double s = 0.0;
    for (int f : m.boundary_faces()) {
        if (!is_neumann(m, f, sol.dirichlet_label)) continue;
        const int c = m.face(f).cells[0];
        const Vec3 n = m.face_normal(f, 0);
        for (const auto& q : face_rule(m, f, 3))
            s += 2.0 * q.weight * n.dot(v.eval(c, q.point)) * sol.eval(c, q.point) * sol.source(q.point);
    }
    for (int c = 0; c < m.num_cells(); ++c) {
        const Vec3 gu = sol.grad(c);
        const Mat3 gv = v.grad(c);
        const double quad = 2.0 * gu.dot(gv * gu) - gv.trace() * gu.squaredNorm();
        for (const auto& q : quadrature_cell(m, c, 2))
            s -= q.weight * (2.0 * sol.source(q.point) * v.eval(c, q.point).dot(gu) - quad);
    }
    return s;
}

StrongFormTerms model_dj_fitted_strong_terms(const FemSolution& sol, const VelocityField& v)
{
    if (sol.regime != Regime::Fitted) throw InvalidArgument("model_dj_fitted_strong needs a fitted solution");
    const Mesh& m = *sol.mesh;
    StrongFormTerms t;
    t.boundary = model_dj_continuous(sol, v);
    for (int f = 0; f < m.num_faces(); ++f) {
        const Face& F = m.face(f);
        if (F.is_boundary()) continue;
        const double jump = sol.grad(F.cells[0]).squaredNorm() - sol.grad(F.cells[1]).squaredNorm();
        const Vec3 n0 = m.face_normal(f, 0);
        for (const auto& q : face_rule(m, f, 1)) t.jump -= q.weight * jump * v.eval(F.cells[0], q.point).dot(n0);
    }
    for (int c = 0; c < m.num_cells(); ++c) {
        const Vec3 gu = sol.grad(c);
        const Vec3 grad_v_dot_gu = v.grad(c).transpose() * gu; // grad (V . grad u_h)
        for (const auto& q : quadrature_cell(m, c, 2))
            t.element += 2.0 * q.weight * (gu.dot(grad_v_dot_gu) - sol.source(q.point) * v.eval(c, q.point).dot(gu));
    }
    return t;
}

double model_dj_fitted_strong(const FemSolution& sol, const VelocityField& v)
{
    const auto t = model_dj_fitted_strong_terms(sol, v);
    return t.boundary + t.jump + t.element;
}

bool hat_admissible(const Mesh& mesh, const HatPerturbation& w, const std::string& dirichlet_label)
{
    const auto mask = mesh.label_vertex_mask(dirichlet_label);
    for (int c : w.support_cells(mesh))
        for (int v : mesh.cell(c))
            if (mask[v]) return false;
    return true;
}

SemiDerivative model_dj_cut(const FemSolution& sol, const HatPerturbation& w, Side side)
{
    if (sol.regime != Regime::Cut || !sol.phi) throw InvalidArgument("model_dj_cut needs a cut solution");
    if (!hat_admissible(*sol.mesh, w, sol.dirichlet_label))
        throw ConstraintError("support of the hat at vertex " + std::to_string(w.center_node)
                              + " touches the Dirichlet boundary");
    if (sol.empty_domain) {
        SemiDerivative sd;
        sd.side = side;
        return sd;
    }
    // cell-wise 2 r u_h - |grad u_h|^2 is a quadratic polynomial
    const auto g = PiecewiseField::interpolate(sol.mesh, 2, [&](int c, const Vec3& x) {
        return 2.0 * sol.source(x) * sol.eval(c, x) - sol.grad(c).squaredNorm();
    });
    return dj1(*sol.phi, w, g, nullptr, side);
}

} // namespace dilagrad
