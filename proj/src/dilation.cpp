#include "dilagrad/dilation.hpp"

#include "dilagrad/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace dilagrad {

namespace {

struct LocalCell {
    std::array<Vec3, 4> pts;
    std::array<double, 4> phi;
    std::array<double, 4> w;
    int n;
    std::span<const Vec3> points() const { return {pts.data(), static_cast<size_t>(n)}; }
};

LocalCell local_cell(const LevelSetFunction& phi, const HatPerturbation& w, int c)
{
    const Mesh& m = *phi.mesh();
    LocalCell lc{};
    lc.n = m.dim() + 1;
    for (int i = 0; i < lc.n; ++i) {
        const int v = m.cell(c)[i];
        lc.pts[i] = m.vertex(v);
        lc.phi[i] = phi.value(v);
        lc.w[i] = w.nodal_value(v);
    }
    return lc;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Sub-simplices of {phi <= 0} cap {phi + t w >= 0} in cell c.
std::vector<Simplex> strip_simplices(const LevelSetFunction& phi, const HatPerturbation& w, double t, int c)
{
    const Mesh& m = *phi.mesh();
    const LocalCell lc = local_cell(phi, w, c);
    std::vector<Simplex> out;
    for (const auto& s : clip_simplex(lc.points(), std::span<const double>(lc.phi.data(), lc.n), true)) {
        std::array<double, 4> vt{};
        for (int i = 0; i < s.n; ++i) {
            const auto lam = m.barycentric(c, s.v[i]);
            double v = 0.0;
            for (int j = 0; j < lc.n; ++j) v += lam[j] * (lc.phi[j] + t * lc.w[j]);
            vt[i] = v;
        }
        const auto part = clip_simplex(s.points(), std::span<const double>(vt.data(), s.n), false);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<int> sorted_star(const Mesh& m, const HatPerturbation& w)
{
    if (w.center_node < 0 || w.center_node >= m.num_vertices())
        throw InvalidArgument("hat center " + std::to_string(w.center_node) + " is not a mesh vertex");
    std::vector<int> cells = w.support_cells(m);
    std::sort(cells.begin(), cells.end());
    return cells;
}

// Interior faces through the hat center, sorted.
std::vector<int> star_faces(const Mesh& m, const HatPerturbation& w)
{
    std::set<int> faces;
    for (int c : w.support_cells(m))
        for (int l = 0; l <= m.dim(); ++l) {
            const int f = m.cell_face(c, l);
            const auto fv = m.face_vertices(f);
            if (std::find(fv.begin(), fv.end(), w.center_node) != fv.end()) faces.insert(f);
        }
    return {faces.begin(), faces.end()};
}

bool face_aligned(const LevelSetFunction& phi, int f)
{
    for (int v : phi.mesh()->face_vertices(f))
        if (phi.value(v) != 0.0) return false;
    return true;
}

double integrate_simplices(const std::vector<Simplex>& ss, int cell, const PiecewiseField& f)
{
    double s = 0.0;
    for (const auto& sx : ss)
        for (const auto& q : quadrature_simplex(sx.points(), f.degree())) s += q.weight * f.eval_unchecked(cell, q.point);
    return s;
}

void check_step(const LevelSetFunction& phi, const HatPerturbation& w, double t)
{
    const double tmax = t_max_estimate(phi, w);
    if (!(t >= 0.0) || t > tmax * (1.0 + 1e-12))
        throw InvalidArgument("step t = " + std::to_string(t) + " is outside [0, t_max]");
}

void fill_aligned(SemiDerivative& sd, const LevelSetFunction& phi, const HatPerturbation& w)
{
    for (int f : star_faces(*phi.mesh(), w))
        if (face_aligned(phi, f)) sd.aligned_faces_used.push_back(f);
    sd.two_sided = sd.aligned_faces_used.empty();
}

} // namespace

std::string SemiDerivative::to_json() const
{
    nlohmann::json j;
    j["value"] = value;
    j["side"] = to_string(side);
    j["two_sided"] = two_sided;
    j["aligned_faces_used"] = aligned_faces_used;
    j["volume_term"] = volume_term;
    j["boundary_term"] = boundary_term;
    j["jump_term"] = jump_term;
    j["cell_contributions"] = nlohmann::json::array();
    for (const auto& [c, v] : cell_contributions) j["cell_contributions"].push_back({{"cell", c}, {"value", v}});
    j["face_contributions"] = nlohmann::json::array();
    for (const auto& [f, v] : face_contributions) j["face_contributions"].push_back({{"face", f}, {"value", v}});
    j["degenerate_faces"] = degenerate_faces;
    return j.dump(1);
}

double volume_functional(const LevelSetFunction& phi, const PiecewiseField& f)
{
    double s = 0.0;
    for (const auto& q : quadrature_domain(phi, f.degree())) s += q.weight * f.eval_unchecked(q.cell, q.point);
    return s;
}

double surface_functional(const LevelSetFunction& phi, const PiecewiseField& f)
{
    double s = 0.0;
    for (const auto& q : quadrature_boundary(phi, f.degree())) s += q.weight * f.eval_unchecked(q.cell, q.point);
    return s;
}

SemiDerivative dj1(const LevelSetFunction& phi, const HatPerturbation& w, const PiecewiseField& f,
                   const PiecewiseField* fprime, Side side)
{
    const Mesh& m = *phi.mesh();
    SemiDerivative sd;
    sd.side = side;
    if (fprime) sd.volume_term = volume_functional(phi, *fprime);
    const auto signs = effective_signs(phi, w, side);
    for (int c : sorted_star(m, w)) {
        if (!is_sign_cut(m, c, signs)) continue;
        const CutCell cc = cut_cell(phi, c);
        if (!(cc.grad_norm > 0.0)) throw SingularLevelSetError("zero level-set gradient on cut cell " + std::to_string(c));
        double s = 0.0;
        for (const auto& q : quadrature_patch(cc.boundary_patch, m.dim(), f.degree() + 1))
            s += q.weight * f.eval_unchecked(c, q.point) * w.eval(m, c, q.point);
        s = -s / cc.grad_norm;
        sd.cell_contributions.emplace_back(c, s);
        sd.boundary_term += s;
    }
    fill_aligned(sd, phi, w);
    sd.value = sd.volume_term + sd.boundary_term;
    return sd;
}

SemiDerivative dj2(const LevelSetFunction& phi, const HatPerturbation& w, const PiecewiseField& f,
                   const PiecewiseField* fprime, Side side)
{
    const Mesh& m = *phi.mesh();
    const int d = m.dim();
    SemiDerivative sd;
    sd.side = side;
    if (fprime) sd.volume_term = surface_functional(phi, *fprime);
    const auto signs = effective_signs(phi, w, side);
    for (int c : sorted_star(m, w)) {
        if (!is_sign_cut(m, c, signs)) continue;
        const CutCell cc = cut_cell(phi, c);
        if (!(cc.grad_norm > 0.0)) throw SingularLevelSetError("zero level-set gradient on cut cell " + std::to_string(c));
        double s = 0.0;
        for (const auto& q : quadrature_patch(cc.boundary_patch, d, f.degree() + 1))
            s += q.weight * f.grad_unchecked(c, q.point).dot(cc.normal) * w.eval(m, c, q.point);
        s = -s / cc.grad_norm;
        sd.cell_contributions.emplace_back(c, s);
        sd.boundary_term += s;
    }
    for (int face : star_faces(m, w)) {
        if (face_aligned(phi, face) || m.face(face).is_boundary()) continue;
        const auto fp = face_patch(phi, face, signs);
        if (!fp) {
            int zeros = 0;
            for (int v : m.face_vertices(face)) zeros += signs[v] == 0;
            const Face& F = m.face(face);
            if (d == 3 && zeros >= 2 && (is_sign_cut(m, F.cells[0], signs) || is_sign_cut(m, F.cells[1], signs)))
                sd.degenerate_faces.push_back(face);
            continue;
        }
        double s = 0.0;
        for (const auto& q : quadrature_facecut(*fp, d, f.degree() + 1)) {
            const Vec3 jump = f.eval_unchecked(fp->cells[0], q.point) * fp->conormal[0]
                              + f.eval_unchecked(fp->cells[1], q.point) * fp->conormal[1];
            s += q.weight * fp->nS.dot(jump) * w.eval(m, fp->cells[0], q.point);
        }
        s = -s / fp->dnS_phi;
        sd.face_contributions.emplace_back(face, s);
        sd.jump_term += s;
    }
    fill_aligned(sd, phi, w);
    sd.value = sd.volume_term + sd.boundary_term + sd.jump_term;
    return sd;
}

double strip_volume_cell(const LevelSetFunction& phi, const HatPerturbation& w, double t, int cell,
                         const PiecewiseField& f)
{
    check_step(phi, w, t);
    if (t == 0.0 || !w.touches_cell(*phi.mesh(), cell)) return 0.0;
    return integrate_simplices(strip_simplices(phi, w, t, cell), cell, f);
}

double strip_volume(const LevelSetFunction& phi, const HatPerturbation& w, double t, const PiecewiseField& f)
{
    check_step(phi, w, t);
    double s = 0.0;
    for (int c : sorted_star(*phi.mesh(), w)) s += strip_volume_cell(phi, w, t, c, f);
    return s;
}

double adaptive_gauss(const std::function<double(double)>& fn, double a, double b, double rel_tol, int max_levels,
                      double abs_tol)
{
    static const auto rule = [] {
        std::vector<double> x, wt;
        gauss_jacobi(5, 0.0, 0.0, x, wt);
        return std::make_pair(x, wt);
    }();
    double maxabs = 0.0;
    auto gauss = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0.0;
        for (size_t i = 0; i < rule.first.size(); ++i) {
            const double v = fn(mid + half * rule.first[i]);
            if (!std::isfinite(v)) throw AccuracyError("adaptive_gauss: non-finite integrand", NAN, INFINITY);
            maxabs = std::max(maxabs, std::abs(v));
            s += rule.second[i] * v;
        }
        return half * s;
    };
    if (b == a) return 0.0;
    const double whole = gauss(a, b);
    const double tol = std::max(rel_tol * std::abs(whole) + 1e-15 * std::abs(b - a) * maxabs, abs_tol);
    double worst = 0.0;
    bool failed = false;
    std::function<double(double, double, double, int)> rec = [&](double lo, double hi, double est, int level) {
        const double mid = 0.5 * (lo + hi);
        const double l = gauss(lo, mid), r = gauss(mid, hi);
        const double err = std::abs(l + r - est);
        if (err <= tol * (hi - lo) / (b - a)) return l + r;
        if (level >= max_levels) {
            failed = true;
            worst = std::max(worst, err);
            return l + r;
        }
        return rec(lo, mid, l, level + 1) + rec(mid, hi, r, level + 1);
    };
    const double val = rec(a, b, whole, 1);
    if (failed) throw AccuracyError("adaptive_gauss did not converge", val, worst);
    return val;
}

double layer_integral(const LevelSetFunction& phi, const HatPerturbation& w, double t, int cell,
                      const PiecewiseField& f, double rel_tol)
{
    check_step(phi, w, t);
    const Mesh& m = *phi.mesh();
    if (t == 0.0 || !w.touches_cell(m, cell)) return 0.0;
    const LocalCell lc = local_cell(phi, w, cell);
    const Vec3 gphi = phi.grad(cell);
    const Vec3 gw = w.grad(m, cell);
    auto inner = [&](double tau) {
        std::array<double, 4> vals{};
        std::array<int, 4> sg{};
        bool neg = false, pos = false;
        for (int i = 0; i < lc.n; ++i) {
            vals[i] = lc.phi[i] + tau * lc.w[i];
            sg[i] = sign_of(vals[i]);
            neg |= sg[i] < 0;
            pos |= sg[i] > 0;
        }
        if (!(neg && pos)) return 0.0;
        const auto zs = simplex_zero_set(lc.points(), std::span<const double>(vals.data(), lc.n),
                                         std::span<const int>(sg.data(), lc.n));
        const double gn = (gphi + tau * gw).norm();
        double s = 0.0;
        for (const auto& q : quadrature_patch(zs, m.dim(), f.degree() + 1))
            s += q.weight * f.eval_unchecked(cell, q.point) * w.eval(m, cell, q.point);
        return s / gn;
    };
    return adaptive_gauss(inner, 0.0, t, rel_tol);
}

IbpResult ibp_check(const LevelSetFunction& phi, const HatPerturbation& w, double t, const PiecewiseField& f,
                    const PiecewiseVectorField& theta, double rel_tol)
{
    check_step(phi, w, t);
    const Mesh& m = *phi.mesh();
    const int d = m.dim();
    IbpResult r;
    if (t == 0.0) return r;
    int tdeg = 0;
    for (const auto& c : theta.components) tdeg = std::max(tdeg, c.degree());
    const int deg = f.degree() + tdeg;

    const LevelSetFunction phit = perturb(phi, w, t);
    for (int c : sorted_star(m, w)) {
        for (const auto& sx : strip_simplices(phi, w, t, c))
            for (const auto& q : quadrature_simplex(sx.points(), deg))
                r.lhs += q.weight
                         * (theta.divergence(c, q.point) * f.eval_unchecked(c, q.point)
                            + theta.eval(c, q.point).dot(f.grad_unchecked(c, q.point)));
        // dE_t: the old boundary (normal outward from Omega) and the new one (reversed)
        const auto plain = plain_signs(phi);
        if (is_sign_cut(m, c, plain)) {
            const CutCell cc = cut_cell(phi, c);
            for (const auto& q : quadrature_patch(cc.boundary_patch, d, deg))
                r.rhs_boundary += q.weight * cc.normal.dot(theta.eval(c, q.point)) * f.eval_unchecked(c, q.point);
        }
        const auto plain_t = plain_signs(phit);
        if (is_sign_cut(m, c, plain_t)) {
            const CutCell cc = cut_cell(phit, c);
            for (const auto& q : quadrature_patch(cc.boundary_patch, d, deg))
                r.rhs_boundary -= q.weight * cc.normal.dot(theta.eval(c, q.point)) * f.eval_unchecked(c, q.point);
        }
    }
    std::vector<int> faces;
    for (int face : star_faces(m, w))
        if (!m.face(face).is_boundary()) faces.push_back(face);
    auto inner = [&](double tau) {
        const LevelSetFunction pt = perturb(phi, w, tau);
        double s = 0.0;
        for (int face : faces) {
            const auto fp = face_patch(pt, face);
            if (!fp) continue;
            for (const auto& q : quadrature_facecut(*fp, d, deg + 1)) {
                Vec3 jump = Vec3::Zero();
                for (int k = 0; k < 2; ++k)
                    jump += f.eval_unchecked(fp->cells[k], q.point) * theta.eval(fp->cells[k], q.point).cross(fp->tS[k]);
                s += q.weight * fp->nS.dot(jump) * w.eval(m, fp->cells[0], q.point) / fp->dnS_phi;
            }
        }
        return s;
    };
    // smooth data make the jump term cancel to round-off; measure it against the other terms
    r.rhs_jump = adaptive_gauss(inner, 0.0, t, rel_tol, 20, rel_tol * std::max(std::abs(r.lhs), std::abs(r.rhs_boundary)));
    r.residual = std::abs(r.lhs - r.rhs_boundary - r.rhs_jump);
    return r;
}

RayParameterization::RayParameterization(const LevelSetFunction& phi, const HatPerturbation& w, int cell)
    : phi_(&phi), w_(w), cell_(cell)
{
    const Mesh& m = *phi.mesh();
    const auto verts = m.cell(cell);
    const auto it = std::find(verts.begin(), verts.end(), w.center_node);
    if (it == verts.end())
        throw InvalidArgument("cell " + std::to_string(cell) + " is not in the support of the hat function");
    face_ = m.cell_face(cell, static_cast<int>(it - verts.begin()));
    xw_ = m.vertex(w.center_node);
    grad_phi_ = phi.grad(cell);
    grad_w_ = w.grad(m, cell);
}

std::vector<Vec3> RayParameterization::hat_region(double t_max) const
{
    const Mesh& m = *phi_->mesh();
    const double target = phi_->value(w_.center_node) + t_max;
    const int keep = target > 0.0 ? -1 : 1;
    const auto fv = m.face_vertices(face_);
    std::vector<Vec3> pts;
    for (int v : fv)
        if (sign_of(phi_->value(v)) == keep || phi_->value(v) == 0.0) pts.push_back(m.vertex(v));
    for (size_t i = 0; i < fv.size(); ++i)
        for (size_t j = i + 1; j < fv.size(); ++j) {
            const double a = phi_->value(fv[i]), b = phi_->value(fv[j]);
            if (a * b < 0.0) pts.push_back(m.vertex(fv[i]) + a / (a - b) * (m.vertex(fv[j]) - m.vertex(fv[i])));
        }
    if (pts.size() >= 4) {
        // order around the centroid in the face plane
        Vec3 c = Vec3::Zero();
        for (const auto& p : pts) c += p;
        c /= static_cast<double>(pts.size());
        const Vec3 n = m.face_normal(face_, 0);
        const Vec3 u = (pts[0] - c).normalized();
        const Vec3 v = n.cross(u);
        std::sort(pts.begin(), pts.end(), [&](const Vec3& a, const Vec3& b) {
            return std::atan2((a - c).dot(v), (a - c).dot(u)) < std::atan2((b - c).dot(v), (b - c).dot(u));
        });
    }
    return pts;
}

Vec3 RayParameterization::operator()(const Vec3& x_s, double tau) const
{
    const Vec3 dir = xw_ - x_s;
    const double denom = (grad_phi_ + tau * grad_w_).dot(dir);
    return x_s - phi_->eval(cell_, x_s) / denom * dir;
}

int locate_cell(const Mesh& mesh, const Vec3& x)
{
    for (int c = 0; c < mesh.num_cells(); ++c)
        if (mesh.contains(c, x)) return c;
    return kNoCell;
}

double topological_derivative_point(const PiecewiseField& f, const Vec3& x0)
{
    const Mesh& m = *f.mesh();
    double lo = INFINITY, hi = -INFINITY;
    int found = 0;
    for (int c = 0; c < m.num_cells(); ++c) {
        if (!m.contains(c, x0)) continue;
        const double v = f.eval_unchecked(c, x0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++found;
    }
    if (found == 0) throw InvalidArgument("point is outside the mesh");
    if (hi - lo > 1e-12 * (1.0 + std::abs(hi)))
        throw AmbiguousLimitError("field jumps at the requested point; the topological derivative is not defined");
    return -lo;
}

} // namespace dilagrad
