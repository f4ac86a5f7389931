#include "dilagrad/suites.hpp"

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/errors.hpp"
#include "dilagrad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dilagrad::suites {

double Rng::uniform(double a, double b)
{
    // 53 random bits; avoids the implementation-defined std distributions
    const double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
}

int Rng::index(int n)
{
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
}

namespace {

double monomial(const Vec3& x, const std::array<int, 3>& e)
{
    return std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
}

std::vector<double> random_coeffs(size_t n, Rng& rng)
{
    std::vector<double> c(n);
    for (double& v : c) v = rng.uniform(-1.0, 1.0);
    return c;
}

double poly(const std::vector<std::array<int, 3>>& exps, const double* c, const Vec3& x)
{
    double s = 0.0;
    for (size_t i = 0; i < exps.size(); ++i) s += c[i] * monomial(x, exps[i]);
    return s;
}

Vec3 random_unit(int dim, Rng& rng)
{
    Vec3 n = Vec3::Zero();
    while (n.norm() < 0.1) {
        n = Vec3::Zero();
        for (int a = 0; a < dim; ++a) n[a] = rng.uniform(-1.0, 1.0);
    }
    return n.normalized();
}

MeshPtr unit_box(int dim, int cells)
{
    std::vector<int> n(dim, cells);
    std::vector<double> e(dim, 1.0);
    return make_shared_mesh(build_structured_mesh(dim, n, e));
}

/// Moves interior vertices by up to `amount` times the grid spacing.
MeshPtr jiggle(const Mesh& m, double spacing, double amount, Rng& rng)
{
    const auto bmask = m.boundary_vertex_mask();
    std::vector<Vec3> pts(m.vertices().begin(), m.vertices().end());
    for (int v = 0; v < m.num_vertices(); ++v) {
        if (bmask[v]) continue;
        for (int a = 0; a < m.dim(); ++a) pts[v][a] += amount * spacing * rng.uniform(-1.0, 1.0);
    }
    return make_shared_mesh(m.with_vertices(std::move(pts)));
}

/// Random quadratic vector field, optionally multiplied by x so that it
/// vanishes on x = 0.
VelocityField random_velocity(MeshPtr mesh, Rng& rng, bool zero_at_xmin)
{
    const int d = mesh->dim();
    const auto exps = monomial_exponents(d, 2);
    std::vector<std::vector<double>> c;
    for (int a = 0; a < d; ++a) c.push_back(random_coeffs(exps.size(), rng));
    return VelocityField::interpolate(mesh, [&](const Vec3& x) {
        Vec3 v = Vec3::Zero();
        for (int a = 0; a < d; ++a) v[a] = 0.5 * poly(exps, c[a].data(), x) * (zero_at_xmin ? x.x() : 1.0);
        return v;
    });
}

double rel_gap(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// Shift used by negative controls: well above the honest errors, so the
/// error sequence flattens out.
double corrupting_shift(const FDReport& honest)
{
    double e = 0.0;
    for (double x : honest.errors) e = std::max(e, x);
    return 10.0 * e + 1e-3 * std::max(1e-3, std::abs(honest.reference));
}

FDReport maybe_corrupt(const FDReport& honest, double j0, bool negative_control)
{
    if (!negative_control) return honest;
    return fd_from_quotients(honest.t_values, honest.quotients, j0, honest.reference + corrupting_shift(honest),
                             honest.side);
}

bool star_meets_boundary(const LevelSetFunction& phi, const HatPerturbation& w, Side side)
{
    const auto signs = effective_signs(phi, w, side);
    for (int c : w.support_cells(*phi.mesh()))
        if (is_sign_cut(*phi.mesh(), c, signs)) return true;
    return false;
}

} // namespace

PiecewiseField random_piecewise_field(MeshPtr mesh, int degree, Rng& rng)
{
    const auto exps = monomial_exponents(mesh->dim(), degree);
    std::vector<double> coeffs = random_coeffs(exps.size() * mesh->num_cells(), rng);
    return PiecewiseField::interpolate(mesh, degree, [&](int c, const Vec3& x) {
        return poly(exps, coeffs.data() + c * exps.size(), x);
    });
}

PiecewiseField random_smooth_field(MeshPtr mesh, int degree, Rng& rng)
{
    const auto exps = monomial_exponents(mesh->dim(), degree);
    const auto coeffs = random_coeffs(exps.size(), rng);
    return PiecewiseField::from_global(mesh, degree, [&](const Vec3& x) { return poly(exps, coeffs.data(), x); });
}

Instance random_instance(int dim, int cells, Rng& rng, int f_degree, const std::string& id)
{
    auto mesh = unit_box(dim, cells);
    const auto bmask = mesh->boundary_vertex_mask();
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> vals(mesh->num_vertices());
        for (int v = 0; v < mesh->num_vertices(); ++v)
            vals[v] = bmask[v] ? 0.5 + 0.5 * rng.uniform(0.0, 1.0) : rng.uniform(-1.0, 1.0);
        LevelSetFunction phi(mesh, std::move(vals));
        std::vector<int> candidates;
        for (int v = 0; v < mesh->num_vertices(); ++v)
            if (!bmask[v] && star_meets_boundary(phi, HatPerturbation{v}, Side::FromAbove)) candidates.push_back(v);
        if (candidates.empty()) continue;
        const HatPerturbation w{candidates[rng.index(static_cast<int>(candidates.size()))]};
        auto f = random_piecewise_field(mesh, f_degree, rng);
        return Instance{id, mesh, std::move(phi), w, std::move(f)};
    }
    throw InvalidArgument("could not draw a random instance with a cut hat support");
}

std::vector<Instance> random_instances(int dim, int cells, int count, std::uint64_t seed, int f_degree)
{
    Rng rng(seed);
    std::vector<Instance> out;
    for (int i = 0; i < count; ++i)
        out.push_back(random_instance(dim, cells, rng, f_degree, std::to_string(dim) + "d-" + std::to_string(i)));
    return out;
}

std::vector<double> make_ladder(const LadderSpec& spec, double t_top)
{
    if (!spec.explicit_t.empty()) return spec.explicit_t;
    if (spec.k_min > spec.k_max) throw InvalidArgument("ladder k_min exceeds k_max");
    std::vector<double> out;
    for (int k = spec.k_min; k <= spec.k_max; ++k) out.push_back(std::ldexp(t_top, -k));
    return out;
}

TaylorResult taylor_check(Functional which, const Instance& inst, const LadderSpec& ladder, bool negative_control)
{
    TaylorResult r;
    r.id = inst.id;
    r.dim = inst.mesh->dim();
    r.node = inst.w.center_node;
    r.which = which;
    const auto deriv = which == Functional::Volume ? dj1 : dj2;
    const auto functional = which == Functional::Volume ? volume_functional : surface_functional;
    r.above = deriv(inst.phi, inst.w, inst.f, nullptr, Side::FromAbove);
    r.below = deriv(inst.phi, inst.w, inst.f, nullptr, Side::FromBelow);
    r.two_sided_agree = references_agree(r.above.value, r.below.value);
    r.no_op = !star_meets_boundary(inst.phi, inst.w, Side::FromAbove)
              && !star_meets_boundary(inst.phi, inst.w, Side::FromBelow);

    const double j0 = functional(inst.phi, inst.f);
    const auto ts = make_ladder(ladder, ladder_top(inst.phi, inst.w));
    const auto honest = fd_semiderivative(
        [&](double t) { return t == 0.0 ? j0 : functional(perturb(inst.phi, inst.w, t), inst.f); }, j0,
        r.above.value, ts, Side::FromAbove);
    r.report = maybe_corrupt(honest, j0, negative_control);
    r.passed = r.report.passed() && (!r.above.two_sided || r.two_sided_agree);
    return r;
}

CheckLine layer_vs_strip(int dim, int count, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"layer integral vs strip volume (" + std::to_string(dim) + "D)", 0.0, 1e-8, false, {}};
    int cells_checked = 0;
    for (const auto& inst : random_instances(dim, dim == 2 ? 4 : 3, count, seed, 2)) {
        const double t = 0.5 * ladder_top(inst.phi, inst.w);
        for (int c : inst.w.support_cells(*inst.mesh)) {
            const double a = strip_volume_cell(inst.phi, inst.w, t, c, inst.f);
            double b = layer_integral(inst.phi, inst.w, t, c, inst.f);
            if (negative_control) b = b * (1.0 + 1e-6) + 1e-6 * t;
            line.value = std::max(line.value, rel_gap(a, b));
            ++cells_checked;
        }
    }
    line.passed = line.value <= line.tolerance;
    line.detail = std::to_string(count) + " instances, " + std::to_string(cells_checked) + " cells";
    return line;
}

CheckLine ibp_dilation(int dim, bool smooth, int count, std::uint64_t seed, bool negative_control)
{
    CheckLine line{std::string("broken integration by parts on the strip, ") + (smooth ? "smooth" : "jumping")
                       + " data (" + std::to_string(dim) + "D)",
                   0.0, smooth ? 1e-10 : 1e-8, false, {}};
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (const auto& inst : random_instances(dim, dim == 2 ? 4 : 3, count, seed, 2)) {
        const auto f = smooth ? random_smooth_field(inst.mesh, 2, rng) : random_piecewise_field(inst.mesh, 2, rng);
        PiecewiseVectorField theta;
        for (int a = 0; a < dim; ++a)
            theta.components.push_back(smooth ? random_smooth_field(inst.mesh, 1, rng)
                                              : random_piecewise_field(inst.mesh, 1, rng));
        const double t = 0.5 * ladder_top(inst.phi, inst.w);
        const auto res = ibp_check(inst.phi, inst.w, t, f, theta);
        double residual = res.residual;
        if (negative_control) residual += 1e-6 * std::max(1.0, std::abs(res.lhs));
        line.value = std::max(line.value, residual);
    }
    line.passed = line.value <= line.tolerance;
    line.detail = std::to_string(count) + " instances";
    return line;
}

CheckLine ibp_fitted_random(int dim, int count, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"fitted broken integration by parts (" + std::to_string(dim) + "D)", 0.0, 1e-11, false, {}};
    Rng rng(seed);
    const int cells = dim == 2 ? 4 : 3;
    for (int i = 0; i < count; ++i) {
        auto mesh = jiggle(*unit_box(dim, cells), 1.0 / cells, 0.2, rng);
        const auto psi = random_velocity(mesh, rng, false);
        const auto q = random_piecewise_field(mesh, 2, rng);
        const auto res = ibp_fitted(psi, q);
        double residual = res.residual;
        if (negative_control) residual += 1e-6 * std::max(1.0, std::abs(res.lhs));
        line.value = std::max(line.value, residual);
    }
    line.passed = line.value <= line.tolerance;
    line.detail = std::to_string(count) + " random meshes";
    return line;
}

CheckLine jacobian_fd(int dim, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"finite differences of volume and surface factors (" + std::to_string(dim) + "D)",
                   std::numeric_limits<double>::infinity(), kOrderThreshold, true, {}};
    Rng rng(seed);
    const int cells = dim == 2 ? 4 : 2;
    auto mesh = jiggle(*unit_box(dim, cells), 1.0 / cells, 0.2, rng);
    const auto v = random_velocity(mesh, rng, false);
    const auto ladder = default_ladder(0.1);
    int reports = 0;
    std::string failing;
    for (int c = 0; c < std::min(6, mesh->num_cells()); ++c) {
        const Vec3 n = random_unit(dim, rng);
        const auto id = jacobian_identities(v, c, n);
        const FDReport vol = fd_semiderivative([&](double t) { return volume_factor(v, c, t); }, id.divergence, ladder);
        const FDReport surf = fd_semiderivative([&](double t) { return surface_factor(v, c, n, t); },
                                                id.tangential_divergence, ladder);
        std::string deep_orders;
        for (int which = 0; which < 2; ++which) {
            const auto rep = maybe_corrupt(which == 0 ? vol : surf, 1.0, negative_control);
            ++reports;
            if (!rep.exact) line.value = std::min(line.value, rep.fitted_order);
            line.passed = line.passed && rep.passed();
            if (!rep.passed() && !negative_control) {
                // same test further down, reported but not counted
                const auto deep = default_ladder(0.1 / 512);
                const FDReport d = which == 0 ? fd_semiderivative([&](double t) { return volume_factor(v, c, t); },
                                                                  id.divergence, deep)
                                              : fd_semiderivative([&](double t) { return surface_factor(v, c, n, t); },
                                                                  id.tangential_divergence, deep);
                deep_orders += std::string(" cell ") + std::to_string(c) + (which == 0 ? " volume " : " surface ")
                               + fmt(rep.fitted_order) + " -> " + fmt(d.fitted_order);
            }
        }
        failing += deep_orders;
    }
    line.detail = std::to_string(reports) + " Taylor tests; value is the smallest fitted order";
    if (!failing.empty()) line.detail += "; failing orders on the 2^-12..2^-17 ladder:" + failing;
    return line;
}

CheckLine partition_of_unity(int dim, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"hat sum of volume derivatives vs boundary integral (" + std::to_string(dim) + "D)", 0.0, 1e-12,
                   false, {}};
    Rng rng(seed);
    auto mesh = unit_box(dim, dim == 2 ? 8 : 4);
    const Vec3 n = random_unit(dim, rng);
    Vec3 p = Vec3::Zero();
    for (int a = 0; a < dim; ++a) p[a] = 0.5 + rng.uniform(-0.1, 0.1);
    // exact signed distance to a hyperplane, so |grad phi| = 1 on every cell
    const auto phi = sample_analytic(mesh, [&](const Vec3& x) { return n.dot(x - p); });
    const auto f = random_piecewise_field(mesh, 2, rng);
    double sum = 0.0;
    int hats = 0;
    for (int v = 0; v < mesh->num_vertices(); ++v) {
        const HatPerturbation w{v};
        if (!star_meets_boundary(phi, w, Side::FromAbove)) continue;
        sum += dj1(phi, w, f).value;
        ++hats;
    }
    double ref = -surface_functional(phi, f);
    if (negative_control) ref *= 1.0 + 1e-6;
    line.value = rel_gap(sum, ref);
    line.passed = line.value <= line.tolerance;
    line.detail = std::to_string(hats) + " hats, sum " + fmt(sum) + ", reference " + fmt(ref);
    return line;
}

CheckLine aligned_one_sided(bool negative_control)
{
    CheckLine line{"one-sided limits on an aligned face", 0.0, 1e-10, false, {}};
    auto mesh = unit_box(2, 4);
    // kink on x = 0.5: slope 1 inside, 3 outside
    const auto phi = sample_analytic(mesh, [](const Vec3& x) { return x.x() < 0.5 ? x.x() - 0.5 : 3.0 * (x.x() - 0.5); });
    int center = -1;
    for (int v = 0; v < mesh->num_vertices(); ++v)
        if ((mesh->vertex(v) - Vec3(0.5, 0.5, 0.0)).norm() < 1e-12) center = v;
    const HatPerturbation w{center};
    const auto f = PiecewiseField::interpolate(mesh, 1, [&](int c, const Vec3& x) {
        Vec3 centroid = Vec3::Zero();
        for (int v : mesh->cell(c)) centroid += mesh->vertex(v) / 3.0;
        return centroid.x() < 0.5 ? 1.0 + x.x() + x.y() : 3.0 - x.y();
    });
    const auto above = dj1(phi, w, f, nullptr, Side::FromAbove);
    const auto below = dj1(phi, w, f, nullptr, Side::FromBelow);

    // direct quadrature of the trace difference over the aligned faces through the center
    const auto dec = classify(phi);
    double direct = 0.0;
    for (int face : dec.aligned_faces) {
        const auto fv = mesh->face_vertices(face);
        if (std::find(fv.begin(), fv.end(), center) == fv.end()) continue;
        const Face& F = mesh->face(face);
        int inner = F.cells[0], outer = F.cells[1];
        Vec3 centroid = Vec3::Zero();
        for (int v : mesh->cell(inner)) centroid += mesh->vertex(v) / 3.0;
        if (phi.eval(inner, centroid) > 0.0) std::swap(inner, outer);
        const double g_in = phi.grad(inner).norm(), g_out = phi.grad(outer).norm();
        const std::array<Vec3, 2> seg{mesh->vertex(fv[0]), mesh->vertex(fv[1])};
        for (const auto& q : quadrature_simplex(seg, 4))
            direct += q.weight * w.eval(*mesh, inner, q.point)
                      * (f.eval_unchecked(outer, q.point) / g_out - f.eval_unchecked(inner, q.point) / g_in);
    }
    if (negative_control) direct *= 1.0 + 1e-6;
    const double diff = above.value - below.value;
    line.value = std::abs(diff - direct) / std::abs(direct);
    line.passed = line.value <= line.tolerance && std::abs(diff) > 1e-8 && !above.aligned_faces_used.empty();
    line.detail = "from above " + fmt(above.value) + ", from below " + fmt(below.value) + ", jump integral "
                  + fmt(direct);
    return line;
}

CheckLine topological_fd(int dim, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"shrinking-ball average vs topological derivative (" + std::to_string(dim) + "D)", 0.0, 1.0,
                   false, {}};
    Rng rng(seed);
    auto mesh = unit_box(dim, dim == 2 ? 4 : 2);
    const auto f = random_piecewise_field(mesh, 2, rng);
    const int c = mesh->num_cells() / 2 + 1;
    Vec3 x0 = Vec3::Zero();
    for (int v : mesh->cell(c)) x0 += mesh->vertex(v) / (dim + 1);
    // centroid-to-facet distance is d |K| / ((d + 1) |F|)
    double dist = std::numeric_limits<double>::infinity();
    for (int l = 0; l <= dim; ++l)
        dist = std::min(dist, dim * mesh->cell_volume(c) / ((dim + 1) * mesh->face_measure(mesh->cell_face(c, l))));
    const double r0 = 0.5 * dist / std::sqrt(static_cast<double>(dim));
    const double exact = topological_derivative_point(f, x0);
    std::vector<double> rs, errs;
    for (int k = 0; k < 6; ++k) {
        const double r = std::ldexp(r0, -k);
        double avg = shrinking_ball_average(f, x0, r, dim == 2 ? 16 : 8);
        if (negative_control) avg += 1e-3;
        rs.push_back(r);
        errs.push_back(std::abs(-avg - exact));
    }
    const bool exact_hit = *std::max_element(errs.begin(), errs.end()) < 1e-13;
    line.value = exact_hit ? std::numeric_limits<double>::infinity() : fit_order(rs, errs);
    line.passed = line.value >= line.tolerance;
    line.detail = "-f(x0) = " + fmt(exact) + ", smallest-ball error " + fmt(errs.back());
    return line;
}

SolveStats& solve_stats()
{
    static SolveStats stats;
    return stats;
}

double energy_gap(const FemSolution& sol)
{
    return rel_gap(compliance(sol), dirichlet_energy(sol));
}

namespace {

FemSolution record(FemSolution sol)
{
    auto& s = solve_stats();
    ++s.count;
    const double g = energy_gap(sol);
    if (g > s.max_energy_gap || s.worst.empty()) {
        s.max_energy_gap = std::max(s.max_energy_gap, g);
        s.worst = std::string(sol.regime == Regime::Fitted ? "fitted" : "cut") + " solve with "
                  + std::to_string(sol.mesh->num_vertices()) + " vertices";
    }
    return sol;
}

} // namespace

FemSolution tracked_solve_fitted(MeshPtr mesh, const AffineSource& r, const std::string& label)
{
    return record(solve_fitted(std::move(mesh), r, label));
}

FemSolution tracked_solve_cut(MeshPtr mesh, const LevelSetFunction& phi, const AffineSource& r,
                              const std::string& label)
{
    return record(solve_cut(std::move(mesh), phi, r, label));
}

AffineSource demo_source()
{
    return AffineSource{1.0, Vec3(0.3, -0.2, 0.0)};
}

MeshPtr fitted_demo_mesh(int level)
{
    const std::vector<int> n{4 << level, 2 << level};
    const std::vector<double> e{2.0, 1.0};
    return make_shared_mesh(build_structured_mesh(2, n, e));
}

VelocityField demo_velocity(MeshPtr mesh)
{
    return VelocityField::interpolate(
        std::move(mesh), [](const Vec3& x) { return Vec3(x.x() * std::sin(x.y() + 0.3), 0.5 * x.x() * x.y() * x.y(), 0.0); },
        {"xmin"});
}

MeshPtr cut_demo_mesh(int n)
{
    return unit_box(2, n);
}

LevelSetFunction cut_demo_level_set(MeshPtr mesh)
{
    return sample_analytic(std::move(mesh), [](const Vec3& x) {
        return std::hypot(x.x() / 0.7, (x.y() - 0.5) / 0.35) - 1.0;
    });
}

std::vector<int> cut_band_nodes(const LevelSetFunction& phi, const std::string& label)
{
    std::vector<int> out;
    const Mesh& m = *phi.mesh();
    for (int v = 0; v < m.num_vertices(); ++v) {
        const HatPerturbation w{v};
        if (hat_admissible(m, w, label) && star_meets_boundary(phi, w, Side::FromAbove)) out.push_back(v);
    }
    return out;
}

CheckLine fitted_equivalence(int count, std::uint64_t seed, bool negative_control)
{
    CheckLine line{"fitted volume form vs strong form", 0.0, 1e-10, false, {}};
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        auto mesh = jiggle(*fitted_demo_mesh(1), 0.25, 0.2, rng);
        const AffineSource r{rng.uniform(0.5, 1.5), Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.0)};
        const auto v = random_velocity(mesh, rng, true);
        const auto sol = tracked_solve_fitted(mesh, r, "xmin");
        const double a = model_dj_fitted_volume(sol, v);
        double b = model_dj_fitted_strong(sol, v);
        if (negative_control) b *= 1.0 + 1e-6;
        line.value = std::max(line.value, rel_gap(a, b));
    }
    line.passed = line.value <= line.tolerance;
    line.detail = std::to_string(count) + " random meshes, sources and velocities";
    return line;
}

FDReport fitted_taylor(MeshPtr mesh, const AffineSource& r, const VelocityField& v, const std::string& label,
                       const LadderSpec& ladder, double t_top, bool negative_control)
{
    const auto sol = tracked_solve_fitted(mesh, r, label);
    const double j0 = compliance(sol);
    const double ref = model_dj_fitted_strong(sol, v);
    const auto honest = fd_semiderivative(
        [&](double t) {
            if (t == 0.0) return j0;
            return compliance(tracked_solve_fitted(make_shared_mesh(deform_mesh(*mesh, v, t)), r, label));
        },
        j0, ref, make_ladder(ladder, t_top), Side::FromAbove);
    return maybe_corrupt(honest, j0, negative_control);
}

FDReport cut_taylor(const FemSolution& sol, const HatPerturbation& w, const LadderSpec& ladder, bool negative_control)
{
    if (!sol.phi) throw InvalidArgument("cut_taylor needs a cut solution");
    const double j0 = compliance(sol);
    const double ref = model_dj_cut(sol, w).value;
    const auto honest = fd_semiderivative(
        [&](double t) {
            if (t == 0.0) return j0;
            return compliance(tracked_solve_cut(sol.mesh, perturb(*sol.phi, w, t), sol.source, sol.dirichlet_label));
        },
        j0, ref, make_ladder(ladder, ladder_top(*sol.phi, w)), Side::FromAbove);
    return maybe_corrupt(honest, j0, negative_control);
}

std::vector<GapRow> compare_fitted_unfitted(int levels, const AffineSource& r)
{
    std::vector<GapRow> rows;
    // a fixed point on the ellipse; each level uses the band node closest to it
    const Vec3 anchor(0.35, 0.5 + 0.35 * std::sqrt(0.75), 0.0);
    for (int l = 0; l < levels; ++l) {
        GapRow row;
        row.level = l;
        auto mesh = fitted_demo_mesh(l);
        row.h = 0.5 / (1 << l);
        const auto v = demo_velocity(mesh);
        const auto sol = tracked_solve_fitted(mesh, r, "xmin");
        row.continuous = model_dj_continuous(sol, v);
        row.strong = model_dj_fitted_strong(sol, v);
        row.gap = std::abs(row.continuous - row.strong);
        row.fd_fitted = fitted_taylor(mesh, r, v, "xmin").quotients.back();

        auto cmesh = cut_demo_mesh(16 << l);
        const auto phi = cut_demo_level_set(cmesh);
        const auto csol = tracked_solve_cut(cmesh, phi, r, "xmin");
        row.min_cut_fraction = csol.min_cut_fraction;
        double best = std::numeric_limits<double>::infinity();
        for (int node : cut_band_nodes(phi, "xmin")) {
            const double d = (cmesh->vertex(node) - anchor).norm();
            if (d < best) {
                best = d;
                row.cut_node = node;
            }
        }
        if (row.cut_node >= 0) {
            const HatPerturbation w{row.cut_node};
            row.dj_cut = model_dj_cut(csol, w).value;
            row.fd_cut = cut_taylor(csol, w).quotients.back();
        }
        rows.push_back(row);
    }
    return rows;
}

bool gaps_decrease(const std::vector<GapRow>& rows)
{
    for (size_t i = 1; i < rows.size(); ++i) {
        const bool both_tiny = rows[i - 1].gap <= 1e-13 && rows[i].gap <= 1e-13;
        if (!(rows[i].gap < rows[i - 1].gap) && !both_tiny) return false;
    }
    return true;
}

OptimizerRun optimize(MeshPtr mesh, const LevelSetFunction& phi0, const AffineSource& r, const std::string& label,
                      const OptimizerSettings& settings,
                      const std::function<void(int, const LevelSetFunction&)>& on_iterate)
{
    OptimizerRun run;
    const auto one = PiecewiseField::constant(mesh, 1.0);
    LevelSetFunction phi = phi0;
    const double target = settings.target_volume.value_or(volume_functional(phi0, one));
    for (int it = 0;; ++it) {
        OptimizerIteration row;
        row.iteration = it;
        std::optional<FemSolution> sol;
        try {
            sol = tracked_solve_cut(mesh, phi, r, label);
        } catch (const std::exception& e) {
            run.failed = true;
            run.error = e.what();
            break;
        }
        row.compliance = compliance(*sol);
        row.volume = volume_functional(phi, one);
        row.objective = row.compliance + 0.5 * settings.lambda * (row.volume - target) * (row.volume - target);
        row.min_cut_fraction = sol->min_cut_fraction;

        const auto nodes = cut_band_nodes(phi, label);
        std::vector<double> g(nodes.size());
        for (size_t i = 0; i < nodes.size(); ++i) {
            const HatPerturbation w{nodes[i]};
            g[i] = model_dj_cut(*sol, w).value;
            if (settings.lambda != 0.0) g[i] += settings.lambda * (row.volume - target) * dj1(phi, w, one).value;
            row.gradient_norm = std::max(row.gradient_norm, std::abs(g[i]));
        }
        if (on_iterate) on_iterate(it, phi);
        if (it >= settings.max_iterations || row.gradient_norm <= settings.gradient_tolerance) {
            run.history.push_back(row);
            break;
        }
        double cap = kInfiniteStep;
        for (size_t i = 0; i < nodes.size(); ++i)
            if (g[i] != 0.0) cap = std::min(cap, 0.5 * t_max_estimate(phi, HatPerturbation{nodes[i]}));
        const double alpha = std::min(settings.step, cap / row.gradient_norm);
        auto vals = phi.nodal_values();
        for (size_t i = 0; i < nodes.size(); ++i) vals[nodes[i]] -= alpha * g[i];
        LevelSetFunction next(mesh, std::move(vals));
        row.step = alpha * row.gradient_norm;
        row.pattern_changed = classify(phi).cells != classify(next).cells;
        run.history.push_back(row);
        phi = std::move(next);
    }
    run.final_phi = phi;
    return run;
}

} // namespace dilagrad::suites
