#include "dilagrad/cutgeom.hpp"
#include "dilagrad/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dilagrad;

namespace {

MeshPtr box(int dim, int n)
{
    const std::vector<int> cells(dim, n);
    const std::vector<double> ext(dim, 1.0);
    return make_shared_mesh(build_structured_mesh(dim, cells, ext));
}

// Fraction of a k-simplex where a linear function with corner values v is
// negative: sum_i (-v_i)_+^k / prod_{j != i} (v_j - v_i). Needs distinct values.
// `magnitude` gets the sum of |terms|, which bounds the rounding error.
double negative_fraction(const std::vector<double>& v, double* magnitude = nullptr)
{
    const int k = static_cast<int>(v.size()) - 1;
    double s = 0.0;
    for (int i = 0; i <= k; ++i) {
        if (v[i] >= 0.0) continue;
        double den = 1.0;
        for (int j = 0; j <= k; ++j)
            if (j != i) den *= v[j] - v[i];
        s += std::pow(-v[i], k) / den;
        if (magnitude) *magnitude += std::abs(std::pow(-v[i], k) / den);
    }
    return s;
}

// Sutherland-Hodgman clip of a polygon against {a . x + b <= 0}.
std::vector<Eigen::Vector2d> clip_half_plane(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& a, double b)
{
    std::vector<Eigen::Vector2d> out;
    for (size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        const double fp = a.dot(p) + b, fq = a.dot(q) + b;
        if (fp <= 0) out.push_back(p);
        if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) out.push_back(p + fp / (fp - fq) * (q - p));
    }
    return out;
}

double shoelace(const std::vector<Eigen::Vector2d>& poly)
{
    double s = 0.0;
    for (size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p.x() * q.y() - p.y() * q.x();
    }
    return 0.5 * std::abs(s);
}

// Area of {phi < 0} computed by clipping every triangle independently.
double clipped_area(const LevelSetFunction& phi)
{
    const Mesh& m = *phi.mesh();
    double area = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        std::vector<Eigen::Vector2d> tri;
        for (int i = 0; i < 3; ++i) tri.emplace_back(m.cell_vertex(c, i).x(), m.cell_vertex(c, i).y());
        const Vec3 g = phi.grad(c);
        const Vec3 x0 = m.cell_vertex(c, 0);
        const double b = phi.value(m.cell(c)[0]) - g.dot(x0);
        area += shoelace(clip_half_plane(tri, Eigen::Vector2d(g.x(), g.y()), b));
    }
    return area;
}

double total_weight(const CellQuadRule& q)
{
    double s = 0.0;
    for (const auto& p : q) s += p.weight;
    return s;
}

LevelSetFunction random_phi(MeshPtr m, std::mt19937_64& eng)
{
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> v(m->num_vertices());
    for (double& x : v) x = U(eng);
    return LevelSetFunction(m, v);
}

} // namespace

TEST_CASE("cut_cell: reference triangle cut at edge midpoints")
{
    MeshData d;
    d.dim = 2;
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    d.cells = {{0, 1, 2, -1}};
    auto m = make_shared_mesh(compute_adjacency(d));
    const LevelSetFunction phi(m, {-1.0, 1.0, 1.0});
    const CutCell cc = cut_cell(phi, 0);
    CHECK(cc.status == CellStatus::Cut);
    REQUIRE(cc.boundary_patch.size() == 2);
    for (const auto& p : cc.boundary_patch) CHECK(std::abs(phi.eval(0, p)) <= 1e-15);
    CHECK(cc.interior_measure() == doctest::Approx(0.5 * 0.25).epsilon(1e-15));
    CHECK(cc.interior_measure() + cc.exterior_measure() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK((cc.normal - Vec3(1, 1, 0).normalized()).norm() <= 1e-15);
}

TEST_CASE("cut_cell: tetrahedron patches are triangles or quadrilaterals")
{
    MeshData d;
    d.dim = 3;
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    d.cells = {{0, 1, 2, 3}};
    auto m = make_shared_mesh(compute_adjacency(d));
    const auto one = cut_cell(LevelSetFunction(m, {-1.0, 0.5, 0.7, 0.3}), 0);
    CHECK(one.boundary_patch.size() == 3);
    const auto two = cut_cell(LevelSetFunction(m, {-1.0, -0.5, 0.7, 0.3}), 0);
    CHECK(two.boundary_patch.size() == 4);
    const auto three = cut_cell(LevelSetFunction(m, {-1.0, -0.5, -0.7, 0.3}), 0);
    CHECK(three.boundary_patch.size() == 3);
    CHECK(cut_cell(LevelSetFunction(m, {1.0, 0.5, 0.7, 0.3}), 0).status == CellStatus::Outside);
    CHECK(cut_cell(LevelSetFunction(m, {-1.0, -0.5, -0.7, -0.3}), 0).status == CellStatus::Inside);
    CHECK_THROWS_AS(cut_cell(LevelSetFunction(m, {0.0, 0.0, 0.0, 0.0}), 0), DegenerateCellError);

    // quadrilateral area via its two triangles against the patch quadrature
    const auto& p = two.boundary_patch;
    const double quad_area = 0.5 * ((p[1] - p[0]).cross(p[2] - p[0]).norm() + (p[2] - p[0]).cross(p[3] - p[0]).norm());
    double w = 0.0;
    for (const auto& q : quadrature_patch(p, 3, 2)) w += q.weight;
    CHECK(std::abs(w - quad_area) <= 1e-15);
    CHECK(std::abs(two.patch_measure() - quad_area) <= 1e-15);
}

TEST_CASE("cut_cell: interior measure against the closed-form simplex fraction")
{
    for (int dim : {2, 3}) {
        auto m = box(dim, dim == 2 ? 4 : 2);
        std::mt19937_64 eng(40 + dim);
        for (int trial = 0; trial < 5; ++trial) {
            const auto phi = random_phi(m, eng);
            for (int c = 0; c < m->num_cells(); ++c) {
                std::vector<double> v;
                for (int i : m->cell(c)) v.push_back(phi.value(i));
                const CutCell cc = cut_cell(phi, c);
                const double vol = m->cell_volume(c);
                double mag = 0.0;
                const double frac = negative_fraction(v, &mag);
                CHECK(std::abs(cc.interior_measure() - vol * frac) <= 1e-13 * vol * std::max(1.0, mag));
                CHECK(std::abs(cc.interior_measure() + cc.exterior_measure() - vol) <= 1e-13 * vol);
            }
        }
    }
}

TEST_CASE("cut_cell: patch geometry invariants")
{
    for (int dim : {2, 3}) {
        auto m = box(dim, dim == 2 ? 4 : 2);
        std::mt19937_64 eng(50 + dim);
        const auto phi = random_phi(m, eng);
        int cut = 0;
        for (int c = 0; c < m->num_cells(); ++c) {
            const CutCell cc = cut_cell(phi, c);
            if (cc.status != CellStatus::Cut) continue;
            ++cut;
            const Vec3 g = phi.grad(c);
            CHECK((cc.normal - g / g.norm()).norm() <= 1e-14);
            CHECK(cc.normal.norm() == doctest::Approx(1.0).epsilon(1e-15));
            for (const auto& p : cc.boundary_patch) CHECK(std::abs(phi.eval(c, p)) <= m->geom_tol());
            if (dim == 3) CHECK((cc.boundary_patch.size() == 3 || cc.boundary_patch.size() == 4));

            // closure of the polytope Omega cap K: patch normal * area plus the
            // negative parts of the cell faces weighted by their outward normals
            Vec3 flux = cc.normal * cc.patch_measure();
            for (int lf = 0; lf <= dim; ++lf) {
                std::vector<double> v;
                std::vector<Vec3> pts;
                for (int i = 0; i <= dim; ++i)
                    if (i != lf) {
                        v.push_back(phi.value(m->cell(c)[i]));
                        pts.push_back(m->cell_vertex(c, i));
                    }
                flux += m->cell_face_normal(c, lf) * simplex_measure(pts) * negative_fraction(v);
            }
            CHECK(flux.norm() <= 1e-12);
        }
        CHECK(cut > 0);
    }
}

TEST_CASE("face_patch: 2D orientation and frames")
{
    auto m = box(2, 4);
    std::mt19937_64 eng(60);
    const auto phi = random_phi(m, eng);
    int found = 0;
    for (int f = 0; f < m->num_faces(); ++f) {
        const auto fp = face_patch(phi, f);
        if (!fp) continue;
        ++found;
        REQUIRE(fp->cut_locus.size() == 1);
        const Vec3 x = fp->cut_locus[0];
        CHECK(std::abs(phi.eval(fp->cells[0], x)) <= 1e-14);
        // nS is along the edge and points into the positive part of S
        auto fv = m->face_vertices(f);
        const Vec3 edge = (m->vertex(fv[1]) - m->vertex(fv[0])).normalized();
        CHECK(std::abs(std::abs(fp->nS.dot(edge)) - 1.0) <= 1e-14);
        const Vec3 probe = x + 1e-3 * fp->nS;
        CHECK(phi.eval(fp->cells[0], probe) > 0.0);
        CHECK(fp->dnS_phi > 0.0);
        for (int k = 0; k < 2; ++k) {
            CHECK((fp->tS[k].cross(fp->nS) - fp->face_normal[k]).norm() <= 1e-14);
            CHECK(std::abs(std::abs(fp->tS[k].z()) - 1.0) <= 1e-14);
            CHECK(std::abs(fp->conormal[k].dot(fp->patch_normal[k])) <= 1e-14);
            CHECK(std::abs(fp->conormal[k].dot(fp->tS[k])) <= 1e-14);
        }
        CHECK((fp->tS[0] + fp->tS[1]).norm() == 0.0);
        CHECK(quadrature_facecut(*fp, 2, 3).size() == 1);
        CHECK(quadrature_facecut(*fp, 2, 3)[0].weight == 1.0);
    }
    CHECK(found > 0);
}

TEST_CASE("face_patch: 3D frames and co-normals")
{
    auto m = box(3, 2);
    std::mt19937_64 eng(61);
    const auto phi = random_phi(m, eng);
    int found = 0;
    for (int f = 0; f < m->num_faces(); ++f) {
        const auto fp = face_patch(phi, f);
        if (!fp) continue;
        ++found;
        CHECK(fp->cut_locus.size() == 2);
        CHECK((fp->face_normal[0] + fp->face_normal[1]).norm() <= 1e-14);
        for (int k = 0; k < 2; ++k) {
            CHECK((fp->tS[k].cross(fp->nS) - fp->face_normal[k]).norm() <= 1e-14);
            CHECK(std::abs(fp->conormal[k].norm() - 1.0) <= 1e-14);
            CHECK(std::abs(fp->conormal[k].dot(fp->tS[k])) <= 1e-14);
            CHECK(std::abs(fp->conormal[k].dot(fp->patch_normal[k])) <= 1e-14);
            // tS is the direction of the cut segment
            const Vec3 seg = (fp->cut_locus[1] - fp->cut_locus[0]).normalized();
            CHECK(std::abs(std::abs(fp->tS[k].dot(seg)) - 1.0) <= 1e-12);
        }
        double w = 0.0;
        for (const auto& q : quadrature_facecut(*fp, 3, 2)) w += q.weight;
        CHECK(std::abs(w - fp->locus_measure()) <= 1e-15);
    }
    CHECK(found > 0);
}

TEST_CASE("face_patch: straight boundary gives opposite co-normals")
{
    for (int dim : {2, 3}) {
        auto m = box(dim, 3);
        const Vec3 n = dim == 2 ? Vec3(0.6, 0.8, 0) : Vec3(0.48, 0.6, 0.64);
        const auto phi = sample_analytic(m, [&](const Vec3& x) { return n.dot(x) - 0.77; });
        int found = 0;
        for (int f = 0; f < m->num_faces(); ++f) {
            const auto fp = face_patch(phi, f);
            if (!fp) continue;
            ++found;
            CHECK((fp->conormal[0] + fp->conormal[1]).norm() <= 1e-14);
        }
        CHECK(found > 0);
    }
}

TEST_CASE("face_patch: aligned face raises, boundary faces are skipped")
{
    auto m = box(2, 4);
    const auto phi = sample_analytic(m, [](const Vec3& x) { return x.x() - 0.5; });
    const auto dec = classify(phi);
    REQUIRE_FALSE(dec.aligned_faces.empty());
    CHECK_THROWS_AS(face_patch(phi, dec.aligned_faces[0]), AlignmentError);
    // with effective signs (hat on an aligned vertex) the face resolves
    int hub = -1;
    for (int v : m->face_vertices(dec.aligned_faces[0]))
        if (m->vertex(v).y() > 0 && m->vertex(v).y() < 1) hub = v;
    REQUIRE(hub >= 0);
    const auto signs = effective_signs(phi, HatPerturbation{hub}, Side::FromAbove);
    CHECK_NOTHROW(face_patch(phi, dec.aligned_faces[0], signs));
    for (int f : m->boundary_faces()) CHECK_FALSE(face_patch(phi, f).has_value());
}

TEST_CASE("quadrature_domain")
{
    auto m = box(2, 4);
    const auto all = sample_analytic(m, [](const Vec3&) { return -1.0; });
    CHECK(total_weight(quadrature_domain(all, 2)) == doctest::Approx(1.0).epsilon(1e-14));

    const auto half = sample_analytic(m, [](const Vec3& x) { return x.x() - 0.4; });
    CHECK(std::abs(total_weight(quadrature_domain(half, 2)) - 0.4) <= 1e-13);

    // integral of x over x < 0.4 is 0.08
    double s = 0.0;
    for (const auto& q : quadrature_domain(half, 1)) s += q.weight * q.point.x();
    CHECK(std::abs(s - 0.08) <= 1e-14);

    // disk: compared against the polygonal area from independent clipping
    auto fine = box(2, 8);
    const Vec3 c(0.5, 0.5, 0);
    const auto disk = sample_analytic(fine, [&](const Vec3& x) { return (x - c).norm() - 0.3; });
    const double poly = clipped_area(disk);
    CHECK(std::abs(total_weight(quadrature_domain(disk, 2)) - poly) <= 1e-13);
    CHECK(std::abs(poly - M_PI * 0.09) < 0.02); // second-order geometric error only

    // random level sets in 3D against the closed-form fraction
    auto m3 = box(3, 2);
    std::mt19937_64 eng(70);
    const auto phi3 = random_phi(m3, eng);
    double expect = 0.0;
    for (int k = 0; k < m3->num_cells(); ++k) {
        std::vector<double> v;
        for (int i : m3->cell(k)) v.push_back(phi3.value(i));
        expect += m3->cell_volume(k) * negative_fraction(v);
    }
    CHECK(std::abs(total_weight(quadrature_domain(phi3, 3)) - expect) <= 1e-13);
}

TEST_CASE("quadrature_boundary")
{
    // straight line y = 0.3 + 0.2 x across the unit square: chord length sqrt(1.04)
    auto m = box(2, 5);
    const auto phi = sample_analytic(m, [](const Vec3& x) { return x.y() - 0.3 - 0.2 * x.x(); });
    CHECK(std::abs(total_weight(quadrature_boundary(phi, 2)) - std::sqrt(1.04)) <= 1e-13);

    // plane z = 0.35 through the unit cube: area 1
    auto m3 = box(3, 2);
    const auto p3 = sample_analytic(m3, [](const Vec3& x) { return x.z() - 0.35; });
    CHECK(std::abs(total_weight(quadrature_boundary(p3, 2)) - 1.0) <= 1e-13);

    // aligned faces counted once
    auto m4 = box(2, 4);
    const auto al = sample_analytic(m4, [](const Vec3& x) { return x.x() - 0.5; });
    CHECK(std::abs(total_weight(quadrature_boundary(al, 1)) - 1.0) <= 1e-14);
}

TEST_CASE("clip_simplex and zero sets agree with the oracle")
{
    const std::vector<Vec3> tet{Vec3(0, 0, 0), Vec3(1, 0.1, 0), Vec3(0.2, 1, 0), Vec3(0.1, 0.3, 1)};
    const std::vector<double> vals{-0.3, 0.4, -0.1, 0.9};
    double neg = 0.0, pos = 0.0;
    for (const auto& s : clip_simplex(tet, vals, true)) neg += s.measure();
    for (const auto& s : clip_simplex(tet, vals, false)) pos += s.measure();
    const double vol = simplex_measure(tet);
    CHECK(std::abs(neg - vol * negative_fraction(vals)) <= 1e-15);
    CHECK(std::abs(neg + pos - vol) <= 1e-15);
    const std::vector<int> signs{-1, 1, -1, 1};
    CHECK(simplex_zero_set(tet, vals, signs).size() == 4);
}

TEST_CASE("cut geometry JSON dump")
{
    auto m = box(2, 2);
    const auto phi = sample_analytic(m, [](const Vec3& x) { return x.x() - 0.3; });
    const std::string js = cut_geometry_json(phi);
    CHECK(js.find("conormal") != std::string::npos);
    CHECK(js.find("patch") != std::string::npos);
}
