#include "dilagrad/errors.hpp"
#include "dilagrad/field.hpp"
#include "dilagrad/mesh.hpp"
#include "dilagrad/mesh_io.hpp"
#include "dilagrad/quadrature.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

using namespace dilagrad;

namespace {

Mesh unit_mesh(int dim, int n)
{
    const std::vector<int> cells(dim, n);
    const std::vector<double> ext(dim, 1.0);
    return build_structured_mesh(dim, cells, ext);
}

// Number of interior faces found by pairing sorted cell faces directly.
int brute_force_interior_faces(const Mesh& m)
{
    std::map<std::vector<int>, int> seen;
    for (int c = 0; c < m.num_cells(); ++c) {
        auto cv = m.cell(c);
        for (int skip = 0; skip <= m.dim(); ++skip) {
            std::vector<int> f;
            for (int i = 0; i <= m.dim(); ++i)
                if (i != skip) f.push_back(cv[i]);
            std::sort(f.begin(), f.end());
            ++seen[f];
        }
    }
    int n = 0;
    for (auto& [k, v] : seen) n += v == 2;
    return n;
}

// Exact integral of x^a y^b over the unit reference triangle: a! b! / (a + b + 2)!
double ref_triangle_monomial(int a, int b)
{
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

double ref_tet_monomial(int a, int b, int c)
{
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) * std::tgamma(c + 1.0) / std::tgamma(a + b + c + 4.0);
}

} // namespace

TEST_CASE("structured mesh sizes")
{
    const Mesh m2 = unit_mesh(2, 1);
    CHECK(m2.num_cells() == 4);
    CHECK(m2.num_vertices() == 5);
    const Mesh m3 = unit_mesh(3, 1);
    CHECK(m3.num_cells() == 6);
    CHECK(m3.num_vertices() == 8);
}

TEST_CASE("structured mesh volumes sum to the box")
{
    const Mesh m = unit_mesh(2, 4);
    double s = 0.0;
    for (int c = 0; c < m.num_cells(); ++c) {
        CHECK(m.cell_volume(c) > 0.0);
        s += m.cell_volume(c);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<int> cells{3, 2, 4};
    const std::vector<double> ext{0.7, 1.3, 2.1};
    const Mesh m3 = build_structured_mesh(3, cells, ext);
    CHECK(std::abs(m3.total_volume() - 0.7 * 1.3 * 2.1) <= 1e-13 * 0.7 * 1.3 * 2.1);
}

TEST_CASE("structured mesh rejects bad extents")
{
    const std::vector<int> cells{2, 2};
    const std::vector<double> zero{0.0, 1.0}, neg{1.0, -1.0};
    CHECK_THROWS_AS(build_structured_mesh(2, cells, zero), InvalidArgument);
    CHECK_THROWS_AS(build_structured_mesh(2, cells, neg), InvalidArgument);
    const std::vector<int> none{0, 2};
    const std::vector<double> one{1.0, 1.0};
    CHECK_THROWS_AS(build_structured_mesh(2, none, one), InvalidArgument);
}

TEST_CASE("adjacency of two triangles")
{
    MeshData d;
    d.dim = 2;
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    d.cells = {{0, 1, 2, -1}, {0, 2, 3, -1}};
    const Mesh m = compute_adjacency(d);
    int interior = 0, boundary = 0;
    for (int f = 0; f < m.num_faces(); ++f) (m.face(f).is_boundary() ? boundary : interior)++;
    CHECK(interior == 1);
    CHECK(boundary == 4);
}

TEST_CASE("adjacency of a single tetrahedron")
{
    MeshData d;
    d.dim = 3;
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    d.cells = {{0, 1, 2, 3}};
    const Mesh m = compute_adjacency(d);
    CHECK(m.num_faces() == 4);
    for (int f = 0; f < 4; ++f) CHECK(m.face(f).is_boundary());
    CHECK(m.num_subfaces() == 6);
    for (int e = 0; e < m.num_subfaces(); ++e) CHECK(m.subface(e).faces.size() == 2);
}

TEST_CASE("interior face counts match brute-force pairing")
{
    for (int dim : {2, 3}) {
        const Mesh m = unit_mesh(dim, dim == 2 ? 4 : 2);
        int interior = 0;
        for (int f = 0; f < m.num_faces(); ++f) interior += !m.face(f).is_boundary();
        CHECK(interior == brute_force_interior_faces(m));
    }
    // Euler count for the 2D criss-cross: edges = 4 n^2 + 2 n (n + 1), boundary edges = 4 n
    const Mesh m = unit_mesh(2, 4);
    CHECK(m.num_faces() == 4 * 16 + 2 * 4 * 5);
}

TEST_CASE("non-conforming input is rejected")
{
    MeshData d;
    d.dim = 2;
    // three triangles sharing edge 0-1
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 1, 0), Vec3(0.5, -1, 0), Vec3(0.5, 0.5, 0)};
    d.cells = {{0, 1, 2, -1}, {1, 0, 3, -1}, {0, 1, 4, -1}};
    CHECK_THROWS_AS(compute_adjacency(d), TopologyError);

    MeshData flip;
    flip.dim = 2;
    flip.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    flip.cells = {{0, 2, 1, -1}};
    CHECK_THROWS(compute_adjacency(flip));
}

TEST_CASE("interior face normals are exact negatives")
{
    for (int dim : {2, 3}) {
        const Mesh m = unit_mesh(dim, 2);
        for (int f = 0; f < m.num_faces(); ++f) {
            if (m.face(f).is_boundary()) continue;
            const Vec3 a = m.face_normal(f, 0), b = m.face_normal(f, 1);
            CHECK((a + b).norm() == 0.0);
            CHECK(a.norm() == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("boundary labels cover the box faces")
{
    const Mesh m = unit_mesh(2, 3);
    CHECK(m.faces_with_label("xmin").size() == 3);
    CHECK(m.faces_with_label("ymax").size() == 3);
    const auto mask = m.label_vertex_mask("xmin");
    int n = 0;
    for (int v = 0; v < m.num_vertices(); ++v)
        if (mask[v]) {
            CHECK(m.vertex(v).x() == 0.0);
            ++n;
        }
    CHECK(n == 4);
}

TEST_CASE("mesh JSON round trip and diagnostics")
{
    const Mesh m = unit_mesh(2, 2);
    const Mesh back = parse_mesh_json(mesh_to_json(m));
    CHECK(back.num_cells() == m.num_cells());
    CHECK(back.num_faces() == m.num_faces());
    CHECK(back.faces_with_label("xmax").size() == 2);
    CHECK(back.total_volume() == doctest::Approx(1.0));

    try {
        parse_mesh_json("{\n\"dim\": 2,\n\"vertices\": [[0, 0],\n [1 0]]}");
        FAIL("expected a parse error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_mesh_json(R"({"dim": 2, "vertices": [[0, 0]], "cells": [[0, 0]]})"), InvalidArgument);
    CHECK_THROWS_AS(parse_mesh_json(R"({"dim": 2, "vertices": [[0, 0], [1, 0], [0, 1]], "cells": [[0, 1, 7]]})"),
                    std::exception);
}

TEST_CASE("quadrature: degree 0 on the unit triangle")
{
    const std::vector<Vec3> tri{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const auto q = quadrature_simplex(tri, 0);
    REQUIRE(q.size() == 1);
    CHECK(q[0].weight == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("quadrature: x^2 over the reference triangle")
{
    const std::vector<Vec3> tri{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    double s = 0.0;
    for (const auto& p : quadrature_simplex(tri, 2)) s += p.weight * p.point.x() * p.point.x();
    CHECK(std::abs(s - 1.0 / 12.0) <= 1e-15);
}

TEST_CASE("quadrature: monomials on the reference simplices")
{
    const std::vector<Vec3> tri{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    const std::vector<Vec3> tet{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    for (int q = 0; q <= 8; ++q) {
        const auto rt = quadrature_simplex(tri, q);
        for (int a = 0; a <= q; ++a)
            for (int b = 0; a + b <= q; ++b) {
                double s = 0.0;
                for (const auto& p : rt) s += p.weight * std::pow(p.point.x(), a) * std::pow(p.point.y(), b);
                const double ex = ref_triangle_monomial(a, b);
                CHECK(std::abs(s - ex) <= 1e-13 * ex);
            }
        const auto r3 = quadrature_simplex(tet, q);
        for (int a = 0; a <= q; ++a)
            for (int b = 0; a + b <= q; ++b)
                for (int c = 0; a + b + c <= q; ++c) {
                    double s = 0.0;
                    for (const auto& p : r3)
                        s += p.weight * std::pow(p.point.x(), a) * std::pow(p.point.y(), b) * std::pow(p.point.z(), c);
                    const double ex = ref_tet_monomial(a, b, c);
                    CHECK(std::abs(s - ex) <= 1e-13 * ex);
                }
    }
}

TEST_CASE("quadrature: random polynomial on a random triangle via affine pullback")
{
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        Vec3 a(U(eng), U(eng), 0), b(U(eng), U(eng), 0), c(U(eng), U(eng), 0);
        const double area = 0.5 * std::abs((b - a).cross(c - a).z());
        if (area < 1e-2) continue;
        const std::vector<Vec3> tri{a, b, c};
        // p(x) = sum coefficient * xi^i eta^j in the affine coordinates of (a, b, c)
        double coef[4][4];
        for (auto& row : coef)
            for (double& v : row) v = U(eng);
        double exact = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; i + j < 4; ++j) exact += coef[i][j] * 2.0 * area * ref_triangle_monomial(i, j);
        Eigen::Matrix2d J;
        J << (b - a).x(), (c - a).x(), (b - a).y(), (c - a).y();
        const Eigen::Matrix2d Ji = J.inverse();
        double s = 0.0;
        double wsum = 0.0;
        for (const auto& p : quadrature_simplex(tri, 3)) {
            const Eigen::Vector2d xi = Ji * Eigen::Vector2d(p.point.x() - a.x(), p.point.y() - a.y());
            double v = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; i + j < 4; ++j) v += coef[i][j] * std::pow(xi[0], i) * std::pow(xi[1], j);
            s += p.weight * v;
            wsum += p.weight;
        }
        CHECK(std::abs(wsum - area) <= 1e-14 * std::max(1.0, area));
        CHECK(std::abs(s - exact) <= 1e-13 * std::max(1.0, std::abs(exact)));
    }
}

TEST_CASE("quadrature: weights sum to cell volume; unsupported degree")
{
    const Mesh m = unit_mesh(3, 2);
    for (int c = 0; c < m.num_cells(); c += 5) {
        double s = 0.0;
        for (const auto& p : quadrature_cell(m, c, 4)) s += p.weight;
        CHECK(std::abs(s - m.cell_volume(c)) <= 1e-14);
    }
    const std::vector<Vec3> tri{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK_THROWS_AS(quadrature_simplex(tri, kMaxQuadratureDegree + 1), InvalidArgument);
    CHECK_THROWS_AS(quadrature_simplex(tri, -1), InvalidArgument);
}

TEST_CASE("simplex measures")
{
    const std::vector<Vec3> seg{Vec3(0, 0, 0), Vec3(3, 4, 0)};
    CHECK(simplex_measure(seg) == doctest::Approx(5.0));
    const std::vector<Vec3> tri{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 0, 3)};
    CHECK(simplex_measure(tri) == doctest::Approx(3.0));
    const std::vector<Vec3> tet{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    CHECK(simplex_measure(tet) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("field: constant and linear")
{
    auto m = make_shared_mesh(unit_mesh(2, 2));
    const auto c = PiecewiseField::constant(m, 2.5);
    const Vec3 x = m->cell_vertex(3, 0) * 0.5 + m->cell_vertex(3, 1) * 0.25 + m->cell_vertex(3, 2) * 0.25;
    CHECK(c.eval(3, x) == 2.5);
    CHECK(c.grad(3, x).norm() == 0.0);

    const Vec3 a(0.7, -1.3, 0.0);
    const auto lin = PiecewiseField::from_global(m, 1, [&](const Vec3& p) { return a.dot(p) + 0.2; });
    for (int k = 0; k < m->num_cells(); ++k) {
        const Vec3 y = (m->cell_vertex(k, 0) + m->cell_vertex(k, 1) + m->cell_vertex(k, 2)) / 3.0;
        CHECK((lin.grad(k, y) - a).norm() <= 1e-14);
        CHECK(lin.eval(k, y) == doctest::Approx(a.dot(y) + 0.2).epsilon(1e-14));
    }
}

TEST_CASE("field: jump values are cell-relative")
{
    MeshData d;
    d.dim = 2;
    d.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    d.cells = {{0, 1, 2, -1}, {0, 2, 3, -1}};
    auto m = make_shared_mesh(compute_adjacency(d));
    const auto f = PiecewiseField::interpolate(m, 0, [](int c, const Vec3&) { return c == 0 ? 1.5 : -4.0; });
    const Vec3 on_diag(0.4, 0.4, 0.0);
    CHECK(f.eval(0, on_diag) == 1.5);
    CHECK(f.eval(1, on_diag) == -4.0);
    CHECK_THROWS_AS(f.eval(0, Vec3(0.1, 0.9, 0.0)), InvalidArgument);
}

TEST_CASE("field: quartic reproduction and gradient")
{
    auto m = make_shared_mesh(unit_mesh(3, 1));
    auto p = [](const Vec3& x) { return x.x() * x.x() * x.y() * x.z() - 3.0 * x.y() * x.y() * x.y() + x.z(); };
    auto dp = [](const Vec3& x) {
        return Vec3(2 * x.x() * x.y() * x.z(), x.x() * x.x() * x.z() - 9 * x.y() * x.y(), x.x() * x.x() * x.y() + 1);
    };
    const auto f = PiecewiseField::from_global(m, 4, p);
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int c = 0; c < m->num_cells(); ++c) {
        double l[4], s = 0;
        for (double& v : l) s += (v = U(eng));
        Vec3 x = Vec3::Zero();
        for (int i = 0; i < 4; ++i) x += l[i] / s * m->cell_vertex(c, i);
        CHECK(std::abs(f.eval(c, x) - p(x)) <= 1e-13);
        CHECK((f.grad(c, x) - dp(x)).norm() <= 1e-12);
    }
    CHECK_THROWS_AS(PiecewiseField::from_global(m, kMaxFieldDegree + 1, p), InvalidArgument);
}

TEST_CASE("field: linear combinations")
{
    auto m = make_shared_mesh(unit_mesh(2, 2));
    const auto f = PiecewiseField::from_global(m, 2, [](const Vec3& x) { return x.x() * x.y(); });
    const auto g = PiecewiseField::from_global(m, 1, [](const Vec3& x) { return 1.0 - x.y(); });
    const auto h = f.combined(2.0, g, -3.0);
    const Vec3 x(0.3, 0.6, 0.0);
    for (int c = 0; c < m->num_cells(); ++c) {
        if (!m->contains(c, x)) continue;
        CHECK(h.eval(c, x) == doctest::Approx(2.0 * 0.18 - 3.0 * 0.4).epsilon(1e-14));
        CHECK(f.scaled(-2.0).eval(c, x) == doctest::Approx(-0.36).epsilon(1e-14));
    }
}
