#include "dilagrad/cutgeom.hpp"

#include "dilagrad/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dilagrad {

namespace {

Vec3 polygon_normal(std::span<const Vec3> pts)
{
    Vec3 best = Vec3::Zero();
    for (size_t i = 1; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            const Vec3 c = (pts[i] - pts[0]).cross(pts[j] - pts[0]);
            if (c.squaredNorm() > best.squaredNorm()) best = c;
        }
    return best;
}

// Orders coplanar points of a convex polygon by angle around the centroid.
void order_convex(std::vector<Vec3>& pts)
{
    if (pts.size() < 4) return; // 3 points are always in some cyclic order
    const Vec3 n = polygon_normal(pts);
    if (n.squaredNorm() == 0.0) return;
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    Vec3 u = Vec3::Zero();
    for (const auto& p : pts)
        if ((p - c).squaredNorm() > u.squaredNorm()) u = p - c;
    const Vec3 v = n.normalized().cross(u);
    std::vector<std::pair<double, Vec3>> keyed;
    for (const auto& p : pts) keyed.emplace_back(std::atan2((p - c).dot(v), (p - c).dot(u)), p);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t i = 0; i < pts.size(); ++i) pts[i] = keyed[i].second;
}

void push_unique(std::vector<Vec3>& pts, const Vec3& p)
{
    for (const auto& q : pts)
        if (q == p) return;
    pts.push_back(p);
}

Vec3 crossing(const Vec3& a, const Vec3& b, double va, double vb)
{
    if (va == 0.0) return a;
    if (vb == 0.0) return b;
    const double lam = va / (va - vb);
    return a + lam * (b - a);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

struct CellGeometry {
    std::array<Vec3, 4> pts;
    std::array<double, 4> vals;
    std::array<int, 4> signs;
    int n;
};

CellGeometry gather(const LevelSetFunction& phi, std::span<const int> verts, std::span<const int> signs)
{
    CellGeometry g{};
    g.n = static_cast<int>(verts.size());
    for (int i = 0; i < g.n; ++i) {
        g.pts[i] = phi.mesh()->vertex(verts[i]);
        g.vals[i] = phi.value(verts[i]);
        g.signs[i] = signs.empty() ? sign_of(g.vals[i]) : signs[verts[i]];
    }
    return g;
}

} // namespace

double CutCell::patch_measure() const
{
    if (boundary_patch.size() < 2) return 0.0;
    if (boundary_patch.size() == 2) return (boundary_patch[1] - boundary_patch[0]).norm();
    double a = 0.0;
    for (size_t i = 1; i + 1 < boundary_patch.size(); ++i)
        a += 0.5 * (boundary_patch[i] - boundary_patch[0]).cross(boundary_patch[i + 1] - boundary_patch[0]).norm();
    return a;
}

double CutCell::interior_measure() const
{
    double s = 0.0;
    for (const auto& sx : interior_simplices) s += sx.measure();
    return s;
}

double CutCell::exterior_measure() const
{
    double s = 0.0;
    for (const auto& sx : exterior_simplices) s += sx.measure();
    return s;
}

double FacePatch::locus_measure() const
{
    if (cut_locus.size() < 2) return 0.0;
    return (cut_locus[1] - cut_locus[0]).norm();
}

std::vector<Vec3> simplex_zero_set(std::span<const Vec3> pts, std::span<const double> vals, std::span<const int> signs)
{
    const int n = static_cast<int>(pts.size());
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i)
        if (signs[i] == 0) push_unique(out, pts[i]);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (signs[i] * signs[j] < 0) push_unique(out, crossing(pts[i], pts[j], vals[i], vals[j]));
    order_convex(out);
    return out;
}

std::vector<Simplex> clip_simplex(std::span<const Vec3> pts, std::span<const double> vals, bool keep_negative)
{
    const int n = static_cast<int>(pts.size());
    const int k = n - 1;
    auto kept = [&](double v) { return keep_negative ? v <= 0.0 : v >= 0.0; };
    auto strict = [&](double v) { return keep_negative ? v < 0.0 : v > 0.0; };

    int apex = -1;
    bool all_kept = true;
    for (int i = 0; i < n; ++i) {
        if (apex < 0 && strict(vals[i])) apex = i;
        all_kept &= kept(vals[i]);
    }
    std::vector<Simplex> out;
    if (apex < 0) return out;
    if (all_kept) {
        Simplex s;
        s.n = n;
        for (int i = 0; i < n; ++i) s.v[i] = pts[i];
        out.push_back(s);
        return out;
    }

    // The kept region is convex; cone it from the apex over the faces that
    // miss the apex: the clipped facet opposite the apex and the zero patch.
    std::vector<Vec3> facet;
    for (int i = 0; i < n; ++i)
        if (i != apex && kept(vals[i])) push_unique(facet, pts[i]);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (i != apex && j != apex && sign_of(vals[i]) * sign_of(vals[j]) < 0)
                push_unique(facet, crossing(pts[i], pts[j], vals[i], vals[j]));
    std::vector<int> sg(n);
    for (int i = 0; i < n; ++i) sg[i] = sign_of(vals[i]);
    std::vector<Vec3> patch = simplex_zero_set(pts, vals, sg);
    order_convex(facet);

    for (const auto* poly : {&facet, &patch}) {
        if (static_cast<int>(poly->size()) < k) continue;
        for (size_t i = 1; i + static_cast<size_t>(k) - 1 <= poly->size(); ++i) {
            Simplex s;
            s.n = n;
            s.v[0] = pts[apex];
            if (k == 2) {
                if (i > 1) break;
                s.v[1] = (*poly)[0];
                s.v[2] = (*poly)[1];
            } else {
                if (i + 1 >= poly->size()) break;
                s.v[1] = (*poly)[0];
                s.v[2] = (*poly)[i];
                s.v[3] = (*poly)[i + 1];
            }
            out.push_back(s);
        }
    }
    return out;
}

bool is_sign_cut(const Mesh& mesh, int cell, std::span<const int> signs)
{
    bool neg = false, pos = false;
    for (int v : mesh.cell(cell)) {
        neg |= signs[v] < 0;
        pos |= signs[v] > 0;
    }
    return neg && pos;
}

CutCell cut_cell(const LevelSetFunction& phi, int cell)
{
    const Mesh& m = *phi.mesh();
    const auto g = gather(phi, m.cell(cell), {});
    bool neg = false, pos = false;
    for (int i = 0; i < g.n; ++i) {
        neg |= g.signs[i] < 0;
        pos |= g.signs[i] > 0;
    }
    if (!neg && !pos) throw DegenerateCellError("level set vanishes on all of cell " + std::to_string(cell));
    CutCell cc;
    cc.cell = cell;
    cc.status = (neg && pos) ? CellStatus::Cut : (neg ? CellStatus::Inside : CellStatus::Outside);
    const std::span<const Vec3> pts(g.pts.data(), g.n);
    const std::span<const double> vals(g.vals.data(), g.n);
    cc.boundary_patch = simplex_zero_set(pts, vals, std::span<const int>(g.signs.data(), g.n));
    cc.interior_simplices = clip_simplex(pts, vals, true);
    cc.exterior_simplices = clip_simplex(pts, vals, false);
    const Vec3 gr = phi.grad(cell);
    cc.grad_norm = gr.norm();
    if (cc.grad_norm > 0.0) cc.normal = gr / cc.grad_norm;
    return cc;
}

std::optional<FacePatch> face_patch(const LevelSetFunction& phi, int face, std::span<const int> signs)
{
    const Mesh& m = *phi.mesh();
    const Face& F = m.face(face);
    const auto g = gather(phi, m.face_vertices(face), signs);
    bool neg = false, pos = false, any_value = false;
    for (int i = 0; i < g.n; ++i) {
        neg |= g.signs[i] < 0;
        pos |= g.signs[i] > 0;
        any_value |= g.vals[i] != 0.0;
    }
    if (!any_value && !neg && !pos)
        throw AlignmentError("face " + std::to_string(face) + " lies in the zero level set; use a one-sided limit");
    if (F.is_boundary() || !(neg && pos)) return std::nullopt;

    FacePatch fp;
    fp.face = face;
    fp.cells = F.cells;
    fp.cut_locus = simplex_zero_set(std::span<const Vec3>(g.pts.data(), g.n), std::span<const double>(g.vals.data(), g.n),
                                    std::span<const int>(g.signs.data(), g.n));
    for (int k = 0; k < 2; ++k) fp.face_normal[k] = m.face_normal(face, k);
    const Vec3 g0 = phi.grad(F.cells[0]);
    const Vec3 gs = g0 - g0.dot(fp.face_normal[0]) * fp.face_normal[0];
    fp.dnS_phi = gs.norm();
    if (!(fp.dnS_phi > 0.0))
        throw SingularLevelSetError("level set is constant along cut face " + std::to_string(face));
    fp.nS = gs / fp.dnS_phi;
    for (int k = 0; k < 2; ++k) {
        const Vec3 gk = phi.grad(F.cells[k]);
        const double nk = gk.norm();
        if (!(nk > 0.0))
            throw SingularLevelSetError("zero level-set gradient on cut cell " + std::to_string(F.cells[k]));
        fp.patch_normal[k] = gk / nk;
        fp.tS[k] = fp.nS.cross(fp.face_normal[k]);
        fp.conormal[k] = fp.tS[k].cross(fp.patch_normal[k]);
    }
    return fp;
}

QuadRule quadrature_patch(std::span<const Vec3> patch, int dim, int degree)
{
    QuadRule out;
    if (dim == 2) {
        if (patch.size() == 2 && patch[0] != patch[1]) return quadrature_simplex(patch, degree);
        return out;
    }
    if (patch.size() == 3) return quadrature_simplex(patch, degree);
    if (patch.size() == 4) {
        // split along the shorter diagonal
        const int s = (patch[1] - patch[3]).norm() < (patch[0] - patch[2]).norm() ? 1 : 0;
        const std::array<Vec3, 3> a{patch[s], patch[s + 1], patch[(s + 2) % 4]};
        const std::array<Vec3, 3> b{patch[s], patch[(s + 2) % 4], patch[(s + 3) % 4]};
        out = quadrature_simplex(a, degree);
        const auto rb = quadrature_simplex(b, degree);
        out.insert(out.end(), rb.begin(), rb.end());
    }
    return out;
}

CellQuadRule quadrature_domain(const LevelSetFunction& phi, const DomainDecomposition& dec, int degree)
{
    const Mesh& m = *phi.mesh();
    CellQuadRule out;
    for (int c = 0; c < m.num_cells(); ++c) {
        if (dec.cells[c] == CellStatus::Outside) continue;
        if (dec.cells[c] == CellStatus::Inside) {
            for (const auto& q : quadrature_cell(m, c, degree)) out.push_back({c, q.point, q.weight});
            continue;
        }
        const CutCell cc = cut_cell(phi, c);
        for (const auto& s : cc.interior_simplices)
            for (const auto& q : quadrature_simplex(s.points(), degree)) out.push_back({c, q.point, q.weight});
    }
    return out;
}

CellQuadRule quadrature_domain(const LevelSetFunction& phi, int degree)
{
    return quadrature_domain(phi, classify(phi), degree);
}

std::vector<int> sign_cut_cells(const LevelSetFunction& phi, std::span<const int> signs)
{
    const Mesh& m = *phi.mesh();
    std::vector<int> out;
    for (int c = 0; c < m.num_cells(); ++c)
        if (is_sign_cut(m, c, signs)) out.push_back(c);
    return out;
}

CellQuadRule quadrature_boundary(const LevelSetFunction& phi, int degree)
{
    const Mesh& m = *phi.mesh();
    const int d = m.dim();
    CellQuadRule out;
    auto rest_value = [&](int c, int local) { return phi.value(m.cell(c)[local]); };
    for (int c = 0; c < m.num_cells(); ++c) {
        int zeros = 0, zero_local_face = -1;
        bool neg = false, pos = false;
        for (int i = 0; i <= d; ++i) {
            const double v = phi.value(m.cell(c)[i]);
            if (v == 0.0) ++zeros;
            else zero_local_face = i;
            neg |= v < 0.0;
            pos |= v > 0.0;
        }
        bool take = neg && pos;
        if (!take && zeros == d) {
            // a whole face lies in the zero set: count it once, from the Omega side
            const double own = rest_value(c, zero_local_face);
            const int f = m.cell_face(c, zero_local_face);
            const Face& F = m.face(f);
            if (own < 0.0) {
                if (F.is_boundary()) {
                    take = true;
                } else {
                    const int side = F.cells[0] == c ? 1 : 0;
                    const double other = rest_value(F.cells[side], F.local[side]);
                    take = other > 0.0 || c < F.cells[side];
                }
            }
        }
        if (!take) continue;
        const CutCell cc = cut_cell(phi, c);
        for (const auto& q : quadrature_patch(cc.boundary_patch, d, degree)) out.push_back({c, q.point, q.weight});
    }
    return out;
}

QuadRule quadrature_facecut(const FacePatch& fp, int dim, int degree)
{
    if (dim == 2) return {{fp.cut_locus.front(), 1.0}};
    if (fp.cut_locus.size() < 2) return {};
    return quadrature_simplex(std::span<const Vec3>(fp.cut_locus.data(), 2), degree);
}

std::string cut_geometry_json(const LevelSetFunction& phi)
{
    using nlohmann::json;
    const Mesh& m = *phi.mesh();
    const int d = m.dim();
    auto vec = [d](const Vec3& v) {
        json a = json::array();
        for (int i = 0; i < d; ++i) a.push_back(v[i]);
        return a;
    };
    const auto dec = classify(phi);
    json j;
    j["dim"] = d;
    j["cut_cells"] = json::array();
    for (int c = 0; c < m.num_cells(); ++c) {
        if (dec.cells[c] != CellStatus::Cut) continue;
        const auto cc = cut_cell(phi, c);
        json e;
        e["cell"] = c;
        e["patch"] = json::array();
        for (const auto& p : cc.boundary_patch) e["patch"].push_back(vec(p));
        e["normal"] = vec(cc.normal);
        e["patch_measure"] = cc.patch_measure();
        e["interior_measure"] = cc.interior_measure();
        j["cut_cells"].push_back(e);
    }
    j["face_patches"] = json::array();
    for (int f = 0; f < m.num_faces(); ++f) {
        if (dec.faces[f] != FaceStatus::Cut) continue;
        const auto fp = face_patch(phi, f);
        if (!fp) continue;
        json e;
        e["face"] = f;
        e["cells"] = fp->cells;
        e["cut_locus"] = json::array();
        for (const auto& p : fp->cut_locus) e["cut_locus"].push_back(vec(p));
        e["nS"] = vec(fp->nS);
        e["conormals"] = {vec(fp->conormal[0]), vec(fp->conormal[1])};
        // tangents keep all three components: in 2D they are +-e3
        e["tangents"] = json::array();
        for (const auto& t : fp->tS) e["tangents"].push_back({t.x(), t.y(), t.z()});
        j["face_patches"].push_back(e);
    }
    j["aligned_faces"] = dec.aligned_faces;
    return j.dump(1);
}

} // namespace dilagrad
