#include "dilagrad/svg.hpp"

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/errors.hpp"

#include <cmath>
#include <cstdio>

namespace dilagrad {

namespace {

struct Canvas {
    double x0, y1, scale;
    std::string out;

    double px(const Vec3& p) const { return 20.0 + scale * (p.x() - x0); }
    double py(const Vec3& p) const { return 20.0 + scale * (y1 - p.y()); }

    void polygon(std::span<const Vec3> pts, const char* style)
    {
        out += "<polygon points=\"";
        char buf[64];
        for (size_t i = 0; i < pts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", px(pts[i]), py(pts[i]));
            out += buf;
        }
        out += "\" ";
        out += style;
        out += "/>\n";
    }

    void line(const Vec3& a, const Vec3& b, const char* stroke, double width)
    {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"%s\" stroke-width=\"%.3f\"/>\n",
                      px(a), py(a), px(b), py(b), stroke, width);
        out += buf;
    }
};

std::string escape(const std::string& s)
{
    std::string o;
    for (char c : s) {
        if (c == '<') o += "&lt;";
        else if (c == '>') o += "&gt;";
        else if (c == '&') o += "&amp;";
        else o += c;
    }
    return o;
}

} // namespace

std::string render_svg(const LevelSetFunction& phi, const SvgOverlays& overlays)
{
    const Mesh& m = *phi.mesh();
    if (m.dim() != 2) throw UnsupportedError("SVG rendering is 2D only; use the cut-geometry JSON dump in 3D");
    Vec3 lo = m.vertex(0), hi = m.vertex(0);
    for (int v = 1; v < m.num_vertices(); ++v) {
        lo = lo.cwiseMin(m.vertex(v));
        hi = hi.cwiseMax(m.vertex(v));
    }
    const double w = std::max(hi.x() - lo.x(), 1e-300), h = std::max(hi.y() - lo.y(), 1e-300);
    Canvas cv{lo.x(), hi.y(), 600.0 / std::max(w, h), {}};
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  40.0 + cv.scale * w, 40.0 + cv.scale * h);
    cv.out += buf;
    if (!overlays.title.empty()) cv.out += "<title>" + escape(overlays.title) + "</title>\n";

    const auto dec = classify(phi);
    auto cell_pts = [&](int c) {
        std::vector<Vec3> p;
        for (int v : m.cell(c)) p.push_back(m.vertex(v));
        return p;
    };

    cv.out += "<g id=\"omega\">\n";
    std::vector<CutCell> cuts;
    for (int c = 0; c < m.num_cells(); ++c) {
        if (dec.cells[c] == CellStatus::Inside) {
            cv.polygon(cell_pts(c), "fill=\"#9ecae1\" stroke=\"none\"");
        } else if (dec.cells[c] == CellStatus::Cut) {
            cuts.push_back(cut_cell(phi, c));
            for (const auto& s : cuts.back().interior_simplices) cv.polygon(s.points(), "fill=\"#9ecae1\" stroke=\"none\"");
        }
    }
    cv.out += "</g>\n";

    if (overlays.hat) {
        cv.out += "<g id=\"support\">\n";
        for (int c : overlays.hat->support_cells(m))
            cv.polygon(cell_pts(c), "fill=\"#fdae6b\" fill-opacity=\"0.45\" stroke=\"none\"");
        cv.out += "</g>\n";
    }

    cv.out += "<g id=\"mesh\">\n";
    for (int f = 0; f < m.num_faces(); ++f) {
        const auto fv = m.face_vertices(f);
        cv.line(m.vertex(fv[0]), m.vertex(fv[1]), "#969696", 0.5);
    }
    cv.out += "</g>\n";

    cv.out += "<g id=\"boundary\">\n";
    for (const auto& cc : cuts)
        if (cc.boundary_patch.size() == 2) cv.line(cc.boundary_patch[0], cc.boundary_patch[1], "#08306b", 2.0);
    for (int f : dec.aligned_faces) {
        const auto fv = m.face_vertices(f);
        cv.line(m.vertex(fv[0]), m.vertex(fv[1]), overlays.highlight_aligned ? "#d62728" : "#08306b",
                overlays.highlight_aligned ? 3.0 : 2.0);
    }
    cv.out += "</g>\n";

    if (!overlays.face_values.empty()) {
        double vmax = 0.0;
        for (const auto& [f, v] : overlays.face_values) vmax = std::max(vmax, std::abs(v));
        cv.out += "<g id=\"face-values\">\n";
        for (const auto& [f, v] : overlays.face_values) {
            if (f < 0 || f >= m.num_faces()) throw InvalidArgument("face index out of range in SVG overlay");
            if (vmax == 0.0) break;
            const auto fv = m.face_vertices(f);
            cv.line(m.vertex(fv[0]), m.vertex(fv[1]), v >= 0 ? "#31a354" : "#756bb1", 1.0 + 4.0 * std::abs(v) / vmax);
        }
        cv.out += "</g>\n";
    }

    if (overlays.hat) {
        const Vec3 x = m.vertex(overlays.hat->center_node);
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"#e6550d\"/>\n", cv.px(x), cv.py(x));
        cv.out += buf;
    }
    cv.out += "</svg>\n";
    return cv.out;
}

} // namespace dilagrad
