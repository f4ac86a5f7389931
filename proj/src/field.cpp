#include "dilagrad/field.hpp"

#include "dilagrad/errors.hpp"

#include <cmath>
#include <sstream>

namespace dilagrad {

std::vector<std::array<int, 3>> monomial_exponents(int d, int p)
{
    std::vector<std::array<int, 3>> out;
    for (int total = 0; total <= p; ++total) {
        if (d == 2) {
            for (int a = total; a >= 0; --a) out.push_back({a, total - a, 0});
        } else {
            for (int a = total; a >= 0; --a)
                for (int b = total - a; b >= 0; --b) out.push_back({a, b, total - a - b});
        }
    }
    return out;
}

namespace {

struct ExponentTable {
    std::vector<std::array<int, 3>> exps[4][kMaxFieldDegree + 1];
    ExponentTable()
    {
        for (int d = 2; d <= 3; ++d)
            for (int p = 0; p <= kMaxFieldDegree; ++p) exps[d][p] = monomial_exponents(d, p);
    }
};

const std::vector<std::array<int, 3>>& exponents(int d, int p)
{
    static const ExponentTable table;
    return table.exps[d][p];
}

double ipow(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

Vec3 local_coords(const Mesh& m, int cell, const Vec3& x)
{
    return m.inverse_jacobian(cell) * (x - m.cell_vertex(cell, 0));
}

} // namespace

PiecewiseField PiecewiseField::constant(MeshPtr mesh, double value)
{
    PiecewiseField f;
    f.degree_ = 0;
    f.num_coeffs_ = 1;
    f.coeffs_.assign(mesh->num_cells(), value);
    f.mesh_ = std::move(mesh);
    return f;
}

PiecewiseField PiecewiseField::interpolate(MeshPtr mesh, int degree, const CellFunction& fn, int continuity_class)
{
    if (degree < 0 || degree > kMaxFieldDegree)
        throw InvalidArgument("PiecewiseField degree must be in [0, " + std::to_string(kMaxFieldDegree) + "]");
    const int d = mesh->dim();
    const auto& exps = exponents(d, degree);
    const int nc = static_cast<int>(exps.size());

    // lattice points xi = alpha / p, or the centroid for p = 0
    std::vector<Vec3> lattice;
    if (degree == 0) {
        lattice.push_back(Vec3::Constant(1.0 / (d + 1)));
        if (d == 2) lattice.back().z() = 0.0;
    } else {
        for (const auto& e : exps) lattice.push_back(Vec3(e[0], e[1], e[2]) / degree);
    }
    Eigen::MatrixXd vander(nc, nc);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j)
            vander(i, j) = ipow(lattice[i][0], exps[j][0]) * ipow(lattice[i][1], exps[j][1])
                           * ipow(lattice[i][2], exps[j][2]);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(vander);

    PiecewiseField f;
    f.degree_ = degree;
    f.continuity_class_ = continuity_class;
    f.num_coeffs_ = nc;
    f.coeffs_.resize(static_cast<size_t>(mesh->num_cells()) * nc);
    Eigen::VectorXd rhs(nc);
    for (int c = 0; c < mesh->num_cells(); ++c) {
        for (int i = 0; i < nc; ++i) {
            const Vec3 x = mesh->cell_vertex(c, 0) + mesh->jacobian(c) * Vec3(lattice[i][0], lattice[i][1],
                                                                              d == 3 ? lattice[i][2] : 0.0);
            rhs[i] = fn(c, x);
            if (!std::isfinite(rhs[i])) throw InvalidArgument("PiecewiseField::interpolate: non-finite sample");
        }
        const Eigen::VectorXd sol = lu.solve(rhs);
        for (int i = 0; i < nc; ++i) f.coeffs_[static_cast<size_t>(c) * nc + i] = sol[i];
    }
    f.mesh_ = std::move(mesh);
    return f;
}

PiecewiseField PiecewiseField::from_global(MeshPtr mesh, int degree, const PointFunction& fn)
{
    return interpolate(std::move(mesh), degree, [&](int, const Vec3& x) { return fn(x); });
}

double PiecewiseField::eval_unchecked(int cell, const Vec3& x) const
{
    const double* c = coeffs_.data() + static_cast<size_t>(cell) * num_coeffs_;
    if (degree_ == 0) return c[0];
    const Vec3 xi = local_coords(*mesh_, cell, x);
    const auto& exps = exponents(mesh_->dim(), degree_);
    double v = 0.0;
    for (int i = 0; i < num_coeffs_; ++i)
        v += c[i] * ipow(xi[0], exps[i][0]) * ipow(xi[1], exps[i][1]) * ipow(xi[2], exps[i][2]);
    return v;
}

Vec3 PiecewiseField::grad_unchecked(int cell, const Vec3& x) const
{
    if (degree_ == 0) return Vec3::Zero();
    const double* c = coeffs_.data() + static_cast<size_t>(cell) * num_coeffs_;
    const Vec3 xi = local_coords(*mesh_, cell, x);
    const auto& exps = exponents(mesh_->dim(), degree_);
    Vec3 g = Vec3::Zero();
    for (int i = 0; i < num_coeffs_; ++i) {
        const auto& e = exps[i];
        for (int a = 0; a < mesh_->dim(); ++a) {
            if (e[a] == 0) continue;
            double term = c[i] * e[a];
            for (int b = 0; b < 3; ++b) term *= ipow(xi[b], b == a ? e[b] - 1 : e[b]);
            g[a] += term;
        }
    }
    Vec3 out = mesh_->inverse_jacobian(cell).transpose() * g;
    if (mesh_->dim() == 2) out.z() = 0.0;
    return out;
}

double PiecewiseField::eval(int cell, const Vec3& x) const
{
    if (!mesh_->contains(cell, x)) {
        std::ostringstream os;
        os << "point (" << x.x() << ", " << x.y() << ", " << x.z() << ") is outside cell " << cell;
        throw InvalidArgument(os.str());
    }
    return eval_unchecked(cell, x);
}

Vec3 PiecewiseField::grad(int cell, const Vec3& x) const
{
    if (!mesh_->contains(cell, x)) throw InvalidArgument("gradient requested outside cell " + std::to_string(cell));
    return grad_unchecked(cell, x);
}

PiecewiseField PiecewiseField::scaled(double a) const
{
    PiecewiseField f = *this;
    for (double& c : f.coeffs_) c *= a;
    return f;
}

PiecewiseField PiecewiseField::combined(double a, const PiecewiseField& other, double b) const
{
    if (mesh_ != other.mesh_) throw InvalidArgument("combined: fields live on different meshes");
    if (degree_ == other.degree_) {
        PiecewiseField f = *this;
        for (size_t i = 0; i < f.coeffs_.size(); ++i) f.coeffs_[i] = a * coeffs_[i] + b * other.coeffs_[i];
        f.continuity_class_ = std::min(continuity_class_, other.continuity_class_);
        return f;
    }
    const int deg = std::max(degree_, other.degree_);
    return interpolate(
        mesh_, deg,
        [&](int c, const Vec3& x) { return a * eval_unchecked(c, x) + b * other.eval_unchecked(c, x); },
        std::min(continuity_class_, other.continuity_class_));
}

Vec3 PiecewiseVectorField::eval(int cell, const Vec3& x) const
{
    Vec3 v = Vec3::Zero();
    for (size_t i = 0; i < components.size(); ++i) v[i] = components[i].eval_unchecked(cell, x);
    return v;
}

double PiecewiseVectorField::divergence(int cell, const Vec3& x) const
{
    double s = 0.0;
    for (size_t i = 0; i < components.size(); ++i) s += components[i].grad_unchecked(cell, x)[i];
    return s;
}

} // namespace dilagrad
