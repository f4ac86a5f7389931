#include "dilagrad/quadrature.hpp"

#include "dilagrad/errors.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <mutex>

namespace dilagrad {

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes, std::vector<double>& weights)
{
    // Golub-Welsch on the symmetric Jacobi matrix of the three-term recurrence.
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(n, n);
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        jm(k, k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + ab;
            const double b2 = 4.0 * m * (m + alpha) * (m + beta) * (m + ab) / (t * t * (t + 1.0) * (t - 1.0));
            jm(k, k + 1) = jm(k + 1, k) = std::sqrt(b2);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jm);
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0)
                       / std::tgamma(ab + 2.0);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()[k];
        const double v0 = es.eigenvectors()(0, k);
        weights[k] = mu0 * v0 * v0;
    }
}

namespace {

struct RefPoint {
    std::array<double, 3> xi;
    double weight; // on the reference simplex of measure 1/k!
};

using RefRule = std::vector<RefPoint>;

// 1D rule on [0, 1] for weight (1 - u)^alpha
void unit_rule(int n, int alpha, std::vector<double>& u, std::vector<double>& w)
{
    std::vector<double> x, wx;
    gauss_jacobi(n, alpha, 0.0, x, wx);
    u.resize(n);
    w.resize(n);
    const double scale = std::pow(2.0, alpha + 1);
    for (int i = 0; i < n; ++i) {
        u[i] = 0.5 * (x[i] + 1.0);
        w[i] = wx[i] / scale;
    }
}

RefRule build_reference_rule(int k, int degree)
{
    RefRule rule;
    if (k == 0) {
        rule.push_back({{0.0, 0.0, 0.0}, 1.0});
        return rule;
    }
    if (degree <= 1) {
        double m = 1.0;
        for (int i = 2; i <= k; ++i) m *= i;
        const double c = 1.0 / (k + 1);
        rule.push_back({{c, k >= 2 ? c : 0.0, k >= 3 ? c : 0.0}, 1.0 / m});
        return rule;
    }
    const int n = degree / 2 + 1;
    if (k == 1) {
        std::vector<double> u, w;
        unit_rule(n, 0, u, w);
        for (int i = 0; i < n; ++i) rule.push_back({{u[i], 0.0, 0.0}, w[i]});
    } else if (k == 2) {
        // x = u, y = (1 - u) v, dx dy = (1 - u) du dv
        std::vector<double> u, wu, v, wv;
        unit_rule(n, 1, u, wu);
        unit_rule(n, 0, v, wv);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) rule.push_back({{u[i], (1.0 - u[i]) * v[j], 0.0}, wu[i] * wv[j]});
    } else {
        // x = u, y = (1 - u) v, z = (1 - u)(1 - v) s, Jacobian (1 - u)^2 (1 - v)
        std::vector<double> u, wu, v, wv, s, ws;
        unit_rule(n, 2, u, wu);
        unit_rule(n, 1, v, wv);
        unit_rule(n, 0, s, ws);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l)
                    rule.push_back({{u[i], (1.0 - u[i]) * v[j], (1.0 - u[i]) * (1.0 - v[j]) * s[l]},
                                    wu[i] * wv[j] * ws[l]});
    }
    return rule;
}

const RefRule& reference_rule(int k, int degree)
{
    static std::array<std::array<RefRule, kMaxQuadratureDegree + 1>, 4> table;
    static std::array<std::array<std::once_flag, kMaxQuadratureDegree + 1>, 4> flags;
    std::call_once(flags[k][degree], [&] { table[k][degree] = build_reference_rule(k, degree); });
    return table[k][degree];
}

} // namespace

QuadRule quadrature_simplex(std::span<const Vec3> vertices, int degree)
{
    const int k = static_cast<int>(vertices.size()) - 1;
    if (k < 0 || k > 3) throw InvalidArgument("quadrature_simplex: simplex dimension must be 0..3");
    if (degree < 0 || degree > kMaxQuadratureDegree)
        throw InvalidArgument("quadrature_simplex: unsupported degree " + std::to_string(degree));
    const RefRule& ref = reference_rule(k, degree);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    const double scale = simplex_measure(vertices) * fact;
    QuadRule out;
    out.reserve(ref.size());
    for (const auto& rp : ref) {
        Vec3 x = vertices[0];
        for (int i = 0; i < k; ++i) x += rp.xi[i] * (vertices[i + 1] - vertices[0]);
        out.push_back({x, rp.weight * scale});
    }
    return out;
}

QuadRule quadrature_cell(const Mesh& mesh, int cell, int degree)
{
    std::array<Vec3, 4> pts;
    const int n = mesh.dim() + 1;
    for (int i = 0; i < n; ++i) pts[i] = mesh.cell_vertex(cell, i);
    return quadrature_simplex(std::span<const Vec3>(pts.data(), n), degree);
}

} // namespace dilagrad
