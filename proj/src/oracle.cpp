#include "dilagrad/oracle.hpp"

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/dilation.hpp"
#include "dilagrad/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace dilagrad {

std::vector<double> default_ladder(double t_max)
{
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("default_ladder needs a finite positive t_max");
    std::vector<double> out;
    for (int k = 3; k <= 8; ++k) out.push_back(std::ldexp(t_max, -k));
    return out;
}

double fit_order(const std::vector<double>& t, const std::vector<double>& err)
{
    const size_t n = t.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double x = std::log(t[i]), y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den > 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

namespace {

double eval_at(const std::function<double(double)>& objective, double t)
{
    double v;
    try {
        v = objective(t);
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "objective failed at t = " << t << ": " << e.what();
        throw ObjectiveError(os.str(), t);
    }
    if (!std::isfinite(v)) throw ObjectiveError("objective is not finite at t = " + std::to_string(t), t);
    return v;
}

} // namespace

FDReport fd_semiderivative(const std::function<double(double)>& objective, double reference,
                           const std::vector<double>& ladder, Side side)
{
    return fd_semiderivative(objective, eval_at(objective, 0.0), reference, ladder, side);
}

FDReport fd_semiderivative(const std::function<double(double)>& objective, double j0, double reference,
                           const std::vector<double>& ladder, Side side)
{
    if (ladder.empty()) throw InvalidArgument("empty t ladder");
    for (size_t i = 0; i < ladder.size(); ++i) {
        if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i])) throw InvalidArgument("t ladder entries must be positive");
        if (i > 0 && !(ladder[i] < ladder[i - 1])) throw InvalidArgument("t ladder must be strictly decreasing");
    }
    const double s = side == Side::FromAbove ? 1.0 : -1.0;
    std::vector<double> quotients;
    for (double t : ladder) quotients.push_back((eval_at(objective, s * t) - j0) / (s * t));
    return fd_from_quotients(ladder, quotients, j0, reference, side);
}

FDReport fd_from_quotients(const std::vector<double>& ladder, const std::vector<double>& quotients, double j0,
                           double reference, Side side)
{
    if (ladder.size() != quotients.size()) throw InvalidArgument("ladder and quotient counts differ");
    FDReport rep;
    rep.side = side;
    rep.reference = reference;
    rep.t_values = ladder;
    rep.quotients = quotients;
    for (double q : quotients) rep.errors.push_back(std::abs(q - reference));
    // round-off floor; the absolute part catches objectives linear in t
    const double floor = std::max(1e3 * std::numeric_limits<double>::epsilon() * std::abs(j0),
                                  1e-14 * std::max(1.0, std::abs(reference)));
    std::vector<double> ts, es;
    for (size_t i = 0; i < ladder.size(); ++i)
        if (rep.errors[i] > floor) {
            ts.push_back(ladder[i]);
            es.push_back(rep.errors[i]);
        }
    rep.points_used = static_cast<int>(ts.size());
    if (ts.size() < 2) {
        // one surviving point cannot define a slope; only an empty fit counts as exact
        rep.exact = ts.empty();
        rep.fitted_order = rep.exact ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        rep.fitted_order = fit_order(ts, es);
    }
    return rep;
}

std::string FDReport::to_csv(bool header) const
{
    std::string out;
    char buf[160];
    if (header) out += "t,quotient,reference,error\n";
    for (size_t i = 0; i < t_values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", side == Side::FromAbove ? t_values[i] : -t_values[i],
                      quotients[i], reference, errors[i]);
        out += buf;
    }
    if (exact)
        out += "fitted_order,exact\n";
    else {
        std::snprintf(buf, sizeof buf, "fitted_order,%.6f\n", fitted_order);
        out += buf;
    }
    return out;
}

bool references_agree(double a, double b, double rel_tol)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel_tol * scale || scale < 1e-300;
}

TwoSidedReport two_sided_check(const std::function<double(double)>& objective, double reference_above,
                               double reference_below, const std::vector<double>& ladder)
{
    TwoSidedReport rep;
    const double j0 = eval_at(objective, 0.0);
    rep.above = fd_semiderivative(objective, j0, reference_above, ladder, Side::FromAbove);
    rep.below = fd_semiderivative(objective, j0, reference_below, ladder, Side::FromBelow);
    rep.agree = references_agree(reference_above, reference_below);
    return rep;
}

double shrinking_ball_average(const PiecewiseField& f, const Vec3& x0, double r, int cells_per_axis)
{
    const Mesh& m = *f.mesh();
    const int d = m.dim();
    if (!(r > 0.0)) throw InvalidArgument("ball radius must be positive");
    const int cell = locate_cell(m, x0);
    if (cell < 0) throw InvalidArgument("ball center is outside the mesh");
    // every point of the box [x0 - r, x0 + r]^d must stay in the same cell
    for (int corner = 0; corner < (1 << d); ++corner) {
        Vec3 p = x0;
        for (int a = 0; a < d; ++a) p[a] += (corner >> a & 1) ? r : -r;
        if (!m.contains(cell, p)) throw InvalidArgument("ball leaves the cell containing its center");
    }
    std::vector<int> n(d, cells_per_axis);
    std::vector<double> extent(d, 4.0 * r), origin(d);
    for (int a = 0; a < d; ++a) origin[a] = x0[a] - 2.0 * r;
    auto local = make_shared_mesh(build_structured_mesh(d, n, extent, origin));
    std::vector<double> vals(local->num_vertices());
    for (int v = 0; v < local->num_vertices(); ++v) vals[v] = (local->vertex(v) - x0).norm() - r;
    const LevelSetFunction ball(local, std::move(vals));
    double integral = 0.0, volume = 0.0;
    for (const auto& q : quadrature_domain(ball, 4)) {
        integral += q.weight * f.eval_unchecked(cell, q.point);
        volume += q.weight;
    }
    if (!(volume > 0.0)) throw AccuracyError("sampled ball is empty", 0.0, 0.0);
    return integral / volume;
}

} // namespace dilagrad
