#pragma once

#include "dilagrad/field.hpp"
#include "dilagrad/levelset.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dilagrad {

/// Objective evaluation failed at a ladder point; carries the signed t.
class ObjectiveError : public std::runtime_error {
public:
    ObjectiveError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double t() const noexcept { return t_; }

private:
    double t_;
};

/// Minimum fitted order for a Taylor test to pass.
inline constexpr double kOrderThreshold = 0.9;

struct FDReport {
    std::vector<double> t_values; ///< positive magnitudes, strictly decreasing
    std::vector<double> quotients;
    double reference = 0.0;
    std::vector<double> errors;
    double fitted_order = 0.0;
    /// All errors sit below the floor; no slope was fitted.
    bool exact = false;
    int points_used = 0;
    Side side = Side::FromAbove;

    bool passed(double threshold = kOrderThreshold) const { return exact || fitted_order >= threshold; }
    /// Rows "t,quotient,reference,error" and a trailing fitted-order line.
    std::string to_csv(bool header = true) const;
};

/// t_max * 2^-k for k = 3..8.
std::vector<double> default_ladder(double t_max);

/// objective(t) is called with the signed parameter: +t for FromAbove,
/// -t for FromBelow, and with 0 once for the base value.
FDReport fd_semiderivative(const std::function<double(double)>& objective, double reference,
                           const std::vector<double>& ladder, Side side = Side::FromAbove);

/// Same, with J(0) supplied by the caller.
FDReport fd_semiderivative(const std::function<double(double)>& objective, double j0, double reference,
                           const std::vector<double>& ladder, Side side);

/// Builds the report from quotients already computed (ladder magnitudes,
/// J(0) for the round-off floor).
FDReport fd_from_quotients(const std::vector<double>& ladder, const std::vector<double>& quotients, double j0,
                           double reference, Side side);

struct TwoSidedReport {
    FDReport above;
    FDReport below;
    bool agree = false;
};

/// Agreement means the two references coincide to 1e-8 relative.
TwoSidedReport two_sided_check(const std::function<double(double)>& objective, double reference_above,
                               double reference_below, const std::vector<double>& ladder);

bool references_agree(double a, double b, double rel_tol = 1e-8);

/// Least-squares slope of log(err) against log(t).
double fit_order(const std::vector<double>& t, const std::vector<double>& err);

/// Mean of f over a polygonal/polyhedral ball of radius r around x0, taken
/// on a local structured mesh with `cells_per_axis` cells across 4r and a
/// sampled distance level set. x0 must lie in the interior of one cell of
/// f's mesh with the ball inside that cell.
double shrinking_ball_average(const PiecewiseField& f, const Vec3& x0, double r, int cells_per_axis = 16);

} // namespace dilagrad
