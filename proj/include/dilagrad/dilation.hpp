#pragma once

#include "dilagrad/cutgeom.hpp"
#include "dilagrad/field.hpp"
#include "dilagrad/levelset.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dilagrad {

/// A one-sided directional derivative with the pieces it was assembled from.
struct SemiDerivative {
    double value = 0.0;
    Side side = Side::FromAbove;
    /// Aligned faces through the hat center, where the side decided which
    /// cell's traces were used.
    std::vector<int> aligned_faces_used;
    bool two_sided = true; ///< equals aligned_faces_used.empty()

    double volume_term = 0.0;   ///< integral of f' (over Omega for J1, over the boundary for J2)
    double boundary_term = 0.0; ///< the w / |d_n phi| weighted boundary integral, with its sign
    double jump_term = 0.0;     ///< face sum (J2 only), with its sign
    std::vector<std::pair<int, double>> cell_contributions; ///< boundary term per cell
    std::vector<std::pair<int, double>> face_contributions; ///< jump term per face
    /// 3D faces whose zero set is a whole edge; left out of the face sum.
    std::vector<int> degenerate_faces;

    std::string to_json() const;
};

/// J1(phi) = integral of f over Omega.
double volume_functional(const LevelSetFunction& phi, const PiecewiseField& f);
/// J2(phi) = integral of f over the zero level set (each aligned face once,
/// traced from the Omega side).
double surface_functional(const LevelSetFunction& phi, const PiecewiseField& f);

/// Semiderivative of J1 in direction w:
///   int_Omega f' - int_{dOmega} f w / |d_n phi|.
/// `fprime` may be null. Boundary traces on aligned faces come from the
/// cell the boundary moves into for the chosen side.
SemiDerivative dj1(const LevelSetFunction& phi, const HatPerturbation& w, const PiecewiseField& f,
                   const PiecewiseField* fprime = nullptr, Side side = Side::FromAbove);

/// Semiderivative of J2 in direction w:
///   int_{dOmega} f' - int_{dOmega} (df/dn) w / |d_n phi|
///   - sum_S int_{dOmega cap S} nS . (f1 m1 + f2 m2) w / |d_{nS} phi|.
SemiDerivative dj2(const LevelSetFunction& phi, const HatPerturbation& w, const PiecewiseField& f,
                   const PiecewiseField* fprime = nullptr, Side side = Side::FromAbove);

/// Integral of f over E_t = Omega minus closure(Omega_t), t in [0, t_max].
double strip_volume(const LevelSetFunction& phi, const HatPerturbation& w, double t, const PiecewiseField& f);
/// Same restricted to one cell.
double strip_volume_cell(const LevelSetFunction& phi, const HatPerturbation& w, double t, int cell,
                         const PiecewiseField& f);

/// Adaptive composite 5-point Gauss-Legendre quadrature on [a, b] with
/// bisection. Throws AccuracyError after `max_levels` refinements.
/// `abs_tol` is a floor for integrals that cancel to round-off.
double adaptive_gauss(const std::function<double(double)>& fn, double a, double b, double rel_tol = 1e-10,
                      int max_levels = 20, double abs_tol = 0.0);

/// int_0^t int_{dOmega_tau cap K} f w / |d_n phi_tau| dS dtau for one cell.
double layer_integral(const LevelSetFunction& phi, const HatPerturbation& w, double t, int cell,
                      const PiecewiseField& f, double rel_tol = 1e-10);

struct IbpResult {
    double lhs = 0.0;
    double rhs_boundary = 0.0;
    double rhs_jump = 0.0;
    double residual = 0.0; ///< |lhs - rhs_boundary - rhs_jump|
};

/// Broken integration by parts on E_t with per-cell f and Theta:
///   sum_K int_{E_t cap K} (div Theta) f + Theta . grad f
///   = int_{dE_t} n . Theta f + sum_S int_0^t int_{dOmega_tau cap S} nS . [[f Theta x tS]] w / |d_{nS} phi_tau|.
IbpResult ibp_check(const LevelSetFunction& phi, const HatPerturbation& w, double t, const PiecewiseField& f,
                    const PiecewiseVectorField& theta, double rel_tol = 1e-10);

/// Ray map of one star cell: points of the face opposite the hat center are
/// carried along rays toward the center onto the zero set of phi_tau.
class RayParameterization {
public:
    RayParameterization(const LevelSetFunction& phi, const HatPerturbation& w, int cell);

    int cell() const noexcept { return cell_; }
    int opposite_face() const noexcept { return face_; }
    /// Corner points of the sub-region of the opposite face whose rays meet
    /// the perturbed zero set (phi(x_S) phi_t(x_w) < 0), as a polygon.
    std::vector<Vec3> hat_region(double t_max) const;
    /// X(x_S, tau) = x_S - phi(x_S) / (grad phi_tau . (x_w - x_S)) (x_w - x_S).
    Vec3 operator()(const Vec3& x_s, double tau) const;

private:
    const LevelSetFunction* phi_;
    HatPerturbation w_;
    int cell_;
    int face_;
    Vec3 xw_;
    Vec3 grad_phi_;
    Vec3 grad_w_;
};

/// Topological derivative of J1 at x0: -f(x0). Throws AmbiguousLimitError if
/// x0 sits on a face across which f jumps, InvalidArgument if x0 is outside the mesh.
double topological_derivative_point(const PiecewiseField& f, const Vec3& x0);

/// Index of a cell containing x (closed), or kNoCell.
int locate_cell(const Mesh& mesh, const Vec3& x);

} // namespace dilagrad
