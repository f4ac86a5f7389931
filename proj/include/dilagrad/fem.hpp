#pragma once

#include "dilagrad/dilation.hpp"
#include "dilagrad/field.hpp"
#include "dilagrad/levelset.hpp"
#include "dilagrad/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dilagrad {

enum class Regime { Fitted, Cut };

/// Globally affine load r(x) = value + gradient . x. Being a function of
/// position (not of the mesh), it stays fixed under mesh deformation.
struct AffineSource {
    double value = 0.0;
    Vec3 gradient = Vec3::Zero();

    double operator()(const Vec3& x) const { return value + gradient.dot(x); }
    bool is_zero() const { return value == 0.0 && gradient.isZero(0.0); }
};

/// P1 solution of -Laplace u = r, u = 0 on Gamma_D, du/dn = 0 on the rest.
struct FemSolution {
    MeshPtr mesh;
    Regime regime = Regime::Fitted;
    std::optional<LevelSetFunction> phi; ///< cut regime only
    std::vector<double> u;               ///< one coefficient per vertex; 0 off the active set
    std::vector<char> active;            ///< free DOFs (not on Gamma_D, support meets Omega)
    std::vector<char> dirichlet;         ///< vertices on closure(Gamma_D)
    AffineSource source;
    PiecewiseField r;
    std::string dirichlet_label;
    bool empty_domain = false;
    double min_cut_fraction = 1.0; ///< min |Omega cap K| / |K| over cut cells
    double linear_residual = 0.0;  ///< ||A u - b|| / ||b|| of the reduced system

    Vec3 grad(int cell) const;
    double eval(int cell, const Vec3& x) const;
    int num_active() const;
    std::string to_json() const;
};

/// Throws ConstraintError when no face carries the Dirichlet label.
FemSolution solve_fitted(MeshPtr mesh, const AffineSource& r, const std::string& dirichlet_label);

/// Fictitious-domain solve on the fixed mesh of D, restricted to {phi < 0}.
/// Throws SolverError (with the min cut fraction) if the factorization fails.
FemSolution solve_cut(MeshPtr mesh, const LevelSetFunction& phi, const AffineSource& r,
                      const std::string& dirichlet_label);

/// int r u_h over Omega.
double compliance(const FemSolution& sol);
/// int |grad u_h|^2 over Omega.
double dirichlet_energy(const FemSolution& sol);

/// Boundary form before discretization with u -> u_h:
///   int_{Gamma_N} n.V (2 r u_h - |grad u_h|^2).
double model_dj_continuous(const FemSolution& sol, const VelocityField& v);
/// Volume (weak) form of the fitted discrete derivative.
double model_dj_fitted_volume(const FemSolution& sol, const VelocityField& v);
/// Strong form of the fitted discrete derivative with the interior jump term.
double model_dj_fitted_strong(const FemSolution& sol, const VelocityField& v);

/// Pieces of the strong form, for reports.
struct StrongFormTerms {
    double boundary = 0.0;
    double jump = 0.0;
    double element = 0.0;
};
StrongFormTerms model_dj_fitted_strong_terms(const FemSolution& sol, const VelocityField& v);

/// Cut derivative -int_{Gamma_N} w / |d_n phi| (2 r u_h - |grad u_h|^2).
/// Throws ConstraintError if supp w touches closure(Gamma_D).
SemiDerivative model_dj_cut(const FemSolution& sol, const HatPerturbation& w, Side side = Side::FromAbove);

/// True if no vertex of the closed star of w lies on closure(Gamma_D).
bool hat_admissible(const Mesh& mesh, const HatPerturbation& w, const std::string& dirichlet_label);

} // namespace dilagrad
