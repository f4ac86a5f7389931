#pragma once

#include "dilagrad/dilation.hpp"
#include "dilagrad/fem.hpp"
#include "dilagrad/oracle.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

// Reusable verification suites shared by the CLI and the acceptance runner.
namespace dilagrad::suites {

/// Platform-independent uniform draws on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform(double a, double b);
    int index(int n);

private:
    std::mt19937_64 eng_;
};

struct Instance {
    std::string id;
    MeshPtr mesh;
    LevelSetFunction phi;
    HatPerturbation w;
    PiecewiseField f;
};

/// Random configuration on a structured unit box with `cells` per axis:
/// phi uniform in [-1, 1] at interior vertices and positive on the hold-all
/// boundary, w centered at an interior vertex whose star meets the zero set,
/// f an element-wise polynomial of degree <= f_degree with jumps.
Instance random_instance(int dim, int cells, Rng& rng, int f_degree, const std::string& id);
std::vector<Instance> random_instances(int dim, int cells, int count, std::uint64_t seed, int f_degree);

/// Element-wise polynomial with independent random coefficients per cell.
PiecewiseField random_piecewise_field(MeshPtr mesh, int degree, Rng& rng);
/// One global polynomial (smooth across faces).
PiecewiseField random_smooth_field(MeshPtr mesh, int degree, Rng& rng);

struct LadderSpec {
    int k_min = 3;
    int k_max = 8;
    std::vector<double> explicit_t; ///< overrides the k range when non-empty
};
std::vector<double> make_ladder(const LadderSpec& spec, double t_top);

enum class Functional { Volume, Surface };

struct TaylorResult {
    std::string id;
    int dim = 0;
    int node = -1;
    Functional which = Functional::Volume;
    SemiDerivative above;
    SemiDerivative below;
    FDReport report;
    bool two_sided_agree = true;
    bool no_op = false; ///< supp w misses the boundary: value and quotients are zero
    bool passed = false;
};

/// Taylor test of dj1 / dj2 against the re-evaluated functional. A nonzero
/// `reference_shift` corrupts the reference (negative control).
TaylorResult taylor_check(Functional which, const Instance& inst, const LadderSpec& ladder = {},
                          bool negative_control = false);

/// One line of a pass/fail table.
struct CheckLine {
    std::string name;
    double value = 0.0;     ///< observed residual, mismatch or order
    double tolerance = 0.0; ///< bound it is compared against
    bool passed = false;
    std::string detail;
};

// Identity checks. `negative_control` corrupts one side by a relative 1e-6.
CheckLine layer_vs_strip(int dim, int count, std::uint64_t seed, bool negative_control = false);
CheckLine ibp_dilation(int dim, bool smooth, int count, std::uint64_t seed, bool negative_control = false);
CheckLine ibp_fitted_random(int dim, int count, std::uint64_t seed, bool negative_control = false);
CheckLine jacobian_fd(int dim, std::uint64_t seed, bool negative_control = false);
CheckLine partition_of_unity(int dim, std::uint64_t seed, bool negative_control = false);
CheckLine aligned_one_sided(bool negative_control = false);
CheckLine topological_fd(int dim, std::uint64_t seed, bool negative_control = false);

// Model problem.

/// Counts solves made through the suite helpers and the worst relative gap
/// between compliance and Dirichlet energy among them.
struct SolveStats {
    int count = 0;
    double max_energy_gap = 0.0;
    std::string worst;
};
SolveStats& solve_stats();
double energy_gap(const FemSolution& sol);
FemSolution tracked_solve_fitted(MeshPtr mesh, const AffineSource& r, const std::string& label);
FemSolution tracked_solve_cut(MeshPtr mesh, const LevelSetFunction& phi, const AffineSource& r,
                              const std::string& label);

AffineSource demo_source();
/// [0, 2] x [0, 1] with 4*2^level x 2*2^level squares; Dirichlet on "xmin".
MeshPtr fitted_demo_mesh(int level);
/// Smooth field vanishing on x = 0.
VelocityField demo_velocity(MeshPtr mesh);
/// Unit square with n x n squares.
MeshPtr cut_demo_mesh(int n);
/// Ellipse centered on the left side of the unit square.
LevelSetFunction cut_demo_level_set(MeshPtr mesh);

/// Admissible nodes whose hat support meets a cut cell, ascending.
std::vector<int> cut_band_nodes(const LevelSetFunction& phi, const std::string& label);

CheckLine fitted_equivalence(int count, std::uint64_t seed, bool negative_control = false);
FDReport fitted_taylor(MeshPtr mesh, const AffineSource& r, const VelocityField& v, const std::string& label,
                       const LadderSpec& ladder = {}, double t_top = 0.1, bool negative_control = false);
FDReport cut_taylor(const FemSolution& sol, const HatPerturbation& w, const LadderSpec& ladder = {},
                    bool negative_control = false);

struct GapRow {
    int level = 0;
    double h = 0.0;
    double continuous = 0.0;
    double strong = 0.0;
    double gap = 0.0;
    double fd_fitted = 0.0; ///< quotient at the smallest ladder point
    int cut_node = -1;
    double dj_cut = 0.0;
    double fd_cut = 0.0;
    double min_cut_fraction = 1.0;
};
std::vector<GapRow> compare_fitted_unfitted(int levels, const AffineSource& r);
/// Strict decrease, except that gaps at round-off level count as equal.
bool gaps_decrease(const std::vector<GapRow>& rows);

// Demo optimizer.

struct OptimizerSettings {
    int max_iterations = 10;
    double step = 0.05;                 ///< fixed steepest-descent multiplier
    double lambda = 1.0;                ///< volume-penalty weight
    std::optional<double> target_volume; ///< defaults to the initial volume
    double gradient_tolerance = 1e-12;
};

struct OptimizerIteration {
    int iteration = 0;
    double objective = 0.0; ///< compliance + lambda/2 (volume - target)^2
    double compliance = 0.0;
    double volume = 0.0;
    double gradient_norm = 0.0;
    double step = 0.0; ///< max nodal change applied after this row
    double min_cut_fraction = 1.0;
    bool pattern_changed = false;
};

struct OptimizerRun {
    std::vector<OptimizerIteration> history;
    std::optional<LevelSetFunction> final_phi;
    bool failed = false;
    std::string error;
};

/// Steepest descent on the nodal values of admissible nodes, with each step
/// capped by half the smallest t_max over the moving nodes.
OptimizerRun optimize(MeshPtr mesh, const LevelSetFunction& phi0, const AffineSource& r, const std::string& label,
                      const OptimizerSettings& settings,
                      const std::function<void(int, const LevelSetFunction&)>& on_iterate = {});

} // namespace dilagrad::suites
