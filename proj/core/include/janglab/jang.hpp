#pragma once

#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "janglab/barrier.hpp"
#include "janglab/fit.hpp"
#include "janglab/model.hpp"
#include "janglab/radial.hpp"

namespace janglab {

/// H of the coordinate sphere S_R minus |tr_{S_R} k| minus tau |phi|.
double trapping_margin(const ModelData& model, double R, double tau, double phi);

/// Dirichlet value at the outer node and, in anchored mode, at the inner node.
struct BoundaryData {
    double outer = 0;
    std::optional<double> inner;
};

/// Dirichlet data for anchored solves: the barrier midpoint, or sqrt(1+r^2) + alpha r^{-(n-3)}
/// clamped into [f_-, f_+].
enum class BoundaryPolicy { Ansatz, Midpoint };

struct SolverConfig {
    double tau_start = 1e-2;
    double tau_factor = 0.1;
    double tau_min = 1e-6;
    bool limit_solve = true;  ///< finish every radius with tau = 0

    double newton_tol = 1e-12;
    int newton_max_iter = 60;
    double damping_min = 1.0 / 64;
    int stagnation_window = 5;  ///< fail if the residual drops by < 1% over this many steps
    /// A stagnating iteration whose last step moved r^{n-3}|df| by less than this is at its
    /// roundoff floor and is accepted.
    double floor_step_tol = 1e-6;

    std::vector<double> R_list{50.0};
    int intervals = 1024;
    std::optional<double> stretch;     ///< default R/r_in (R for origin grids)
    std::optional<InnerMode> mode;     ///< default: origin for hyperbolic data, else anchored
    Window probe{1.0, 10.0};
    double bracket_tol = 1e-8;
    BoundaryPolicy boundary = BoundaryPolicy::Ansatz;
    bool require_trapping = true;  ///< refuse solves whose outer sphere is not trapping

    /// Throws ValidationError.
    void validate() const;
};

/// Interior rows J(f) - tau f from 3-point differences in xi; boundary rows carry
/// Dirichlet data and, on origin grids, the one-sided regularity condition f'(0) = 0.
/// The grid must be a stretched (mapped) grid.
std::vector<double> assemble_residual(const ModelData& model, const RadialField& f, double tau,
                                      const BoundaryData& bc);

/// Analytic Jacobian of assemble_residual with respect to the nodal values.
Eigen::SparseMatrix<double> assemble_jacobian(const ModelData& model, const RadialField& f,
                                              double tau);

struct RegularizedSolution {
    RadialField f;
    RadialField deviation;  ///< f - sqrt(1+r^2) as solved for; f itself rounds it off at large r
    double tau = 0;
    int iterations = 0;
    double residual = 0;
    std::vector<double> history;  ///< weighted max-norm residual after each iterate
};

/// Damped Newton for J(f) = tau f, converged when max_i max(1, r_i)^{n-2} |F_i| < newton_tol
/// or when an undamped step has max_i max(1, r_i)^{n-3} |df_i| < newton_tol.
/// Throws DomainError if the outer sphere is not trapping
/// (unless cfg.require_trapping is off),
/// NonConvergence on stagnation or the iteration cap, NumericalError for a singular Jacobian.
RegularizedSolution solve_regularized(const ModelData& model, double tau,
                                      std::shared_ptr<const RadialGrid> grid,
                                      const BoundaryData& bc, const RadialField& f_init,
                                      const SolverConfig& cfg = {});

struct StageDiagnostics {
    double tau = 0, R = 0;
    int iterations = 0;
    double residual = 0;
    double margin = 0;
    double cauchy = 0;  ///< max change on the probe window against the previous stage (0 first)
    int bracket_violations = 0;  ///< -1 when no barriers were available
    double sup_lhs = 0;  ///< tau max|f|
    double sup_rhs = 0;  ///< max(sup |tr k|, tau |phi|)
};

struct ContinuationResult {
    InnerMode mode = InnerMode::Origin;
    double r_inner = 0;
    double tau_admissible = 0;  ///< largest tau for which f_- stays a subsolution of J = tau f
    double tau_trapping = 0;    ///< largest tau keeping the outer spheres trapping
    std::vector<StageDiagnostics> stages;
    std::vector<RegularizedSolution> solutions;  ///< aligned with stages
    const RegularizedSolution& final() const { return solutions.back(); }
};

/// tau-continuation on each R of cfg.R_list, warm-starting from the previous stage.
/// The schedule keeps only tau below tau_admissible and tau_trapping, and ends with tau = 0
/// when cfg.limit_solve is set. Anchored mode needs barriers: the anchor is their r0 and the
/// boundary data follows cfg.boundary. Errors are rethrown with the failing (tau, R).
ContinuationResult continuation_solve(const ModelData& model, const SolverConfig& cfg,
                                      const BarrierPair* barriers = nullptr);

/// Largest tau keeping J(f_-) >= tau f_- on [r0, R].
double admissible_tau(const ModelData& model, const BarrierPair& barriers, double R);

/// Fits deviation * r^{n-3} = alpha + c1/r + c2/r^2 over the window; returns alpha.
double extract_alpha(const RadialField& deviation, int n, Window window);

/// Barrier values at the nodes of a grid (r >= r0); nodes below r0 get NaN.
std::vector<double> barrier_on_grid(const FProfile& barrier, const RadialGrid& grid);

/// Count of nodes with r >= r0 where f leaves [f_- - tol, f_+ + tol].
int bracket_violations(const RadialField& f, const BarrierPair& barriers, double tol);

}  // namespace janglab
