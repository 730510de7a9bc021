#pragma once

#include <memory>
#include <span>
#include <vector>

#include "janglab/curvature.hpp"
#include "janglab/fit.hpp"
#include "janglab/model.hpp"
#include "janglab/radial.hpp"

namespace janglab {

/// c_n = (n-2)/(4(n-1)).
constexpr double conformal_constant(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

struct YamabeOptions {
    /// Fit windows for u - 1 ~ c r^{-(n-2)}, as fractions of the outer radius.
    Window primary{0.1, 0.4};
    Window secondary{0.2, 0.6};
};

struct YamabeSolution {
    RadialField u;
    RadialField u_minus_one;        ///< u - 1 without the rounding of u at large r
    std::vector<double> R_hat;      ///< scalar curvature of the graph metric at the nodes
    double coefficient = 0;         ///< r^{-(n-2)} coefficient of u - 1 (primary window)
    double coefficient_alt = 0;     ///< same from the secondary window
    double A = 0;                   ///< coefficient - 2 c_n alpha_mean
    double u_min = 1, u_max = 1;
};

/// Solves -Delta u + c_n R u = 0 for the radial metric given by jets on a stretched grid.
/// Inner row: u' = 0. Outer row: u' + (n-2)(u-1)/r = 0.
/// Throws DegenerateMetricError if u <= 0 somewhere, NumericalError if the system is singular.
YamabeSolution yamabe_solve(int n, std::shared_ptr<const RadialGrid> grid,
                            std::span<const FlatDeviationJet> metric, double alpha_mean,
                            const YamabeOptions& opts = {});

/// Jets of u^{4/(n-2)} g for a radial metric g, given u - 1; derivatives from 4th-order stencils.
std::vector<FlatDeviationJet> conformal_jets(int n, std::span<const FlatDeviationJet> metric,
                                             const RadialField& u_minus_one);

/// Max |R| of the given jets over the nodes inside the window.
double max_scalar_curvature(int n, std::span<const FlatDeviationJet> metric, Window window);

/// E + 2A + 4 c_n alpha_mean.
double energy_shift(double E_adm, double A, double alpha_mean, int n);

struct SchoenYauReport {
    double max_residual = 0;
    std::vector<double> r, residual;
    double max_R_hat = 0;  ///< scale of the left-hand side on the window
};

/// |R_hat - 2(mu - J(omega)) - |A - k|^2 - 2|q|^2 + 2 div q| at the nodes of f inside the window.
/// Takes the deviation f - sqrt(1+r^2) of the Jang solution.
SchoenYauReport schoen_yau_residual(const ModelData& model, const RadialField& deviation, Window window);

/// C^3 step: 0 below 0, 35t^4 - 84t^5 + 70t^6 - 20t^7 on [0, 1], 1 above.
/// derivative selects d^k/dt^k for k in 0..3.
double glue_cutoff(double t, int derivative = 0);

struct GlueResult {
    double R_glue = 0;
    double sup_curvature = 0;  ///< sup of |R_{g_R}| over the nodes in [R, 2R]
    double decay = 0;          ///< sup_curvature * R^n
    int samples = 0;
};

/// Glues the radial metric to the Schwarzschild metric of energy E across [R, 2R].
/// Throws DomainError if 1 + E/(2 r^{n-2}) <= 0 in the annulus or it holds fewer than 3 nodes.
GlueResult glue_to_schwarzschild(int n, std::span<const FlatDeviationJet> metric, double E,
                                 double R_glue);

}  // namespace janglab
