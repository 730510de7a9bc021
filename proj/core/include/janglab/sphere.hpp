#pragma once

#include <functional>

#include "janglab/model.hpp"

namespace janglab {

/// Integral over the unit S^{n-1} of a function of the polar angle.
double sphere_integral(int n, const std::function<double(double)>& zonal, int points = 96);

/// Average over the unit S^{n-1}.
double sphere_mean(int n, const std::function<double(double)>& zonal, int points = 96);

/// M = ((n-2)/2) tr_Omega(m) + tr_Omega(p).
ZonalFunction trace_source(const ModelData& model);

struct AlphaSolution {
    ZonalFunction alpha;
    double residual = 0;          ///< max-norm residual of the fine discrete system
    double refinement_error = 0;  ///< max change between the two grids before extrapolation
    int cells = 0;
};

struct AlphaOptions {
    int intervals = 2048;          ///< polar intervals on the coarse grid
    double refinement_tol = 1e-5;  ///< NumericalError above this (relative to max|M|)
};

/// Solve Delta_Omega alpha - (n-3) alpha = M on S^{n-1}.
///
/// Constant sources are solved in closed form. Zonal sources use a vertex-centred
/// finite-volume discretisation of sin^{2-n} d/dtheta (sin^{n-2} d/dtheta) with exact
/// cell weights; pole rows are half cells with a single flux, so regularity is built in.
/// The grid is solved at two resolutions and combined by one Richardson step.
AlphaSolution solve_alpha_detailed(const ModelData& model, const AlphaOptions& opts = {});

ZonalFunction solve_alpha(const ModelData& model);

/// Mean of alpha over the sphere; the value used by the radial pipeline.
double alpha_mean(const ModelData& model);

}  // namespace janglab
