#pragma once

#include <functional>

namespace janglab {

/// Radial metric A(r) dr^2 + B(r) Omega_{n-1} with the derivatives its scalar curvature needs.
struct WarpedJet {
    double A = 1, dA = 0;
    double B = 1, dB = 0, d2B = 0;
};

/// Same metric written as (1+a) dr^2 + r^2 (1+b) Omega, for nearly flat metrics.
struct FlatDeviationJet {
    double r = 1;
    double a = 0, da = 0;
    double b = 0, db = 0, d2b = 0;
};

/// R = (n-1)(n-2)/B - ((n-1)/A) [B''/B - A'B'/(2AB) + ((n-4)/4)(B'/B)^2].
double scalar_curvature_jet(int n, const WarpedJet& jet);

/// Scalar curvature of a nearly flat radial metric without cancellation against r^2.
double scalar_curvature_flat_dev(int n, const FlatDeviationJet& jet);

/// R + n(n-1) for dr^2/(1+r^2) + r^2 (1+b) Omega; vanishes identically when b does.
double scalar_curvature_hyperbolic_dev(int n, double r, double b, double db, double d2b);

struct ScalarCurvatureEstimate {
    double value = 0;
    double error_estimate = 0;  ///< propagated Richardson correction
};

/// Scalar curvature of A dr^2 + B Omega from black-box component functions.
/// Derivatives come from richardson_derivatives with step r*1e-4.
ScalarCurvatureEstimate scalar_curvature_radial_estimate(
    int n, const std::function<double(double)>& A, const std::function<double(double)>& B,
    double r);

double scalar_curvature_radial(int n, const std::function<double(double)>& A,
                               const std::function<double(double)>& B, double r);

}  // namespace janglab
