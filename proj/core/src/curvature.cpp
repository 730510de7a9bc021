#include "janglab/curvature.hpp"

#include <cmath>

#include <fmt/format.h>

#include "janglab/derivatives.hpp"
#include "janglab/errors.hpp"

namespace janglab {

double scalar_curvature_jet(int n, const WarpedJet& j) {
    if (!(j.A > 0.0) || !(j.B > 0.0))
        throw DegenerateMetricError(fmt::format("radial metric not positive: A={} B={}", j.A, j.B));
    const double lb = j.dB / j.B;
    return (n - 1) * (n - 2) / j.B -
           (n - 1) / j.A * (j.d2B / j.B - j.dA * j.dB / (2 * j.A * j.B) + 0.25 * (n - 4) * lb * lb);
}

namespace {

struct Warp {
    double beta, dbeta, d2beta;
};

Warp warp_from_b(double b, double db, double d2b) {
    const double beta = std::sqrt(1.0 + b);
    return {beta, db / (2 * beta), d2b / (2 * beta) - db * db / (4 * beta * beta * beta)};
}

}  // namespace

double scalar_curvature_flat_dev(int n, const FlatDeviationJet& j) {
    const double A = 1.0 + j.a;
    if (!(A > 0.0) || !(1.0 + j.b > 0.0))
        throw DegenerateMetricError(fmt::format("radial metric not positive at r={}", j.r));
    const auto [beta, dbeta, d2beta] = warp_from_b(j.b, j.db, j.d2b);
    const double r = j.r;
    const double t1 = -2.0 * (n - 1) *
                      ((2 * dbeta + r * d2beta) / A - (beta + r * dbeta) * j.da / (2 * A * A)) /
                      (r * beta);
    const double t2 = (n - 1) * (n - 2) * (j.a - j.b - r * j.db - r * r * dbeta * dbeta) /
                      (A * r * r * beta * beta);
    return t1 + t2;
}

double scalar_curvature_hyperbolic_dev(int n, double r, double b, double db, double d2b) {
    if (!(1.0 + b > 0.0))
        throw DegenerateMetricError(fmt::format("sphere factor not positive at r={}", r));
    const auto [beta, dbeta, d2beta] = warp_from_b(b, db, d2b);
    const double s2 = 1.0 + r * r;
    const double lam = dbeta / beta;
    return -2.0 * (n - 1) * (r * r * dbeta + 2 * s2 * dbeta + r * s2 * d2beta) / (r * beta) -
           (n - 1) * (n - 2) * (b / (r * r * (1 + b)) + s2 * (2 * lam / r + lam * lam));
}

ScalarCurvatureEstimate scalar_curvature_radial_estimate(
    int n, const std::function<double(double)>& A, const std::function<double(double)>& B,
    double r) {
    if (!(r > 0.0)) throw DomainError("scalar_curvature_radial needs r > 0");
    const auto dA = richardson_derivatives(A, r);
    const auto dB = richardson_derivatives(B, r);
    WarpedJet jet{A(r), dA.d1, B(r), dB.d1, dB.d2};
    ScalarCurvatureEstimate out;
    out.value = scalar_curvature_jet(n, jet);
    // First-order propagation of the Richardson corrections.
    const double lb = jet.dB / jet.B;
    out.error_estimate =
        (n - 1) / jet.A *
        (dB.d2_error / jet.B +
         (dA.d1_error * std::abs(jet.dB) + std::abs(jet.dA) * dB.d1_error) / (2 * jet.A * jet.B) +
         0.5 * std::abs((n - 4) * lb) * dB.d1_error / jet.B);
    return out;
}

double scalar_curvature_radial(int n, const std::function<double(double)>& A,
                               const std::function<double(double)>& B, double r) {
    return scalar_curvature_radial_estimate(n, A, B, r).value;
}

}  // namespace janglab
