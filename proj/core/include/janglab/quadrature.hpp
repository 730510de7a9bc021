#pragma once

#include <vector>

namespace janglab {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b, via Golub-Welsch.
/// Exact for polynomials of degree 2*points - 1.
QuadratureRule gauss_jacobi(int points, double a, double b);

inline QuadratureRule gauss_legendre(int points) { return gauss_jacobi(points, 0.0, 0.0); }

/// Rule for x = cos(theta) with weight (1-x^2)^{(n-3)/2}, i.e. sin^{n-2}(theta) d theta.
inline QuadratureRule gauss_gegenbauer_sphere(int n, int points) {
    return gauss_jacobi(points, 0.5 * (n - 3), 0.5 * (n - 3));
}

}  // namespace janglab
