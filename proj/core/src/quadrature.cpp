#include "janglab/quadrature.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "janglab/errors.hpp"

namespace janglab {

QuadratureRule gauss_jacobi(int points, double a, double b) {
    if (points < 1) throw DomainError("quadrature needs at least one point");
    if (!(a > -1.0) || !(b > -1.0)) throw DomainError("Jacobi exponents must exceed -1");

    Eigen::VectorXd diag(points), sub(std::max(points - 1, 1));
    const double ab = a + b;
    for (int k = 0; k < points; ++k) {
        const double t = 2.0 * k + ab;
        if (a == b)
            diag(k) = 0.0;
        else if (k == 0)
            diag(k) = (b - a) / (ab + 2);
        else
            diag(k) = (b * b - a * a) / (t * (t + 2));
    }
    for (int k = 1; k < points; ++k) {
        const double t = 2.0 * k + ab;
        const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        const double den = t * t * (t + 1) * (t - 1);
        sub(k - 1) = std::sqrt(num / den);
    }

    QuadratureRule rule;
    rule.nodes.resize(points);
    rule.weights.resize(points);
    const double mu0 = std::exp((ab + 1) * std::log(2.0) + std::lgamma(a + 1) + std::lgamma(b + 1) -
                                std::lgamma(ab + 2));
    if (points == 1) {
        rule.nodes[0] = diag(0);
        rule.weights[0] = mu0;
        return rule;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub.head(points - 1), Eigen::ComputeEigenvectors);
    for (int i = 0; i < points; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double v0 = eig.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace janglab
