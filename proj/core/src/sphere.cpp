#include "janglab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/geometry.hpp"
#include "janglab/quadrature.hpp"

namespace janglab {

double sphere_integral(int n, const std::function<double(double)>& zonal, int points) {
    const QuadratureRule rule = gauss_gegenbauer_sphere(n, points);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * zonal(std::acos(rule.nodes[i]));
    return sphere_volume(n - 1) * acc;
}

double sphere_mean(int n, const std::function<double(double)>& zonal, int points) {
    return sphere_integral(n, zonal, points) / sphere_volume(n);
}

ZonalFunction trace_source(const ModelData& model) {
    const int n = model.n;
    const double half = 0.5 * (n - 2);
    if (model.is_spherical())
        return ZonalFunction(half * model.m_trace.constant() + model.p_trace.constant());
    // Union of both tables keeps every sample of either input.
    std::vector<double> theta;
    for (const auto* z : {&model.m_trace, &model.p_trace})
        theta.insert(theta.end(), z->theta().begin(), z->theta().end());
    std::sort(theta.begin(), theta.end());
    theta.erase(std::unique(theta.begin(), theta.end()), theta.end());
    std::vector<double> values(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        values[i] = half * model.m_trace(theta[i]) + model.p_trace(theta[i]);
    return ZonalFunction(std::move(theta), std::move(values));
}

namespace {

struct Discrete {
    std::vector<double> theta, alpha;
    double residual = 0;
};

// Vertex-centred finite volumes on [0, pi] with N intervals.
Discrete solve_grid(int n, const ZonalFunction& source, int intervals) {
    const int N = intervals;
    const double h = std::numbers::pi / N;
    const int m = n - 2;
    const QuadratureRule gl = gauss_legendre(8);
    auto weight_integral = [&](double a, double b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
            acc += gl.weights[i] * std::pow(std::sin(t), m);
        }
        return 0.5 * (b - a) * acc;
    };

    std::vector<double> theta(N + 1), vol(N + 1), face(N), rhs(N + 1);
    for (int j = 0; j <= N; ++j) {
        theta[j] = j * h;
        const double lo = std::max(0.0, theta[j] - 0.5 * h);
        const double hi = std::min(std::numbers::pi, theta[j] + 0.5 * h);
        vol[j] = weight_integral(lo, hi);
        rhs[j] = vol[j] * source(theta[j]);
    }
    for (int j = 0; j < N; ++j) face[j] = std::pow(std::sin((j + 0.5) * h), m) / h;

    // Row j: face[j](a_{j+1}-a_j) - face[j-1](a_j-a_{j-1}) - (n-3) vol[j] a_j = rhs[j].
    std::vector<double> lower(N + 1, 0.0), diag(N + 1), upper(N + 1, 0.0);
    for (int j = 0; j <= N; ++j) {
        const double fr = j < N ? face[j] : 0.0;
        const double fl = j > 0 ? face[j - 1] : 0.0;
        diag[j] = -fr - fl - (n - 3) * vol[j];
        if (j > 0) lower[j] = fl;
        if (j < N) upper[j] = fr;
    }
    // Thomas algorithm; the matrix is strictly diagonally dominant for n >= 4.
    std::vector<double> c(N + 1), d(N + 1), x(N + 1);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (int j = 1; j <= N; ++j) {
        const double den = diag[j] - lower[j] * c[j - 1];
        c[j] = upper[j] / den;
        d[j] = (rhs[j] - lower[j] * d[j - 1]) / den;
    }
    x[N] = d[N];
    for (int j = N - 1; j >= 0; --j) x[j] = d[j] - c[j] * x[j + 1];

    double res = 0.0;
    for (int j = 0; j <= N; ++j) {
        double row = diag[j] * x[j] - rhs[j];
        if (j > 0) row += lower[j] * x[j - 1];
        if (j < N) row += upper[j] * x[j + 1];
        res = std::max(res, std::abs(row) / vol[j]);
    }
    return {std::move(theta), std::move(x), res};
}

}  // namespace

AlphaSolution solve_alpha_detailed(const ModelData& model, const AlphaOptions& opts) {
    const int n = model.n;
    const ZonalFunction source = trace_source(model);
    AlphaSolution out;
    if (source.is_constant()) {
        out.alpha = ZonalFunction(-source.constant() / (n - 3));
        return out;
    }
    if (opts.intervals < 8) throw DomainError("solve_alpha needs at least 8 intervals");
    const Discrete coarse = solve_grid(n, source, opts.intervals);
    const Discrete fine = solve_grid(n, source, 2 * opts.intervals);
    std::vector<double> values(coarse.theta.size());
    double change = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        const double f = fine.alpha[2 * j];
        change = std::max(change, std::abs(f - coarse.alpha[j]));
        values[j] = (4.0 * f - coarse.alpha[j]) / 3.0;
    }
    out.residual = fine.residual;
    out.refinement_error = change;
    out.cells = 2 * opts.intervals;
    const double scale = std::max(1.0, source.max_abs());
    if (!(change <= opts.refinement_tol * scale))
        throw NumericalError("zonal alpha solve did not converge under refinement",
                             fmt::format("grid change {} exceeds {}", change,
                                         opts.refinement_tol * scale));
    out.alpha = ZonalFunction(coarse.theta, std::move(values));
    return out;
}

ZonalFunction solve_alpha(const ModelData& model) { return solve_alpha_detailed(model).alpha; }

double alpha_mean(const ModelData& model) {
    const ZonalFunction a = solve_alpha(model);
    if (a.is_constant()) return a.constant();
    return sphere_mean(model.n, [&](double t) { return a(t); });
}

}  // namespace janglab
