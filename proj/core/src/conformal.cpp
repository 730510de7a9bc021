#include "janglab/conformal.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/geometry.hpp"

namespace janglab {

namespace {

double fit_coefficient(const RadialField& w, int n, Window window) {
    const RadialGrid& g = w.grid();
    std::vector<double> r, y;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!window.contains(g[i])) continue;
        r.push_back(g[i]);
        y.push_back(w[i] * std::pow(g[i], n - 2));
    }
    const double powers[] = {1.0, 2.0};
    return fit_inverse_powers(r, y, powers).front();
}

}  // namespace

YamabeSolution yamabe_solve(int n, std::shared_ptr<const RadialGrid> grid,
                            std::span<const FlatDeviationJet> metric, double alpha_mean,
                            const YamabeOptions& opts) {
    const RadialGrid& g = *grid;
    if (!g.mapped()) throw DomainError("yamabe_solve needs a stretched grid");
    if (metric.size() != g.size()) throw DomainError("metric jets do not match the grid");
    const std::size_t m = g.size();
    const double cn = conformal_constant(n);
    const double h = g.xi_step();

    YamabeSolution out;
    out.R_hat.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        if (g[i] > 0.0) out.R_hat[i] = scalar_curvature_flat_dev(n, metric[i]);

    // Unknown w = u - 1:  -(w'' + c w') + c_n R A w = -c_n R A.
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    trip.emplace_back(0, 0, -3.0);
    trip.emplace_back(0, 1, 4.0);
    trip.emplace_back(0, 2, -1.0);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const FlatDeviationJet& j = metric[i];
        const double r = g[i];
        const double A = 1.0 + j.a;
        const double drift = (n - 1) * (1.0 / r + j.db / (2 * (1 + j.b))) - j.da / (2 * A);
        const double rx = g.r_xi(i), rxx = g.r_xixi(i);
        const double d1 = 1.0 / (2 * h * rx);
        const double d2 = 1.0 / (h * h * rx * rx);
        const double corr = rxx / (rx * rx);  // w'' = (w_xixi - rxx w') / rx^2
        const double lower = -(d2 - corr * (-d1)) - drift * (-d1);
        const double upper = -(d2 - corr * d1) - drift * d1;
        const double diag = 2 * d2 + cn * out.R_hat[i] * A;
        const int row = static_cast<int>(i);
        trip.emplace_back(row, row - 1, lower);
        trip.emplace_back(row, row, diag);
        trip.emplace_back(row, row + 1, upper);
        rhs[row] = -cn * out.R_hat[i] * A;
    }
    const int last = static_cast<int>(m) - 1;
    const double R = g.back();
    const double dN = 1.0 / (2 * h * g.r_xi(m - 1));
    trip.emplace_back(last, last, 3 * dN + (n - 2) / R);
    trip.emplace_back(last, last - 1, -4 * dN);
    trip.emplace_back(last, last - 2, dN);

    Eigen::SparseMatrix<double> K(static_cast<int>(m), static_cast<int>(m));
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) throw NumericalError("singular Yamabe system", lu.lastErrorMessage());
    const Eigen::VectorXd w = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !w.allFinite()) throw NumericalError("Yamabe solve failed");

    std::vector<double> wv(w.data(), w.data() + w.size());
    std::vector<double> uv(m);
    out.u_min = out.u_max = 1.0 + wv[0];
    for (std::size_t i = 0; i < m; ++i) {
        uv[i] = 1.0 + wv[i];
        out.u_min = std::min(out.u_min, uv[i]);
        out.u_max = std::max(out.u_max, uv[i]);
    }
    if (!(out.u_min > 0.0))
        throw DegenerateMetricError(fmt::format("conformal factor reaches {:.3e} <= 0", out.u_min));

    RadialField wf(grid, std::move(wv));
    const Window w1{opts.primary.lo * R, opts.primary.hi * R};
    const Window w2{opts.secondary.lo * R, opts.secondary.hi * R};
    out.coefficient = fit_coefficient(wf, n, w1);
    out.coefficient_alt = fit_coefficient(wf, n, w2);
    out.A = out.coefficient - 2 * cn * alpha_mean;
    out.u = RadialField(grid, std::move(uv));
    out.u_minus_one = std::move(wf);
    return out;
}

std::vector<FlatDeviationJet> conformal_jets(int n, std::span<const FlatDeviationJet> metric,
                                             const RadialField& w) {
    if (metric.size() != w.size()) throw DomainError("metric jets do not match u");
    const double p = 4.0 / (n - 2);
    const std::vector<double> d1 = w.derivative(1), d2 = w.derivative(2);
    std::vector<FlatDeviationJet> out(metric.size());
    for (std::size_t i = 0; i < metric.size(); ++i) {
        const FlatDeviationJet& j = metric[i];
        const double uu = 1.0 + w[i];
        const double U = std::pow(uu, p);
        const double Um1 = std::expm1(p * std::log1p(w[i]));
        const double dU = p * std::pow(uu, p - 1) * d1[i];
        const double d2U = p * (p - 1) * std::pow(uu, p - 2) * d1[i] * d1[i] + p * std::pow(uu, p - 1) * d2[i];
        FlatDeviationJet& c = out[i];
        c.r = j.r;
        c.a = Um1 + U * j.a;
        c.da = dU * (1 + j.a) + U * j.da;
        c.b = Um1 + U * j.b;
        c.db = dU * (1 + j.b) + U * j.db;
        c.d2b = d2U * (1 + j.b) + 2 * dU * j.db + U * j.d2b;
    }
    return out;
}

double max_scalar_curvature(int n, std::span<const FlatDeviationJet> metric, Window window) {
    double out = 0.0;
    for (const FlatDeviationJet& j : metric)
        if (j.r > 0.0 && window.contains(j.r)) out = std::max(out, std::abs(scalar_curvature_flat_dev(n, j)));
    return out;
}

double energy_shift(double E_adm, double A, double alpha_mean, int n) {
    return E_adm + 2 * A + 4 * conformal_constant(n) * alpha_mean;
}

SchoenYauReport schoen_yau_residual(const ModelData& model, const RadialField& dev, Window window) {
    const RadialGrid& g = dev.grid();
    SchoenYauReport rep;
    for (std::size_t i = 0; i < dev.size(); ++i) {
        const double r = g[i];
        if (!(r > 0.0) || !window.contains(r)) continue;
        GraphJet jet{dev[i], dev.derivative_at(1, i), dev.derivative_at(2, i), dev.derivative_at(3, i)};
        const GraphGeometry geo = graph_geometry_dev(model, r, jet);
        const ConstraintDensities c = constraint_densities(model, r);
        const double rhs = 2 * (c.mu - c.J_r * geo.omega_r) + geo.A_minus_k_norm2 + 2 * geo.q_norm2 -
                           2 * *geo.div_q;
        const double res = std::abs(geo.R_hat - rhs);
        rep.r.push_back(r);
        rep.residual.push_back(res);
        rep.max_residual = std::max(rep.max_residual, res);
        rep.max_R_hat = std::max(rep.max_R_hat, std::abs(geo.R_hat));
    }
    return rep;
}

double glue_cutoff(double t, int derivative) {
    if (derivative < 0 || derivative > 3) throw DomainError("glue_cutoff supports derivatives 0..3");
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return derivative == 0 ? 1.0 : 0.0;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    switch (derivative) {
        case 0: return t4 * (35 - 84 * t + 70 * t2 - 20 * t3);
        case 1: return t3 * (140 - 420 * t + 420 * t2 - 140 * t3);
        case 2: return t2 * (420 - 1680 * t + 2100 * t2 - 840 * t3);
        default: return t * (840 - 5040 * t + 8400 * t2 - 4200 * t3);
    }
}

GlueResult glue_to_schwarzschild(int n, std::span<const FlatDeviationJet> metric, double E,
                                 double R_glue) {
    if (!(R_glue > 0.0)) throw DomainError("glue radius must be positive");
    const double p = 4.0 / (n - 2);
    GlueResult out;
    out.R_glue = R_glue;
    for (const FlatDeviationJet& j : metric) {
        const double r = j.r;
        if (r < R_glue || r > 2 * R_glue) continue;
        const double x = E / (2 * std::pow(r, n - 2));
        const double base = 1.0 + x;
        if (!(base > 0.0))
            throw DomainError(fmt::format("Schwarzschild factor 1 + E/(2 r^(n-2)) <= 0 at r = {}", r));
        const double dx = -(n - 2) * x / r;
        const double d2x = (n - 2) * (n - 1) * x / (r * r);
        const double aS = std::expm1(p * std::log1p(x));
        const double daS = p * std::pow(base, p - 1) * dx;
        const double d2aS = p * (p - 1) * std::pow(base, p - 2) * dx * dx + p * std::pow(base, p - 1) * d2x;

        const double t = (r - R_glue) / R_glue;
        const double xi = glue_cutoff(t), dxi = glue_cutoff(t, 1) / R_glue, d2xi = glue_cutoff(t, 2) / (R_glue * R_glue);
        FlatDeviationJet glued;
        glued.r = r;
        glued.a = (1 - xi) * j.a + xi * aS;
        glued.da = (1 - xi) * j.da + xi * daS + dxi * (aS - j.a);
        glued.b = (1 - xi) * j.b + xi * aS;
        glued.db = (1 - xi) * j.db + xi * daS + dxi * (aS - j.b);
        glued.d2b = (1 - xi) * j.d2b + xi * d2aS + 2 * dxi * (daS - j.db) + d2xi * (aS - j.b);
        out.sup_curvature = std::max(out.sup_curvature, std::abs(scalar_curvature_flat_dev(n, glued)));
        ++out.samples;
    }
    if (out.samples < 3)
        throw DomainError(fmt::format("glue annulus [{}, {}] holds fewer than 3 nodes", R_glue, 2 * R_glue));
    out.decay = out.sup_curvature * std::pow(R_glue, n);
    return out;
}

}  // namespace janglab
