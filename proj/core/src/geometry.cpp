#include "janglab/geometry.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "janglab/curvature.hpp"
#include "janglab/derivatives.hpp"
#include "janglab/errors.hpp"

namespace janglab {

double sphere_volume(int n) {
    if (n < 2) throw DomainError(fmt::format("sphere_volume needs n >= 2, got {}", n));
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

MetricSample background_at(const ModelData& model, double r, double theta) {
    const ModelRadial m = model_radial(model, r, theta);
    MetricSample out;
    out.r = r;
    out.theta = theta;
    out.g_rr = 1.0 / (m.s * m.s);
    out.k_rr = out.g_rr;
    out.g_sph_dev = m.b;
    out.k_sph_dev = m.kappa;
    out.g_sph = r * r * (1.0 + m.b);
    out.k_sph = r * r * (1.0 + m.kappa);
    return out;
}

ChristoffelTable christoffel_at(const ModelData& model, double r) {
    model.require_spherical("christoffel_at");
    const ModelRadial m = model_radial(model, r);
    const double B = r * r * (1.0 + m.b);
    const double dB = 2 * r * (1.0 + m.b) + r * r * m.db;
    ChristoffelTable t;
    t.r_rr = -r / (m.s * m.s);
    t.r_sph = -0.5 * m.s * m.s * dB;
    t.sph_r = 0.5 * dB / B;
    return t;
}

ConstraintDensities constraint_densities(const ModelData& model, double r) {
    model.require_spherical("constraint_densities");
    if (!(r > 0.0)) throw DomainError("constraint_densities needs r > 0");
    const int n = model.n;
    const ModelRadial m = model_radial(model, r);
    const double b = m.b, e = m.q_dev;

    const double dR = scalar_curvature_hyperbolic_dev(n, r, b, m.db, m.d2b);
    ConstraintDensities out;
    out.mu = 0.5 * (dR + (n - 1) * (2.0 * (n - 1) * e + (n - 2) * e * e));
    out.J_r = -(n - 1) * (m.dq + (1.0 / r + m.db / (2 * (1 + b))) * e);
    out.J_norm = std::hypot(1.0, r) * std::abs(out.J_r);
    return out;
}

double slope_difference(double a, double b) { return slope_difference(a, b, a - b); }

double slope_difference(double a, double b, double a_minus_b) {
    const double ra = std::hypot(1.0, a), rb = std::hypot(1.0, b);
    if (a * b > 0.0) return a_minus_b * (a + b) / ((a * rb + b * ra) * ra * rb);
    return a / ra - b / rb;
}

double inverse_slope_difference(double a, double b, double sqrt_a, double sqrt_b) {
    return inverse_slope_difference(a, b, a - b, sqrt_a, sqrt_b);
}

double inverse_slope_difference(double a, double b, double a_minus_b, double sqrt_a, double sqrt_b) {
    if (a * b > 0.0) return a_minus_b * (a + b) / ((a * sqrt_b + b * sqrt_a) * sqrt_a * sqrt_b);
    return a / sqrt_a - b / sqrt_b;
}

GraphGeometry graph_geometry_dev(const ModelData& model, double r, const GraphJet& jet) {
    model.require_spherical("graph_geometry");
    const int n = model.n;
    const ModelRadial m = model_radial(model, r);
    const double s = m.s, s2 = s * s;
    const double k0 = r / s;
    const double v1 = jet.d1, v2 = jet.d2;

    const double P = r + s * v1;  // s f'
    const double w = std::hypot(1.0, P);
    const double w2 = w * w, w3 = w2 * w;
    const double kf = P / w;
    const double delta = slope_difference(P, r, s * v1);
    const double Q = v2 + r * v1 / s2;
    const double dP = 1.0 + s * Q;

    // 1/w^3 - 1/s^3 through s - w = (s^2 - w^2)/(s + w), s^2 - w^2 = -s v1 (P + r).
    const double s_minus_w = -s * v1 * (P + r) / (s + w);
    const double s3 = s2 * s;
    const double inv3 = s_minus_w * (s2 + s * w + w2) / (w3 * s3);
    const double ddelta = inv3 + s * Q / w3;

    const double P1 = s * ddelta + 2 * k0 * delta + delta * delta;
    const double P2 = (s / r) * delta + m.c1 * kf - m.q_dev;
    const double lapse = s / r + m.c1;  // s B'/(2B)

    GraphGeometry g;
    g.r = r;
    g.g_rr = w2 / s2;
    g.g_sph = r * r * (1.0 + m.b);
    g.g_rr_dev = 2 * k0 * v1 + v1 * v1;
    const double dB = 2 * r * (1.0 + m.b) + r * r * m.db;
    g.A_rr = dP / (s * w);
    g.A_sph = s * P * dB / (2 * w);
    g.A_mixed = 0.0;
    const double radial_curv = s * dP / w3;  // hat g^{rr} hat A_rr
    const double sphere_curv = lapse * kf;
    g.H = radial_curv + (n - 1) * sphere_curv;
    g.trk = 1.0 / w2 + (n - 1) * (1.0 + m.q_dev);
    g.J = P1 + (n - 1) * P2;
    g.A_norm2 = radial_curv * radial_curv + (n - 1) * sphere_curv * sphere_curv;
    g.A_minus_k_norm2 = P1 * P1 + (n - 1) * P2 * P2;
    g.radial_part = P1;
    g.sphere_part = P2;
    g.slope_k = kf;
    g.omega_r = s * kf;
    g.q_r = (P / s) * w * P1;
    g.q_mu = 0.0;
    g.q_norm2 = P * P * P1 * P1;

    const double da = 2 * v1 / s3 + 2 * k0 * v2 + 2 * v1 * v2;
    g.R_hat = scalar_curvature_flat_dev(n, {r, g.g_rr_dev, da, m.b, m.db, m.d2b});

    if (jet.d3) {
        const double v3 = *jet.d3;
        const double dQ = v3 + v1 / s2 + r * v2 / s2 - 2 * r * r * v1 / (s2 * s2);
        const double d2P = k0 * Q + s * dQ;
        const double w5 = w3 * w2, s5 = s3 * s2;
        const double PdP2_minus_r = s * v1 * dP * dP + r * s * Q * (dP + 1.0);
        const double inv5 = s_minus_w * (s2 * s2 + s3 * w + s2 * w2 + s * w3 + w2 * w2) / (w5 * s5);
        const double d2delta = d2P / w3 - 3.0 * (PdP2_minus_r / w5 + r * inv5);
        const double dP1 =
            s * d2delta + k0 * ddelta + 2 * delta / s3 + 2 * k0 * ddelta + 2 * delta * ddelta;
        const double dPP1 = dP * P1 + P * dP1;
        g.div_q = (s / w) * (dPP1 + (n - 1) * (1.0 / r + m.c1 / s) * P * P1);
    }
    return g;
}

GraphGeometry graph_geometry_at(const ModelData& model, double f, double df, double d2f,
                                double r) {
    const double s = std::hypot(1.0, r);
    return graph_geometry_dev(model, r, {f - s, df - r / s, d2f - 1.0 / (s * s * s), {}});
}

GraphGeometry graph_geometry_at(const ModelData& model, double f, double df, double d2f,
                                double d3f, double r) {
    const double s = std::hypot(1.0, r);
    const double s2 = s * s;
    return graph_geometry_dev(model, r,
                              {f - s, df - r / s, d2f - 1.0 / (s2 * s), d3f + 3 * r / (s2 * s2 * s)});
}

}  // namespace janglab
