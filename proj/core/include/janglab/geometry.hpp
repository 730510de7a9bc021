#pragma once

#include <optional>

#include "janglab/model.hpp"

namespace janglab {

/// |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2). Throws DomainError for n < 2.
double sphere_volume(int n);

/// Background fields at one point. Sphere parts are coefficients of Omega.
struct MetricSample {
    double r = 0;
    double theta = 0;
    double g_rr = 0, k_rr = 0;
    double g_sph = 0, k_sph = 0;
    double g_sph_dev = 0;  ///< g_sph/r^2 - 1
    double k_sph_dev = 0;  ///< k_sph/r^2 - 1
};

MetricSample background_at(const ModelData& model, double r, double theta = 0.0);

/// Christoffel symbols of g in polar coordinates (r, angles).
///
/// Only the radial families are listed; Gamma^lambda_{mu nu} among angles are
/// those of the round metric Omega and do not depend on r.
struct ChristoffelTable {
    double r_rr = 0;     ///< Gamma^r_{rr}
    double r_sph = 0;    ///< Gamma^r_{mu nu} = r_sph * Omega_{mu nu}
    double sph_r = 0;    ///< Gamma^mu_{r nu} = sph_r * delta^mu_nu
    double sph_rr = 0;   ///< Gamma^mu_{rr}
    double r_r_sph = 0;  ///< Gamma^r_{r mu}
};

ChristoffelTable christoffel_at(const ModelData& model, double r);

struct ConstraintDensities {
    double mu = 0;      ///< local energy density
    double J_r = 0;     ///< radial covariant component of the momentum density
    double J_norm = 0;  ///< |J|_g
};

/// mu = (R_g - |k|^2 + (tr k)^2)/2 and J = div(k - (tr k) g) for the exact model.
/// Radial derivatives of the deviation functions come from Richardson differences.
ConstraintDensities constraint_densities(const ModelData& model, double r);

/// Height function written as f = sqrt(1+r^2) + v, with derivatives of v.
struct GraphJet {
    double v = 0, d1 = 0, d2 = 0;
    std::optional<double> d3;
};

/// Geometry of graph(f) in (M x R, g + dt^2), all in polar components.
struct GraphGeometry {
    double r = 0;
    double g_rr = 0;       ///< hat g_rr
    double g_sph = 0;      ///< hat g sphere coefficient
    double g_rr_dev = 0;   ///< hat g_rr - 1
    double A_rr = 0;       ///< hat A_rr
    double A_sph = 0;      ///< hat A sphere coefficient
    double A_mixed = 0;    ///< hat A_{r mu}, zero under spherical symmetry
    double H = 0;
    double trk = 0;        ///< tr_{hat g} k
    double J = 0;          ///< H - trk
    double A_norm2 = 0;    ///< |hat A|^2
    double A_minus_k_norm2 = 0;
    double R_hat = 0;      ///< scalar curvature of hat g
    double q_r = 0;        ///< q_r; angular components vanish
    double q_mu = 0;
    double q_norm2 = 0;
    std::optional<double> div_q;  ///< needs the third derivative
    double omega_r = 0;    ///< radial component of grad f / sqrt(1+|df|^2)
    double slope_k = 0;    ///< k_f = s f'/sqrt(1+s^2 f'^2)
    double radial_part = 0;   ///< hat g^{rr}(hat A_rr - k_rr)
    double sphere_part = 0;   ///< hat g^{sph}(hat A_sph - k_sph)
};

/// Deviation form; stays accurate when f is close to sqrt(1+r^2) at large r.
GraphGeometry graph_geometry_dev(const ModelData& model, double r, const GraphJet& jet);

/// Plain values f, f', f''.
GraphGeometry graph_geometry_at(const ModelData& model, double f, double df, double d2f,
                                double r);

/// Same as graph_geometry_at, additionally filling div_q from f'''.
GraphGeometry graph_geometry_at(const ModelData& model, double f, double df, double d2f,
                                double d3f, double r);

/// h(a) - h(b) for h(x) = x/sqrt(1+x^2), without cancellation when a ~ b.
double slope_difference(double a, double b);
/// Same, with a - b supplied when it is known more accurately than a itself.
double slope_difference(double a, double b, double a_minus_b);

/// a/sqrt(1-a^2) - b/sqrt(1-b^2) given the square roots, without cancellation.
double inverse_slope_difference(double a, double b, double sqrt_a, double sqrt_b);
/// Same, with a - b supplied; needed once a - b drops below the rounding of a.
double inverse_slope_difference(double a, double b, double a_minus_b, double sqrt_a, double sqrt_b);

}  // namespace janglab
