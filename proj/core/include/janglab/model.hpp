#pragma once

#include <functional>
#include <span>
#include <vector>

namespace janglab {

/// Spatial dimension of the initial data, restricted to 4..7.
class Dimension {
public:
    static constexpr int kMin = 4;
    static constexpr int kMax = 7;

    /// Throws ValidationError outside [kMin, kMax].
    explicit Dimension(int n);

    constexpr int value() const noexcept { return n_; }
    constexpr operator int() const noexcept { return n_; }

private:
    int n_;
};

enum class Sign { Plus, Minus };

constexpr double sign_value(Sign s) noexcept { return s == Sign::Plus ? 1.0 : -1.0; }

/// Function of the polar angle on S^{n-1}: a constant or a sampled table on [0, pi].
///
/// Tables are interpolated with cubic Hermite pieces whose slopes vanish at the
/// poles, which is the even reflection a smooth zonal function must satisfy.
class ZonalFunction {
public:
    ZonalFunction() = default;
    /// Constant function.
    ZonalFunction(double value);  // NOLINT(google-explicit-constructor)
    ZonalFunction(std::vector<double> theta, std::vector<double> values);

    static ZonalFunction sample(const std::function<double(double)>& fn, int samples);

    bool is_constant() const noexcept { return theta_.empty(); }
    double constant() const noexcept { return constant_; }
    std::span<const double> theta() const noexcept { return theta_; }
    std::span<const double> values() const noexcept { return values_; }

    double operator()(double theta) const;

    double max_abs() const;

private:
    double constant_ = 0.0;
    std::vector<double> theta_;
    std::vector<double> values_;
    std::vector<double> slopes_;
};

/// Exact Wang-type model data.
///
///   g = dr^2/(1+r^2) + (r^2 + mbar r^{2-n}) Omega
///   k_rr = g_rr,  k_sph = r^2 + pbar r^{2-n}
///
/// with mbar = tr_Omega(m)/(n-1) and pbar = tr_Omega(p)/(n-1).
struct ModelData {
    Dimension n{4};
    ZonalFunction m_trace;
    ZonalFunction p_trace;

    static ModelData spherical(int n, double mbar, double pbar);
    static ModelData hyperbolic(int n) { return spherical(n, 0.0, 0.0); }

    bool is_spherical() const noexcept { return m_trace.is_constant() && p_trace.is_constant(); }
    bool is_hyperbolic() const noexcept;

    double mbar(double theta = 0.0) const { return m_trace(theta) / (n - 1); }
    double pbar(double theta = 0.0) const { return p_trace(theta) / (n - 1); }

    /// ((n-2)/2) mbar + pbar, the pointwise mass-aspect density.
    double energy_density(double theta = 0.0) const;

    /// Throws DomainError for zonal data.
    void require_spherical(const char* op) const;
};

/// Radial model coefficients at one angle, with exact derivatives.
///
/// sph_dev = b = mbar r^{-n} so that g_sph = r^2 (1+b); k_dev = kappa = pbar r^{-n}.
struct ModelRadial {
    double r = 0;
    double s = 1;          ///< sqrt(1+r^2)
    double b = 0, db = 0, d2b = 0;
    double kappa = 0, dkappa = 0;
    double q_dev = 0;      ///< q - 1 = (kappa - b)/(1+b), q = k_sph/g_sph
    double dq = 0;
    double c1 = 0;         ///< s b'/(2(1+b))
};

ModelRadial model_radial(const ModelData& model, double r, double theta = 0.0);

}  // namespace janglab
