#include "janglab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "janglab/errors.hpp"

namespace janglab {

Dimension::Dimension(int n) : n_(n) {
    if (n < kMin || n > kMax)
        throw ValidationError(
            fmt::format("dimension n={} is not supported (supported range {}-{})", n, kMin, kMax));
}

ZonalFunction::ZonalFunction(double value) : constant_(value) {}

ZonalFunction::ZonalFunction(std::vector<double> theta, std::vector<double> values)
    : theta_(std::move(theta)), values_(std::move(values)) {
    if (theta_.size() != values_.size() || theta_.size() < 2)
        throw ValidationError("zonal table needs at least two matching (theta, value) samples");
    for (std::size_t i = 0; i < theta_.size(); ++i) {
        if (!std::isfinite(theta_[i]) || !std::isfinite(values_[i]))
            throw ValidationError("zonal table contains non-finite entries");
        if (i > 0 && !(theta_[i] > theta_[i - 1]))
            throw ValidationError("zonal table angles must be strictly increasing");
    }
    constexpr double pi = std::numbers::pi;
    if (theta_.front() < 0.0 || theta_.back() > pi)
        throw ValidationError("zonal table angles must lie in [0, pi]");

    const std::size_t m = theta_.size();
    slopes_.assign(m, 0.0);
    for (std::size_t i = 1; i + 1 < m; ++i)
        slopes_[i] = (values_[i + 1] - values_[i - 1]) / (theta_[i + 1] - theta_[i - 1]);
    // Even reflection at the poles forces zero slope there.
    if (theta_.front() > 0.0) slopes_[0] = (values_[1] - values_[0]) / (theta_[1] - theta_[0]);
    if (theta_.back() < pi)
        slopes_[m - 1] = (values_[m - 1] - values_[m - 2]) / (theta_[m - 1] - theta_[m - 2]);
}

ZonalFunction ZonalFunction::sample(const std::function<double(double)>& fn, int samples) {
    if (samples < 2) throw ValidationError("zonal sampling needs at least two points");
    std::vector<double> th(samples), v(samples);
    for (int i = 0; i < samples; ++i) {
        th[i] = std::numbers::pi * i / (samples - 1);
        v[i] = fn(th[i]);
    }
    return ZonalFunction(std::move(th), std::move(v));
}

double ZonalFunction::operator()(double theta) const {
    if (is_constant()) return constant_;
    const auto it = std::upper_bound(theta_.begin(), theta_.end(), theta);
    if (it == theta_.begin()) return values_.front();
    if (it == theta_.end()) return values_.back();
    const std::size_t i = static_cast<std::size_t>(it - theta_.begin()) - 1;
    const double h = theta_[i + 1] - theta_[i];
    const double t = (theta - theta_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] +
           (-2 * t3 + 3 * t2) * values_[i + 1] + (t3 - t2) * h * slopes_[i + 1];
}

double ZonalFunction::max_abs() const {
    if (is_constant()) return std::abs(constant_);
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ModelData ModelData::spherical(int n, double mbar, double pbar) {
    ModelData d;
    d.n = Dimension(n);
    d.m_trace = ZonalFunction((n - 1) * mbar);
    d.p_trace = ZonalFunction((n - 1) * pbar);
    return d;
}

bool ModelData::is_hyperbolic() const noexcept {
    return is_spherical() && m_trace.constant() == 0.0 && p_trace.constant() == 0.0;
}

double ModelData::energy_density(double theta) const {
    return 0.5 * (n - 2) * mbar(theta) + pbar(theta);
}

void ModelData::require_spherical(const char* op) const {
    if (!is_spherical())
        throw DomainError(fmt::format("{} requires spherically symmetric model data", op));
}

ModelRadial model_radial(const ModelData& model, double r, double theta) {
    if (!(r > 0.0)) throw DomainError(fmt::format("radius must be positive, got {}", r));
    const int n = model.n;
    const double mb = model.mbar(theta);
    const double pb = model.pbar(theta);
    ModelRadial out;
    out.r = r;
    out.s = std::hypot(1.0, r);
    const double rn = std::pow(r, -n);
    out.b = mb * rn;
    out.db = -n * mb * rn / r;
    out.d2b = n * (n + 1) * mb * rn / (r * r);
    out.kappa = pb * rn;
    out.dkappa = -n * pb * rn / r;
    const double one_b = 1.0 + out.b;
    if (!(one_b > 0.0))
        throw DegenerateMetricError(
            fmt::format("sphere factor of g is not positive at r={} (mbar={})", r, mb));
    out.q_dev = (out.kappa - out.b) / one_b;
    out.dq = ((out.dkappa - out.db) * one_b - (out.kappa - out.b) * out.db) / (one_b * one_b);
    out.c1 = out.s * out.db / (2.0 * one_b);
    return out;
}

}  // namespace janglab
