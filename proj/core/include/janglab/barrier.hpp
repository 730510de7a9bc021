#pragma once

#include <optional>
#include <span>
#include <vector>

#include "janglab/model.hpp"
#include "janglab/radial.hpp"

namespace janglab {

struct BarrierConstants {
    double C1 = 0, C2 = 0, C3 = 0, C4 = 0;
    double r0 = 1.0;
    double epsilon = 0.05;
};

/// Leading part of the normalized Jang operator for the ansatz with slope variable k:
///   G0 = ((n-1)/r)(k - r/s) - (1-k^2)/s.
/// The *_dev variants take delta = k - r/s, which keeps precision when k ~ r/s.
double barrier_leading_dev(double delta, double r, int n);

/// Sum of the C1..C4 correction terms (nonnegative).
double barrier_sigma_dev(double delta, double r, const BarrierConstants& c, int n);

/// Forcing F of J_+ (Plus) or J_- (Minus), i.e. J_pm(k) = k' + F.
double barrier_rhs_dev(Sign sign, double delta, double r, const BarrierConstants& c, int n);

/// Same with k itself. Throws DomainError for |k| > 1 or r <= 0.
double barrier_rhs(Sign sign, double k, double r, const BarrierConstants& c, int n);

struct NormalizedResidual {
    double value = 0;            ///< J(f)/(s Pi^{3/2}) with the k' contribution removed
    double value_geometric = 0;  ///< the same from graph_geometry_dev (less precise far out)
    double Pi = 1;
    double remainder = 0;        ///< value - G0
};

/// Evaluates Jang's operator on f = alpha r^{-(n-3)} + phi with phi' = k/sqrt((1-k^2)(1+r^2)).
/// Spherically symmetric models only (|d alpha| = 0).
NormalizedResidual normalized_jang_residual_dev(const ModelData& model, double alpha,
                                                double delta, double r);
NormalizedResidual normalized_jang_residual(const ModelData& model, double alpha, double k,
                                            double r);

struct ConstantOptions {
    double r0_min = 1.0;
    double r_scan_lo = 0.5;
    double r_scan_hi = 1e3;
    int r_scan_points = 4000;
    double margin = 1.1;  ///< leading term must beat the corrections by this factor at k = -+1
    int c4_radii = 120;
    int max_iterations = 30;
};

/// Default C1..C4 and r0 for a spherically symmetric model.
///
/// C1 = 2 max(1, n-3) |alpha|, C2 = 2 |M|, C3 = n |tr m|, and C4 twice the largest
/// r^{n+2} excess of |value - G0| over the C1..C3 terms on an (r, k) sample grid.
/// r0 is the smallest scanned radius past which J_+(-1) < 0 < J_-(+1) hold with the margin;
/// C4 and r0 are iterated to a fixed point.
BarrierConstants default_constants(const ModelData& model, const ConstantOptions& opts = {});

/// Largest r^{n+2}(|value - G0| - sum of C1..C3 terms) over the sample grid.
double remainder_excess(const ModelData& model, double alpha, const BarrierConstants& c,
                        double r_max = 1e3, int radii = 120);

/// Piecewise polynomial representation in u = sqrt(r - r0) used by the barrier profiles.
class PanelInterpolant {
public:
    PanelInterpolant() = default;
    PanelInterpolant(double r0, std::vector<double> edges_u, int nodes_per_panel);

    double r0() const noexcept { return r0_; }
    std::size_t panels() const noexcept { return edges_.size() - 1; }
    int nodes_per_panel() const noexcept { return order_; }
    /// All sample abscissae in r, sorted: anchor, panel nodes, panel edges.
    const std::vector<double>& sample_r() const noexcept { return sample_r_; }
    const std::vector<double>& sample_u() const noexcept { return sample_u_; }
    /// Position of the k-th interior node of panel p inside sample_r().
    std::size_t node_index(std::size_t p, int k) const;
    std::size_t edge_index(std::size_t p) const;
    double edge_u(std::size_t p) const { return edges_[p]; }
    double node_u(std::size_t p, int k) const;
    const std::vector<double>& reference_nodes() const noexcept { return ref_nodes_; }
    const std::vector<double>& reference_weights() const noexcept { return ref_weights_; }

    /// Interpolate samples (aligned with sample_r()) at radius r in [r0, r_max].
    double evaluate(std::span<const double> samples, double r) const;

private:
    double r0_ = 0;
    int order_ = 0;
    std::vector<double> edges_;
    std::vector<double> ref_nodes_, ref_weights_;
    std::vector<double> sample_r_, sample_u_;
};

/// Barrier slope profile k on [r0, r_max].
struct KProfile {
    Sign sign = Sign::Plus;
    BarrierConstants constants;
    int n = 4;
    PanelInterpolant panels;
    RadialField k;      ///< k itself
    RadialField delta;  ///< k - r/s
    double k_at(double r) const;
    double delta_at(double r) const;
};

struct IntegrationOptions {
    double rel_tol = 1e-11;
    double abs_tol_anchor = 1e-12;  ///< used for r < 2 r0
    int panels_per_decade = 24;
    int nodes_per_panel = 16;
};

/// Integrates J_pm(k) = 0 from k(r0) = -+1 (or k_start) outward to r_max with an
/// embedded 5(4) Runge-Kutta scheme in u = sqrt(r - r0).
/// Throws BarrierFailure if |k| reaches 1 past the anchor.
KProfile integrate_k(Sign sign, const BarrierConstants& c, int n, double r_max,
                     std::optional<double> k_start = {}, const IntegrationOptions& opts = {});

/// Height profile phi (normalised by phi(r_max) = sqrt(1+r_max^2)) and f = phi + alpha r^{-(n-3)}.
struct FProfile {
    Sign sign = Sign::Plus;
    double alpha = 0;
    int n = 4;
    PanelInterpolant panels;
    RadialField phi, f;
    RadialField f_dev;     ///< f - sqrt(1+r^2)
    double anchor_slope = 0;  ///< one-sided (f(r_1) - f(r0))/(r_1 - r0)
    double f_dev_at(double r) const;
    double f_at(double r) const;
};

FProfile reconstruct_f(const KProfile& k, double alpha);

struct BarrierPair {
    BarrierConstants constants;
    double alpha = 0;
    KProfile k_plus, k_minus;
    FProfile f_plus, f_minus;
    RadialField Pi_plus, Pi_minus;
    double r_max = 0;
    int r0_retries = 0;
};

struct BarrierOptions {
    double r_max = 1e3;
    std::optional<BarrierConstants> constants;  ///< defaults from default_constants
    ConstantOptions constant_options;
    IntegrationOptions integration;
    int r0_retries = 8;  ///< with automatic constants, r0 grows 10% after a barrier failure
};

BarrierPair compute_barriers(const ModelData& model, const BarrierOptions& opts = {});

struct BarrierChecks {
    double k_plus_anchor = 0, k_minus_anchor = 0;
    bool anchors_ok = false;           ///< k_+(r0) = -1 and k_-(r0) = +1
    double min_one_minus_k2 = 0;       ///< over all samples past the anchor, both profiles
    bool interior_ok = false;          ///< |k| < 1 past the anchor
    double tail_exponent_plus = 0, tail_exponent_minus = 0;  ///< NaN if the fit failed
    bool tail_ok = false;              ///< both <= -(n + 0.5)
    double min_gap = 0;                ///< min f_+ - f_-
    bool ordered = false;
    int sandwich_probes = 0;
    int sandwich_violations = 0;       ///< probes with |remainder| > sum of C terms
    double worst_sandwich_ratio = 0;   ///< max |remainder| / sum of C terms
};

/// Checks anchors, |k| < 1, tail decay of k - r/s on [tail_lo r_max, r_max], ordering of
/// the heights, and J_- <= J(f)/(s Pi^{3/2}) <= J_+ at geometric probe radii for both profiles.
BarrierChecks check_barriers(const ModelData& model, const BarrierPair& pair, int probes = 50,
                             double tail_lo = 0.1);

}  // namespace janglab
