#include "janglab/barrier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/fit.hpp"
#include "janglab/geometry.hpp"
#include "janglab/quadrature.hpp"
#include "janglab/sphere.hpp"

namespace janglab {

namespace {

struct Slope {
    double s, k0, k, eps2, one_minus_k2;
};

// k = r/s + delta; 1 - k^2 = 1/s^2 + eps2 with eps2 = -2 k0 delta - delta^2.
Slope slope_state(double delta, double r) {
    Slope st;
    st.s = std::hypot(1.0, r);
    st.k0 = r / st.s;
    st.k = st.k0 + delta;
    st.eps2 = -2.0 * st.k0 * delta - delta * delta;
    st.one_minus_k2 = 1.0 / (st.s * st.s) + st.eps2;
    return st;
}


}  // namespace

double barrier_leading_dev(double delta, double r, int n) {
    const Slope st = slope_state(delta, r);
    return ((n - 1) * st.s * delta / r - st.one_minus_k2) / st.s;
}

double barrier_sigma_dev(double delta, double r, const BarrierConstants& c, int n) {
    const Slope st = slope_state(delta, r);
    const double s = st.s, s2 = s * s, k = st.k, k2 = k * k;
    const double omk2 = std::max(st.one_minus_k2, 0.0);
    const double sq = std::sqrt(omk2);
    const double rn2 = std::pow(r, -(n - 2));

    const double br1 = -1.0 / (r * s2) + delta / s + 3.0 * (n - 1) * s * delta +
                       st.eps2 * ((3.0 * n - 5) * s2 / r + s * k);
    const double t1 = sq / s * c.C1 * rn2 * std::abs(br1);
    const double br2 = -2.0 * (n - 1) * k * r * r / s2 + (s / r) * (n - 1) * k -
                       omk2 * (1 + 3 * k2) / 2 - (n - 1) * 1.5 * (1 + k2);
    const double t2 = c.C1 * c.C1 * rn2 * rn2 * s * omk2 * std::abs(br2);
    const double br3 = (n - 1) * s / r - 1.5 * k * (1 + 5.0 / 3.0 * k2) - 0.5 * k * (3 + k2);
    const double t3 = std::pow(c.C1 * rn2, 3) * s2 * omk2 * sq * std::abs(br3);
    const double br4 = (omk2 + (n - 1)) * 0.375 * (-1 + 2 * k2 + k2 * k2);
    const double t4 = std::pow(c.C1 * rn2, 4) * omk2 * omk2 * s2 * s * std::abs(br4);
    // sqrt(1-k^2) - 1/r = eps2/(sqrt(1-k^2) + 1/s) + (1/s - 1/r).
    const double sq_minus_inv_r =
        (sq + 1.0 / s > 0.0 ? st.eps2 / (sq + 1.0 / s) : 0.0) - 1.0 / (r * s * (r + s));
    const double t5 = c.C2 * std::abs(sq_minus_inv_r) * std::pow(r, -n);
    // 1 - k = 1/(s(s+r)) - delta.
    const double t6 = c.C3 * std::pow(r, -(n + 1)) * std::abs(1.0 / (s * (s + r)) - delta);
    const double t7 = c.C4 * std::pow(r, -(n + 2));
    return t1 + t2 + t3 + t4 + t5 + t6 + t7;
}

double barrier_rhs_dev(Sign sign, double delta, double r, const BarrierConstants& c, int n) {
    return barrier_leading_dev(delta, r, n) + sign_value(sign) * barrier_sigma_dev(delta, r, c, n);
}

double barrier_rhs(Sign sign, double k, double r, const BarrierConstants& c, int n) {
    if (!(r > 0.0)) throw DomainError("barrier_rhs needs r > 0");
    if (!(std::abs(k) <= 1.0)) throw DomainError(fmt::format("barrier_rhs needs |k| <= 1, got {}", k));
    return barrier_rhs_dev(sign, k - r / std::hypot(1.0, r), r, c, n);
}

NormalizedResidual normalized_jang_residual_dev(const ModelData& model, double alpha,
                                                double delta, double r) {
    model.require_spherical("normalized_jang_residual");
    const int n = model.n;
    const Slope st = slope_state(delta, r);
    if (!(st.one_minus_k2 > 0.0))
        throw DomainError(fmt::format("normalized residual needs |k| < 1 (k={}, r={})", st.k, r));
    const ModelRadial m = model_radial(model, r);
    const double s = st.s, k0 = st.k0, k = st.k;
    const double omk2 = st.one_minus_k2, sq = std::sqrt(omk2);

    const double a1 = -(n - 3) * alpha * std::pow(r, -(n - 2));  // d/dr of alpha r^{-(n-3)}
    const double da1 = (n - 3) * (n - 2) * alpha * std::pow(r, -(n - 1));
    const double d_sa1 = k0 * a1 + s * da1;
    const double Ta = omk2 * sq * d_sa1;

    const double X = k / sq;  // s phi'
    const double X_minus_r = inverse_slope_difference(k, k0, delta, sq, 1.0 / s);
    const double Y = X + s * a1;  // s f'
    const double Y_minus_r = X_minus_r + s * a1;
    const double dkf = slope_difference(Y, r, Y_minus_r);  // k_f - k0
    const double kf = k0 + dkf;
    const double one_minus_kf2 = 1.0 / (1.0 + Y * Y);
    const double gamma = (2 * X * s * a1 + (s * a1) * (s * a1)) * omk2;
    if (!(1.0 + gamma > 0.0)) throw DegenerateMetricError("Pi factor is not positive");
    const double pim = std::expm1(1.5 * std::log1p(gamma));  // Pi^{-3/2} - 1

    const double E_kf = (n - 1) * s * dkf / r - one_minus_kf2;
    const double dk = dkf - delta;
    const double dE = (n - 1) * (s / r) * dk + dk * (kf + k);
    const double D = Ta + ((1 + pim) * ((n - 1) * m.c1 * kf - (n - 1) * m.q_dev) + pim * E_kf + dE) / s;

    NormalizedResidual out;
    const double G0 = barrier_leading_dev(delta, r, n);
    out.remainder = D;
    out.value = G0 + D;
    out.Pi = 1.0 / (1.0 + gamma);

    // Direct route through the graph geometry with k' = 0.
    GraphJet jet;
    jet.d1 = X_minus_r / s + a1;
    jet.d2 = -(X * r + 1.0) / (s * s * s) + da1;
    const GraphGeometry g = graph_geometry_dev(model, r, jet);
    out.value_geometric = g.J * (1 + pim) / s;
    return out;
}

NormalizedResidual normalized_jang_residual(const ModelData& model, double alpha, double k,
                                            double r) {
    if (!(r > 0.0)) throw DomainError("normalized_jang_residual needs r > 0");
    return normalized_jang_residual_dev(model, alpha, k - r / std::hypot(1.0, r), r);
}

namespace {

std::vector<double> geomspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? lo : std::exp(a + (b - a) * i / (count - 1));
    return out;
}

// Sample slopes for the remainder sup: a tanh-spaced sweep of (-1, 1) plus points
// clustered geometrically around the hyperbolic slope r/s.
std::vector<double> delta_samples(double r) {
    const double k0 = r / std::hypot(1.0, r);
    std::vector<double> out;
    for (int i = 0; i <= 240; ++i) out.push_back(std::tanh(-6.0 + 12.0 * i / 240) - k0);
    for (int i = 0; i <= 60; ++i) {
        const double d = std::pow(10.0, -30.0 + 30.0 * i / 60);
        for (double sg : {1.0, -1.0})
            if (std::abs(k0 + sg * d) < 1.0) out.push_back(sg * d);
    }
    return out;
}

double select_r0(const BarrierConstants& c, int n, const ConstantOptions& opts) {
    double last_bad = -1.0;
    for (double r : geomspace(opts.r_scan_lo, opts.r_scan_hi, opts.r_scan_points)) {
        const double s = std::hypot(1.0, r), k0 = r / s;
        const double sig_lo = barrier_sigma_dev(-1.0 - k0, r, c, n);
        const double sig_hi = barrier_sigma_dev(1.0 - k0, r, c, n);
        const bool ok = (n - 1) * (1 + k0) / r >= opts.margin * sig_lo &&
                        (n - 1) * (1 - k0) / r >= opts.margin * sig_hi;
        if (!ok) last_bad = r;
    }
    return last_bad < 0 ? opts.r_scan_lo : last_bad * 1.0001;
}

}  // namespace

double remainder_excess(const ModelData& model, double alpha, const BarrierConstants& c,
                        double r_max, int radii) {
    const int n = model.n;
    BarrierConstants no_c4 = c;
    no_c4.C4 = 0.0;
    double best = 0.0;
    for (double r : geomspace(c.r0, r_max, radii)) {
        for (double d : delta_samples(r)) {
            const Slope st = slope_state(d, r);
            if (!(st.one_minus_k2 > 0.0)) continue;
            const double D = normalized_jang_residual_dev(model, alpha, d, r).remainder;
            if (!std::isfinite(D)) continue;
            const double sc = barrier_sigma_dev(d, r, no_c4, n);
            best = std::max(best, std::pow(r, n + 2) * (std::abs(D) - sc));
        }
    }
    return best;
}

BarrierConstants default_constants(const ModelData& model, const ConstantOptions& opts) {
    model.require_spherical("default_constants");
    const int n = model.n;
    const double alpha = alpha_mean(model);
    const double M = trace_source(model).constant();
    BarrierConstants c;
    c.C1 = 2.0 * std::max(1, n - 3) * std::abs(alpha);
    c.C2 = 2.0 * std::abs(M);
    c.C3 = n * std::abs(model.m_trace.constant());
    c.r0 = opts.r0_min;
    for (int it = 0; it < opts.max_iterations; ++it) {
        c.C4 = 2.0 * remainder_excess(model, alpha, c, opts.r_scan_hi, opts.c4_radii);
        const double next = std::max(opts.r0_min, select_r0(c, n, opts));
        if (next <= c.r0) break;
        c.r0 = next;
    }
    return c;
}

// ---------------------------------------------------------------------------

PanelInterpolant::PanelInterpolant(double r0, std::vector<double> edges_u, int nodes_per_panel)
    : r0_(r0), order_(nodes_per_panel), edges_(std::move(edges_u)) {
    if (edges_.size() < 2 || order_ < 2) throw DomainError("panel layout needs >= 1 panel, >= 2 nodes");
    const QuadratureRule gl = gauss_legendre(order_);
    ref_nodes_ = gl.nodes;
    ref_weights_ = gl.weights;
    for (std::size_t p = 0; p + 1 < edges_.size(); ++p) {
        sample_u_.push_back(edges_[p]);
        for (int k = 0; k < order_; ++k) sample_u_.push_back(node_u(p, k));
    }
    sample_u_.push_back(edges_.back());
    sample_r_.resize(sample_u_.size());
    for (std::size_t i = 0; i < sample_u_.size(); ++i) sample_r_[i] = r0_ + sample_u_[i] * sample_u_[i];
}

std::size_t PanelInterpolant::node_index(std::size_t p, int k) const {
    return p * (order_ + 1) + 1 + static_cast<std::size_t>(k);
}

std::size_t PanelInterpolant::edge_index(std::size_t p) const { return p * (order_ + 1); }

double PanelInterpolant::node_u(std::size_t p, int k) const {
    const double a = edges_[p], b = edges_[p + 1];
    return 0.5 * (a + b) + 0.5 * (b - a) * ref_nodes_[k];
}

double PanelInterpolant::evaluate(std::span<const double> samples, double r) const {
    if (samples.size() != sample_r_.size()) throw DomainError("panel samples have wrong length");
    if (r < r0_ || r > sample_r_.back() * (1 + 1e-14))
        throw DomainError(fmt::format("panel interpolation point {} outside [{}, {}]", r, r0_,
                                      sample_r_.back()));
    const double u = std::sqrt(std::max(r - r0_, 0.0));
    auto it = std::upper_bound(edges_.begin(), edges_.end(), u);
    std::size_t p = it == edges_.begin() ? 0 : static_cast<std::size_t>(it - edges_.begin()) - 1;
    p = std::min(p, edges_.size() - 2);
    // Barycentric Lagrange through both edges and the interior nodes of panel p.
    const std::size_t first = edge_index(p);
    const std::size_t m = static_cast<std::size_t>(order_) + 2;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double uj = sample_u_[first + j];
        if (u == uj) return samples[first + j];
    }
    for (std::size_t j = 0; j < m; ++j) {
        const double uj = sample_u_[first + j];
        double w = 1.0;
        for (std::size_t l = 0; l < m; ++l)
            if (l != j) w /= (uj - sample_u_[first + l]);
        const double t = w / (u - uj);
        num += t * samples[first + j];
        den += t;
    }
    return num / den;
}

double KProfile::k_at(double r) const {
    return r / std::hypot(1.0, r) + delta_at(r);
}

double KProfile::delta_at(double r) const {
    return panels.evaluate(delta.values(), r);
}

namespace {

std::vector<double> panel_edges_u(double r0, double r_max, int per_decade) {
    const double span = r_max - r0;
    const double t_min = 1e-3 * r0;
    std::vector<double> edges{0.0};
    if (span <= t_min) {
        edges.push_back(std::sqrt(span));
        return edges;
    }
    const int count = std::max(2, static_cast<int>(std::ceil(per_decade * std::log10(span / t_min))) + 1);
    for (double t : geomspace(t_min, span, count)) edges.push_back(std::sqrt(t));
    return edges;
}

}  // namespace

KProfile integrate_k(Sign sign, const BarrierConstants& c, int n, double r_max,
                     std::optional<double> k_start, const IntegrationOptions& opts) {
    namespace odeint = boost::numeric::odeint;
    const double r0 = c.r0;
    if (!(r0 > 0.0) || !(r_max > r0))
        throw DomainError(fmt::format("integrate_k needs 0 < r0 < r_max (r0={}, r_max={})", r0, r_max));
    const double sg = sign_value(sign);
    const double s0 = std::hypot(1.0, r0), k00 = r0 / s0;
    const double k_init = k_start ? *k_start : -sg;
    if (!(std::abs(k_init) <= 1.0)) throw DomainError("initial slope must satisfy |k| <= 1");

    KProfile prof;
    prof.sign = sign;
    prof.constants = c;
    prof.n = n;
    prof.panels = PanelInterpolant(r0, panel_edges_u(r0, r_max, opts.panels_per_decade),
                                   opts.nodes_per_panel);
    const std::vector<double>& us = prof.panels.sample_u();
    std::vector<double> delta(us.size(), 0.0);
    delta[0] = k_init - k00;

    using State = std::array<double, 1>;
    auto system = [&](const State& x, State& dxdu, double u) {
        const double r = r0 + u * u;
        const double s = std::hypot(1.0, r), k0 = r / s, d = x[0];
        const double ddelta = -((n - 1) * d / r + (2 * k0 * d + d * d) / s) -
                              sg * barrier_sigma_dev(d, r, c, n);
        dxdu[0] = 2.0 * u * ddelta;
    };
    std::size_t cursor = 0;
    auto observer = [&](const State& x, double u) {
        while (cursor < us.size() && us[cursor] < u) ++cursor;
        if (cursor < us.size()) delta[cursor] = x[0];
        if (u > 0.0) {
            const Slope st = slope_state(x[0], r0 + u * u);
            if (!(st.one_minus_k2 > 0.0) || !std::isfinite(x[0]))
                throw BarrierFailure(
                    fmt::format("barrier slope reached |k| = 1 at r = {} (r0 = {} too small)",
                                r0 + u * u, r0),
                    r0 + u * u);
        }
    };

    const double u_switch = std::sqrt(std::min(2.0 * r0, r_max) - r0);
    const auto split = std::upper_bound(us.begin(), us.end(), u_switch);
    std::vector<double> phase1(us.begin(), split);
    std::vector<double> phase2;
    if (split != us.end()) {
        phase2.push_back(phase1.back());
        phase2.insert(phase2.end(), split, us.end());
    }
    State x{delta[0]};
    const double dt0 = 1e-6 * us.back();
    auto stepper1 = odeint::make_dense_output(opts.abs_tol_anchor, opts.rel_tol,
                                              odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper1, system, x, phase1.begin(), phase1.end(), dt0, observer);
    if (phase2.size() > 1) {
        cursor = static_cast<std::size_t>(split - us.begin()) - 1;
        x[0] = delta[cursor];
        auto stepper2 = odeint::make_dense_output(1e-300, opts.rel_tol,
                                                  odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper2, system, x, phase2.begin(), phase2.end(), dt0, observer);
    }

    auto grid = std::make_shared<RadialGrid>(
        RadialGrid::from_nodes(prof.panels.sample_r(), InnerMode::Anchored));
    std::vector<double> kv(us.size());
    for (std::size_t i = 0; i < us.size(); ++i) {
        const double r = prof.panels.sample_r()[i];
        kv[i] = r / std::hypot(1.0, r) + delta[i];
    }
    kv[0] = k_init;
    prof.k = RadialField(grid, std::move(kv));
    prof.delta = RadialField(grid, std::move(delta));
    return prof;
}

double FProfile::f_dev_at(double r) const {
    return panels.evaluate(f_dev.values(), r);
}

double FProfile::f_at(double r) const { return std::hypot(1.0, r) + f_dev_at(r); }

FProfile reconstruct_f(const KProfile& kp, double alpha) {
    const PanelInterpolant& pan = kp.panels;
    const int n = kp.n;
    const int order = pan.nodes_per_panel();
    const auto& ref = pan.reference_nodes();
    const auto& refw = pan.reference_weights();
    const double r0 = pan.r0();

    // d psi/du at the interior nodes, psi = phi - s: 2u (X - r)/s with X = k/sqrt(1-k^2).
    auto dpsi_du = [&](std::size_t idx) {
        const double u = pan.sample_u()[idx];
        const double r = r0 + u * u;
        const Slope st = slope_state(kp.delta[idx], r);
        if (!(st.one_minus_k2 > 0.0))
            throw NumericalError("non-integrable slope inside the barrier profile",
                                 fmt::format("r={}", r));
        const double sq = std::sqrt(st.one_minus_k2);
        return 2.0 * u * inverse_slope_difference(st.k, st.k0, kp.delta[idx], sq, 1.0 / st.s) / st.s;
    };

    // tail[k][j] = int_{x_k}^{1} l_j(x) dx for the Lagrange basis on the reference nodes.
    std::vector<std::vector<double>> tail(order, std::vector<double>(order, 0.0));
    for (int k = 0; k < order; ++k) {
        const double a = ref[k];
        for (int q = 0; q < order; ++q) {
            const double x = 0.5 * (a + 1.0) + 0.5 * (1.0 - a) * ref[q];
            for (int j = 0; j < order; ++j) {
                double l = 1.0;
                for (int m = 0; m < order; ++m)
                    if (m != j) l *= (x - ref[m]) / (ref[j] - ref[m]);
                tail[k][j] += 0.5 * (1.0 - a) * refw[q] * l;
            }
        }
    }

    const std::size_t total = pan.sample_u().size();
    std::vector<double> psi(total, 0.0);
    std::vector<double> local(order);
    for (std::size_t p = pan.panels(); p-- > 0;) {
        const double half = 0.5 * (pan.edge_u(p + 1) - pan.edge_u(p));
        const double right = psi[pan.edge_index(p + 1)];
        double integral = 0.0;
        for (int k = 0; k < order; ++k) {
            local[k] = dpsi_du(pan.node_index(p, k));
            integral += refw[k] * local[k];
        }
        psi[pan.edge_index(p)] = right - half * integral;
        for (int k = 0; k < order; ++k) {
            double part = 0.0;
            for (int j = 0; j < order; ++j) part += tail[k][j] * local[j];
            psi[pan.node_index(p, k)] = right - half * part;
        }
    }

    FProfile out;
    out.sign = kp.sign;
    out.alpha = alpha;
    out.n = n;
    out.panels = pan;
    std::vector<double> phi(total), f(total), fdev(total);
    for (std::size_t i = 0; i < total; ++i) {
        const double r = pan.sample_r()[i];
        const double s = std::hypot(1.0, r);
        const double tail_alpha = alpha * std::pow(r, -(n - 3));
        phi[i] = s + psi[i];
        fdev[i] = psi[i] + tail_alpha;
        f[i] = s + fdev[i];
    }
    const double r1 = pan.sample_r()[1];
    out.anchor_slope = (fdev[1] - fdev[0] + std::hypot(1.0, r1) - std::hypot(1.0, r0)) / (r1 - r0);
    auto grid = kp.k.grid_ptr();
    out.phi = RadialField(grid, std::move(phi));
    out.f = RadialField(grid, std::move(f));
    out.f_dev = RadialField(grid, std::move(fdev));
    return out;
}

BarrierPair compute_barriers(const ModelData& model, const BarrierOptions& opts) {
    model.require_spherical("compute_barriers");
    const int n = model.n;
    BarrierPair pair;
    pair.alpha = alpha_mean(model);
    pair.r_max = opts.r_max;
    const bool automatic = !opts.constants.has_value();
    BarrierConstants c = automatic ? default_constants(model, opts.constant_options) : *opts.constants;
    for (int attempt = 0;; ++attempt) {
        try {
            pair.k_plus = integrate_k(Sign::Plus, c, n, opts.r_max, {}, opts.integration);
            pair.k_minus = integrate_k(Sign::Minus, c, n, opts.r_max, {}, opts.integration);
            break;
        } catch (const BarrierFailure&) {
            if (!automatic || attempt >= opts.r0_retries) throw;
            c.r0 *= 1.1;
            pair.r0_retries = attempt + 1;
        }
    }
    pair.constants = c;
    pair.f_plus = reconstruct_f(pair.k_plus, pair.alpha);
    pair.f_minus = reconstruct_f(pair.k_minus, pair.alpha);

    auto pi_field = [&](const KProfile& kp) {
        std::vector<double> pi(kp.delta.size(), 1.0);
        for (std::size_t i = 0; i < pi.size(); ++i) {
            const double r = kp.k.grid()[i];
            if (slope_state(kp.delta[i], r).one_minus_k2 > 0.0)
                pi[i] = normalized_jang_residual_dev(model, pair.alpha, kp.delta[i], r).Pi;
        }
        return RadialField(kp.k.grid_ptr(), std::move(pi));
    };
    pair.Pi_plus = pi_field(pair.k_plus);
    pair.Pi_minus = pi_field(pair.k_minus);
    return pair;
}

BarrierChecks check_barriers(const ModelData& model, const BarrierPair& pair, int probes,
                             double tail_lo) {
    const int n = model.n;
    const double r0 = pair.constants.r0;
    BarrierChecks out;
    out.k_plus_anchor = pair.k_plus.k[0];
    out.k_minus_anchor = pair.k_minus.k[0];
    out.anchors_ok = out.k_plus_anchor == -1.0 && out.k_minus_anchor == 1.0;

    out.min_one_minus_k2 = std::numeric_limits<double>::infinity();
    for (const KProfile* kp : {&pair.k_plus, &pair.k_minus})
        for (std::size_t i = 1; i < kp->delta.size(); ++i)
            out.min_one_minus_k2 = std::min(out.min_one_minus_k2,
                                            slope_state(kp->delta[i], kp->k.grid()[i]).one_minus_k2);
    out.interior_ok = out.min_one_minus_k2 > 0.0;

    const Window tail{tail_lo * pair.r_max, pair.r_max};
    auto exponent = [&](const KProfile& kp) {
        try {
            return fit_decay_exponent(kp.k.grid().nodes(), kp.delta.values(), tail);
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    out.tail_exponent_plus = exponent(pair.k_plus);
    out.tail_exponent_minus = exponent(pair.k_minus);
    out.tail_ok = out.tail_exponent_plus <= -(n + 0.5) && out.tail_exponent_minus <= -(n + 0.5);

    out.min_gap = std::numeric_limits<double>::infinity();
    double scale = 1.0;
    for (std::size_t i = 0; i < pair.f_plus.f_dev.size(); ++i) {
        out.min_gap = std::min(out.min_gap, pair.f_plus.f_dev[i] - pair.f_minus.f_dev[i]);
        scale = std::max(scale, std::abs(pair.f_plus.f[i]));
    }
    out.ordered = out.min_gap >= -1e-12 * scale;

    for (double r : geomspace(r0 * (1 + 1e-3), pair.r_max, probes)) {
        for (const KProfile* kp : {&pair.k_plus, &pair.k_minus}) {
            const double d = kp->delta_at(r);
            const double D = normalized_jang_residual_dev(model, pair.alpha, d, r).remainder;
            const double sig = barrier_sigma_dev(d, r, pair.constants, n);
            ++out.sandwich_probes;
            if (std::abs(D) > sig) ++out.sandwich_violations;
            if (sig > 0.0) out.worst_sandwich_ratio = std::max(out.worst_sandwich_ratio, std::abs(D) / sig);
            else if (D != 0.0) out.worst_sandwich_ratio = std::numeric_limits<double>::infinity();
        }
    }
    return out;
}

}  // namespace janglab
