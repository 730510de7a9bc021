#include "janglab/jang.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/geometry.hpp"
#include "janglab/sphere.hpp"

namespace janglab {

double trapping_margin(const ModelData& model, double R, double tau, double phi) {
    if (!(R > 0.0)) throw DomainError("trapping_margin needs R > 0");
    const int n = model.n;
    const ModelRadial m = model_radial(model, R);
    const double mean_curvature = (n - 1) * (m.s / R + m.c1);
    const double trace_k = (n - 1) * (1.0 + m.q_dev);
    return mean_curvature - std::abs(trace_k) - tau * std::abs(phi);
}

void SolverConfig::validate() const {
    if (!(tau_start > tau_min && tau_min > 0.0))
        throw ValidationError("tau schedule needs tau_start > tau_min > 0");
    if (!(tau_factor > 0.0 && tau_factor < 1.0)) throw ValidationError("tau_factor must lie in (0, 1)");
    if (!(newton_tol > 0.0) || newton_max_iter < 1) throw ValidationError("Newton settings must be positive");
    if (!(damping_min > 0.0 && damping_min <= 1.0)) throw ValidationError("damping_min must lie in (0, 1]");
    if (stagnation_window < 1) throw ValidationError("stagnation_window must be >= 1");
    if (!(floor_step_tol >= 0.0)) throw ValidationError("floor_step_tol must be >= 0");
    if (R_list.empty()) throw ValidationError("R_list is empty");
    for (double R : R_list)
        if (!(R > 0.0)) throw ValidationError("R_list entries must be positive");
    if (intervals < RadialGrid::kMinIntervals)
        throw ValidationError(fmt::format("mesh needs at least {} intervals", RadialGrid::kMinIntervals));
    if (stretch && !(*stretch >= 1.0)) throw ValidationError("stretch must be >= 1");
    if (!(probe.hi > probe.lo)) throw ValidationError("probe window is empty");
    if (!(bracket_tol >= 0.0)) throw ValidationError("bracket_tol must be >= 0");
}

namespace {

struct DiscreteJet {
    GraphJet jet;
    double dv1_minus = 0, dv1_plus = 0;                // d v1 / d v_{i-+1}
    double dv2_minus = 0, dv2_centre = 0, dv2_plus = 0;
};

DiscreteJet discrete_jet(const RadialGrid& g, std::span<const double> v, std::size_t i) {
    const double h = g.xi_step();
    const double rx = g.r_xi(i), rxx = g.r_xixi(i);
    const double vx = (v[i + 1] - v[i - 1]) / (2 * h);
    const double vxx = (v[i + 1] - 2 * v[i] + v[i - 1]) / (h * h);
    DiscreteJet d;
    d.jet.v = v[i];
    d.jet.d1 = vx / rx;
    d.jet.d2 = (vxx - rxx * d.jet.d1) / (rx * rx);
    d.dv1_plus = 1.0 / (2 * h * rx);
    d.dv1_minus = -d.dv1_plus;
    const double second = 1.0 / (h * h * rx * rx);
    d.dv2_plus = second - rxx / (rx * rx) * d.dv1_plus;
    d.dv2_minus = second - rxx / (rx * rx) * d.dv1_minus;
    d.dv2_centre = -2.0 * second;
    return d;
}

void require_mapped(const RadialGrid& g) {
    if (!g.mapped()) throw DomainError("the Jang discretisation needs a stretched grid");
}

std::vector<double> deviation(const RadialField& f) {
    const RadialGrid& g = f.grid();
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f[i] - std::hypot(1.0, g[i]);
    return v;
}

std::vector<double> residual_dev(const ModelData& model, const RadialGrid& g,
                                 std::span<const double> v, double tau, const BoundaryData& bc) {
    const std::size_t m = g.size();
    std::vector<double> F(m);
    if (g.inner_mode() == InnerMode::Origin) {
        F[0] = -3 * v[0] + 4 * v[1] - v[2];
    } else {
        if (!bc.inner) throw DomainError("anchored grids need inner Dirichlet data");
        F[0] = v[0] - (*bc.inner - std::hypot(1.0, g[0]));
    }
    F[m - 1] = v[m - 1] - (bc.outer - std::hypot(1.0, g[m - 1]));
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const GraphGeometry geo = graph_geometry_dev(model, g[i], discrete_jet(g, v, i).jet);
        F[i] = geo.J - tau * (std::hypot(1.0, g[i]) + v[i]);
        if (!std::isfinite(F[i]))
            throw NumericalError(fmt::format("non-finite Jang residual at node {} (r = {})", i, g[i]));
    }
    return F;
}

Eigen::SparseMatrix<double> jacobian_dev(const ModelData& model, const RadialGrid& g,
                                         std::span<const double> v, double tau) {
    const int n = model.n;
    const std::size_t m = g.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * m + 2);
    if (g.inner_mode() == InnerMode::Origin) {
        trip.emplace_back(0, 0, -3.0);
        trip.emplace_back(0, 1, 4.0);
        trip.emplace_back(0, 2, -1.0);
    } else {
        trip.emplace_back(0, 0, 1.0);
    }
    trip.emplace_back(m - 1, m - 1, 1.0);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double r = g[i];
        const DiscreteJet d = discrete_jet(g, v, i);
        const ModelRadial mr = model_radial(model, r);
        const double s = mr.s, s2 = s * s;
        const double P = r + s * d.jet.d1;
        const double dP = 1.0 + s * (d.jet.d2 + r * d.jet.d1 / s2);
        const double w = std::hypot(1.0, P);
        const double w3 = w * w * w, w4 = w3 * w, w5 = w4 * w;
        const double J2 = s2 / w3;
        const double J1 = r / w3 - 3 * s2 * P * dP / w5 + (n - 1) * (s / r + mr.c1) * s / w3 +
                          2 * P * s / w4;
        const int row = static_cast<int>(i);
        trip.emplace_back(row, row - 1, J1 * d.dv1_minus + J2 * d.dv2_minus);
        trip.emplace_back(row, row, J2 * d.dv2_centre - tau);
        trip.emplace_back(row, row + 1, J1 * d.dv1_plus + J2 * d.dv2_plus);
    }
    Eigen::SparseMatrix<double> A(static_cast<int>(m), static_cast<int>(m));
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

// Interior rows scaled by max(1, r)^{n-2}: a relative change of the alpha tail moves J by
// about r^{-(n-3)}, so unscaled rows would stop the iteration early at large r.
std::vector<double> row_weights(const RadialGrid& g, int n) {
    std::vector<double> w(g.size(), 1.0);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) w[i] = std::pow(std::max(1.0, g[i]), n - 2);
    return w;
}

double weighted_norm(std::span<const double> x, std::span<const double> w) {
    double out = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out = std::max(out, std::abs(x[i]) * w[i]);
    return out;
}

RadialField field_from_dev(std::shared_ptr<const RadialGrid> grid, std::span<const double> v) {
    std::vector<double> f(v.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::hypot(1.0, (*grid)[i]) + v[i];
    return RadialField(std::move(grid), std::move(f));
}

}  // namespace

std::vector<double> assemble_residual(const ModelData& model, const RadialField& f, double tau,
                                      const BoundaryData& bc) {
    require_mapped(f.grid());
    const std::vector<double> v = deviation(f);
    return residual_dev(model, f.grid(), v, tau, bc);
}

Eigen::SparseMatrix<double> assemble_jacobian(const ModelData& model, const RadialField& f,
                                              double tau) {
    require_mapped(f.grid());
    const std::vector<double> v = deviation(f);
    return jacobian_dev(model, f.grid(), v, tau);
}

RegularizedSolution solve_regularized(const ModelData& model, double tau,
                                      std::shared_ptr<const RadialGrid> grid,
                                      const BoundaryData& bc, const RadialField& f_init,
                                      const SolverConfig& cfg) {
    model.require_spherical("solve_regularized");
    const RadialGrid& g = *grid;
    require_mapped(g);
    if (f_init.size() != g.size()) throw DomainError("initial guess does not match the grid");
    const double margin = trapping_margin(model, g.back(), tau, bc.outer);
    if (cfg.require_trapping && !(margin > 0.0))
        throw DomainError(fmt::format(
            "outer sphere R = {} is not trapping for tau = {} (margin {:.3e}); solve refused", g.back(),
            tau, margin));

    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f_init[i] - std::hypot(1.0, g[i]);
    // Blend the guess into the Dirichlet data with quadratic ramps; overwriting only the end
    // nodes leaves a kink that Newton may not recover from.
    const double outer_gap = bc.outer - std::hypot(1.0, g.back()) - v.back();
    const bool anchored = g.inner_mode() == InnerMode::Anchored && bc.inner;
    const double inner_gap = anchored ? *bc.inner - std::hypot(1.0, g.front()) - v.front() : 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = (g[i] - g.front()) / (g.back() - g.front());
        v[i] += outer_gap * t * t + inner_gap * (1 - t) * (1 - t);
    }
    v.back() = bc.outer - std::hypot(1.0, g.back());
    if (anchored) v.front() = *bc.inner - std::hypot(1.0, g.front());

    RegularizedSolution out;
    out.tau = tau;
    const std::vector<double> weights = row_weights(g, model.n);
    std::vector<double> F = residual_dev(model, g, v, tau, bc);
    double norm = weighted_norm(F, weights);
    out.history.push_back(norm);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    int it = 0;
    while (norm >= cfg.newton_tol) {
        if (it >= cfg.newton_max_iter)
            throw NonConvergence(
                fmt::format("Newton hit the iteration cap ({}) at residual {:.3e}", it, norm), it, norm);
        const auto J = jacobian_dev(model, g, v, tau);
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw NumericalError("singular Jang Jacobian", lu.lastErrorMessage());
        Eigen::Map<const Eigen::VectorXd> rhs(F.data(), static_cast<Eigen::Index>(F.size()));
        const Eigen::VectorXd step = lu.solve(-rhs);
        if (lu.info() != Eigen::Success || !step.allFinite())
            throw NumericalError("Jang Newton step failed");

        double lambda = 1.0;
        std::vector<double> trial(v.size());
        std::vector<double> F_trial;
        double norm_trial = std::numeric_limits<double>::infinity();
        for (;;) {
            for (std::size_t i = 0; i < v.size(); ++i) trial[i] = v[i] + lambda * step[static_cast<Eigen::Index>(i)];
            try {
                F_trial = residual_dev(model, g, trial, tau, bc);
                norm_trial = weighted_norm(F_trial, weights);
            } catch (const Error&) {
                norm_trial = std::numeric_limits<double>::infinity();
            }
            if (norm_trial <= (1.0 - 1e-4 * lambda) * norm || lambda * 0.5 < cfg.damping_min) break;
            lambda *= 0.5;
        }
        if (!std::isfinite(norm_trial))
            throw NonConvergence("Newton step left the admissible set", it, norm);
        double step_size = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            step_size = std::max(step_size, std::abs(step[static_cast<Eigen::Index>(i)]) *
                                                std::pow(std::max(1.0, g[i]), model.n - 3));
        v.swap(trial);
        F.swap(F_trial);
        norm = norm_trial;
        ++it;
        out.history.push_back(norm);
        // Roundoff floor of the weighted rows: accept once a full step no longer moves the tail.
        if (lambda == 1.0 && step_size < cfg.newton_tol) break;
        const std::size_t k = out.history.size() - 1;
        const std::size_t window = static_cast<std::size_t>(cfg.stagnation_window);
        if (norm >= cfg.newton_tol && k >= window && norm > 0.99 * out.history[k - window]) {
            if (step_size < cfg.floor_step_tol) break;
            throw NonConvergence(
                fmt::format("Newton stagnated at residual {:.3e} after {} iterations", norm, it), it, norm);
        }
    }
    out.iterations = it;
    out.residual = norm;
    out.f = field_from_dev(grid, v);
    out.deviation = RadialField(std::move(grid), std::move(v));
    return out;
}

std::vector<double> barrier_on_grid(const FProfile& barrier, const RadialGrid& grid) {
    const double r0 = barrier.panels.r0();
    const double r_max = barrier.panels.sample_r().back();
    std::vector<double> out(grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] >= r0 && grid[i] <= r_max) out[i] = barrier.f_at(grid[i]);
    return out;
}

int bracket_violations(const RadialField& f, const BarrierPair& barriers, double tol) {
    const std::vector<double> lo = barrier_on_grid(barriers.f_minus, f.grid());
    const std::vector<double> hi = barrier_on_grid(barriers.f_plus, f.grid());
    int count = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::isnan(lo[i]) || std::isnan(hi[i])) continue;
        if (f[i] < lo[i] - tol || f[i] > hi[i] + tol) ++count;
    }
    return count;
}

double admissible_tau(const ModelData& model, const BarrierPair& barriers, double R) {
    const KProfile& kp = barriers.k_minus;
    const FProfile& fp = barriers.f_minus;
    const int n = model.n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < kp.delta.size(); ++i) {
        const double r = kp.k.grid()[i];
        if (r > R) break;
        const double f = fp.f[i];
        if (!(f > 0.0)) continue;
        const NormalizedResidual nr = normalized_jang_residual_dev(model, barriers.alpha, kp.delta[i], r);
        const double normalized = nr.remainder + barrier_sigma_dev(kp.delta[i], r, barriers.constants, n);
        const double J = std::hypot(1.0, r) * std::pow(nr.Pi, 1.5) * normalized;
        best = std::min(best, J / f);
    }
    return std::max(best, 0.0);
}

double extract_alpha(const RadialField& deviation, int n, Window window) {
    const RadialGrid& g = deviation.grid();
    std::vector<double> r, y;
    for (std::size_t i = 0; i < deviation.size(); ++i) {
        if (!window.contains(g[i])) continue;
        r.push_back(g[i]);
        y.push_back(deviation[i] * std::pow(g[i], n - 3));
    }
    const double powers[] = {1.0, 2.0};
    return fit_inverse_powers(r, y, powers).front();
}

namespace {

// Smooth start: alpha tail, an r^{-(n-2)} term matching the inner value and a linear
// correction for the outer value.
std::vector<double> smooth_guess(const RadialGrid& g, int n, double alpha, double v_in, double v_out) {
    const double r0 = g.front(), R = g.back();
    auto tail = [&](double r) { return r > 0.0 ? alpha * std::pow(r, -(n - 3)) : 0.0; };
    const double c_in = r0 > 0.0 ? v_in - tail(r0) : 0.0;
    auto base = [&](double r) { return tail(r) + (r0 > 0.0 ? c_in * std::pow(r0 / r, n - 2) : 0.0); };
    const double fix = v_out - base(R);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = base(g[i]) + fix * (g[i] - r0) / (R - r0);
    return v;
}

double max_trace_k(const ModelData& model, const RadialGrid& g) {
    const int n = model.n;
    double out = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] <= 0.0) {
            out = std::max(out, static_cast<double>(n));  // hyperbolic data at the origin
            continue;
        }
        const ModelRadial m = model_radial(model, g[i]);
        out = std::max(out, std::abs(1.0 + (n - 1) * (1.0 + m.q_dev)));
    }
    return out;
}

}  // namespace

ContinuationResult continuation_solve(const ModelData& model, const SolverConfig& cfg,
                                      const BarrierPair* barriers) {
    cfg.validate();
    model.require_spherical("continuation_solve");
    const int n = model.n;
    ContinuationResult res;
    res.mode = cfg.mode.value_or(model.is_hyperbolic() ? InnerMode::Origin : InnerMode::Anchored);
    const double alpha = alpha_mean(model);
    std::vector<double> Rs = cfg.R_list;
    std::sort(Rs.begin(), Rs.end());

    if (res.mode == InnerMode::Anchored) {
        if (!barriers) throw DomainError("anchored continuation needs barriers");
        res.r_inner = barriers->constants.r0;
        if (!(Rs.front() > res.r_inner) || Rs.back() > barriers->r_max)
            throw DomainError(fmt::format("R_list must lie in ({}, {}]", res.r_inner, barriers->r_max));
        res.tau_admissible = admissible_tau(model, *barriers, Rs.back());
    } else {
        res.r_inner = 0.0;
        res.tau_admissible = std::numeric_limits<double>::infinity();
    }

    auto boundary_for = [&](double R) {
        BoundaryData bc;
        auto ansatz = [&](double r) {
            const double lo = barriers->f_minus.f_at(r), hi = barriers->f_plus.f_at(r);
            return std::clamp(std::hypot(1.0, r) + alpha * std::pow(r, -(n - 3)), lo, hi);
        };
        auto midpoint = [&](double r) {
            return 0.5 * (barriers->f_plus.f_at(r) + barriers->f_minus.f_at(r));
        };
        if (res.mode == InnerMode::Anchored) {
            const bool mid = cfg.boundary == BoundaryPolicy::Midpoint;
            bc.outer = mid ? midpoint(R) : ansatz(R);
            bc.inner = mid ? midpoint(res.r_inner) : ansatz(res.r_inner);
        } else {
            bc.outer = std::hypot(1.0, R) + alpha * std::pow(R, -(n - 3));
        }
        return bc;
    };

    res.tau_trapping = std::numeric_limits<double>::infinity();
    for (double R : Rs) {
        const double phi = std::abs(boundary_for(R).outer);
        const double room = trapping_margin(model, R, 0.0, phi);
        res.tau_trapping = std::min(res.tau_trapping, phi > 0.0 ? std::max(room, 0.0) / phi : room);
    }
    const double tau_cap = std::min(res.tau_admissible, res.tau_trapping);
    std::vector<double> taus;
    for (double t = cfg.tau_start; t >= cfg.tau_min * (1 - 1e-12); t *= cfg.tau_factor)
        if (t < tau_cap) taus.push_back(t);
    if (cfg.limit_solve || taus.empty()) taus.push_back(0.0);

    const RegularizedSolution* prev = nullptr;
    for (double R : Rs) {
        const double stretch = cfg.stretch.value_or(res.mode == InnerMode::Origin ? std::max(1.0, R)
                                                                                 : R / res.r_inner);
        auto grid = std::make_shared<const RadialGrid>(
            RadialGrid::stretched(res.r_inner, R, cfg.intervals, stretch, res.mode));
        const RadialGrid& g = *grid;
        const BoundaryData bc = boundary_for(R);
        const double sup_trace = max_trace_k(model, g);

        std::vector<double> v0;
        if (!prev) {
            const double v_in = bc.inner ? *bc.inner - std::hypot(1.0, g.front()) : 0.0;
            v0 = smooth_guess(g, n, alpha, v_in, bc.outer - std::hypot(1.0, R));
        } else {
            const RadialField& pv = prev->deviation;
            const double R_prev = pv.grid().back();
            const double v_edge = pv[pv.size() - 1];
            v0.resize(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double r = g[i];
                v0[i] = r <= R_prev ? pv.interpolate(std::max(r, pv.grid().front()))
                                    : v_edge * std::pow(R_prev / r, std::max(n - 3, 1));
            }
        }
        RadialField guess = field_from_dev(grid, v0);

        for (double tau : taus) {
            StageDiagnostics d;
            d.tau = tau;
            d.R = R;
            d.margin = trapping_margin(model, R, tau, bc.outer);
            RegularizedSolution sol;
            try {
                sol = solve_regularized(model, tau, grid, bc, guess, cfg);
            } catch (const NonConvergence& e) {
                throw NonConvergence(fmt::format("tau = {:g}, R = {:g}: {}", tau, R, e.what()),
                                     e.iterations(), e.last_residual());
            } catch (const DomainError& e) {
                throw DomainError(fmt::format("tau = {:g}, R = {:g}: {}", tau, R, e.what()));
            } catch (const NumericalError& e) {
                throw NumericalError(fmt::format("tau = {:g}, R = {:g}: {}", tau, R, e.what()),
                                     e.diagnostics());
            }
            d.iterations = sol.iterations;
            d.residual = sol.residual;
            if (prev) {
                const RadialField& pf = prev->f;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double r = g[i];
                    if (!cfg.probe.contains(r) || r < pf.grid().front() || r > pf.grid().back()) continue;
                    d.cauchy = std::max(d.cauchy, std::abs(sol.f[i] - pf.interpolate(r)));
                }
            }
            d.bracket_violations = barriers ? bracket_violations(sol.f, *barriers, cfg.bracket_tol) : -1;
            double fmax = 0.0;
            for (double x : sol.f.values()) fmax = std::max(fmax, std::abs(x));
            d.sup_lhs = tau * fmax;
            d.sup_rhs = std::max(sup_trace, tau * std::abs(bc.outer));
            guess = sol.f;
            res.stages.push_back(d);
            res.solutions.push_back(std::move(sol));
            prev = &res.solutions.back();
        }
    }
    return res;
}

}  // namespace janglab
