#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "janglab/barrier.hpp"
#include "janglab/errors.hpp"
#include "janglab/jang.hpp"
#include "janglab/sphere.hpp"

using namespace janglab;

namespace {

double slice(double r) { return std::hypot(1.0, r); }

RadialField sampled(std::shared_ptr<const RadialGrid> g, const std::function<double(double)>& fn) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn((*g)[i]);
    return {std::move(g), std::move(v)};
}

std::shared_ptr<const RadialGrid> origin_grid(double R, int intervals) {
    return std::make_shared<const RadialGrid>(RadialGrid::stretched(0.0, R, intervals, std::max(1.0, R), InnerMode::Origin));
}

const BarrierPair& n4_barriers() {
    static const BarrierPair pair = compute_barriers(ModelData::spherical(4, 1.0, 0.0));
    return pair;
}

SolverConfig anchored_config(double R, int intervals) {
    SolverConfig cfg;
    cfg.R_list = {R};
    cfg.intervals = intervals;
    return cfg;
}

const ContinuationResult& n4_continuation() {
    static const ContinuationResult res =
        continuation_solve(ModelData::spherical(4, 1.0, 0.0), anchored_config(200.0, 2048), &n4_barriers());
    return res;
}

}  // namespace

TEST(TrappingMargin, HyperbolicClosedForm) {
    for (int n = 4; n <= 7; ++n)
        for (double R : {2.0, 10.0, 80.0}) {
            // H = (n-1) s/R and tr k on the sphere is n-1.
            const double want = (n - 1) * (slice(R) / R - 1);
            EXPECT_NEAR(trapping_margin(ModelData::hyperbolic(n), R, 0.0, 0.0), want, 1e-12);
        }
    EXPECT_NEAR(trapping_margin(ModelData::hyperbolic(4), 10.0, 0.0, 0.0), 3.0 / 200, 1e-4);
    EXPECT_NEAR(trapping_margin(ModelData::hyperbolic(4), 10.0, 0.5, -2.0),
                trapping_margin(ModelData::hyperbolic(4), 10.0, 0.0, 0.0) - 1.0, 1e-14);
}

TEST(TrappingMargin, PositiveForModerateRadiiAtSmallTau) {
    // (n-1)/(2R^2) beats tau R up to R ~ ((n-1)/(2 tau))^{1/3}, which is above 11 for every n.
    for (int n = 4; n <= 7; ++n)
        for (double R = 5.0; R <= 11.0; R += 0.5)
            EXPECT_GT(trapping_margin(ModelData::hyperbolic(n), R, 1e-3, slice(R)), 0.0) << "n=" << n << " R=" << R;
    EXPECT_LT(trapping_margin(ModelData::hyperbolic(4), 20.0, 1e-3, slice(20.0)), 0.0);
}

TEST(TrappingMargin, HeavyMassRefusesTheSolve) {
    const ModelData heavy = ModelData::spherical(4, 10.0, 0.0);
    EXPECT_LE(trapping_margin(heavy, 2.0, 1e-5, slice(2.0)), 0.0);
    auto grid = origin_grid(2.0, 64);
    const RadialField guess = sampled(grid, slice);
    EXPECT_THROW(solve_regularized(heavy, 1e-5, grid, BoundaryData{slice(2.0), {}}, guess), DomainError);
}

TEST(AssembleResidual, VanishesOnTheHyperbolicSlice) {
    for (int n = 4; n <= 7; ++n) {
        auto grid = origin_grid(30.0, 256);
        const auto res = assemble_residual(ModelData::hyperbolic(n), sampled(grid, slice), 0.0, {slice(30.0), {}});
        ASSERT_EQ(res.size(), grid->size());
        for (std::size_t i = 1; i + 1 < res.size(); ++i) EXPECT_NEAR(res[i], 0.0, 1e-10) << "n=" << n << " i=" << i;
        EXPECT_NEAR(res.back(), 0.0, 1e-14);
    }
}

TEST(AssembleJacobian, MatchesFiniteDifferences) {
    struct Case { int n; double mbar, pbar; InnerMode mode; };
    for (const Case c : {Case{4, 0.0, 0.0, InnerMode::Origin}, Case{5, 0.5, 0.5, InnerMode::Anchored},
                         Case{7, 1.0, -0.3, InnerMode::Anchored}}) {
        const ModelData model = ModelData::spherical(c.n, c.mbar, c.pbar);
        const double r_in = c.mode == InnerMode::Origin ? 0.0 : 3.0;
        auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(r_in, 40.0, 96, 8.0, c.mode));
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> bump(-0.05, 0.05);
        RadialField f = sampled(grid, [&](double r) { return slice(r) - 0.3 * std::pow(1 + r, -(c.n - 3)); });
        for (double& v : f.mutable_values()) v += bump(rng);
        const double tau = 1e-3;
        BoundaryData bc{f[f.size() - 1], {}};
        if (c.mode == InnerMode::Anchored) bc.inner = f[0];

        const Eigen::MatrixXd jac = Eigen::MatrixXd(assemble_jacobian(model, f, tau));
        const double h = 1e-6;
        for (std::size_t j = 0; j < f.size(); ++j) {
            RadialField up = f, down = f;
            up.mutable_values()[j] += h;
            down.mutable_values()[j] -= h;
            const auto ru = assemble_residual(model, up, tau, bc);
            const auto rd = assemble_residual(model, down, tau, bc);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const double fd = (ru[i] - rd[i]) / (2 * h);
                EXPECT_NEAR(jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), fd, 1e-6 * (1 + std::abs(fd)))
                    << "n=" << c.n << " row " << i << " col " << j;
            }
        }
    }
}

TEST(AssembleResidual, BarriersAreSuperAndSubsolutions) {
    const auto& pair = n4_barriers();
    const ModelData model = ModelData::spherical(4, 1.0, 0.0);
    const double r0 = pair.constants.r0;
    auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(r0 * 1.05, 500.0, 1024, 50.0));
    const RadialField fp = sampled(grid, [&](double r) { return pair.f_plus.f_at(r); });
    const RadialField fm = sampled(grid, [&](double r) { return pair.f_minus.f_at(r); });
    // J(f_-) decays fast, so the subsolution side only survives below the admissible tau.
    const double tau = 0.5 * admissible_tau(model, pair, 500.0);
    EXPECT_GT(tau, 0.0);
    const auto rp = assemble_residual(model, fp, tau, {fp[fp.size() - 1], fp[0]});
    const auto rm = assemble_residual(model, fm, tau, {fm[fm.size() - 1], fm[0]});
    for (std::size_t i = 1; i + 1 < rp.size(); ++i) {
        EXPECT_LT(rp[i], 0.0) << "r=" << (*grid)[i];
        EXPECT_GT(rm[i], 0.0) << "r=" << (*grid)[i];
    }
}

TEST(SolveRegularized, HyperbolicWithLargeTau) {
    const int n = 4;
    const double tau = 1e-2, R = 50.0, phi = slice(R);
    auto grid = origin_grid(R, 1024);
    SolverConfig cfg;
    cfg.require_trapping = false;
    const RadialField guess = sampled(grid, [&](double r) { return phi * r / R; });
    const auto sol = solve_regularized(ModelData::hyperbolic(n), tau, grid, {phi, {}}, guess, cfg);
    double fmax = 0, dev = 0;
    for (std::size_t i = 0; i < sol.f.size(); ++i) {
        fmax = std::max(fmax, std::abs(sol.f[i]));
        dev = std::max(dev, std::abs(sol.f[i] - slice((*grid)[i])));
    }
    // Maximum principle: tau |f| <= max(sup |tr k|, tau |phi|) with tr k = n.
    EXPECT_LE(tau * fmax, std::max(double(n), tau * phi) + 1e-8);
    // The forcing tau f ~ tau r moves f by at most tau sup|tr k| R^2.
    EXPECT_LE(dev, tau * n * R * R);
    EXPECT_GT(dev, 0.0);

    // Newton ends quadratically; the three iterates up to the first one on the roundoff plateau.
    const auto& h = sol.history;
    std::size_t last = 0;
    while (h[last] > 2 * h.back()) ++last;
    ASSERT_GE(last, 2u);
    for (std::size_t k = last - 2; k < last; ++k) EXPECT_LE(h[k + 1], 10.0 * h[k] * h[k]) << "step " << k;
}

TEST(SolveRegularized, VerticalTranslationCovariance) {
    const double c = 0.75;
    {
        auto grid = origin_grid(20.0, 512);
        const ModelData model = ModelData::hyperbolic(5);
        const RadialField guess = sampled(grid, slice);
        const auto a = solve_regularized(model, 0.0, grid, {slice(20.0), {}}, guess);
        const auto b = solve_regularized(model, 0.0, grid, {slice(20.0) + c, {}}, guess);
        for (std::size_t i = 0; i < a.f.size(); ++i) EXPECT_NEAR(b.f[i] - a.f[i], c, 1e-9) << i;
    }
    {
        const auto& pair = n4_barriers();
        const ModelData model = ModelData::spherical(4, 1.0, 0.0);
        const double r0 = pair.constants.r0, R = 150.0;
        auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(r0, R, 1024, R / r0));
        const BoundaryData bc{slice(R) - 3.0 / R, slice(r0) - 3.0 / r0};
        const RadialField guess = sampled(grid, [](double r) { return slice(r) - 3.0 / r; });
        const auto a = solve_regularized(model, 0.0, grid, bc, guess);
        const auto b = solve_regularized(model, 0.0, grid, {bc.outer + c, *bc.inner + c}, guess);
        for (std::size_t i = 0; i < a.f.size(); ++i) EXPECT_NEAR(b.f[i] - a.f[i], c, 1e-8) << i;
    }
}

TEST(SolveRegularized, SecondOrderUnderMeshDoubling) {
    const auto& pair = n4_barriers();
    const ModelData model = ModelData::spherical(4, 1.0, 0.0);
    const double r0 = pair.constants.r0, R = 150.0;
    const BoundaryData bc{slice(R) - 3.0 / R, slice(r0) - 3.0 / r0};
    std::vector<RadialField> sols;
    for (int N : {256, 512, 1024}) {
        auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(r0, R, N, R / r0));
        const RadialField guess = sampled(grid, [](double r) { return slice(r) - 3.0 / r; });
        sols.push_back(solve_regularized(model, 0.0, grid, bc, guess).deviation);
    }
    // Nodes of the coarse mesh are every other node of the next one.
    auto diff = [&](const RadialField& coarse, const RadialField& fine) {
        double d = 0;
        for (std::size_t i = 0; i < coarse.size(); ++i)
            if (Window{2 * r0, 60.0}.contains(coarse.grid()[i])) d = std::max(d, std::abs(coarse[i] - fine[2 * i]));
        return d;
    };
    const double ratio = diff(sols[0], sols[1]) / diff(sols[1], sols[2]);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Continuation, HyperbolicLimitIsTheSlice) {
    for (int n = 4; n <= 7; ++n) {
        SolverConfig cfg;
        cfg.R_list = {20.0, 40.0};
        cfg.intervals = 512;
        const auto res = continuation_solve(ModelData::hyperbolic(n), cfg);
        EXPECT_EQ(res.mode, InnerMode::Origin);
        const RadialField& f = res.final().f;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (Window{1.0, 10.0}.contains(f.grid()[i])) EXPECT_NEAR(f[i], slice(f.grid()[i]), 1e-6) << "n=" << n;
        EXPECT_NEAR(extract_alpha(res.final().deviation, n, {4.0, 20.0}), 0.0, 1e-4);
        for (const auto& d : res.stages) {
            EXPECT_EQ(d.bracket_violations, -1);
            EXPECT_LE(d.sup_lhs, d.sup_rhs + 1e-8);
        }
    }
}

TEST(Continuation, SuccessiveTauDifferencesShrink) {
    // A small outer radius keeps the whole tau ladder below the trapping cap.
    SolverConfig cfg;
    cfg.R_list = {5.0};
    cfg.intervals = 256;
    cfg.probe = {1.0, 4.0};
    const auto res = continuation_solve(ModelData::hyperbolic(4), cfg);
    ASSERT_GE(res.stages.size(), 5u);
    double last = std::numeric_limits<double>::infinity();
    for (const auto& d : res.stages) {
        if (d.tau >= 1e-3 || d.cauchy == 0.0) continue;
        EXPECT_LT(d.cauchy, last) << "tau=" << d.tau;
        last = d.cauchy;
    }
    EXPECT_LT(last, std::numeric_limits<double>::infinity());
}

TEST(Continuation, MassModelStaysBracketedAndRecoversAlpha) {
    const auto& res = n4_continuation();
    EXPECT_EQ(res.mode, InnerMode::Anchored);
    EXPECT_DOUBLE_EQ(res.r_inner, n4_barriers().constants.r0);
    ASSERT_FALSE(res.stages.empty());
    EXPECT_EQ(res.stages.back().tau, 0.0);
    for (const auto& d : res.stages) {
        EXPECT_EQ(d.bracket_violations, 0) << "tau=" << d.tau;
        EXPECT_LE(d.sup_lhs, d.sup_rhs + 1e-8);
    }
    for (const auto& s : res.solutions) EXPECT_EQ(bracket_violations(s.f, n4_barriers(), 0.0), 0);
    const double alpha = solve_alpha(ModelData::spherical(4, 1.0, 0.0)).constant();
    EXPECT_NEAR(extract_alpha(res.final().deviation, 4, {20.0, 100.0}), alpha, 0.05 * std::abs(alpha));
}

TEST(ExtractAlpha, N5MassModel) {
    const ModelData model = ModelData::spherical(5, 1.0, 0.0);
    const BarrierPair pair = compute_barriers(model);
    const auto res = continuation_solve(model, anchored_config(200.0, 2048), &pair);
    EXPECT_NEAR(extract_alpha(res.final().deviation, 5, {20.0, 100.0}), -3.0, 0.15);
    EXPECT_EQ(res.stages.back().bracket_violations, 0);
}

TEST(ExtractAlpha, ExactTailAndBadWindow) {
    auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(1.0, 300.0, 512, 300.0));
    const RadialField dev = sampled(grid, [](double r) { return (-2.5 + 4.0 / r) / (r * r); });
    EXPECT_NEAR(extract_alpha(dev, 5, {10.0, 200.0}), -2.5, 1e-9);
    EXPECT_ANY_THROW(extract_alpha(dev, 5, {400.0, 500.0}));
}

TEST(BracketViolations, CountsNodesOutsideTheBarriers) {
    const auto& pair = n4_barriers();
    const double r0 = pair.constants.r0;
    auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(r0, 100.0, 128, 100.0 / r0));
    RadialField f = sampled(grid, [&](double r) { return 0.5 * (pair.f_plus.f_at(r) + pair.f_minus.f_at(r)); });
    EXPECT_EQ(bracket_violations(f, pair, 0.0), 0);
    f.mutable_values()[10] = pair.f_plus.f_at((*grid)[10]) + 1.0;
    f.mutable_values()[20] = pair.f_minus.f_at((*grid)[20]) - 1.0;
    EXPECT_EQ(bracket_violations(f, pair, 1e-8), 2);
    const auto on_grid = barrier_on_grid(pair.f_plus, *grid);
    EXPECT_NEAR(on_grid[5], pair.f_plus.f_at((*grid)[5]), 1e-12);
}

TEST(SolverConfig, Validation) {
    SolverConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.tau_factor = 1.5;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = {};
    cfg.tau_min = cfg.tau_start;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = {};
    cfg.newton_tol = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = {};
    cfg.intervals = 16;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = {};
    cfg.R_list.clear();
    EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(Continuation, AnchoredModeNeedsBarriers) {
    EXPECT_THROW(continuation_solve(ModelData::spherical(4, 1.0, 0.0), anchored_config(200.0, 256)), DomainError);
    SolverConfig cfg = anchored_config(5000.0, 256);
    EXPECT_THROW(continuation_solve(ModelData::spherical(4, 1.0, 0.0), cfg, &n4_barriers()), DomainError);
}
