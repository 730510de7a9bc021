#include <algorithm>
#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "janglab/conformal.hpp"
#include "janglab/curvature.hpp"
#include "janglab/errors.hpp"
#include "janglab/mass.hpp"
#include "janglab/pipeline.hpp"

using namespace janglab;

namespace {

std::shared_ptr<const RadialGrid> origin_grid(double R, int intervals) {
    return std::make_shared<const RadialGrid>(RadialGrid::stretched(0.0, R, intervals, R, InnerMode::Origin));
}

// w^{4/(n-2)} delta with w = 1 + c (1+r^2)^{-(n-2)/2}. Conformal covariance of the Yamabe
// operator makes u = 1/w the solution that tends to 1.
struct BumpMetric {
    int n;
    double c;
    double w(double r) const { return 1 + c * std::pow(1 + r * r, -0.5 * (n - 2)); }
    double dw(double r) const { return -c * (n - 2) * r * std::pow(1 + r * r, -0.5 * n); }
    double d2w(double r) const {
        return -c * (n - 2) * (std::pow(1 + r * r, -0.5 * n) - n * r * r * std::pow(1 + r * r, -0.5 * n - 1));
    }
    FlatDeviationJet jet(double r) const {
        const double p = 4.0 / (n - 2);
        FlatDeviationJet j{r};
        j.a = j.b = std::pow(w(r), p) - 1;
        j.da = j.db = p * std::pow(w(r), p - 1) * dw(r);
        j.d2b = p * (p - 1) * std::pow(w(r), p - 2) * dw(r) * dw(r) + p * std::pow(w(r), p - 1) * d2w(r);
        return j;
    }
    std::vector<FlatDeviationJet> jets(const RadialGrid& g) const {
        std::vector<FlatDeviationJet> out;
        for (double r : g.nodes()) out.push_back(jet(r));
        return out;
    }
};

// Exact isotropic Schwarzschild jets of energy E.
std::vector<FlatDeviationJet> schwarzschild_jets(int n, double E, const RadialGrid& g) {
    const double p = 4.0 / (n - 2);
    std::vector<FlatDeviationJet> out;
    for (double r : g.nodes()) {
        FlatDeviationJet j{r};
        if (r > 0) {
            const double v = 1 + E / (2 * std::pow(r, n - 2));
            const double dv = -(n - 2) * E / (2 * std::pow(r, n - 1));
            const double d2v = (n - 2) * (n - 1) * E / (2 * std::pow(r, n));
            j.a = j.b = std::pow(v, p) - 1;
            j.da = j.db = p * std::pow(v, p - 1) * dv;
            j.d2b = p * (p - 1) * std::pow(v, p - 2) * dv * dv + p * std::pow(v, p - 1) * d2v;
        }
        out.push_back(j);
    }
    return out;
}

const PipelineResult& n4_conformal() {
    static const PipelineResult res = run_stage(ModelData::spherical(4, 1.0, 0.0), Stage::Conformal, PipelineOptions{});
    return res;
}

}  // namespace

TEST(Yamabe, FlatGraphGivesUnitFactor) {
    for (int n = 4; n <= 7; ++n) {
        auto grid = origin_grid(100.0, 512);
        const std::vector<FlatDeviationJet> flat(grid->size());
        std::vector<FlatDeviationJet> jets = flat;
        for (std::size_t i = 0; i < jets.size(); ++i) jets[i].r = (*grid)[i];
        const auto sol = yamabe_solve(n, grid, jets, 0.0);
        for (double u : sol.u.values()) EXPECT_NEAR(u, 1.0, 1e-12);
        EXPECT_NEAR(sol.A, 0.0, 1e-12);
        for (double x : sol.R_hat) EXPECT_EQ(x, 0.0);
    }
}

TEST(Yamabe, ConformallyFlatBumpHasInverseFactor) {
    for (int n = 4; n <= 7; ++n) {
        const BumpMetric bump{n, 0.8};
        auto grid = origin_grid(200.0, 2048);
        const auto sol = yamabe_solve(n, grid, bump.jets(*grid), 0.0);
        for (std::size_t i = 0; i < grid->size(); ++i) {
            const double r = (*grid)[i];
            EXPECT_NEAR(sol.u_minus_one[i], 1 / bump.w(r) - 1, 1e-5) << "n=" << n << " r=" << r;
        }
        // u - 1 ~ -c r^{-(n-2)}
        EXPECT_NEAR(sol.coefficient, -bump.c, 2e-3) << "n=" << n;
        EXPECT_NEAR(sol.coefficient, sol.coefficient_alt, 2e-3);
        EXPECT_NEAR(sol.A, sol.coefficient, 1e-15);
        EXPECT_GT(sol.u_min, 0.0);
        EXPECT_LE(sol.u_max, 1.0 + 1e-12);
        // A shifts by -2 c_n alpha_mean.
        const auto shifted = yamabe_solve(n, grid, bump.jets(*grid), -3.0);
        EXPECT_NEAR(shifted.A, sol.coefficient + 6 * conformal_constant(n), 1e-12);
    }
}

TEST(Yamabe, ConvergesAtSecondOrder) {
    const int n = 5;
    const BumpMetric bump{n, 0.8};
    double prev = 0;
    for (int N : {256, 512, 1024}) {
        auto grid = origin_grid(100.0, N);
        const auto sol = yamabe_solve(n, grid, bump.jets(*grid), 0.0);
        double err = 0;
        for (std::size_t i = 0; i < grid->size(); ++i)
            if ((*grid)[i] <= 20.0) err = std::max(err, std::abs(sol.u_minus_one[i] - (1 / bump.w((*grid)[i]) - 1)));
        if (prev > 0) {
            EXPECT_GT(prev / err, 3.0) << "N=" << N;
            EXPECT_LT(prev / err, 5.0) << "N=" << N;
        }
        prev = err;
    }
}

TEST(Yamabe, ConformalMetricIsScalarFlat) {
    const int n = 6;
    const BumpMetric bump{n, 0.5};
    auto grid = origin_grid(100.0, 2048);
    const auto jets = bump.jets(*grid);
    double R_max = 0;
    for (std::size_t i = 1; i < jets.size(); ++i) R_max = std::max(R_max, std::abs(scalar_curvature_flat_dev(n, jets[i])));
    const auto sol = yamabe_solve(n, grid, jets, 0.0);
    const auto conf = conformal_jets(n, jets, sol.u_minus_one);
    EXPECT_LT(max_scalar_curvature(n, conf, {0.5, 20.0}), 1e-4 * R_max);
    // u^{4/(n-2)} w^{4/(n-2)} = 1 here, so the conformal metric is flat.
    for (std::size_t i = 0; i < conf.size(); ++i)
        if ((*grid)[i] < 50.0) EXPECT_NEAR(conf[i].a, 0.0, 1e-4);
}

TEST(Yamabe, NegativeCurvatureWellBreaksPositivity) {
    // Only the d2b jet is set, which leaves the Laplacian flat and puts R ~ -(n-1) d2b on a
    // wide shell. c_n R ~ -1 there is far below the lowest Dirichlet eigenvalue of the shell,
    // so u oscillates through zero.
    const int n = 4;
    auto grid = origin_grid(200.0, 2048);
    std::vector<FlatDeviationJet> jets(grid->size());
    for (std::size_t i = 0; i < jets.size(); ++i) {
        const double r = (*grid)[i], x = (r - 30.0) / 10.0;
        jets[i].r = r;
        jets[i].d2b = 2.0 * std::exp(-x * x);
    }
    EXPECT_THROW(yamabe_solve(n, grid, jets, 0.0), DegenerateMetricError);
}

TEST(EnergyShift, Examples) {
    EXPECT_EQ(energy_shift(0.0, 0.0, 0.0, 4), 0.0);
    EXPECT_NEAR(energy_shift(3.0, 0.0, -3.0, 4), 1.0, 1e-15);
    EXPECT_NEAR(energy_shift(6.0, 0.25, -3.0, 5), 6.0 + 0.5 + 4 * (3.0 / 16) * -3.0, 1e-15);
    EXPECT_DOUBLE_EQ(conformal_constant(4), 1.0 / 6);
    EXPECT_DOUBLE_EQ(conformal_constant(7), 5.0 / 24);
}

TEST(SchoenYau, VanishesOnTheHyperbolicSlice) {
    for (int n = 4; n <= 7; ++n) {
        auto grid = origin_grid(50.0, 512);
        const RadialField zero(grid, std::vector<double>(grid->size(), 0.0));
        const auto rep = schoen_yau_residual(ModelData::hyperbolic(n), zero, {1.0, 10.0});
        EXPECT_LT(rep.max_residual, 1e-8);
        EXPECT_LT(rep.max_R_hat, 1e-8);
        EXPECT_FALSE(rep.r.empty());
        EXPECT_EQ(rep.r.size(), rep.residual.size());
    }
}

TEST(SchoenYau, N6ResidualAtFullResolution) {
    const ModelData model = ModelData::spherical(6, 0.5, 0.5);
    const PipelineResult res = run_stage(model, Stage::Conformal, PipelineOptions{});
    ASSERT_TRUE(res.conformal.has_value());
    EXPECT_EQ(res.jang->final().f.grid().intervals(), 4096);
    EXPECT_LT(res.conformal->schoen_yau.max_residual, 1e-4);
    EXPECT_GT(res.conformal->schoen_yau.max_R_hat, 1e3 * res.conformal->schoen_yau.max_residual);
}

TEST(SchoenYau, SecondOrderUnderMeshDoubling) {
    const ModelData model = ModelData::spherical(4, 1.0, 0.0);
    std::vector<double> sy, flat;
    for (int N : {768, 1536}) {
        PipelineOptions opts;
        opts.solver.intervals = N;
        const PipelineResult res = run_stage(model, Stage::Conformal, opts);
        sy.push_back(res.conformal->schoen_yau.max_residual);
        flat.push_back(res.conformal->flatness_residual);
    }
    EXPECT_GE(sy[0] / sy[1], 3.5);
    EXPECT_LE(sy[0] / sy[1], 4.5);
    EXPECT_GE(flat[0] / flat[1], 3.5);
    EXPECT_LE(flat[0] / flat[1], 4.5);
}

TEST(ConformalStage, MassModelReport) {
    const auto& res = n4_conformal();
    ASSERT_TRUE(res.conformal.has_value());
    const ConformalReport& c = *res.conformal;
    EXPECT_GT(c.yamabe.u_min, 0.0);
    EXPECT_LT(c.yamabe.u_max, 10.0);
    EXPECT_LT(c.coefficient_stability, 1e-3);
    EXPECT_NEAR(c.E_adm_graph, 3.0, 0.05);
    EXPECT_NEAR(c.energy_shift, c.E_adm_graph + 2 * c.yamabe.A + 4 * conformal_constant(4) * -3.0, 1e-12);
    EXPECT_LT(c.shift_error, 1e-2);
    EXPECT_NEAR(c.a_bound, 0.0, 1e-15);
    EXPECT_EQ(c.conformal_curvature.size(), res.jang->final().f.size());
}

TEST(GlueCutoff, SmoothStep) {
    EXPECT_EQ(glue_cutoff(-0.5), 0.0);
    EXPECT_EQ(glue_cutoff(0.0), 0.0);
    EXPECT_DOUBLE_EQ(glue_cutoff(1.0), 1.0);
    EXPECT_EQ(glue_cutoff(1.5), 1.0);
    EXPECT_NEAR(glue_cutoff(0.5), 0.5, 1e-15);
    for (int d = 1; d <= 3; ++d) {
        EXPECT_NEAR(glue_cutoff(0.0, d), 0.0, 1e-12) << d;
        EXPECT_NEAR(glue_cutoff(1.0, d), 0.0, 1e-12) << d;
        EXPECT_EQ(glue_cutoff(2.0, d), 0.0);
    }
    EXPECT_THROW(glue_cutoff(0.5, 4), DomainError);
    const double h = 1e-5;
    for (double t = 0.05; t < 1.0; t += 0.05) {
        EXPECT_NEAR(glue_cutoff(1 - t), 1 - glue_cutoff(t), 1e-14);
        for (int d = 1; d <= 3; ++d) {
            const double fd = (glue_cutoff(t + h, d - 1) - glue_cutoff(t - h, d - 1)) / (2 * h);
            EXPECT_NEAR(glue_cutoff(t, d), fd, 1e-6 * (1 + std::abs(fd))) << "t=" << t << " d=" << d;
        }
        EXPECT_GE(glue_cutoff(t, 1), 0.0);
        EXPECT_LE(glue_cutoff(t, 1), glue_cutoff(0.5, 1) + 1e-14);
    }
    EXPECT_NEAR(glue_cutoff(0.5, 1), 35.0 / 16, 1e-14);
}

TEST(Glue, FlatAndSchwarzschildAreUnchanged) {
    for (int n = 4; n <= 7; ++n) {
        auto grid = origin_grid(400.0, 2048);
        std::vector<FlatDeviationJet> flat(grid->size());
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i].r = (*grid)[i];
        const GlueResult g0 = glue_to_schwarzschild(n, flat, 0.0, 40.0);
        EXPECT_EQ(g0.decay, 0.0);
        EXPECT_GE(g0.samples, 3);

        // Gluing Schwarzschild to itself leaves a scalar-flat metric up to rounding.
        const auto sch = schwarzschild_jets(n, 1.3, *grid);
        const GlueResult g1 = glue_to_schwarzschild(n, sch, 1.3, 40.0);
        EXPECT_LT(g1.sup_curvature, 1e-12) << "n=" << n;
        EXPECT_DOUBLE_EQ(g1.R_glue, 40.0);
    }
}

TEST(Glue, Errors) {
    auto grid = origin_grid(100.0, 256);
    std::vector<FlatDeviationJet> flat(grid->size());
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i].r = (*grid)[i];
    EXPECT_THROW(glue_to_schwarzschild(4, flat, -100.0, 2.0), DomainError);
    EXPECT_THROW(glue_to_schwarzschild(4, flat, 0.0, 99.0), DomainError);
}

TEST(Glue, MassModelDecay) {
    const auto& res = n4_conformal();
    const auto& glue = res.conformal->glue;
    ASSERT_EQ(glue.size(), 3u);
    for (std::size_t i = 1; i < glue.size(); ++i) {
        EXPECT_DOUBLE_EQ(glue[i].R_glue, 2 * glue[i - 1].R_glue);
        const double ratio = glue[i].decay / glue[i - 1].decay;
        EXPECT_GT(ratio, 0.5);
        EXPECT_LT(ratio, 2.0);
    }
    EXPECT_LE(res.conformal->glue_exponent, -3.5);
}
