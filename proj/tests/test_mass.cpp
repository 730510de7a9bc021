#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "janglab/barrier.hpp"
#include "janglab/errors.hpp"
#include "janglab/geometry.hpp"
#include "janglab/jang.hpp"
#include "janglab/mass.hpp"
#include "janglab/sphere.hpp"
#include "oracles.hpp"

using namespace janglab;

namespace {

ModelData zonal_model(int n, std::function<double(double)> mbar, std::function<double(double)> pbar) {
    ModelData m;
    m.n = Dimension(n);
    m.m_trace = ZonalFunction::sample([&](double t) { return (n - 1) * mbar(t); }, 801);
    m.p_trace = ZonalFunction::sample([&](double t) { return (n - 1) * pbar(t); }, 801);
    return m;
}

// Integral over S^{n-1} of a zonal function, independent of the library quadrature.
double oracle_sphere_integral(int n, const std::function<double(double)>& fn, int panels = 4000) {
    return sphere_volume(n - 1) * oracle::sphere_weighted_integral(n, fn, panels);
}

// Converged Jang solution for a spherical model on [r0, 200].
RadialField jang_deviation(int n, double mbar, double pbar) {
    const ModelData model = ModelData::spherical(n, mbar, pbar);
    const BarrierPair pair = compute_barriers(model);
    SolverConfig cfg;
    cfg.R_list = {200.0};
    cfg.intervals = 2048;
    return continuation_solve(model, cfg, &pair).final().deviation;
}

}  // namespace

TEST(MassFlux, VanishesOnHyperbolicData) {
    for (int n = 4; n <= 7; ++n)
        for (int which = 0; which <= n; ++which)
            EXPECT_LT(std::abs(mass_flux(ModelData::hyperbolic(n), which, 50.0)), 1e-10) << n << " " << which;
}

TEST(MassFlux, SphericalMomentumVanishesByParity) {
    for (int n = 4; n <= 7; ++n)
        for (int which = 1; which <= n; ++which)
            EXPECT_LT(std::abs(mass_flux(ModelData::spherical(n, 1.0, 0.3), which, 80.0)), 1e-12);
    EXPECT_THROW(mass_flux(ModelData::hyperbolic(4), 5, 10.0), DomainError);
    EXPECT_THROW(mass_flux(ModelData::hyperbolic(4), 0, 0.0), DomainError);
}

TEST(MassFlux, MatchesTensorOracleOnSphericalData) {
    struct Case { double mbar, pbar; };
    for (int n = 4; n <= 7; ++n)
        for (const Case c : {Case{1.0, 0.0}, Case{0.5, 0.5}, Case{-0.3, 0.8}})
            for (double R : {3.0, 20.0}) {
                const double density = oracle::mass_flux_density(n, c.mbar, c.pbar, 0, R, 0.9);
                const double want = density * sphere_volume(n);
                EXPECT_NEAR(mass_flux(ModelData::spherical(n, c.mbar, c.pbar), 0, R), want, 1e-7 * std::abs(want))
                    << "n=" << n << " R=" << R;
            }
}

TEST(MassFlux, ZonalMomentumMatchesTensorOracle) {
    auto mbar = [](double t) { return 0.6 + 0.3 * std::cos(t); };
    auto pbar = [](double t) { return 0.1 - 0.2 * std::cos(t) + 0.05 * std::cos(2 * t); };
    for (int n : {4, 6}) {
        const ModelData model = zonal_model(n, mbar, pbar);
        const double R = 10.0;
        for (int which : {0, n}) {
            auto density = [&](double t) {
                // The polar coordinate chart is singular at the poles, where the weight vanishes anyway.
                const double tc = std::clamp(t, 1e-6, std::numbers::pi - 1e-6);
                return oracle::mass_flux_density(n, mbar(tc), pbar(tc), which, R, tc);
            };
            const double want = oracle_sphere_integral(n, density, 200);
            EXPECT_NEAR(mass_flux(model, which, R), want, 1e-6 * std::abs(want)) << "n=" << n << " V" << which;
        }
        EXPECT_GT(std::abs(mass_flux(model, n, R)), 1e-3);
    }
}

TEST(WangMass, ClosedForms) {
    const auto m4 = wang_mass_closed_form(ModelData::spherical(4, 1.0, 0.0));
    EXPECT_DOUBLE_EQ(m4.E, 1.0);
    ASSERT_EQ(m4.P.size(), 4u);
    for (double p : m4.P) EXPECT_EQ(p, 0.0);
    EXPECT_DOUBLE_EQ(wang_mass_closed_form(ModelData::spherical(5, 1.0, 0.0)).E, 1.5);
    const auto zero = wang_mass_closed_form(ModelData::hyperbolic(6));
    EXPECT_EQ(zero.E, 0.0);
    for (double p : zero.P) EXPECT_EQ(p, 0.0);
    for (int n = 4; n <= 7; ++n)
        EXPECT_NEAR(wang_mass_closed_form(ModelData::spherical(n, 0.7, -0.4)).E, -0.4 + 0.5 * (n - 2) * 0.7, 1e-14);
}

TEST(WangMass, ZonalAgainstDirectIntegrals) {
    auto mbar = [](double t) { return 0.6 + 0.3 * std::cos(t); };
    auto pbar = [](double t) { return 0.1 - 0.2 * std::cos(t); };
    for (int n = 4; n <= 7; ++n) {
        const ModelData model = zonal_model(n, mbar, pbar);
        // tr p + ((n-2)/2) tr m with tr = (n-1) x bar
        auto source = [&](double t) { return (n - 1) * (pbar(t) + 0.5 * (n - 2) * mbar(t)); };
        const double norm = (n - 1) * sphere_volume(n);
        const auto mv = wang_mass_closed_form(model);
        EXPECT_NEAR(mv.E, oracle_sphere_integral(n, source) / norm, 1e-6);
        EXPECT_NEAR(mv.P.back(), oracle_sphere_integral(n, [&](double t) { return std::cos(t) * source(t); }) / norm, 1e-6);
        for (int i = 0; i + 1 < n; ++i) EXPECT_EQ(mv.P[static_cast<std::size_t>(i)], 0.0);
    }
}

TEST(MassReport, ExtrapolatedFluxMatchesClosedForm) {
    for (int n = 4; n <= 7; ++n) {
        const ModelData model = ModelData::spherical(n, 1.0, 0.0);
        const MassReport rep = mass_report(model);
        const double E = 0.5 * (n - 2);
        EXPECT_DOUBLE_EQ(rep.closed_form.E, E);
        EXPECT_NEAR(rep.E_flux, E, 1e-3 * std::max(1.0, E)) << "n=" << n;
        EXPECT_LT(rep.flux_error, 1e-3);
        const double target = 2.0 * (n - 1) * sphere_volume(n) * E;
        EXPECT_NEAR(rep.flux_extrapolation.limit, target, 1e-3 * target);
        EXPECT_TRUE(rep.flux_extrapolation.monotone);
        ASSERT_EQ(rep.P_flux.size(), static_cast<std::size_t>(n));
        for (double p : rep.P_flux) EXPECT_NEAR(p, 0.0, 1e-12);
        EXPECT_FALSE(rep.E_adm_graph.has_value());
        // The raw V0 flux approaches its limit from one side as R grows.
        for (std::size_t i = 1; i < rep.flux_V0.size(); ++i)
            EXPECT_LT(std::abs(rep.flux_V0[i].value - target), std::abs(rep.flux_V0[i - 1].value - target));
    }
}

TEST(AdmEnergy, FlatAndSchwarzschild) {
    for (int n = 4; n <= 7; ++n) {
        EXPECT_EQ(adm_energy_flux(n, FlatDeviationJet{25.0}), 0.0);
        // Isotropic Schwarzschild (1 + m/(2 r^{n-2}))^{4/(n-2)} delta has ADM energy m.
        const double m = 1.7;
        for (double r : {1e2, 1e3}) {
            const double p = 4.0 / (n - 2);
            const double base = 1 + m / (2 * std::pow(r, n - 2));
            const double dbase = -(n - 2) * m / (2 * std::pow(r, n - 1));
            FlatDeviationJet jet{r};
            jet.a = jet.b = std::pow(base, p) - 1;
            jet.da = jet.db = p * std::pow(base, p - 1) * dbase;
            EXPECT_NEAR(adm_energy_flux(n, jet), m, 10 * m * m / std::pow(r, n - 2)) << "n=" << n << " r=" << r;
        }
    }
}

TEST(AdmEnergy, RejectsNonDecayingTails) {
    std::vector<FlatDeviationJet> jets;
    for (double r : {10.0, 20.0, 40.0}) {
        FlatDeviationJet j{r};
        j.a = 1e-3 * r;
        jets.push_back(j);
    }
    EXPECT_THROW(adm_energy_extrapolated(4, jets, 1.0), DomainError);
}

TEST(AdmEnergy, HyperbolicGraphIsFlat) {
    for (int n = 4; n <= 7; ++n) {
        auto grid = std::make_shared<const RadialGrid>(RadialGrid::stretched(0.0, 100.0, 256, 100.0, InnerMode::Origin));
        const RadialField zero(grid, std::vector<double>(grid->size(), 0.0));
        const auto jets = graph_metric_jets(ModelData::hyperbolic(n), zero);
        for (const auto& j : jets) EXPECT_EQ(adm_energy_flux(n, j), 0.0);
    }
}

TEST(JangAdm, ClosedFormsAgree) {
    const auto a4 = jang_adm_closed_form(ModelData::spherical(4, 1.0, 0.0));
    EXPECT_DOUBLE_EQ(a4.trace_form, 3.0);
    EXPECT_DOUBLE_EQ(a4.alpha_form, 3.0);
    const auto a5 = jang_adm_closed_form(ModelData::spherical(5, 1.0, 0.0));
    EXPECT_DOUBLE_EQ(a5.trace_form, 6.0);
    EXPECT_DOUBLE_EQ(a5.alpha_form, 6.0);
    const auto h = jang_adm_closed_form(ModelData::hyperbolic(7));
    EXPECT_EQ(h.trace_form, 0.0);
    EXPECT_EQ(h.alpha_form, 0.0);
    for (int n = 4; n <= 7; ++n) {
        const auto z = jang_adm_closed_form(
            zonal_model(n, [](double t) { return 0.4 + 0.5 * std::cos(t); }, [](double t) { return 0.2 * std::cos(2 * t); }));
        EXPECT_NEAR(z.alpha_form, z.trace_form, 1e-6) << "n=" << n;
    }
}

TEST(JangAdm, GraphFluxMatchesEnergyRelation) {
    struct Case { int n; double mbar, pbar; };
    for (const Case c : {Case{4, 1.0, 0.0}, Case{5, 1.0, 0.0}}) {
        const ModelData model = ModelData::spherical(c.n, c.mbar, c.pbar);
        const RadialField dev = jang_deviation(c.n, c.mbar, c.pbar);
        const MassReport rep = mass_report(model, {}, &dev);
        ASSERT_TRUE(rep.E_adm_graph.has_value());
        const double want = (c.n - 1) * rep.closed_form.E;
        EXPECT_NEAR(*rep.E_adm_graph, want, 0.05) << "n=" << c.n;
        ASSERT_TRUE(rep.relation_error.has_value());
        EXPECT_LT(*rep.relation_error, 1e-2);
        EXPECT_EQ(rep.adm_samples.size(), 3u);
    }
}

TEST(NearestNodes, PicksTheClosestNode) {
    const auto g = RadialGrid::stretched(1.0, 100.0, 64, 10.0);
    const std::vector<double> radii{1.0, 100.0, 0.5 * (g[10] + g[11]) + 1e-9, g[20] * 0.999};
    const auto idx = nearest_nodes(g, radii);
    EXPECT_EQ(idx[0], 0u);
    EXPECT_EQ(idx[1], g.size() - 1);
    EXPECT_EQ(idx[2], 11u);
    EXPECT_EQ(idx[3], 20u);
}
