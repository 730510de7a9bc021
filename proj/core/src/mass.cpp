#include "janglab/mass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/geometry.hpp"
#include "janglab/parallel.hpp"
#include "janglab/sphere.hpp"

namespace janglab {

namespace {

// Flux integrand per unit round-sphere area at polar angle theta.
// V0 = sqrt(1+r^2); the x^n potential carries an extra cos(theta) and s/r instead of s^2/r^2.
double flux_density(const ModelData& model, int which, double R, double theta) {
    const int n = model.n;
    const double mbar = model.mbar(theta), pbar = model.pbar(theta);
    const double s = std::hypot(1.0, R);
    const double b = mbar * std::pow(R, -n);
    if (!(1.0 + b > 0.0)) throw DegenerateMetricError(fmt::format("1 + b <= 0 at R = {}", R));
    const double shear = 2.0 * (pbar - mbar) / (1.0 + b);
    if (which == 0) return (n - 1) * ((n - 1) * mbar * s * s / (R * R) + mbar + shear);
    return std::cos(theta) * (n - 1) * (s / R) * (n * mbar + shear);
}

}  // namespace

double mass_flux(const ModelData& model, int which, double R, int points) {
    const int n = model.n;
    if (which < 0 || which > n) throw DomainError(fmt::format("potential index {} outside 0..{}", which, n));
    if (!(R > 0.0)) throw DomainError("mass_flux needs R > 0");
    // x^i for i < n is odd under a reflection that fixes zonal data.
    if (which > 0 && which < n) return 0.0;
    return sphere_integral(n, [&](double th) { return flux_density(model, which, R, th); }, points);
}

MassVector wang_mass_closed_form(const ModelData& model, int points) {
    const int n = model.n;
    const double omega = sphere_volume(n);
    const ZonalFunction source = trace_source(model);
    MassVector out;
    out.P.assign(static_cast<std::size_t>(n), 0.0);
    if (source.is_constant()) {
        out.E = source.constant() / (n - 1);
        return out;
    }
    out.E = sphere_integral(n, [&](double th) { return source(th); }, points) / ((n - 1) * omega);
    out.P.back() =
        sphere_integral(n, [&](double th) { return std::cos(th) * source(th); }, points) / ((n - 1) * omega);
    return out;
}

double adm_energy_flux(int n, const FlatDeviationJet& g) {
    return 0.5 * std::pow(g.r, n - 2) * (g.a - g.b - g.r * g.db);
}

Extrapolation adm_energy_extrapolated(int n, std::span<const FlatDeviationJet> metrics, double order) {
    std::vector<std::pair<double, double>> pairs;
    double prev = std::numeric_limits<double>::infinity();
    for (const FlatDeviationJet& g : metrics) {
        const double size = std::abs(g.a) + std::abs(g.b);
        if (size > prev && size > 1e-14)
            throw DomainError(fmt::format("metric tail does not decay (|a|+|b| = {:.3e} at r = {})", size, g.r));
        prev = size;
        pairs.emplace_back(g.r, adm_energy_flux(n, g));
    }
    return richardson_extrapolate(pairs, order);
}

JangAdmClosedForm jang_adm_closed_form(const ModelData& model) {
    const int n = model.n;
    JangAdmClosedForm out;
    const ZonalFunction source = trace_source(model);
    out.trace_form = source.is_constant() ? source.constant()
                                          : sphere_mean(n, [&](double th) { return source(th); });
    out.alpha_form = -(n - 3) * alpha_mean(model);
    return out;
}

std::vector<FlatDeviationJet> graph_metric_jets(const ModelData& model, const RadialField& deviation) {
    const RadialGrid& g = deviation.grid();
    const std::vector<double> d1 = deviation.derivative(1), d2 = deviation.derivative(2);
    std::vector<FlatDeviationJet> out(deviation.size());
    for (std::size_t i = 0; i < deviation.size(); ++i) {
        const double r = g[i];
        FlatDeviationJet& jet = out[i];
        jet.r = r;
        if (r <= 0.0) continue;  // regular centre: flat to the order tracked here
        const ModelRadial m = model_radial(model, r);
        const double s = m.s, k0 = r / s;
        jet.a = 2 * k0 * d1[i] + d1[i] * d1[i];
        jet.da = 2 * d1[i] / (s * s * s) + 2 * k0 * d2[i] + 2 * d1[i] * d2[i];
        jet.b = m.b;
        jet.db = m.db;
        jet.d2b = m.d2b;
    }
    return out;
}

std::vector<std::size_t> nearest_nodes(const RadialGrid& grid, std::span<const double> radii) {
    std::vector<std::size_t> out;
    for (double R : radii) {
        std::size_t i = grid.locate(R);
        if (i + 1 < grid.size() && std::abs(grid[i + 1] - R) < std::abs(grid[i] - R)) ++i;
        out.push_back(i);
    }
    return out;
}

MassReport mass_report(const ModelData& model, const MassOptions& opts, const RadialField* jang_deviation) {
    const int n = model.n;
    const double omega = sphere_volume(n);
    const double norm = 2.0 * (n - 1) * omega;
    MassReport rep;
    rep.closed_form = wang_mass_closed_form(model, opts.points);
    rep.flux_V0.resize(opts.R_list.size());
    parallel_for(opts.R_list.size(), [&](std::size_t i) {
        const double R = opts.R_list[i];
        rep.flux_V0[i] = {R, mass_flux(model, 0, R, opts.points)};
    });
    std::vector<std::pair<double, double>> pairs;
    for (const FluxSample& s : rep.flux_V0) pairs.emplace_back(s.R, s.value);
    rep.flux_extrapolation = richardson_extrapolate(pairs, opts.flux_order);
    rep.E_flux = rep.flux_extrapolation.limit / norm;
    const double R_top = opts.R_list.back();
    for (int i = 1; i <= n; ++i) rep.P_flux.push_back(mass_flux(model, i, R_top, opts.points) / norm);
    rep.flux_error = std::abs(rep.E_flux - rep.closed_form.E) / std::max(1.0, std::abs(rep.closed_form.E));
    rep.jang_adm = jang_adm_closed_form(model);

    if (jang_deviation) {
        const RadialGrid& g = jang_deviation->grid();
        std::vector<double> radii;
        for (double frac : opts.adm_fractions) radii.push_back(frac * g.back());
        const auto idx = nearest_nodes(g, radii);
        const std::vector<FlatDeviationJet> all = graph_metric_jets(model, *jang_deviation);
        std::vector<FlatDeviationJet> picked;
        for (std::size_t i : idx) {
            picked.push_back(all[i]);
            rep.adm_samples.push_back({all[i].r, adm_energy_flux(n, all[i])});
        }
        rep.adm_extrapolation = adm_energy_extrapolated(n, picked, opts.adm_order);
        rep.E_adm_graph = rep.adm_extrapolation->limit;
        const double target = (n - 1) * rep.closed_form.E;
        rep.relation_error = std::abs(*rep.E_adm_graph - target) / std::max(1.0, std::abs(target));
    }
    return rep;
}

}  // namespace janglab
