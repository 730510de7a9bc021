#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "janglab/curvature.hpp"
#include "janglab/fit.hpp"
#include "janglab/model.hpp"
#include "janglab/radial.hpp"

namespace janglab {

/// Energy and linear momentum; P has n components and the symmetry axis is the last one.
struct MassVector {
    double E = 0;
    std::vector<double> P;
};

/// Flux of the mass functional through r = R for the static potential V_which
/// (0 is the lapse sqrt(1+r^2), 1..n are x^i). Gauss-Gegenbauer quadrature in the polar angle.
double mass_flux(const ModelData& model, int which, double R, int points = 96);

/// E and P from the angular integrals of tr p + ((n-2)/2) tr m.
MassVector wang_mass_closed_form(const ModelData& model, int points = 96);

/// ADM energy through the sphere of radius r for (1+a) dr^2 + r^2 (1+b) Omega:
/// (r^{n-2}/2)(a - b - r b').
double adm_energy_flux(int n, const FlatDeviationJet& metric);

/// Series of adm_energy_flux over increasing radii, extrapolated with the given order.
/// Throws DomainError if |a| + |b| does not decrease along the series.
Extrapolation adm_energy_extrapolated(int n, std::span<const FlatDeviationJet> metrics,
                                      double order);

struct JangAdmClosedForm {
    double trace_form = 0;  ///< (1/omega) int tr p + ((n-2)/2) tr m
    double alpha_form = 0;  ///< -(n-3) mean(alpha)
};
JangAdmClosedForm jang_adm_closed_form(const ModelData& model);

struct MassOptions {
    std::vector<double> R_list{100, 200, 400, 800, 1600};
    double flux_order = 2;
    double adm_order = 1;
    /// Radii for the Jang-graph ADM series, as fractions of the solution's outer radius.
    std::vector<double> adm_fractions{0.125, 0.25, 0.5};
    int points = 96;
};

struct FluxSample {
    double R = 0;
    double value = 0;
};

struct MassReport {
    MassVector closed_form;
    std::vector<FluxSample> flux_V0;  ///< raw mass functional on V0
    Extrapolation flux_extrapolation;
    double E_flux = 0;                ///< extrapolated M(V0) / (2 (n-1) omega)
    std::vector<double> P_flux;       ///< M(V_i) / (2 (n-1) omega) at the largest R
    JangAdmClosedForm jang_adm;
    std::vector<FluxSample> adm_samples;  ///< empty without a Jang solution
    std::optional<Extrapolation> adm_extrapolation;
    std::optional<double> E_adm_graph;
    double flux_error = 0;                 ///< |E_flux - E| / max(1, |E|)
    std::optional<double> relation_error;  ///< |E_adm_graph - (n-1)E| / max(1, (n-1)E)
};

/// Radial metric data of the Jang graph (1 + a) dr^2 + r^2 (1+b) Omega at each node, from the
/// deviation f - sqrt(1+r^2).
std::vector<FlatDeviationJet> graph_metric_jets(const ModelData& model, const RadialField& deviation);

/// Node indices of the grid closest to the given radii.
std::vector<std::size_t> nearest_nodes(const RadialGrid& grid, std::span<const double> radii);

/// The graph ADM energy is filled in when the deviation of a Jang solution is given.
MassReport mass_report(const ModelData& model, const MassOptions& opts = {},
                       const RadialField* jang_deviation = nullptr);

}  // namespace janglab
