#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "janglab/barrier.hpp"
#include "janglab/conformal.hpp"
#include "janglab/jang.hpp"
#include "janglab/mass.hpp"
#include "janglab/model.hpp"
#include "janglab/sphere.hpp"

namespace janglab {

enum class Stage { Alpha, Barriers, Mass, Jang, Conformal, Verify, Pipeline };

/// Throws ValidationError for unknown names.
Stage parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

struct PipelineOptions {
    AlphaOptions alpha;
    BarrierOptions barrier;
    SolverConfig solver;
    MassOptions mass;
    YamabeOptions yamabe;
    std::vector<double> glue_radii{20, 40, 80};
    int barrier_probes = 50;
    Window alpha_window{0.1, 0.5};  ///< tail fit window, fractions of the outer radius
    PipelineOptions();
};

struct ConformalReport {
    YamabeSolution yamabe;
    double E_adm_graph = 0;
    double energy_shift = 0;        ///< E_adm_graph + 2A + 4 c_n alpha_mean
    Extrapolation conformal_adm;    ///< direct ADM energy of u^{4/(n-2)} g_hat
    double shift_error = 0;
    double coefficient_stability = 0;  ///< |coefficient - coefficient_alt|
    double a_bound = 0;                ///< 2 c_n (n-4) alpha_mean
    bool a_inequality = false;         ///< A < a_bound; diagnostic only
    SchoenYauReport schoen_yau;
    double flatness_residual = 0;      ///< max |R| of the conformal metric on the probe window
    std::vector<double> conformal_curvature;  ///< R of the conformal metric at every node (0 at r = 0)
    std::vector<GlueResult> glue;
    double glue_exponent = 0;          ///< NaN when every sup vanishes
};

struct Check {
    std::string name;
    double value = 0;
    double tolerance = 0;
    bool pass = false;
};

struct PipelineResult {
    Stage stage = Stage::Pipeline;
    std::optional<AlphaSolution> alpha;
    std::optional<BarrierPair> barriers;
    std::optional<BarrierChecks> barrier_checks;
    std::optional<MassReport> mass;
    std::optional<ContinuationResult> jang;
    std::optional<double> alpha_fit;
    std::optional<ConformalReport> conformal;
    std::vector<Check> checks;  ///< filled by verify and pipeline
    bool all_pass() const;
};

/// Probe window used on a domain starting at r_in: the configured one unless it reaches
/// below 1.2 r_in, in which case [1.2 r_in, min(r_out/2, max(hi, 5 r_in))].
Window effective_probe(Window probe, double r_in, double r_out);

/// Glue radii doubled until the smallest is at least 1.5 r_in.
std::vector<double> effective_glue_radii(std::vector<double> radii, double r_in);

/// Conformal stage on the deviation f - sqrt(1+r^2) of a converged Jang solution.
ConformalReport conformal_stage(const ModelData& model, const RadialField& deviation,
                                const PipelineOptions& opts);

/// Runs the stage and whatever it depends on. Solver failures propagate as exceptions.
PipelineResult run_stage(const ModelData& model, Stage stage, const PipelineOptions& opts);

}  // namespace janglab
