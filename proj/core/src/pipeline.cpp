#include "janglab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/fit.hpp"

namespace janglab {

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::Alpha, "alpha"},   {Stage::Barriers, "barriers"},   {Stage::Mass, "mass"},
    {Stage::Jang, "jang"},     {Stage::Conformal, "conformal"}, {Stage::Verify, "verify"},
    {Stage::Pipeline, "pipeline"},
};

// Reruns fn, prefixing any library error with the stage it came from; the type is kept.
template <class Fn>
auto in_stage(Stage stage, Fn&& fn) -> decltype(fn()) {
    const auto tag = [&](const std::exception& e) { return fmt::format("stage '{}': {}", stage_name(stage), e.what()); };
    try {
        return fn();
    } catch (const NonConvergence& e) {
        throw NonConvergence(tag(e), e.iterations(), e.last_residual());
    } catch (const NumericalError& e) {
        throw NumericalError(tag(e), e.diagnostics());
    } catch (const BarrierFailure& e) {
        throw BarrierFailure(tag(e), e.radius());
    } catch (const DegenerateMetricError& e) {
        throw DegenerateMetricError(tag(e));
    } catch (const DomainError& e) {
        throw DomainError(tag(e));
    } catch (const ValidationError& e) {
        throw ValidationError(tag(e));
    }
}

Check make_check(std::string name, double value, double tol) {
    return Check{std::move(name), value, tol, std::abs(value) <= tol};
}

}  // namespace

Window effective_probe(Window probe, double r_in, double r_out) {
    if (r_in <= 0.0 || probe.lo >= 1.2 * r_in) return probe;
    return {1.2 * r_in, std::min(0.5 * r_out, std::max(probe.hi, 5.0 * r_in))};
}

std::vector<double> effective_glue_radii(std::vector<double> radii, double r_in) {
    while (!radii.empty() && radii.front() < 1.5 * r_in)
        for (double& R : radii) R *= 2.0;
    return radii;
}

Stage parse_stage(std::string_view name) {
    for (const auto& [stage, label] : kStageNames)
        if (label == name) return stage;
    throw ValidationError(fmt::format(
        "unknown stage '{}' (expected alpha, barriers, mass, jang, conformal, verify or pipeline)", name));
}

std::string_view stage_name(Stage stage) {
    for (const auto& [s, label] : kStageNames)
        if (s == stage) return label;
    return "unknown";
}

PipelineOptions::PipelineOptions() {
    solver.R_list = {400.0};
    solver.intervals = 4096;
    solver.probe = {2.0, 20.0};
}

bool PipelineResult::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

ConformalReport conformal_stage(const ModelData& model, const RadialField& dev,
                                const PipelineOptions& opts) {
    const int n = model.n;
    const double alpha = alpha_mean(model);
    ConformalReport rep;
    const std::vector<FlatDeviationJet> graph = graph_metric_jets(model, dev);
    rep.yamabe = yamabe_solve(n, dev.grid_ptr(), graph, alpha, opts.yamabe);
    rep.coefficient_stability = std::abs(rep.yamabe.coefficient - rep.yamabe.coefficient_alt);

    const RadialGrid& g = dev.grid();
    std::vector<double> radii;
    for (double frac : opts.mass.adm_fractions) radii.push_back(frac * g.back());
    const auto idx = nearest_nodes(g, radii);
    const std::vector<FlatDeviationJet> conf = conformal_jets(n, graph, rep.yamabe.u_minus_one);
    std::vector<FlatDeviationJet> graph_pick, conf_pick;
    for (std::size_t i : idx) {
        graph_pick.push_back(graph[i]);
        conf_pick.push_back(conf[i]);
    }
    rep.E_adm_graph = adm_energy_extrapolated(n, graph_pick, opts.mass.adm_order).limit;
    rep.energy_shift = energy_shift(rep.E_adm_graph, rep.yamabe.A, alpha, n);
    rep.conformal_adm = adm_energy_extrapolated(n, conf_pick, opts.mass.adm_order);
    rep.shift_error = std::abs(rep.conformal_adm.limit - rep.energy_shift);
    rep.a_bound = 2 * conformal_constant(n) * (n - 4) * alpha;
    rep.a_inequality = rep.yamabe.A < rep.a_bound;

    rep.conformal_curvature.assign(conf.size(), 0.0);
    for (std::size_t i = 0; i < conf.size(); ++i)
        if (conf[i].r > 0.0) rep.conformal_curvature[i] = scalar_curvature_flat_dev(n, conf[i]);
    const Window probe = effective_probe(opts.solver.probe, g.front(), g.back());
    rep.schoen_yau = schoen_yau_residual(model, dev, probe);
    rep.flatness_residual = max_scalar_curvature(n, conf, probe);

    std::vector<double> rs, sups;
    bool any_positive = false;
    for (double R : effective_glue_radii(opts.glue_radii, g.front())) {
        rep.glue.push_back(glue_to_schwarzschild(n, conf, rep.conformal_adm.limit, R));
        rs.push_back(R);
        sups.push_back(rep.glue.back().sup_curvature);
        any_positive = any_positive || sups.back() > 0.0;
    }
    rep.glue_exponent = std::numeric_limits<double>::quiet_NaN();
    if (any_positive && rs.size() >= 3) {
        try {
            rep.glue_exponent = fit_decay_exponent(rs, sups, Window{rs.front(), rs.back()});
        } catch (const NumericalError&) {
            // a vanishing sup among nonzero ones: leave NaN
        }
    }
    return rep;
}

PipelineResult run_stage(const ModelData& model, Stage stage, const PipelineOptions& opts) {
    const int n = model.n;
    PipelineResult res;
    res.stage = stage;
    const bool full = stage == Stage::Verify || stage == Stage::Pipeline;

    if (stage == Stage::Alpha || full)
        res.alpha = in_stage(Stage::Alpha, [&] { return solve_alpha_detailed(model, opts.alpha); });
    if (stage == Stage::Mass || full)
        res.mass = in_stage(Stage::Mass, [&] { return mass_report(model, opts.mass); });

    const bool needs_jang = stage == Stage::Jang || stage == Stage::Conformal || full;
    const InnerMode mode =
        opts.solver.mode.value_or(model.is_hyperbolic() ? InnerMode::Origin : InnerMode::Anchored);
    const bool needs_barriers =
        stage == Stage::Barriers || full || (needs_jang && mode == InnerMode::Anchored);
    if (needs_barriers) {
        in_stage(Stage::Barriers, [&] {
            res.barriers = compute_barriers(model, opts.barrier);
            res.barrier_checks = check_barriers(model, *res.barriers, opts.barrier_probes);
        });
    }
    if (needs_jang) {
        in_stage(Stage::Jang, [&] {
            res.jang = continuation_solve(model, opts.solver, res.barriers ? &*res.barriers : nullptr);
            const RadialField& dev = res.jang->final().deviation;
            const double R = dev.grid().back();
            res.alpha_fit = extract_alpha(dev, n, Window{opts.alpha_window.lo * R, opts.alpha_window.hi * R});
        });
        if (res.mass) {
            const RadialField& dev = res.jang->final().deviation;
            res.mass = in_stage(Stage::Mass, [&] { return mass_report(model, opts.mass, &dev); });
        }
    }
    if (stage == Stage::Conformal || full) {
        res.conformal = in_stage(Stage::Conformal,
                                 [&] { return conformal_stage(model, res.jang->final().deviation, opts); });
    }

    if (full) {
        auto& c = res.checks;
        const double alpha = alpha_mean(model);
        const MassReport& m = *res.mass;
        c.push_back(make_check("mass.flux_vs_closed_form", m.flux_error, 1e-3));
        c.push_back(make_check("mass.jang_adm_alpha_vs_trace", m.jang_adm.alpha_form - m.jang_adm.trace_form, 1e-10));
        if (m.relation_error) c.push_back(make_check("mass.energy_relation", *m.relation_error, 1e-2));
        const BarrierChecks& b = *res.barrier_checks;
        c.push_back({"barriers.anchors", b.anchors_ok ? 0.0 : 1.0, 0.0, b.anchors_ok});
        c.push_back({"barriers.interior", b.min_one_minus_k2, 0.0, b.interior_ok});
        c.push_back({"barriers.tail_exponent", std::max(b.tail_exponent_plus, b.tail_exponent_minus),
                     -(n + 0.5), b.tail_ok});
        c.push_back({"barriers.ordered", b.min_gap, 0.0, b.ordered});
        c.push_back(make_check("barriers.sandwich_violations", b.sandwich_violations, 0.0));
        int violations = 0;
        double sup_excess = -std::numeric_limits<double>::infinity();
        for (const StageDiagnostics& d : res.jang->stages) {
            violations += std::max(d.bracket_violations, 0);
            sup_excess = std::max(sup_excess, d.sup_lhs - d.sup_rhs);
        }
        c.push_back(make_check("jang.bracket_violations", violations, 0.0));
        c.push_back({"jang.sup_bound", sup_excess, 1e-8, sup_excess <= 1e-8});
        const double alpha_tol = 0.05 * std::max(1.0, std::abs(alpha));
        c.push_back(make_check("jang.alpha_fit", *res.alpha_fit - alpha, model.is_hyperbolic() ? 1e-4 : alpha_tol));
        const ConformalReport& k = *res.conformal;
        c.push_back({"conformal.u_positive", k.yamabe.u_min, 0.0, k.yamabe.u_min > 0.0});
        c.push_back(make_check("conformal.energy_shift", k.shift_error, 1e-2));
        c.push_back(make_check("conformal.schoen_yau", k.schoen_yau.max_residual, 1e-4));
        if (std::isnan(k.glue_exponent)) {
            double worst = 0.0;
            for (const GlueResult& gr : k.glue) worst = std::max(worst, gr.decay);
            c.push_back(make_check("conformal.glue_decay", worst, 1e-8));
        } else {
            c.push_back({"conformal.glue_exponent", k.glue_exponent, -(n - 0.5), k.glue_exponent <= -(n - 0.5)});
        }
    }
    return res;
}

}  // namespace janglab
