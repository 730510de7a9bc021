#include "report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "janglab/curvature.hpp"
#include "janglab/errors.hpp"
#include "janglab/mass.hpp"
#include "janglab/sphere.hpp"

namespace jang_lab {

using nlohmann::json;

namespace {

// NaN and infinities have no JSON spelling; they become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json nums(std::span<const double> xs) {
    json out = json::array();
    for (double x : xs) out.push_back(num(x));
    return out;
}

json extrapolation_json(const janglab::Extrapolation& e) {
    return {{"limit", num(e.limit)}, {"residual", num(e.residual)}, {"monotone", e.monotone}};
}

json alpha_block(const janglab::AlphaSolution& a, const janglab::ModelData& model) {
    json j = {{"mean", num(janglab::alpha_mean(model))},
              {"residual", num(a.residual)},
              {"refinement_error", num(a.refinement_error)},
              {"cells", a.cells},
              {"zonal", !a.alpha.is_constant()}};
    if (a.alpha.is_constant()) j["value"] = num(a.alpha.constant());
    return j;
}

json barrier_block(const janglab::BarrierPair& b, const janglab::BarrierChecks& c) {
    const auto& k = b.constants;
    return {{"constants", {{"C1", num(k.C1)}, {"C2", num(k.C2)}, {"C3", num(k.C3)}, {"C4", num(k.C4)},
                           {"r0", num(k.r0)}, {"epsilon", num(k.epsilon)}}},
            {"alpha", num(b.alpha)},
            {"r_max", num(b.r_max)},
            {"r0_retries", b.r0_retries},
            {"anchor_slope_plus", num(b.f_plus.anchor_slope)},
            {"anchor_slope_minus", num(b.f_minus.anchor_slope)},
            {"checks",
             {{"k_plus_anchor", num(c.k_plus_anchor)},
              {"k_minus_anchor", num(c.k_minus_anchor)},
              {"anchors_ok", c.anchors_ok},
              {"min_one_minus_k2", num(c.min_one_minus_k2)},
              {"interior_ok", c.interior_ok},
              {"tail_exponent_plus", num(c.tail_exponent_plus)},
              {"tail_exponent_minus", num(c.tail_exponent_minus)},
              {"tail_ok", c.tail_ok},
              {"min_gap", num(c.min_gap)},
              {"ordered", c.ordered},
              {"sandwich_probes", c.sandwich_probes},
              {"sandwich_violations", c.sandwich_violations},
              {"worst_sandwich_ratio", num(c.worst_sandwich_ratio)}}}};
}

json mass_block(const janglab::MassReport& m) {
    json flux = json::array();
    for (const auto& s : m.flux_V0) flux.push_back({{"R", num(s.R)}, {"value", num(s.value)}});
    json j = {{"E", num(m.closed_form.E)},
              {"P", nums(m.closed_form.P)},
              {"E_flux", num(m.E_flux)},
              {"P_flux", nums(m.P_flux)},
              {"flux_error", num(m.flux_error)},
              {"flux_extrapolation", extrapolation_json(m.flux_extrapolation)},
              {"flux_V0", flux},
              {"jang_adm_trace_form", num(m.jang_adm.trace_form)},
              {"jang_adm_alpha_form", num(m.jang_adm.alpha_form)}};
    if (m.E_adm_graph) {
        json samples = json::array();
        for (const auto& s : m.adm_samples) samples.push_back({{"r", num(s.R)}, {"value", num(s.value)}});
        j["E_adm_graph"] = num(*m.E_adm_graph);
        j["adm_samples"] = samples;
        j["adm_extrapolation"] = extrapolation_json(*m.adm_extrapolation);
        j["relation_error"] = num(*m.relation_error);
    }
    return j;
}

std::string_view mode_name(janglab::InnerMode m) { return m == janglab::InnerMode::Origin ? "origin" : "anchored"; }

json jang_block(const janglab::ContinuationResult& c, const std::optional<double>& alpha_fit) {
    json stages = json::array();
    for (const auto& d : c.stages)
        stages.push_back({{"tau", num(d.tau)},
                          {"R", num(d.R)},
                          {"iterations", d.iterations},
                          {"residual", num(d.residual)},
                          {"margin", num(d.margin)},
                          {"cauchy", num(d.cauchy)},
                          {"bracket_violations", d.bracket_violations},
                          {"sup_lhs", num(d.sup_lhs)},
                          {"sup_rhs", num(d.sup_rhs)}});
    const auto& fin = c.final();
    return {{"mode", mode_name(c.mode)},
            {"r_inner", num(c.r_inner)},
            {"tau_admissible", num(c.tau_admissible)},
            {"tau_trapping", num(c.tau_trapping)},
            {"stages", stages},
            {"final",
             {{"R", num(fin.f.grid().back())},
              {"intervals", fin.f.grid().intervals()},
              {"tau", num(fin.tau)},
              {"iterations", fin.iterations},
              {"residual", num(fin.residual)}}},
            {"alpha_fit", alpha_fit ? num(*alpha_fit) : json(nullptr)}};
}

json conformal_block(const janglab::ConformalReport& c) {
    json glue = json::array();
    for (const auto& g : c.glue)
        glue.push_back({{"R_glue", num(g.R_glue)}, {"sup_curvature", num(g.sup_curvature)},
                        {"decay", num(g.decay)}, {"samples", g.samples}});
    return {{"A", num(c.yamabe.A)},
            {"coefficient", num(c.yamabe.coefficient)},
            {"coefficient_alt", num(c.yamabe.coefficient_alt)},
            {"coefficient_stability", num(c.coefficient_stability)},
            {"u_min", num(c.yamabe.u_min)},
            {"u_max", num(c.yamabe.u_max)},
            {"E_adm_graph", num(c.E_adm_graph)},
            {"E_shift", num(c.energy_shift)},
            {"conformal_adm", extrapolation_json(c.conformal_adm)},
            {"shift_error", num(c.shift_error)},
            {"a_bound", num(c.a_bound)},
            {"a_inequality", c.a_inequality},
            {"schoen_yau_residual", num(c.schoen_yau.max_residual)},
            {"schoen_yau_scale", num(c.schoen_yau.max_R_hat)},
            {"flatness_residual", num(c.flatness_residual)},
            {"glue", glue},
            {"glue_exponent", num(c.glue_exponent)}};
}

class Csv {
public:
    Csv(const std::filesystem::path& path, std::string_view header) : out_(path) {
        if (!out_) throw janglab::ValidationError(fmt::format("cannot write '{}'", path.string()));
        out_ << header << '\n';
    }
    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << fmt::format("{:.17g}", v);
            first = false;
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace

json build_report(const RunConfig& cfg, const std::vector<RunRecord>& runs, const std::string& generated_at) {
    json report;
    report["schema_version"] = kSchemaVersion;
    report["tool"] = "jang-lab";
    report["generated_at"] = generated_at;
    report["config"] = to_json(cfg);

    json stages = json::object();
    json checks = json::array();
    json ran = json::array();
    json summary = json::object();
    bool all_pass = true;
    for (const RunRecord& rec : runs) {
        const janglab::PipelineResult& r = rec.result;
        ran.push_back(std::string(janglab::stage_name(rec.stage)));
        if (r.alpha) stages["alpha"] = alpha_block(*r.alpha, cfg.model);
        if (r.barriers) stages["barriers"] = barrier_block(*r.barriers, *r.barrier_checks);
        if (r.mass) {
            stages["mass"] = mass_block(*r.mass);
            summary["E"] = num(r.mass->closed_form.E);
            summary["P"] = nums(r.mass->closed_form.P);
            if (r.mass->E_adm_graph) summary["E_ADM"] = num(*r.mass->E_adm_graph);
        }
        if (r.jang) stages["jang"] = jang_block(*r.jang, r.alpha_fit);
        if (r.conformal) {
            stages["conformal"] = conformal_block(*r.conformal);
            summary["E_ADM"] = num(r.conformal->E_adm_graph);
            summary["A"] = num(r.conformal->yamabe.A);
            summary["E_shift"] = num(r.conformal->energy_shift);
        }
        for (const janglab::Check& c : r.checks) {
            checks.push_back({{"stage", std::string(janglab::stage_name(rec.stage))},
                              {"name", c.name},
                              {"value", num(c.value)},
                              {"tolerance", num(c.tolerance)},
                              {"status", c.pass ? "pass" : "fail"}});
            all_pass = all_pass && c.pass;
        }
    }
    report["stages_run"] = ran;
    report["summary"] = summary;
    report["results"] = stages;
    report["checks"] = checks;
    report["status"] = all_pass ? "ok" : "checks_failed";
    return report;
}

std::vector<std::string> write_series(const std::filesystem::path& dir, const RunConfig& cfg,
                                      const std::vector<RunRecord>& runs) {
    const janglab::PipelineResult* alpha = nullptr;
    const janglab::PipelineResult* barriers = nullptr;
    const janglab::PipelineResult* mass = nullptr;
    const janglab::PipelineResult* jang = nullptr;
    const janglab::PipelineResult* conformal = nullptr;
    for (const RunRecord& rec : runs) {
        const auto& r = rec.result;
        if (r.alpha) alpha = &r;
        if (r.barriers) barriers = &r;
        if (r.mass) mass = &r;
        if (r.jang) jang = &r;
        if (r.conformal && r.jang) conformal = &r;
    }
    std::vector<std::string> files;
    if (alpha && !alpha->alpha->alpha.is_constant()) {
        Csv csv(dir / "alpha.csv", "theta,alpha");
        const auto& a = alpha->alpha->alpha;
        for (std::size_t i = 0; i < a.theta().size(); ++i) csv.row({a.theta()[i], a.values()[i]});
        files.push_back("alpha.csv");
    }
    if (barriers) {
        Csv csv(dir / "barriers.csv", "sign,r,k,k_minus_r_over_s,f_minus_s");
        const auto& b = *barriers->barriers;
        for (const auto* prof : {&b.k_plus, &b.k_minus}) {
            const janglab::FProfile& f = prof == &b.k_plus ? b.f_plus : b.f_minus;
            const double sign = janglab::sign_value(prof->sign);
            const auto& g = prof->k.grid();
            for (std::size_t i = 0; i < g.size(); ++i)
                csv.row({sign, g[i], prof->k[i], prof->delta[i], f.f_dev_at(g[i])});
        }
        files.push_back("barriers.csv");
    }
    if (mass) {
        Csv csv(dir / "mass_flux.csv", "R,flux_V0");
        for (const auto& s : mass->mass->flux_V0) csv.row({s.R, s.value});
        files.push_back("mass_flux.csv");
    }
    if (jang) {
        {
            Csv csv(dir / "jang_stages.csv", "tau,R,iterations,residual,margin,cauchy,bracket_violations");
            for (const auto& d : jang->jang->stages)
                csv.row({d.tau, d.R, double(d.iterations), d.residual, d.margin, d.cauchy,
                         double(d.bracket_violations)});
            files.push_back("jang_stages.csv");
        }
        // Residual rows of J(f) - tau f; the Dirichlet rows are zero by construction.
        Csv csv(dir / "jang.csv", "r,f,f_prime,residual,f_minus_s");
        const auto& fin = jang->jang->final();
        const auto& g = fin.f.grid();
        janglab::BoundaryData bc{fin.f[fin.f.size() - 1], {}};
        if (g.inner_mode() == janglab::InnerMode::Anchored) bc.inner = fin.f[0];
        const auto residual = janglab::assemble_residual(cfg.model, fin.f, fin.tau, bc);
        const auto dv = fin.deviation.derivative(1);
        for (std::size_t i = 0; i < g.size(); ++i)
            csv.row({g[i], fin.f[i], g[i] / std::hypot(1.0, g[i]) + dv[i], residual[i], fin.deviation[i]});
        files.push_back("jang.csv");
    }
    if (conformal) {
        const auto& c = *conformal->conformal;
        const auto& dev = conformal->jang->final().deviation;
        Csv csv(dir / "conformal.csv", "r,u,R_hat,R_conformal");
        const auto& g = dev.grid();
        for (std::size_t i = 0; i < g.size(); ++i)
            csv.row({g[i], c.yamabe.u[i], c.yamabe.R_hat[i], c.conformal_curvature[i]});
        files.push_back("conformal.csv");
    }
    return files;
}

}  // namespace jang_lab
