#include "run_config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "janglab/errors.hpp"

namespace jang_lab {

using janglab::ValidationError;
using nlohmann::json;

namespace {

// A json object together with its dotted path, for error messages.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ValidationError(fmt::format("'{}' must be an object", label()));
    }

    void allow(std::initializer_list<const char*> keys) const {
        const std::set<std::string> known(keys.begin(), keys.end());
        for (const auto& [key, _] : node_.items())
            if (!known.count(key)) throw ValidationError(fmt::format("unknown key '{}'", join(key)));
    }

    bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }
    const json& raw(const char* key) const { return node_.at(key); }
    Section child(const char* key) const { return Section(node_.at(key), join(key)); }
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ValidationError(fmt::format("'{}' must be a number", join(key)));
        return v.get<double>();
    }

    int integer(const char* key, int fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer()) throw ValidationError(fmt::format("'{}' must be an integer", join(key)));
        return v.get<int>();
    }

    bool flag(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) throw ValidationError(fmt::format("'{}' must be true or false", join(key)));
        return v.get<bool>();
    }

    std::string text(const char* key, std::string fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) throw ValidationError(fmt::format("'{}' must be a string", join(key)));
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_array() || v.empty())
            throw ValidationError(fmt::format("'{}' must be a non-empty array of numbers", join(key)));
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number())
                throw ValidationError(fmt::format("'{}' must be a non-empty array of numbers", join(key)));
            out.push_back(e.get<double>());
        }
        return out;
    }

    janglab::Window window(const char* key, janglab::Window fallback) const {
        if (!has(key)) return fallback;
        const auto v = numbers(key, {});
        if (v.size() != 2 || !(v[0] < v[1]))
            throw ValidationError(fmt::format("'{}' must be [lo, hi] with lo < hi", join(key)));
        return {v[0], v[1]};
    }

    std::string label() const { return path_.empty() ? "config" : path_; }

private:
    const json& node_;
    std::string path_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

void require_increasing_positive(const std::vector<double>& v, const std::string& key) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        require(v[i] > 0.0, fmt::format("'{}' entries must be positive", key));
        require(i == 0 || v[i] > v[i - 1], fmt::format("'{}' must be strictly increasing", key));
    }
}

janglab::ZonalFunction zonal_trace(const Section& s, const char* key, int n) {
    if (!s.has(key)) return 0.0;
    const json& v = s.raw(key);
    if (v.is_number()) return (n - 1) * v.get<double>();
    const Section table = s.child(key);
    table.allow({"theta", "values"});
    require(table.has("theta") && table.has("values"),
            fmt::format("'{}' table needs 'theta' and 'values'", s.join(key)));
    const auto theta = table.numbers("theta", {});
    auto values = table.numbers("values", {});
    for (double& x : values) x *= n - 1;
    return janglab::ZonalFunction(theta, values);
}

json zonal_json(const janglab::ZonalFunction& trace, int n) {
    if (trace.is_constant()) return trace.constant() / (n - 1);
    json values = json::array();
    for (double x : trace.values()) values.push_back(x / (n - 1));
    return {{"theta", std::vector<double>(trace.theta().begin(), trace.theta().end())}, {"values", values}};
}

janglab::ModelData parse_model(const Section& s) {
    s.allow({"n", "mbar", "pbar"});
    require(s.has("n"), "'model.n' is required");
    janglab::ModelData model;
    model.n = janglab::Dimension(s.integer("n", 0));
    model.m_trace = zonal_trace(s, "mbar", model.n);
    model.p_trace = zonal_trace(s, "pbar", model.n);
    return model;
}

}  // namespace

bool needs_spherical(janglab::Stage stage) {
    return stage != janglab::Stage::Alpha && stage != janglab::Stage::Mass;
}

RunConfig parse_run_config(const json& doc) {
    const Section root(doc, "");
    root.allow({"model", "mesh", "tau", "newton", "solver", "barriers", "mass", "alpha", "conformal",
                "verify", "stages", "output"});
    require(root.has("model"), "'model' is required");

    RunConfig cfg;
    cfg.model = parse_model(root.child("model"));
    janglab::PipelineOptions& o = cfg.options;
    janglab::SolverConfig& sv = o.solver;

    if (root.has("mesh")) {
        const Section s = root.child("mesh");
        s.allow({"intervals", "stretch", "R_list", "inner"});
        sv.intervals = s.integer("intervals", sv.intervals);
        if (s.has("stretch")) sv.stretch = s.number("stretch", 1.0);
        sv.R_list = s.numbers("R_list", sv.R_list);
        if (s.has("inner")) {
            const std::string inner = s.text("inner", "");
            if (inner == "origin") sv.mode = janglab::InnerMode::Origin;
            else if (inner == "anchored") sv.mode = janglab::InnerMode::Anchored;
            else throw ValidationError("'mesh.inner' must be \"origin\" or \"anchored\"");
        }
    }
    if (root.has("tau")) {
        const Section s = root.child("tau");
        s.allow({"start", "factor", "min", "limit_solve"});
        sv.tau_start = s.number("start", sv.tau_start);
        sv.tau_factor = s.number("factor", sv.tau_factor);
        sv.tau_min = s.number("min", sv.tau_min);
        sv.limit_solve = s.flag("limit_solve", sv.limit_solve);
    }
    if (root.has("newton")) {
        const Section s = root.child("newton");
        s.allow({"tol", "max_iter", "damping_min", "stagnation_window", "floor_step_tol"});
        sv.newton_tol = s.number("tol", sv.newton_tol);
        sv.newton_max_iter = s.integer("max_iter", sv.newton_max_iter);
        sv.damping_min = s.number("damping_min", sv.damping_min);
        sv.stagnation_window = s.integer("stagnation_window", sv.stagnation_window);
        sv.floor_step_tol = s.number("floor_step_tol", sv.floor_step_tol);
    }
    if (root.has("solver")) {
        const Section s = root.child("solver");
        s.allow({"boundary", "require_trapping", "probe", "bracket_tol"});
        const std::string policy = s.text("boundary", "ansatz");
        if (policy == "ansatz") sv.boundary = janglab::BoundaryPolicy::Ansatz;
        else if (policy == "midpoint") sv.boundary = janglab::BoundaryPolicy::Midpoint;
        else throw ValidationError("'solver.boundary' must be \"ansatz\" or \"midpoint\"");
        sv.require_trapping = s.flag("require_trapping", sv.require_trapping);
        sv.probe = s.window("probe", sv.probe);
        sv.bracket_tol = s.number("bracket_tol", sv.bracket_tol);
    }
    if (root.has("barriers")) {
        const Section s = root.child("barriers");
        s.allow({"r_max", "constants", "r0_retries"});
        o.barrier.r_max = s.number("r_max", o.barrier.r_max);
        o.barrier.r0_retries = s.integer("r0_retries", o.barrier.r0_retries);
        if (s.has("constants")) {
            const Section c = s.child("constants");
            c.allow({"C1", "C2", "C3", "C4", "r0", "epsilon"});
            janglab::BarrierConstants k;
            k.C1 = c.number("C1", k.C1);
            k.C2 = c.number("C2", k.C2);
            k.C3 = c.number("C3", k.C3);
            k.C4 = c.number("C4", k.C4);
            k.r0 = c.number("r0", k.r0);
            k.epsilon = c.number("epsilon", k.epsilon);
            require(k.C1 >= 0 && k.C2 >= 0 && k.C3 >= 0 && k.C4 >= 0, "barrier constants must be >= 0");
            require(k.r0 > 0 && k.epsilon > 0, "'barriers.constants.r0' and 'epsilon' must be positive");
            o.barrier.constants = k;
        }
        require(o.barrier.r_max > 1.0, "'barriers.r_max' must exceed 1");
        require(o.barrier.r0_retries >= 0, "'barriers.r0_retries' must be >= 0");
    }
    if (root.has("mass")) {
        const Section s = root.child("mass");
        s.allow({"R_list", "points", "flux_order", "adm_order", "adm_fractions"});
        o.mass.R_list = s.numbers("R_list", o.mass.R_list);
        o.mass.points = s.integer("points", o.mass.points);
        o.mass.flux_order = s.number("flux_order", o.mass.flux_order);
        o.mass.adm_order = s.number("adm_order", o.mass.adm_order);
        o.mass.adm_fractions = s.numbers("adm_fractions", o.mass.adm_fractions);
    }
    if (root.has("alpha")) {
        const Section s = root.child("alpha");
        s.allow({"intervals", "refinement_tol", "fit_window"});
        o.alpha.intervals = s.integer("intervals", o.alpha.intervals);
        o.alpha.refinement_tol = s.number("refinement_tol", o.alpha.refinement_tol);
        o.alpha_window = s.window("fit_window", o.alpha_window);
    }
    if (root.has("conformal")) {
        const Section s = root.child("conformal");
        s.allow({"glue_radii", "fit_primary", "fit_secondary"});
        o.glue_radii = s.numbers("glue_radii", o.glue_radii);
        o.yamabe.primary = s.window("fit_primary", o.yamabe.primary);
        o.yamabe.secondary = s.window("fit_secondary", o.yamabe.secondary);
    }
    if (root.has("verify")) {
        const Section s = root.child("verify");
        s.allow({"barrier_probes"});
        o.barrier_probes = s.integer("barrier_probes", o.barrier_probes);
        require(o.barrier_probes >= 1, "'verify.barrier_probes' must be >= 1");
    }
    if (root.has("stages")) {
        const json& list = root.raw("stages");
        require(list.is_array(), "'stages' must be an array of stage names");
        for (const json& e : list) {
            require(e.is_string(), "'stages' must be an array of stage names");
            cfg.stages.push_back(janglab::parse_stage(e.get<std::string>()));
        }
        for (std::size_t i = 0; i < cfg.stages.size(); ++i)
            for (std::size_t j = i + 1; j < cfg.stages.size(); ++j)
                require(!(cfg.stages[i] == janglab::Stage::Conformal && cfg.stages[j] == janglab::Stage::Jang),
                        "'stages' lists conformal before jang, which it depends on");
    }
    if (root.has("output")) cfg.output_dir = root.text("output", "");

    require_increasing_positive(sv.R_list, "mesh.R_list");
    require_increasing_positive(o.mass.R_list, "mass.R_list");
    require(o.mass.R_list.size() >= 3, "'mass.R_list' needs at least 3 radii");
    require_increasing_positive(o.mass.adm_fractions, "mass.adm_fractions");
    require(o.mass.adm_fractions.size() >= 3 && o.mass.adm_fractions.back() < 1.0,
            "'mass.adm_fractions' needs at least 3 fractions below 1");
    require(o.mass.points >= 8, "'mass.points' must be >= 8");
    require_increasing_positive(o.glue_radii, "conformal.glue_radii");
    require(o.alpha.intervals >= 16, "'alpha.intervals' must be >= 16");
    require(o.alpha.refinement_tol > 0, "'alpha.refinement_tol' must be positive");
    sv.validate();
    for (janglab::Stage st : cfg.stages)
        require(!needs_spherical(st) || cfg.model.is_spherical(),
                fmt::format("stage '{}' needs spherically symmetric data (constant mbar and pbar)",
                            janglab::stage_name(st)));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot read config file '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("config '{}' is not valid JSON: {}", path.string(), e.what()));
    }
    return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
    const janglab::PipelineOptions& o = cfg.options;
    const janglab::SolverConfig& sv = o.solver;
    const int n = cfg.model.n;
    json j;
    j["model"] = {{"n", n}, {"mbar", zonal_json(cfg.model.m_trace, n)}, {"pbar", zonal_json(cfg.model.p_trace, n)}};
    json mesh = {{"intervals", sv.intervals}, {"R_list", sv.R_list}};
    mesh["stretch"] = sv.stretch ? json(*sv.stretch) : json(nullptr);
    mesh["inner"] = !sv.mode ? json(nullptr)
                             : json(*sv.mode == janglab::InnerMode::Origin ? "origin" : "anchored");
    j["mesh"] = mesh;
    j["tau"] = {{"start", sv.tau_start}, {"factor", sv.tau_factor}, {"min", sv.tau_min},
                {"limit_solve", sv.limit_solve}};
    j["newton"] = {{"tol", sv.newton_tol}, {"max_iter", sv.newton_max_iter},
                   {"damping_min", sv.damping_min}, {"stagnation_window", sv.stagnation_window},
                   {"floor_step_tol", sv.floor_step_tol}};
    j["solver"] = {{"boundary", sv.boundary == janglab::BoundaryPolicy::Ansatz ? "ansatz" : "midpoint"},
                   {"require_trapping", sv.require_trapping},
                   {"probe", {sv.probe.lo, sv.probe.hi}},
                   {"bracket_tol", sv.bracket_tol}};
    json barriers = {{"r_max", o.barrier.r_max}, {"r0_retries", o.barrier.r0_retries}};
    if (o.barrier.constants) {
        const auto& k = *o.barrier.constants;
        barriers["constants"] = {{"C1", k.C1}, {"C2", k.C2}, {"C3", k.C3},
                                 {"C4", k.C4}, {"r0", k.r0}, {"epsilon", k.epsilon}};
    }
    j["barriers"] = barriers;
    j["mass"] = {{"R_list", o.mass.R_list}, {"points", o.mass.points}, {"flux_order", o.mass.flux_order},
                 {"adm_order", o.mass.adm_order}, {"adm_fractions", o.mass.adm_fractions}};
    j["alpha"] = {{"intervals", o.alpha.intervals}, {"refinement_tol", o.alpha.refinement_tol},
                  {"fit_window", {o.alpha_window.lo, o.alpha_window.hi}}};
    j["conformal"] = {{"glue_radii", o.glue_radii},
                      {"fit_primary", {o.yamabe.primary.lo, o.yamabe.primary.hi}},
                      {"fit_secondary", {o.yamabe.secondary.lo, o.yamabe.secondary.hi}}};
    j["verify"] = {{"barrier_probes", o.barrier_probes}};
    json stages = json::array();
    for (janglab::Stage st : cfg.stages) stages.push_back(std::string(janglab::stage_name(st)));
    j["stages"] = stages;
    if (cfg.output_dir) j["output"] = *cfg.output_dir;
    return j;
}

}  // namespace jang_lab
