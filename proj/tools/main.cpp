#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "janglab/errors.hpp"
#include "janglab/pipeline.hpp"
#include "report.hpp"
#include "run_config.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

std::string timestamp(bool fixed) {
    if (fixed) return "1970-01-01T00:00:00Z";
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

int run(const std::string& stage_arg, const std::filesystem::path& config_path,
        const std::string& out_arg, bool fixed_clock) {
    using namespace jang_lab;
    const RunConfig cfg = load_run_config(config_path);

    std::vector<janglab::Stage> stages;
    if (!stage_arg.empty()) {
        stages.push_back(janglab::parse_stage(stage_arg));
    } else if (!cfg.stages.empty()) {
        stages = cfg.stages;
    } else {
        throw janglab::ValidationError("no stage given on the command line or in 'stages'");
    }
    for (janglab::Stage st : stages)
        if (needs_spherical(st) && !cfg.model.is_spherical())
            throw janglab::ValidationError(fmt::format(
                "stage '{}' needs spherically symmetric data (constant mbar and pbar)",
                janglab::stage_name(st)));

    const std::filesystem::path out_dir = !out_arg.empty() ? std::filesystem::path(out_arg)
                                          : cfg.output_dir  ? std::filesystem::path(*cfg.output_dir)
                                                            : std::filesystem::path("jang-lab-out");

    std::vector<RunRecord> runs;
    for (janglab::Stage st : stages) runs.push_back({st, janglab::run_stage(cfg.model, st, cfg.options)});

    std::filesystem::create_directories(out_dir);
    const auto report = build_report(cfg, runs, timestamp(fixed_clock));
    {
        std::ofstream out(out_dir / "report.json");
        if (!out) throw janglab::ValidationError(fmt::format("cannot write into '{}'", out_dir.string()));
        out << report.dump(2) << '\n';
    }
    write_series(out_dir, cfg, runs);

    std::cout << fmt::format("{} -> {} ({})\n", fmt::join(report["stages_run"].get<std::vector<std::string>>(), ","),
                             (out_dir / "report.json").string(), report["status"].get<std::string>());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jang-equation reduction pipeline for asymptotically hyperbolic model data"};
    app.set_version_flag("--version", "jang-lab 0.3.0");
    std::string stage;
    std::string config;
    std::string out;
    bool fixed_clock = false;
    app.add_option("stage", stage,
                   "alpha | barriers | mass | jang | conformal | verify | pipeline "
                   "(default: the config's 'stages' list)");
    app.add_option("-c,--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("-o,--out", out, "output directory (default: config 'output' or ./jang-lab-out)");
    app.add_flag("--fixed-clock", fixed_clock, "stamp the report with the epoch so reruns are byte-identical");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        return run(stage, config, out, fixed_clock);
    } catch (const janglab::ValidationError& e) {
        std::cerr << "jang-lab: invalid input: " << e.what() << '\n';
        return kExitUsage;
    } catch (const janglab::Error& e) {
        std::cerr << "jang-lab: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "jang-lab: " << e.what() << '\n';
        return kExitUsage;
    }
}
