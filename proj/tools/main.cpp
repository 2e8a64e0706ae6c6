// Command-line front end: list, validate, and run scenarios.
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dispersim/config.hpp"
#include "dispersim/scenario.hpp"

namespace {

bool is_builtin(const std::string& name) {
    for (const std::string& n : dispersim::builtin_scenario_names()) {
        if (n == name) return true;
    }
    return false;
}

dispersim::ScenarioSpec load_spec(const std::string& builtin, const std::string& config_path,
                                  double dt_ns, double dtc_ns) {
    dispersim::ScenarioSpec spec =
        builtin.empty()
            ? dispersim::scenario_from_config(dispersim::Config::parse_file(config_path))
            : dispersim::builtin_scenario(builtin);
    if (dt_ns > 0.0) spec.dt = dt_ns * 1e-9;
    if (dtc_ns > 0.0) spec.dt_coarse = dtc_ns * 1e-9;
    return spec;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dispersive qubit readout: spectra, calibrations, and energy ledgers"};
    app.require_subcommand(1);

    std::string scenario_name;
    std::string config_path;
    std::string out_dir = "out";
    int workers = 1;
    double dt_ns = 0.0;
    double dtc_ns = 0.0;

    const auto add_source = [&](CLI::App* cmd) {
        CLI::Option* s = cmd->add_option("--scenario", scenario_name, "built-in scenario name");
        CLI::Option* c = cmd->add_option("--config", config_path, "scenario INI file");
        s->excludes(c);
        c->excludes(s);
        cmd->add_option("--dt-ns", dt_ns, "override the fine time step, in ns");
        cmd->add_option("--dtc-ns", dtc_ns, "override the correlation grid step, in ns");
    };

    CLI::App* list = app.add_subcommand("list-scenarios", "print the built-in scenario set");
    CLI::App* validate =
        app.add_subcommand("validate", "check a scenario without running anything");
    add_source(validate);
    CLI::App* run = app.add_subcommand("run", "run a scenario and write its outputs");
    add_source(run);
    run->add_option("--out-dir", out_dir, "output root directory (default: out)");
    run->add_option("--workers", workers, "threads for independent sweep points")
        ->check(CLI::Range(1, 64));

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const std::string& name : dispersim::builtin_scenario_names()) {
                const dispersim::ScenarioSpec spec = dispersim::builtin_scenario(name);
                std::printf("%-20s %s\n", name.c_str(),
                            dispersim::kind_label(spec.kind).c_str());
            }
            return 0;
        }

        if (scenario_name.empty() && config_path.empty()) {
            std::fprintf(stderr, "error: pass --scenario <name> or --config <file>\n");
            return 2;
        }
        const dispersim::ScenarioSpec spec =
            load_spec(scenario_name, config_path, dt_ns, dtc_ns);

        if (validate->parsed()) {
            bool failed = false;
            for (const std::string& problem : dispersim::validate_scenario(spec)) {
                std::printf("%s\n", problem.c_str());
                if (problem.rfind("error:", 0) == 0) failed = true;
            }
            if (!failed) {
                std::printf("ok: scenario '%s' is runnable\n", spec.name.c_str());
            }
            return failed ? 1 : 0;
        }

        const dispersim::ScenarioReport report =
            dispersim::run_scenario(spec, out_dir, workers);
        for (const std::string& line : report.log) {
            std::printf("%s\n", line.c_str());
        }
        for (const std::string& file : report.files) {
            std::printf("wrote %s/%s\n", report.out_dir.c_str(), file.c_str());
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
