// scenario.hpp — Named, reproducible simulation runs.
//
// A scenario is a flat INI description of one figure-style dataset: which
// sweep to run (spectra, energy ledger, or instrument calibration), the
// device parameters, the pulse schedule, and the numerical grids. Five
// built-in scenarios ship embedded in the binary; external files use the
// same schema. Every run writes CSV data plus a manifest with content
// hashes and a resolved.ini that reproduces the run byte for byte.
#pragma once

#include <string>
#include <vector>

#include "dispersim/config.hpp"
#include "dispersim/model.hpp"

namespace dispersim {

enum class ScenarioKind { Spectra, Energy, Calibration };

std::string kind_label(ScenarioKind kind);

struct ScenarioSpec {
    std::string name;
    ScenarioKind kind{ScenarioKind::Spectra};
    std::vector<QubitPrep> preparations;
    SystemModel model; // probe amplitude is calibrated per run, not configured
    PulseSchedule schedule;

    std::vector<double> omega_rads;         // qubit drive sweep
    std::vector<double> spectra_omega_rads; // sweep points that get full spectra
    std::vector<double> n_ref;              // probe strengths in emitted photons

    double dt{1e-9};
    double dt_coarse{25e-9};
    double f_min_hz{-12e6};
    double f_max_hz{12e6};
    int n_freq{481};

    std::vector<double> rabi_amplitudes; // calibration kind only
    double rabi_drive{3e-6};
    std::vector<double> photon_targets;

    bool with_fringe{true};
    std::string mode_label{"experimental"};
};

// Schema-checked translation; unknown sections or keys are ConfigErrors with
// line numbers. A [manifest] section is ignored so resolved.ini round-trips.
ScenarioSpec scenario_from_config(const Config& cfg);

std::vector<std::string> builtin_scenario_names();
std::string builtin_scenario_text(const std::string& name);
ScenarioSpec builtin_scenario(const std::string& name);

// Physics and grid checks beyond raw parsing. Entries are prefixed
// "error:" or "warning:"; runs refuse to start on errors.
std::vector<std::string> validate_scenario(const ScenarioSpec& spec);

struct ScenarioReport {
    std::string name;
    std::string out_dir;
    std::vector<std::string> files; // basenames in write order
    std::vector<std::string> log;   // summary lines, one datum each
};

// Executes the scenario and writes its outputs under out_root/<name>/.
// workers > 1 distributes independent sweep points over threads; results
// and files are identical regardless of the worker count.
ScenarioReport run_scenario(const ScenarioSpec& spec, const std::string& out_root,
                            int workers = 1);

} // namespace dispersim
