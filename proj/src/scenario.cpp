#include "dispersim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dispersim/calibration.hpp"
#include "dispersim/energetics.hpp"
#include "dispersim/errors.hpp"
#include "dispersim/numeric.hpp"
#include "dispersim/spectrum.hpp"

namespace dispersim {

namespace {

using OrderedJson = nlohmann::ordered_json;

// ---------------------------------------------------------------- schema --

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"scenario", {"name", "kind", "preparations"}},
        {"model",
         {"chi_mhz", "kappa_mhz", "kappa_in_fraction", "t1_us", "t2_star_us", "decoherence",
          "n_max"}},
        {"schedule",
         {"drive_start_us", "drive_duration_us", "probe_start_us", "probe_duration_us",
          "record_duration_us"}},
        {"sweep", {"omega_mhz", "spectra_omega_mhz", "n_ref"}},
        {"numerics", {"dt_ns", "dtc_ns", "freq_min_mhz", "freq_max_mhz", "n_freq"}},
        {"calibration", {"rabi_amplitudes", "rabi_drive_us", "photon_targets"}},
        {"energy", {"mode", "with_fringe"}},
    };
    return s;
}

void check_schema(const Config& cfg) {
    for (const std::string& section : cfg.sections()) {
        if (section == "manifest") continue; // resolved.ini provenance block
        const auto known = schema().find(section);
        if (known == schema().end()) {
            throw ConfigError("unknown section [" + section + "] in " + cfg.origin());
        }
        for (const std::string& key : cfg.keys(section)) {
            if (!known->second.count(key)) {
                throw ConfigError("unknown key '" + key + "' in [" + section + "]",
                                  cfg.line_of(section, key));
            }
        }
    }
}

int config_int(const Config& cfg, const std::string& section, const std::string& key,
               int fallback) {
    if (!cfg.has(section, key)) return fallback;
    const double v = cfg.get_number(section, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ConfigError("expected an integer for '" + key + "'", cfg.line_of(section, key));
    }
    return static_cast<int>(v);
}

QubitPrep parse_prep(const std::string& label, int line) {
    if (label == "g") return QubitPrep::Ground;
    if (label == "e") return QubitPrep::Excited;
    if (label == "plus") return QubitPrep::Plus;
    if (label == "minus") return QubitPrep::Minus;
    throw ConfigError("unknown preparation '" + label + "' (use g, e, plus, minus)", line);
}

bool valid_scenario_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    }
    return true;
}

// ----------------------------------------------------------- formatting --

std::string join_numbers(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += fmt_g(v[i]);
    }
    return out;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// -------------------------------------------------------------- workers --

template <typename Fn>
void for_each_index(std::size_t n, int workers, Fn fn) {
    const int usable = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (usable == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(usable);
    for (int w = 0; w < usable; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// -------------------------------------------------------------- runners --

struct SpectraSlot {
    std::vector<PowerSpectrum> spectra;      // per preparation when computed
    std::vector<LorentzianTriplet> triplets; // parallel to spectra
    std::vector<char> has_triplet;
    std::vector<PhotonCount> photons; // per preparation, always
};

void run_calibration_kind(const ScenarioSpec& spec,
                          std::vector<std::pair<std::string, std::string>>& outputs,
                          OrderedJson& results, std::vector<std::string>& log) {
    const RabiCalibration rabi =
        rabi_calibration(spec.model, spec.rabi_amplitudes, spec.rabi_drive, spec.dt);
    {
        std::ostringstream csv;
        csv << "amplitude,omega_true_hz,omega_fit_hz,usable\n";
        for (const RabiPoint& p : rabi.points) {
            csv << fmt_g(p.amplitude) << ',' << fmt_g(p.omega_true_rads / kTwoPi) << ','
                << fmt_g(p.omega_fit_rads / kTwoPi) << ',' << (p.usable ? 1 : 0) << '\n';
        }
        outputs.emplace_back("rabi.csv", csv.str());
    }
    log.push_back("rabi slope " + fmt_g(rads_to_mhz(rabi.rads_per_unit), 6) +
                  " MHz per unit, worst line deviation " + fmt_g(rabi.max_rel_error, 3));
    results["rabi"] = {{"rads_per_unit", rabi.rads_per_unit},
                       {"mhz_per_unit", rads_to_mhz(rabi.rads_per_unit)},
                       {"max_rel_error", rabi.max_rel_error}};

    std::vector<double> amplitudes{0.0};
    OrderedJson targets = OrderedJson::array();
    {
        std::ostringstream csv;
        csv << "n_target,amplitude_rads,amplitude_mhz\n";
        for (double n_target : spec.photon_targets) {
            const double eps =
                drive_amplitude_for_photons(spec.model, spec.schedule, n_target, spec.dt);
            amplitudes.push_back(eps);
            csv << fmt_g(n_target) << ',' << fmt_g(eps) << ',' << fmt_g(rads_to_mhz(eps))
                << '\n';
            targets.push_back({{"n_target", n_target}, {"amplitude_rads", eps}});
        }
        outputs.emplace_back("targets.csv", csv.str());
    }
    results["probe_targets"] = targets;

    const PhotonCalibration pc =
        ramsey_photon_calibration(spec.model, spec.schedule, amplitudes, spec.dt);
    {
        std::ostringstream csv;
        csv << "amplitude_rads,amplitude_mhz,fringe,normalized,photons_ramsey,photons_emitted,"
               "excluded\n";
        for (const RamseyPoint& p : pc.points) {
            csv << fmt_g(p.amplitude_rads) << ',' << fmt_g(rads_to_mhz(p.amplitude_rads)) << ','
                << fmt_g(p.fringe_amplitude) << ',' << fmt_g(p.normalized) << ','
                << fmt_g(p.photons_ramsey) << ',' << fmt_g(p.photons_emitted) << ','
                << (p.excluded ? 1 : 0) << '\n';
        }
        outputs.emplace_back("ramsey.csv", csv.str());
    }
    log.push_back("ramsey contrast width " + fmt_g(pc.gauss_width_mhz, 6) + " MHz (fit " +
                  (pc.fit_converged ? "converged" : "did not converge") + ")");
    results["ramsey"] = {{"reference_fringe", pc.reference_fringe},
                         {"gauss_amp", pc.gauss_amp},
                         {"gauss_width_mhz", pc.gauss_width_mhz},
                         {"fit_converged", pc.fit_converged}};
}

void run_spectra_kind(const ScenarioSpec& spec,
                      std::vector<std::pair<std::string, std::string>>& outputs,
                      OrderedJson& results, std::vector<std::string>& log, int workers) {
    const double n_ref = spec.n_ref.front();
    const double eps = drive_amplitude_for_photons(spec.model, spec.schedule, n_ref, spec.dt);
    log.push_back("probe amplitude " + fmt_g(rads_to_mhz(eps), 6) + " MHz for " +
                  fmt_g(n_ref) + " photons");
    results["n_ref"] = n_ref;
    results["probe_amplitude_rads"] = eps;

    SystemModel base = spec.model;
    base.probe.amplitude = Complex(eps, 0.0);

    const auto wants_spectrum = [&](double omega) {
        for (double s : spec.spectra_omega_rads) {
            if (std::abs(omega - s) < 1.0) return true;
        }
        return false;
    };

    std::vector<SpectraSlot> slots(spec.omega_rads.size());
    for_each_index(spec.omega_rads.size(), workers, [&](std::size_t i) {
        SystemModel m = base;
        m.omega_rabi = spec.omega_rads[i];
        SpectraSlot& slot = slots[i];

        EvolveOptions opts;
        opts.dt = spec.dt;
        opts.duration = spec.schedule.record_duration;

        for (QubitPrep prep : spec.preparations) {
            const DensityMatrix rho0 = product_state(m.space, prep);
            if (wants_spectrum(m.omega_rabi)) {
                opts.store_states = true;
                const CorrelationResult corr =
                    two_time_correlator(m, rho0, spec.dt_coarse, opts);
                PowerSpectrum s = power_spectrum(corr, m.kappa(), spec.f_min_hz, spec.f_max_hz,
                                                 spec.n_freq);
                s.prep = prep_label(prep);
                s.model_id = spec.name;
                slot.photons.push_back(emitted_photons(m, corr.trajectory));
                if (m.omega_rabi > 1.0) {
                    slot.triplets.push_back(fit_triplet(s, m.omega_rabi));
                    slot.has_triplet.push_back(1);
                } else {
                    slot.triplets.emplace_back();
                    slot.has_triplet.push_back(0);
                }
                slot.spectra.push_back(std::move(s));
            } else {
                opts.store_states = false;
                const StateTrajectory traj = evolve(m, rho0, opts);
                slot.photons.push_back(emitted_photons(m, traj));
            }
        }
    });

    std::ostringstream trans;
    trans << "omega_hz,prep,photons,incomplete_ringdown\n";
    std::ostringstream spectra;
    spectra << "omega_hz,prep,freq_hz,s_photons_per_hz\n";
    std::ostringstream peaks;
    peaks << "omega_hz,prep,peak,center_hz,hwhm_hz,area,mean_shift_hz,residual_rms\n";

    for (std::size_t i = 0; i < spec.omega_rads.size(); ++i) {
        const SpectraSlot& slot = slots[i];
        const std::string omega_hz = fmt_g(spec.omega_rads[i] / kTwoPi);
        for (std::size_t p = 0; p < spec.preparations.size(); ++p) {
            const std::string prep = prep_label(spec.preparations[p]);
            trans << omega_hz << ',' << prep << ',' << fmt_g(slot.photons[p].value) << ','
                  << (slot.photons[p].incomplete_ringdown ? 1 : 0) << '\n';
            if (p >= slot.spectra.size()) continue;

            const PowerSpectrum& s = slot.spectra[p];
            for (std::size_t k = 0; k < s.freq_hz.size(); ++k) {
                spectra << omega_hz << ',' << prep << ',' << fmt_g(s.freq_hz[k]) << ','
                        << fmt_g(s.s[k]) << '\n';
            }
            if (slot.has_triplet[p]) {
                const LorentzianTriplet& t = slot.triplets[p];
                for (int peak = 0; peak < 3; ++peak) {
                    peaks << omega_hz << ',' << prep << ',' << peak << ','
                          << fmt_g(t.peaks[peak].center_hz) << ','
                          << fmt_g(t.peaks[peak].hwhm_hz) << ',' << fmt_g(t.peaks[peak].area)
                          << ',' << fmt_g(t.mean_shift_hz) << ',' << fmt_g(t.residual_rms)
                          << '\n';
                }
                log.push_back("omega " + fmt_g(rads_to_mhz(spec.omega_rads[i]), 4) + " MHz " +
                              prep + ": sidebands at " +
                              fmt_g(t.peaks[0].center_hz / 1e6, 5) + " / " +
                              fmt_g(t.peaks[2].center_hz / 1e6, 5) + " MHz");
            }
        }
    }
    outputs.emplace_back("transmission.csv", trans.str());
    outputs.emplace_back("spectra.csv", spectra.str());
    outputs.emplace_back("peaks.csv", peaks.str());
}

void run_energy_kind(const ScenarioSpec& spec,
                     std::vector<std::pair<std::string, std::string>>& outputs,
                     OrderedJson& results, std::vector<std::string>& log, int workers) {
    std::map<double, double> eps_for;
    OrderedJson probes = OrderedJson::array();
    for (double n : spec.n_ref) {
        if (eps_for.count(n)) continue;
        eps_for[n] = drive_amplitude_for_photons(spec.model, spec.schedule, n, spec.dt);
        probes.push_back({{"n_ref", n}, {"amplitude_rads", eps_for[n]}});
        log.push_back("probe amplitude " + fmt_g(rads_to_mhz(eps_for[n]), 6) + " MHz for " +
                      fmt_g(n) + " photons");
    }
    results["probe_targets"] = probes;

    struct Task {
        double n_ref;
        double omega;
    };
    std::vector<Task> tasks;
    for (double n : spec.n_ref) {
        for (double w : spec.omega_rads) tasks.push_back({n, w});
    }

    std::vector<EnergyBalanceResult> slots(tasks.size());
    for_each_index(tasks.size(), workers, [&](std::size_t k) {
        EnergyBalanceInput in;
        in.model = spec.model;
        in.model.omega_rabi = tasks[k].omega;
        in.model.probe.amplitude = Complex(eps_for.at(tasks[k].n_ref), 0.0);
        in.schedule = spec.schedule;
        in.n_ref = tasks[k].n_ref;
        in.dt = spec.dt;
        in.dt_coarse = spec.dt_coarse;
        in.f_min_hz = spec.f_min_hz;
        in.f_max_hz = spec.f_max_hz;
        in.n_freq = spec.n_freq;
        in.with_fringe = spec.with_fringe;
        slots[k] = energy_balance(in);
    });

    std::ostringstream ledger;
    ledger << "omega_hz,n_ref,de_qubit,de_photon_trans,de_cross,residual,mode\n";
    std::ostringstream extra;
    extra << "omega_hz,n_ref,de_qubit_fringe,de_qubit_sx,de_qubit_plus,de_qubit_minus,"
             "de_coh_plus,de_coh_minus,"
             "photons_plus,photons_minus,spectrum_photons_plus,spectrum_photons_minus,"
             "incomplete_ringdown\n";

    for (std::size_t k = 0; k < tasks.size(); ++k) {
        const EnergyLedgerRow& row = slots[k].row;
        const std::vector<PreparationRun>& preps = slots[k].preps;
        const std::string omega_hz = fmt_g(row.omega_rads / kTwoPi);
        const std::string n_ref = fmt_g(row.n_ref);

        ledger << omega_hz << ',' << n_ref << ',' << fmt_g(rads_to_mhz(row.de_qubit)) << ','
               << fmt_g(rads_to_mhz(row.de_photon_trans)) << ','
               << fmt_g(rads_to_mhz(row.de_cross)) << ',' << fmt_g(rads_to_mhz(row.residual))
               << ',' << spec.mode_label << '\n';

        extra << omega_hz << ',' << n_ref << ',' << fmt_g(rads_to_mhz(row.de_qubit_fringe))
              << ',' << fmt_g(rads_to_mhz(row.de_qubit_sx)) << ','
              << fmt_g(rads_to_mhz(preps[0].de_qubit_direct)) << ','
              << fmt_g(rads_to_mhz(preps[1].de_qubit_direct)) << ','
              << fmt_g(rads_to_mhz(preps[0].de_qubit_coh)) << ','
              << fmt_g(rads_to_mhz(preps[1].de_qubit_coh)) << ','
              << fmt_g(preps[0].photons.value) << ',' << fmt_g(preps[1].photons.value) << ','
              << fmt_g(preps[0].moments.photons) << ',' << fmt_g(preps[1].moments.photons)
              << ','
              << ((preps[0].photons.incomplete_ringdown || preps[1].photons.incomplete_ringdown)
                      ? 1
                      : 0)
              << '\n';

        log.push_back("omega " + fmt_g(rads_to_mhz(row.omega_rads), 4) + " MHz, N " + n_ref +
                      ": residual " +
                      fmt_g(100.0 * row.residual / std::max(row.omega_rads, 1e-300), 3) +
                      "% of the drive quantum");
    }
    outputs.emplace_back("ledger.csv", ledger.str());
    outputs.emplace_back("estimators.csv", extra.str());
}

// ------------------------------------------------------------ manifests --

std::string resolved_ini(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << spec.name << '\n';
    out << "kind = " << kind_label(spec.kind) << '\n';
    out << "preparations = ";
    for (std::size_t i = 0; i < spec.preparations.size(); ++i) {
        if (i) out << ", ";
        out << prep_label(spec.preparations[i]);
    }
    out << "\n\n[model]\n";
    out << "chi_mhz = " << fmt_g(rads_to_mhz(spec.model.chi)) << '\n';
    out << "kappa_mhz = " << fmt_g(rads_to_mhz(spec.model.kappa())) << '\n';
    out << "kappa_in_fraction = " << fmt_g(spec.model.kappa_in / spec.model.kappa()) << '\n';
    out << "t1_us = " << fmt_g(spec.model.t1 * 1e6) << '\n';
    out << "t2_star_us = " << fmt_g(spec.model.t2_star * 1e6) << '\n';
    out << "decoherence = " << (spec.model.decoherence ? "true" : "false") << '\n';
    out << "n_max = " << spec.model.space.n_max << '\n';
    out << "\n[schedule]\n";
    out << "drive_start_us = " << fmt_g(spec.schedule.drive_start * 1e6) << '\n';
    out << "drive_duration_us = " << fmt_g(spec.schedule.drive_duration * 1e6) << '\n';
    out << "probe_start_us = " << fmt_g(spec.schedule.probe_start * 1e6) << '\n';
    out << "probe_duration_us = " << fmt_g(spec.schedule.probe_duration * 1e6) << '\n';
    out << "record_duration_us = " << fmt_g(spec.schedule.record_duration * 1e6) << '\n';
    out << "\n[numerics]\n";
    out << "dt_ns = " << fmt_g(spec.dt * 1e9) << '\n';
    out << "dtc_ns = " << fmt_g(spec.dt_coarse * 1e9) << '\n';
    if (spec.kind != ScenarioKind::Calibration) {
        out << "freq_min_mhz = " << fmt_g(spec.f_min_hz / 1e6) << '\n';
        out << "freq_max_mhz = " << fmt_g(spec.f_max_hz / 1e6) << '\n';
        out << "n_freq = " << spec.n_freq << '\n';

        std::vector<double> omega_mhz, spectra_mhz;
        for (double w : spec.omega_rads) omega_mhz.push_back(rads_to_mhz(w));
        for (double w : spec.spectra_omega_rads) spectra_mhz.push_back(rads_to_mhz(w));
        out << "\n[sweep]\n";
        out << "omega_mhz = " << join_numbers(omega_mhz) << '\n';
        if (spec.kind == ScenarioKind::Spectra) {
            out << "spectra_omega_mhz = " << join_numbers(spectra_mhz) << '\n';
        }
        out << "n_ref = " << join_numbers(spec.n_ref) << '\n';
    }
    if (spec.kind == ScenarioKind::Calibration) {
        out << "\n[calibration]\n";
        out << "rabi_amplitudes = " << join_numbers(spec.rabi_amplitudes) << '\n';
        out << "rabi_drive_us = " << fmt_g(spec.rabi_drive * 1e6) << '\n';
        out << "photon_targets = " << join_numbers(spec.photon_targets) << '\n';
    }
    if (spec.kind == ScenarioKind::Energy) {
        out << "\n[energy]\n";
        out << "mode = " << spec.mode_label << '\n';
        out << "with_fringe = " << (spec.with_fringe ? "true" : "false") << '\n';
    }
    out << "\n[manifest]\n";
    out << "origin = resolved\n";
    return out.str();
}

OrderedJson settings_json(const ScenarioSpec& spec) {
    OrderedJson s;
    s["chi_mhz"] = rads_to_mhz(spec.model.chi);
    s["kappa_mhz"] = rads_to_mhz(spec.model.kappa());
    s["kappa_in_fraction"] = spec.model.kappa_in / spec.model.kappa();
    s["t1_us"] = spec.model.t1 * 1e6;
    s["t2_star_us"] = spec.model.t2_star * 1e6;
    s["decoherence"] = spec.model.decoherence;
    s["n_max"] = spec.model.space.n_max;
    s["drive_window_us"] = {spec.schedule.drive_start * 1e6, spec.schedule.drive_end() * 1e6};
    s["probe_window_us"] = {spec.schedule.probe_start * 1e6, spec.schedule.probe_end() * 1e6};
    s["record_duration_us"] = spec.schedule.record_duration * 1e6;
    s["dt_ns"] = spec.dt * 1e9;
    s["dtc_ns"] = spec.dt_coarse * 1e9;
    if (spec.kind != ScenarioKind::Calibration) {
        s["freq_window_mhz"] = {spec.f_min_hz / 1e6, spec.f_max_hz / 1e6};
        s["n_freq"] = spec.n_freq;
        OrderedJson omegas = OrderedJson::array();
        for (double w : spec.omega_rads) omegas.push_back(rads_to_mhz(w));
        s["omega_mhz"] = omegas;
        OrderedJson refs = OrderedJson::array();
        for (double n : spec.n_ref) refs.push_back(n);
        s["n_ref"] = refs;
    }
    return s;
}

// --------------------------------------------------------- built-in set --

struct BuiltinEntry {
    const char* name;
    const char* text;
};

const BuiltinEntry kBuiltins[] = {
    {"fig2-calibration", R"(# Instrument calibrations: Rabi frequency per drive unit and the
# Ramsey-contrast measurement-strength curve.
[scenario]
name = fig2-calibration
kind = calibration
preparations = plus

[model]
chi_mhz = -4.0
kappa_mhz = 0.9
kappa_in_fraction = 0.1
t1_us = 13.5
t2_star_us = 2.5
decoherence = true
n_max = 10

[schedule]
drive_start_us = 0
drive_duration_us = 3
probe_start_us = 0
probe_duration_us = 2
record_duration_us = 3

[numerics]
dt_ns = 1
dtc_ns = 25

[calibration]
rabi_amplitudes = 0, 0.5, 1, 2, 3, 4, 5, 6, 7
rabi_drive_us = 3
photon_targets = 0.2, 0.8, 1.9, 3.4
)"},
    {"fig3b-sim", R"(# Emission spectra versus qubit drive at weak measurement (N = 0.2):
# Mollow-style triplet with measurement-rate-narrowed sidebands, one
# spectrum per preparation and drive point.
[scenario]
name = fig3b-sim
kind = spectra
preparations = minus, plus

[model]
chi_mhz = -4.0
kappa_mhz = 0.9
kappa_in_fraction = 0.1
t1_us = 13.5
t2_star_us = 2.5
decoherence = true
n_max = 10

[schedule]
drive_start_us = 0
drive_duration_us = 3
probe_start_us = 0
probe_duration_us = 2
record_duration_us = 3

[sweep]
omega_mhz = 0, 1, 2, 3, 4, 5, 6, 7
spectra_omega_mhz = 0, 1, 2, 3, 4, 5, 6, 7
n_ref = 0.2

[numerics]
dt_ns = 1
dtc_ns = 25
freq_min_mhz = -12
freq_max_mhz = 12
n_freq = 481
)"},
    {"fig3d-sim", R"(# Transmission and spectra at strong measurement (N = 3.4): sideband
# pulling inside the drive splitting.
[scenario]
name = fig3d-sim
kind = spectra
preparations = minus

[model]
chi_mhz = -4.0
kappa_mhz = 0.9
kappa_in_fraction = 0.1
t1_us = 13.5
t2_star_us = 2.5
decoherence = true
n_max = 10

[schedule]
drive_start_us = 0
drive_duration_us = 3
probe_start_us = 0
probe_duration_us = 2
record_duration_us = 3

[sweep]
omega_mhz = 0, 1, 2, 3, 4, 5, 6, 7
spectra_omega_mhz = 0, 3
n_ref = 3.4

[numerics]
dt_ns = 1
dtc_ns = 25
freq_min_mhz = -12
freq_max_mhz = 12
n_freq = 481
)"},
    {"fig4-ideal", R"(# Energy ledger sweep with intrinsic decoherence disabled: the released
# qubit energy should match the transmitted moment plus the reflected
# cross term.
[scenario]
name = fig4-ideal
kind = energy
preparations = plus, minus

[model]
chi_mhz = -4.0
kappa_mhz = 0.9
kappa_in_fraction = 0.1
t1_us = 13.5
t2_star_us = 2.5
decoherence = false
n_max = 10

[schedule]
drive_start_us = 0
drive_duration_us = 4
probe_start_us = 1
probe_duration_us = 2
record_duration_us = 4

[sweep]
omega_mhz = 1, 2, 3, 4, 5
n_ref = 0.2, 0.8, 1.9, 3.4

[numerics]
dt_ns = 1
dtc_ns = 25
freq_min_mhz = -15
freq_max_mhz = 15
n_freq = 601

[energy]
mode = ideal
with_fringe = true
)"},
    {"fig4-experimental", R"(# Energy ledger sweep with T1/T2* active; the residual reports the
# decoherence leak rather than a conservation failure.
[scenario]
name = fig4-experimental
kind = energy
preparations = plus, minus

[model]
chi_mhz = -4.0
kappa_mhz = 0.9
kappa_in_fraction = 0.1
t1_us = 13.5
t2_star_us = 2.5
decoherence = true
n_max = 10

[schedule]
drive_start_us = 0
drive_duration_us = 4
probe_start_us = 1
probe_duration_us = 2
record_duration_us = 4

[sweep]
omega_mhz = 1, 2, 3, 4, 5
n_ref = 0.2, 0.8, 1.9, 3.4

[numerics]
dt_ns = 1
dtc_ns = 25
freq_min_mhz = -15
freq_max_mhz = 15
n_freq = 601

[energy]
mode = experimental
with_fringe = true
)"},
};

} // namespace

std::string kind_label(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::Spectra: return "spectra";
    case ScenarioKind::Energy: return "energy";
    case ScenarioKind::Calibration: return "calibration";
    }
    return "unknown";
}

ScenarioSpec scenario_from_config(const Config& cfg) {
    check_schema(cfg);

    ScenarioSpec spec;
    spec.name = cfg.get_string("scenario", "name");
    if (!valid_scenario_name(spec.name)) {
        throw ConfigError("scenario name '" + spec.name + "' is not directory-safe",
                          cfg.line_of("scenario", "name"));
    }
    const std::string kind = cfg.get_string("scenario", "kind");
    if (kind == "spectra") {
        spec.kind = ScenarioKind::Spectra;
    } else if (kind == "energy") {
        spec.kind = ScenarioKind::Energy;
    } else if (kind == "calibration") {
        spec.kind = ScenarioKind::Calibration;
    } else {
        throw ConfigError("unknown kind '" + kind + "' (use spectra, energy, calibration)",
                          cfg.line_of("scenario", "kind"));
    }

    spec.model.space.n_max = config_int(cfg, "model", "n_max", 10);
    spec.model.chi = mhz_to_rads(cfg.get_number_or("model", "chi_mhz", -4.0));
    const double kappa = mhz_to_rads(cfg.get_number_or("model", "kappa_mhz", 0.9));
    const double fraction = cfg.get_number_or("model", "kappa_in_fraction", 0.1);
    spec.model.kappa_in = fraction * kappa;
    spec.model.kappa_out = kappa - spec.model.kappa_in;
    spec.model.t1 = us_to_s(cfg.get_number_or("model", "t1_us", 13.5));
    spec.model.t2_star = us_to_s(cfg.get_number_or("model", "t2_star_us", 2.5));
    spec.model.decoherence = cfg.get_bool_or("model", "decoherence", true);
    spec.model.omega_rabi = 0.0; // per sweep point

    spec.schedule.drive_start = us_to_s(cfg.get_number_or("schedule", "drive_start_us", 0.0));
    spec.schedule.drive_duration =
        us_to_s(cfg.get_number_or("schedule", "drive_duration_us", 3.0));
    spec.schedule.probe_start = us_to_s(cfg.get_number_or("schedule", "probe_start_us", 0.0));
    spec.schedule.probe_duration =
        us_to_s(cfg.get_number_or("schedule", "probe_duration_us", 2.0));
    spec.schedule.record_duration =
        us_to_s(cfg.get_number_or("schedule", "record_duration_us", 3.0));
    spec.model.probe.start = spec.schedule.probe_start;
    spec.model.probe.duration = spec.schedule.probe_duration;

    if (spec.kind != ScenarioKind::Calibration) {
        for (double w : cfg.get_number_list("sweep", "omega_mhz")) {
            spec.omega_rads.push_back(mhz_to_rads(w));
        }
        spec.n_ref = cfg.get_number_list("sweep", "n_ref");
        if (cfg.has("sweep", "spectra_omega_mhz")) {
            for (double w : cfg.get_number_list("sweep", "spectra_omega_mhz")) {
                spec.spectra_omega_rads.push_back(mhz_to_rads(w));
            }
        } else if (spec.kind == ScenarioKind::Spectra) {
            spec.spectra_omega_rads = spec.omega_rads;
        }
    }

    spec.dt = cfg.get_number_or("numerics", "dt_ns", 1.0) * 1e-9;
    spec.dt_coarse = cfg.get_number_or("numerics", "dtc_ns", 25.0) * 1e-9;
    spec.f_min_hz = cfg.get_number_or("numerics", "freq_min_mhz", -12.0) * 1e6;
    spec.f_max_hz = cfg.get_number_or("numerics", "freq_max_mhz", 12.0) * 1e6;
    spec.n_freq = config_int(cfg, "numerics", "n_freq", 481);

    if (spec.kind == ScenarioKind::Calibration) {
        spec.rabi_amplitudes = cfg.get_number_list("calibration", "rabi_amplitudes");
        spec.rabi_drive = us_to_s(cfg.get_number_or("calibration", "rabi_drive_us", 3.0));
        spec.photon_targets = cfg.get_number_list("calibration", "photon_targets");
    }

    spec.with_fringe = cfg.get_bool_or("energy", "with_fringe", true);
    spec.mode_label = cfg.get_string_or("energy", "mode",
                                        spec.model.decoherence ? "experimental" : "ideal");

    if (cfg.has("scenario", "preparations")) {
        const int line = cfg.line_of("scenario", "preparations");
        for (const std::string& label : cfg.get_string_list("scenario", "preparations")) {
            spec.preparations.push_back(parse_prep(label, line));
        }
    } else if (spec.kind == ScenarioKind::Energy) {
        spec.preparations = {QubitPrep::Plus, QubitPrep::Minus};
    } else if (spec.kind == ScenarioKind::Calibration) {
        spec.preparations = {QubitPrep::Plus};
    } else {
        spec.preparations = {QubitPrep::Minus};
    }
    return spec;
}

std::vector<std::string> builtin_scenario_names() {
    std::vector<std::string> out;
    for (const BuiltinEntry& e : kBuiltins) out.push_back(e.name);
    return out;
}

std::string builtin_scenario_text(const std::string& name) {
    for (const BuiltinEntry& e : kBuiltins) {
        if (name == e.name) return e.text;
    }
    throw ConfigError("no built-in scenario named '" + name + "'");
}

ScenarioSpec builtin_scenario(const std::string& name) {
    return scenario_from_config(
        Config::parse_string(builtin_scenario_text(name), "builtin:" + name));
}

std::vector<std::string> validate_scenario(const ScenarioSpec& spec) {
    std::vector<std::string> out;
    const auto err = [&](const std::string& s) { out.push_back("error: " + s); };
    const auto warn = [&](const std::string& s) { out.push_back("warning: " + s); };

    if (!valid_scenario_name(spec.name)) err("scenario name is empty or not directory-safe");
    if (spec.preparations.empty()) err("no qubit preparations selected");
    if (spec.model.space.n_max < 1) err("n_max must be at least 1");
    if (spec.dt <= 0.0) err("dt must be positive");

    double max_omega = 0.0;
    for (double w : spec.omega_rads) {
        max_omega = std::max(max_omega, w);
        if (w < 0.0) err("negative drive frequency in the sweep");
    }

    SystemModel probe_model = spec.model;
    probe_model.omega_rabi = max_omega;
    try {
        validate_model(probe_model, spec.schedule);
    } catch (const std::exception& e) {
        err(e.what());
    }

    if (spec.dt > 0.0) {
        const double ratio = spec.dt_coarse / spec.dt;
        if (ratio < 1.0 || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
            err("coarse step is not a whole multiple of dt");
        }
        const double steps = spec.schedule.record_duration / spec.dt_coarse;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps) {
            err("record window is not a whole number of coarse steps");
        }
        for (double edge : {spec.schedule.probe_start, spec.schedule.probe_end()}) {
            if (edge <= 0.0 || edge >= spec.schedule.record_duration) continue;
            const double frac = edge / spec.dt;
            if (std::abs(frac - std::round(frac)) > 1e-6) {
                err("probe edge at " + fmt_g(edge * 1e6, 6) + " us is off the dt grid");
            }
        }
    }

    if (spec.kind != ScenarioKind::Calibration) {
        if (spec.omega_rads.empty()) err("sweep has no drive frequencies");
        if (spec.n_ref.empty()) err("sweep has no probe strengths");
        for (double n : spec.n_ref) {
            if (n < 0.0) err("negative probe photon target");
        }
        if (spec.kind == ScenarioKind::Spectra && spec.n_ref.size() != 1) {
            err("spectra scenarios take exactly one n_ref");
        }
        if (spec.kind == ScenarioKind::Energy &&
            spec.preparations != std::vector<QubitPrep>{QubitPrep::Plus, QubitPrep::Minus}) {
            err("energy scenarios use the plus, minus preparation pair");
        }
        if (spec.n_freq < 3) err("frequency grid needs at least 3 points");
        if (spec.f_min_hz >= spec.f_max_hz) err("empty frequency window");
        const double nyquist = 0.5 / spec.dt_coarse;
        if (std::max(std::abs(spec.f_min_hz), std::abs(spec.f_max_hz)) >
            nyquist * (1.0 + 1e-12)) {
            err("frequency window exceeds the coarse-grid Nyquist limit " +
                fmt_g(nyquist / 1e6, 6) + " MHz");
        }
        const double reach_hz = max_omega / kTwoPi + 2.0 * spec.model.kappa() / kTwoPi;
        if (spec.f_max_hz < reach_hz || spec.f_min_hz > -reach_hz) {
            warn("frequency window may clip the Rabi sidebands (reach " +
                 fmt_g(reach_hz / 1e6, 4) + " MHz)");
        }
    } else {
        if (spec.rabi_amplitudes.empty()) err("no Rabi drive settings");
        for (double a : spec.rabi_amplitudes) {
            if (a < 0.0) err("negative Rabi drive setting");
        }
        if (spec.rabi_drive <= 0.0) err("Rabi drive duration must be positive");
        if (spec.photon_targets.empty()) err("no photon targets");
        for (double n : spec.photon_targets) {
            if (n < 0.0) err("negative photon target");
        }
    }

    double n_top = 0.0;
    for (double n : spec.n_ref) n_top = std::max(n_top, n);
    for (double n : spec.photon_targets) n_top = std::max(n_top, n);
    if (n_top > 0.0 && spec.schedule.probe_duration > 0.0) {
        const double n_bar = n_top / (spec.model.kappa() * spec.schedule.probe_duration);
        const int suggested = default_n_max(n_bar);
        if (spec.model.space.n_max < suggested) {
            warn("n_max " + std::to_string(spec.model.space.n_max) + " is below the suggested " +
                 std::to_string(suggested) + " for the requested probe strength");
        }
    }
    return out;
}

ScenarioReport run_scenario(const ScenarioSpec& spec, const std::string& out_root, int workers) {
    ScenarioReport report;
    report.name = spec.name;

    std::string error_text;
    for (const std::string& problem : validate_scenario(spec)) {
        if (problem.rfind("error:", 0) == 0) {
            error_text += "\n  " + problem;
        } else {
            report.log.push_back(problem);
        }
    }
    if (!error_text.empty()) {
        throw ConfigError("scenario '" + spec.name + "' failed validation:" + error_text);
    }

    const std::filesystem::path dir = std::filesystem::path(out_root) / spec.name;
    std::filesystem::create_directories(dir);
    report.out_dir = dir.string();

    OrderedJson manifest;
    manifest["scenario"] = spec.name;
    manifest["kind"] = kind_label(spec.kind);
    manifest["mode"] = spec.mode_label;
    manifest["settings"] = settings_json(spec);
    OrderedJson results = OrderedJson::object();

    std::vector<std::pair<std::string, std::string>> outputs;
    switch (spec.kind) {
    case ScenarioKind::Calibration:
        run_calibration_kind(spec, outputs, results, report.log);
        break;
    case ScenarioKind::Spectra:
        run_spectra_kind(spec, outputs, results, report.log, workers);
        break;
    case ScenarioKind::Energy:
        run_energy_kind(spec, outputs, results, report.log, workers);
        break;
    }
    outputs.emplace_back("resolved.ini", resolved_ini(spec));

    OrderedJson files = OrderedJson::array();
    for (const auto& [name, contents] : outputs) {
        files.push_back(
            {{"name", name}, {"fnv1a64", hex64(fnv1a64(contents.data(), contents.size()))}});
    }
    manifest["files"] = files;
    manifest["results"] = results;
    outputs.emplace_back("manifest.json", manifest.dump(2) + "\n");

    for (const auto& [name, contents] : outputs) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + (dir / name).string());
        }
        out << contents;
        report.files.push_back(name);
    }
    return report;
}

} // namespace dispersim
