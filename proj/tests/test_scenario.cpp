#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispersim/config.hpp"
#include "dispersim/errors.hpp"
#include "dispersim/numeric.hpp"
#include "dispersim/scenario.hpp"

using namespace dispersim;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool has_error(const std::vector<std::string>& problems, const std::string& needle) {
    for (const std::string& p : problems) {
        if (p.rfind("error:", 0) == 0 && p.find(needle) != std::string::npos) return true;
    }
    return false;
}

bool has_warning(const std::vector<std::string>& problems, const std::string& needle) {
    for (const std::string& p : problems) {
        if (p.rfind("warning:", 0) == 0 && p.find(needle) != std::string::npos) return true;
    }
    return false;
}

// Small and quick but exercises the full spectra pipeline, including one
// swept point with a full spectrum and one with just the photon count.
const char* kTinySpectra = R"(
[scenario]
name = tiny-spectra
kind = spectra

[model]
n_max = 4
decoherence = false

[schedule]
drive_start_us = 0
drive_duration_us = 1.5
probe_start_us = 0
probe_duration_us = 0.8
record_duration_us = 1.5

[sweep]
omega_mhz = 0, 2
spectra_omega_mhz = 2
n_ref = 0.1

[numerics]
freq_min_mhz = -8
freq_max_mhz = 8
n_freq = 41
)";

const char* kTinyEnergy = R"(
[scenario]
name = tiny-energy
kind = energy

[model]
n_max = 4
decoherence = false

[schedule]
drive_start_us = 0
drive_duration_us = 2
probe_start_us = 0.5
probe_duration_us = 0.8
record_duration_us = 2

[sweep]
omega_mhz = 1
n_ref = 0.1

[numerics]
freq_min_mhz = -8
freq_max_mhz = 8
n_freq = 81
)";

ScenarioSpec tiny(const char* text) {
    return scenario_from_config(Config::parse_string(text, "tiny"));
}

std::filesystem::path fresh_dir(const std::string& name) {
    const std::filesystem::path p = std::filesystem::path("scenario_test_out") / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("built-in scenarios parse and validate") {
    const std::vector<std::string> names = builtin_scenario_names();
    REQUIRE(names == std::vector<std::string>{"fig2-calibration", "fig3b-sim", "fig3d-sim",
                                              "fig4-ideal", "fig4-experimental"});
    for (const std::string& name : names) {
        CAPTURE(name);
        const ScenarioSpec spec = builtin_scenario(name);
        CHECK(spec.name == name);
        for (const std::string& problem : validate_scenario(spec)) {
            CAPTURE(problem);
            CHECK(problem.rfind("error:", 0) != 0);
        }
    }

    const ScenarioSpec fig2 = builtin_scenario("fig2-calibration");
    CHECK(fig2.kind == ScenarioKind::Calibration);
    CHECK(fig2.preparations == std::vector<QubitPrep>{QubitPrep::Plus});
    CHECK(fig2.photon_targets == std::vector<double>{0.2, 0.8, 1.9, 3.4});

    const ScenarioSpec fig3b = builtin_scenario("fig3b-sim");
    CHECK(fig3b.kind == ScenarioKind::Spectra);
    CHECK(fig3b.preparations == std::vector<QubitPrep>{QubitPrep::Minus, QubitPrep::Plus});
    CHECK(fig3b.omega_rads.size() == 8);
    CHECK(fig3b.n_ref == std::vector<double>{0.2});

    const ScenarioSpec ideal = builtin_scenario("fig4-ideal");
    CHECK(ideal.kind == ScenarioKind::Energy);
    CHECK(ideal.preparations == std::vector<QubitPrep>{QubitPrep::Plus, QubitPrep::Minus});
    CHECK_FALSE(ideal.model.decoherence);
    CHECK(ideal.mode_label == "ideal");
    CHECK(builtin_scenario("fig4-experimental").mode_label == "experimental");

    CHECK_THROWS_AS(builtin_scenario("no-such-figure"), ConfigError);
}

TEST_CASE("config translation fills in the documented defaults") {
    const ScenarioSpec spec = tiny(kTinySpectra);
    CHECK(spec.dt == 1e-9);
    CHECK(spec.dt_coarse == doctest::Approx(25e-9).epsilon(1e-12));
    CHECK(spec.n_freq == 41);
    CHECK(spec.model.chi == mhz_to_rads(-4.0));
    CHECK(spec.model.kappa() == doctest::Approx(mhz_to_rads(0.9)).epsilon(1e-12));
    CHECK(spec.model.kappa_in == doctest::Approx(0.1 * mhz_to_rads(0.9)).epsilon(1e-12));
    CHECK(spec.model.t1 == doctest::Approx(13.5e-6).epsilon(1e-12));
    CHECK(spec.preparations == std::vector<QubitPrep>{QubitPrep::Minus});
    CHECK(spec.model.probe.start == doctest::Approx(0.0));
    CHECK(spec.model.probe.duration == doctest::Approx(0.8e-6).epsilon(1e-12));
    CHECK(spec.mode_label == "ideal"); // follows decoherence unless configured

    // Without a spectra_omega list every swept point gets a spectrum.
    const ScenarioSpec all = scenario_from_config(Config::parse_string(
        "[scenario]\nname = x\nkind = spectra\n[sweep]\nomega_mhz = 0, 1\nn_ref = 0.2\n"));
    CHECK(all.spectra_omega_rads == all.omega_rads);

    const ScenarioSpec energy = tiny(kTinyEnergy);
    CHECK(energy.preparations == std::vector<QubitPrep>{QubitPrep::Plus, QubitPrep::Minus});
    CHECK(energy.with_fringe);
}

TEST_CASE("schema violations are rejected with positions") {
    const auto reject = [](const std::string& text, const std::string& needle) {
        try {
            scenario_from_config(Config::parse_string(text));
            FAIL_CHECK("expected rejection for: " << needle);
        } catch (const ConfigError& err) {
            CAPTURE(err.what());
            CHECK(std::string(err.what()).find(needle) != std::string::npos);
        }
    };

    reject("[scenario]\nname = x\nkind = spectra\n[probe]\namp = 1\n", "unknown section");
    reject("[scenario]\nname = x\nkind = spectra\n[model]\ncolor = red\n", "unknown key");
    reject("[scenario]\nname = x\nkind = sideways\n", "unknown kind");
    reject("[scenario]\nname = x\nkind = spectra\npreparations = up\n"
           "[sweep]\nomega_mhz = 1\nn_ref = 0.2\n",
           "unknown preparation");
    reject("[scenario]\nname = bad/name\nkind = spectra\n", "directory-safe");
    reject("[scenario]\nname = x\nkind = spectra\n[model]\nn_max = 2.5\n"
           "[sweep]\nomega_mhz = 1\nn_ref = 0.2\n",
           "integer");
}

TEST_CASE("physics validation catches bad grids and windows") {
    SUBCASE("probe edge off the fine grid") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.schedule.probe_start = 0.5e-9 + 1e-7; // half a step past a grid point
        spec.model.probe.start = spec.schedule.probe_start;
        CHECK(has_error(validate_scenario(spec), "off the dt grid"));
    }
    SUBCASE("window beyond coarse Nyquist") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.f_max_hz = 25e6;
        CHECK(has_error(validate_scenario(spec), "Nyquist"));
    }
    SUBCASE("coarse step not a multiple of dt") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.dt = 3e-9;
        CHECK(has_error(validate_scenario(spec), "whole multiple"));
    }
    SUBCASE("record not a whole number of coarse steps") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.schedule.record_duration = 1.51e-6;
        CHECK_FALSE(validate_scenario(spec).empty());
        CHECK(has_error(validate_scenario(spec), "coarse steps"));
    }
    SUBCASE("energy runs need the plus/minus pair") {
        ScenarioSpec spec = tiny(kTinyEnergy);
        spec.preparations = {QubitPrep::Plus};
        CHECK(has_error(validate_scenario(spec), "plus, minus"));
        const auto dir = fresh_dir("invalid");
        CHECK_THROWS_WITH_AS(run_scenario(spec, dir.string()),
                             doctest::Contains("failed validation"), ConfigError);
    }
    SUBCASE("spectra runs take one probe strength") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.n_ref = {0.1, 0.2};
        CHECK(has_error(validate_scenario(spec), "exactly one"));
    }
    SUBCASE("sideband reach warning") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.omega_rads.push_back(mhz_to_rads(12.0));
        spec.schedule.drive_duration = 1.5e-6;
        CHECK(has_warning(validate_scenario(spec), "sidebands"));
    }
    SUBCASE("undersized cavity warning") {
        ScenarioSpec spec = tiny(kTinySpectra);
        spec.n_ref = {3.4};
        CHECK(has_warning(validate_scenario(spec), "n_max"));
    }
}

TEST_CASE("runs are reproducible and the manifest hashes are honest") {
    const ScenarioSpec spec = tiny(kTinySpectra);

    const auto dir_a = fresh_dir("a");
    const auto dir_b = fresh_dir("b");
    const auto dir_w = fresh_dir("w");
    const ScenarioReport rep_a = run_scenario(spec, dir_a.string());
    const ScenarioReport rep_b = run_scenario(spec, dir_b.string());
    const ScenarioReport rep_w = run_scenario(spec, dir_w.string(), 3);

    REQUIRE(rep_a.files == std::vector<std::string>{"transmission.csv", "spectra.csv",
                                                    "peaks.csv", "resolved.ini",
                                                    "manifest.json"});
    REQUIRE(rep_b.files == rep_a.files);
    REQUIRE(rep_w.files == rep_a.files);

    for (const std::string& name : rep_a.files) {
        CAPTURE(name);
        const std::string bytes = read_file(std::filesystem::path(rep_a.out_dir) / name);
        CHECK(bytes == read_file(std::filesystem::path(rep_b.out_dir) / name));
        CHECK(bytes == read_file(std::filesystem::path(rep_w.out_dir) / name));
    }

    // Manifest lists every data file with its content hash.
    const auto manifest =
        nlohmann::json::parse(read_file(std::filesystem::path(rep_a.out_dir) / "manifest.json"));
    REQUIRE(manifest["files"].size() == rep_a.files.size() - 1);
    for (const auto& entry : manifest["files"]) {
        const std::string name = entry["name"];
        const std::string bytes = read_file(std::filesystem::path(rep_a.out_dir) / name);
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
        CHECK(entry["fnv1a64"] == std::string(buf));
    }

    // The recorded resolved.ini reproduces the run byte for byte.
    const ScenarioSpec again = scenario_from_config(
        Config::parse_file((std::filesystem::path(rep_a.out_dir) / "resolved.ini").string()));
    const auto dir_c = fresh_dir("c");
    const ScenarioReport rep_c = run_scenario(again, dir_c.string());
    for (const std::string& name : rep_a.files) {
        CAPTURE(name);
        CHECK(read_file(std::filesystem::path(rep_a.out_dir) / name) ==
              read_file(std::filesystem::path(rep_c.out_dir) / name));
    }
}

TEST_CASE("energy scenario writes the ledger pair") {
    const ScenarioSpec spec = tiny(kTinyEnergy);
    const auto dir = fresh_dir("energy");
    const ScenarioReport rep = run_scenario(spec, dir.string());

    REQUIRE(rep.files ==
            std::vector<std::string>{"ledger.csv", "estimators.csv", "resolved.ini",
                                     "manifest.json"});

    const std::string ledger = read_file(std::filesystem::path(rep.out_dir) / "ledger.csv");
    CHECK(ledger.rfind("omega_hz,n_ref,de_qubit,de_photon_trans,de_cross,residual,mode\n", 0) ==
          0);
    CHECK(ledger.find(",ideal\n") != std::string::npos);
    CHECK(std::count(ledger.begin(), ledger.end(), '\n') == 2); // header plus one sweep row

    const std::string extra = read_file(std::filesystem::path(rep.out_dir) / "estimators.csv");
    CHECK(extra.rfind("omega_hz,n_ref,de_qubit_fringe,de_qubit_sx,de_qubit_plus,de_qubit_minus,"
                      "de_coh_plus,de_coh_minus,"
                      "photons_plus,photons_minus,spectrum_photons_plus,spectrum_photons_minus,"
                      "incomplete_ringdown\n",
                      0) == 0);
    CHECK(std::count(extra.begin(), extra.end(), '\n') == 2);
}
