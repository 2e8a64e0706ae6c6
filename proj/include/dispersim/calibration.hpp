// calibration.hpp — In-silico stand-ins for the two instrument calibrations
// the experiment runs before taking data:
//
//   * Rabi: sweep the qubit drive setting, fit the ground-state oscillation,
//     and map drive units to an angular Rabi frequency by a line through the
//     origin. The synthetic instrument is wired so one unit produces
//     2 pi x 1 MHz; the calibration has to recover that without being told.
//
//   * Ramsey: prepare |+>, hold it under the measurement probe for the full
//     record window, and read the remaining coherence from a phase fringe.
//     Normalizing by the probe-off fringe cancels intrinsic dephasing, and
//     the leftover contrast C/C0 = exp(-2N) yields the measurement photon
//     number N. The contrast-versus-amplitude curve is Gaussian because N
//     scales with amplitude squared; its fitted width is the conversion.
#pragma once

#include <vector>

#include "dispersim/hilbert.hpp"
#include "dispersim/lindblad.hpp"
#include "dispersim/model.hpp"

namespace dispersim {

// Drive-unit convention of the synthetic Rabi instrument.
inline constexpr double kRabiRadsPerUnit = 2.0 * 3.14159265358979323846 * 1e6;

// Rotation by theta about the equatorial axis (cos phi, sin phi, 0) on the
// Bloch sphere, as a 2x2 unitary in the |g>, |e> basis.
Matrix qubit_rotation(double theta, double axis_phi);

// u2 acting on the qubit factor, identity on the cavity.
Matrix lift_qubit(const HilbertSpec& spec, const Matrix& u2);

DensityMatrix apply_qubit_unitary(const HilbertSpec& spec, const DensityMatrix& rho,
                                  const Matrix& u2);

// Simulated Ramsey readout: apply the closing pi/2 pulse for each analysis
// phase, record P(excited), and fit the fringe. The fringe amplitude equals
// the magnitude of the qubit coherence |rho_ge| regardless of populations.
struct FringeScan {
    std::vector<double> phase;
    std::vector<double> p_excited;
    double amplitude{0.0};
    double phase_offset{0.0};
    double offset{0.0};
    bool converged{false};
};

FringeScan phase_fringe(const Matrix& rho_qubit, int n_phase = 16);

struct RabiPoint {
    double amplitude{0.0};       // drive setting, instrument units
    double omega_true_rads{0.0}; // what the synthetic instrument produced
    double omega_fit_rads{0.0};  // recovered from the oscillation fit
    bool usable{false};          // false for flat traces (zero drive)
};

struct RabiCalibration {
    std::vector<RabiPoint> points;
    double rads_per_unit{0.0}; // through-origin slope over usable points
    double max_rel_error{0.0}; // worst fit-vs-line deviation, relative
};

// Probe stays off and the cavity stays in vacuum, so the sweep runs in a
// clipped two-level-plus-one-photon space at negligible cost.
RabiCalibration rabi_calibration(const SystemModel& base, const std::vector<double>& amplitudes,
                                 double drive_duration, double dt = 1e-9);

// Contrast below this is indistinguishable from zero; such points are kept in
// the output but flagged excluded and carry no photon estimate.
inline constexpr double kCoherenceFloor = 1e-12;

struct RamseyPoint {
    double amplitude_rads{0.0};  // probe drive epsilon
    double fringe_amplitude{0.0};
    double normalized{1.0};      // fringe divided by the probe-off reference
    double photons_ramsey{0.0};  // -ln(normalized)/2; NaN when excluded
    double photons_emitted{0.0}; // kappa * integral <n> dt, same window
    bool excluded{false};        // contrast at or below the numerical floor
};

struct PhotonCalibration {
    std::vector<RamseyPoint> points;
    double reference_fringe{0.0}; // probe-off coherence after the window
    double gauss_amp{0.0};
    double gauss_width_mhz{0.0};  // width of exp(-(amp/w)^2) vs amp in MHz
    bool fit_converged{false};

    // Photon number implied by the Gaussian width at a given probe amplitude.
    double photons_at(double amplitude_rads) const;
};

// First amplitude must be zero; it provides the normalization fringe.
PhotonCalibration ramsey_photon_calibration(const SystemModel& base,
                                            const PulseSchedule& schedule,
                                            const std::vector<double>& amplitudes_rads,
                                            double dt = 1e-9);

} // namespace dispersim
