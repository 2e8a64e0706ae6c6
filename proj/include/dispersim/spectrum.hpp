// spectrum.hpp — Emitted-photon power spectrum over a pulsed window:
//
//   s(omega) = kappa/(2 pi) * double integral over [0,tau]^2 of
//              exp(-i omega (t1 - t2)) c(t1,t2)
//
// evaluated by direct double trapezoid on the correlation grid (the process
// is pulsed, hence non-stationary; no FFT-of-lag shortcut applies). Values
// are converted to photons per Hz so that the plain integral over the
// frequency axis in Hz reproduces the emitted photon count.
#pragma once

#include <array>
#include <string>

#include "dispersim/correlation.hpp"

namespace dispersim {

struct PowerSpectrum {
    std::vector<double> freq_hz; // detuning from the probe carrier
    std::vector<double> s;       // photons per Hz
    double kappa{0.0};           // decay rate used in the prefactor, rad/s
    double window{0.0};          // correlation window tau, seconds
    std::string model_id;
    std::string prep;            // initial qubit state label
    bool negative_ripple{false}; // any s < -1e-6 * max(s) (reported, not clipped)
};

// Frequencies are checked against the coarse-grid Nyquist limit.
PowerSpectrum power_spectrum(const CorrelationResult& corr, double kappa, double f_min_hz,
                             double f_max_hz, int n_points);

struct SpectrumMoments {
    double photons{0.0};
    double mean_shift_hz{0.0};
};

// Trapezoid moments over the stored grid; throws std::domain_error when the
// photon count is below the numerical floor (mean undefined).
SpectrumMoments spectrum_moments(const PowerSpectrum& s);

struct LorentzianPeak {
    double center_hz{0.0};
    double hwhm_hz{0.0};
    double area{0.0}; // photons
};

struct LorentzianTriplet {
    std::array<LorentzianPeak, 3> peaks; // sorted by center
    double residual_rms{0.0};
    bool converged{false};
    double mean_shift_hz{0.0}; // area-weighted mean of the centers
};

// Three-Lorentzian decomposition seeded at {-omega_hint, 0, +omega_hint}
// with cavity-linewidth widths and locally integrated areas. Non-convergence
// throws a fit error carrying the residual.
LorentzianTriplet fit_triplet(const PowerSpectrum& s, double omega_hint_rads);

struct TransmissionPoint {
    double omega_rads{0.0};
    double photons_mean{0.0};              // averaged over preparations
    std::vector<double> photons_per_prep;
};

// Emitted photons kappa * integral <n> dt for each qubit drive strength at
// the probe amplitude already set on the model (calibrated at Omega = 0).
std::vector<TransmissionPoint> transmitted_photons_vs_omega(
    const SystemModel& base, const std::vector<double>& omega_list,
    const std::vector<QubitPrep>& preps, const EvolveOptions& opts);

} // namespace dispersim
