#include "dispersim/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dispersim/errors.hpp"
#include "dispersim/fitcore.hpp"
#include "dispersim/numeric.hpp"

namespace dispersim {

PowerSpectrum power_spectrum(const CorrelationResult& corr, double kappa, double f_min_hz,
                             double f_max_hz, int n_points) {
    const long n_c = static_cast<long>(corr.times.size());
    if (n_c < 2) {
        throw std::invalid_argument("power_spectrum: correlation grid too small");
    }
    if (n_points < 2 || f_max_hz <= f_min_hz) {
        throw std::invalid_argument("power_spectrum: bad frequency grid");
    }
    const double dt_c = corr.times[1] - corr.times[0];
    const double f_nyquist = 0.5 / dt_c;
    if (std::max(std::abs(f_min_hz), std::abs(f_max_hz)) > f_nyquist * (1.0 + 1e-12)) {
        throw std::invalid_argument(
            "power_spectrum: frequency window exceeds the coarse-grid Nyquist limit of " +
            std::to_string(f_nyquist / 1e6) + " MHz");
    }

    Vector weights(n_c);
    weights.setConstant(Complex(dt_c, 0.0));
    weights(0) *= 0.5;
    weights(n_c - 1) *= 0.5;

    PowerSpectrum out;
    out.kappa = kappa;
    out.window = corr.times.back() - corr.times.front();
    out.freq_hz.resize(n_points);
    out.s.resize(n_points);

    Vector b(n_c);
    for (int k = 0; k < n_points; ++k) {
        const double f =
            f_min_hz + (f_max_hz - f_min_hz) * static_cast<double>(k) / (n_points - 1);
        out.freq_hz[k] = f;
        const double w = kTwoPi * f;
        for (long j = 0; j < n_c; ++j) {
            const double theta = w * corr.times[j];
            b(j) = weights(j) * Complex(std::cos(theta), std::sin(theta));
        }
        out.s[k] = kappa * b.dot(corr.c * b).real();
    }

    const double s_max = *std::max_element(out.s.begin(), out.s.end());
    const double s_min = *std::min_element(out.s.begin(), out.s.end());
    out.negative_ripple = s_min < -1e-6 * std::max(s_max, 0.0);
    return out;
}

SpectrumMoments spectrum_moments(const PowerSpectrum& spec) {
    const std::size_t n = spec.freq_hz.size();
    if (n < 2 || spec.s.size() != n) {
        throw std::invalid_argument("spectrum_moments: malformed spectrum");
    }
    const double df = spec.freq_hz[1] - spec.freq_hz[0];
    if (df <= 0.0) {
        throw std::invalid_argument("spectrum_moments: frequency grid must increase");
    }
    for (std::size_t k = 2; k < n; ++k) {
        if (std::abs(spec.freq_hz[k] - spec.freq_hz[k - 1] - df) > 1e-6 * df) {
            throw std::invalid_argument(
                "spectrum_moments: trapezoid moments need a uniform frequency grid");
        }
    }
    std::vector<double> weighted(n);
    for (std::size_t k = 0; k < n; ++k) weighted[k] = spec.freq_hz[k] * spec.s[k];

    SpectrumMoments m;
    m.photons = trapezoid(spec.s, df);
    if (m.photons < 1e-9) {
        throw std::domain_error("spectrum_moments: photon count " + std::to_string(m.photons) +
                                " is below the floor; mean shift undefined");
    }
    m.mean_shift_hz = trapezoid(weighted, df) / m.photons;
    return m;
}

LorentzianTriplet fit_triplet(const PowerSpectrum& spec, double omega_hint_rads) {
    if (omega_hint_rads <= 0.0) {
        throw std::invalid_argument("fit_triplet: omega hint must be positive");
    }
    const std::size_t n = spec.freq_hz.size();
    if (n < 9) {
        throw std::invalid_argument("fit_triplet: spectrum has too few points");
    }
    const double df = spec.freq_hz[1] - spec.freq_hz[0];
    const double f_hint = omega_hint_rads / kTwoPi;
    const double hwhm0 = std::max(spec.kappa / (2.0 * kTwoPi), df);

    // Area seeds from the raw curve, split at the midpoints between the
    // expected centers.
    double area[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double f_mid = 0.5 * (spec.freq_hz[k] + spec.freq_hz[k + 1]);
        const double slab = 0.5 * (spec.s[k] + spec.s[k + 1]) * df;
        const int region = f_mid < -0.5 * f_hint ? 0 : (f_mid > 0.5 * f_hint ? 2 : 1);
        area[region] += slab;
    }

    Eigen::VectorXd p0(9);
    p0 << -f_hint, hwhm0, std::max(area[0], 1e-12), 0.0, hwhm0, std::max(area[1], 1e-12),
        f_hint, hwhm0, std::max(area[2], 1e-12);

    LorentzianSumModel model(3, std::max(df / 4.0, 1.0));
    const FitResult res = least_squares(model, spec.freq_hz, spec.s, p0);
    if (!res.converged) {
        throw FitError("fit_triplet: no convergence; residual norm " +
                       std::to_string(res.residual_norm));
    }

    LorentzianTriplet out;
    for (int k = 0; k < 3; ++k) {
        out.peaks[k] = {res.params(3 * k), res.params(3 * k + 1), res.params(3 * k + 2)};
    }
    std::sort(out.peaks.begin(), out.peaks.end(),
              [](const LorentzianPeak& a, const LorentzianPeak& b) {
                  return a.center_hz < b.center_hz;
              });
    out.converged = true;
    out.residual_rms = res.residual_norm / std::sqrt(static_cast<double>(n));
    const double total = out.peaks[0].area + out.peaks[1].area + out.peaks[2].area;
    if (total > 1e-12) {
        out.mean_shift_hz = (out.peaks[0].area * out.peaks[0].center_hz +
                             out.peaks[1].area * out.peaks[1].center_hz +
                             out.peaks[2].area * out.peaks[2].center_hz) /
                            total;
    }
    return out;
}

std::vector<TransmissionPoint> transmitted_photons_vs_omega(
    const SystemModel& base, const std::vector<double>& omega_list,
    const std::vector<QubitPrep>& preps, const EvolveOptions& opts) {
    if (omega_list.empty() || preps.empty()) {
        throw std::invalid_argument("transmitted_photons_vs_omega: empty sweep");
    }
    EvolveOptions run = opts;
    run.store_states = false;

    std::vector<TransmissionPoint> out;
    out.reserve(omega_list.size());
    for (double omega : omega_list) {
        SystemModel model = base;
        model.omega_rabi = omega;
        const StepPropagators props = make_step_propagators(model, run.dt);
        TransmissionPoint point;
        point.omega_rads = omega;
        for (QubitPrep prep : preps) {
            const StateTrajectory traj =
                evolve(model, product_state(model.space, prep), run, &props);
            point.photons_per_prep.push_back(model.kappa() * trapezoid(traj.n_exp, run.dt));
        }
        point.photons_mean =
            std::accumulate(point.photons_per_prep.begin(), point.photons_per_prep.end(), 0.0) /
            static_cast<double>(point.photons_per_prep.size());
        out.push_back(std::move(point));
    }
    return out;
}

} // namespace dispersim
