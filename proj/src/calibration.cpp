#include "dispersim/calibration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dispersim/errors.hpp"
#include "dispersim/fitcore.hpp"
#include "dispersim/numeric.hpp"

namespace dispersim {

Matrix qubit_rotation(double theta, double axis_phi) {
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    const Complex nx(std::cos(axis_phi), 0.0);
    const Complex ny(std::sin(axis_phi), 0.0);
    const Complex i1(0.0, 1.0);

    Matrix sx(2, 2), sy(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, i1, -i1, 0;

    Matrix u = c * Matrix::Identity(2, 2) - i1 * s * (nx * sx + ny * sy);
    return u;
}

Matrix lift_qubit(const HilbertSpec& spec, const Matrix& u2) {
    if (u2.rows() != 2 || u2.cols() != 2) {
        throw std::invalid_argument("lift_qubit: expected a 2x2 matrix");
    }
    return kron(u2, Matrix::Identity(spec.cavity_dim(), spec.cavity_dim()));
}

DensityMatrix apply_qubit_unitary(const HilbertSpec& spec, const DensityMatrix& rho,
                                  const Matrix& u2) {
    const Matrix u = lift_qubit(spec, u2);
    return {u * rho.mat * u.adjoint(), rho.time};
}

FringeScan phase_fringe(const Matrix& rho_qubit, int n_phase) {
    if (rho_qubit.rows() != 2 || rho_qubit.cols() != 2) {
        throw std::invalid_argument("phase_fringe: expected a 2x2 state");
    }
    if (n_phase < 8) {
        throw std::invalid_argument("phase_fringe: need at least 8 phases");
    }

    FringeScan scan;
    scan.phase.reserve(n_phase);
    scan.p_excited.reserve(n_phase);
    for (int k = 0; k < n_phase; ++k) {
        const double phi = kTwoPi * k / n_phase;
        const Matrix u = qubit_rotation(kTwoPi / 4.0, phi);
        const Matrix rotated = u * rho_qubit * u.adjoint();
        scan.phase.push_back(phi);
        scan.p_excited.push_back(rotated(1, 1).real());
    }

    const SinusoidFit fit = fit_phase_fringe(scan.phase, scan.p_excited);
    scan.amplitude = fit.amplitude;
    scan.phase_offset = fit.phase;
    scan.offset = fit.offset;
    scan.converged = fit.detail.converged;
    return scan;
}

RabiCalibration rabi_calibration(const SystemModel& base, const std::vector<double>& amplitudes,
                                 double drive_duration, double dt) {
    if (amplitudes.empty()) {
        throw std::invalid_argument("rabi_calibration: no amplitudes given");
    }
    if (drive_duration <= 0.0 || dt <= 0.0) {
        throw std::invalid_argument("rabi_calibration: bad timing");
    }

    SystemModel model = base;
    model.space.n_max = 1; // probe off, cavity pinned in vacuum
    model.probe.amplitude = 0.0;

    EvolveOptions opts;
    opts.dt = dt;
    opts.duration = drive_duration;
    opts.store_states = false;

    RabiCalibration cal;
    cal.points.reserve(amplitudes.size());
    for (double amp : amplitudes) {
        if (amp < 0.0) {
            throw std::invalid_argument("rabi_calibration: negative drive setting");
        }
        model.omega_rabi = amp * kRabiRadsPerUnit;
        const StateTrajectory traj =
            evolve(model, product_state(model.space, QubitPrep::Ground), opts);

        RabiPoint point;
        point.amplitude = amp;
        point.omega_true_rads = model.omega_rabi;
        const SinusoidFit fit = fit_sinusoid(traj.times, traj.sz_exp);
        point.usable = fit.detail.converged && fit.frequency > 0.0;
        point.omega_fit_rads = point.usable ? kTwoPi * fit.frequency : 0.0;
        cal.points.push_back(point);
    }

    double sum_xy = 0.0;
    double sum_xx = 0.0;
    for (const RabiPoint& p : cal.points) {
        if (!p.usable) continue;
        sum_xy += p.amplitude * p.omega_fit_rads;
        sum_xx += p.amplitude * p.amplitude;
    }
    if (sum_xx <= 0.0) {
        throw FitError("rabi_calibration: no usable oscillation in the sweep");
    }
    cal.rads_per_unit = sum_xy / sum_xx;

    for (const RabiPoint& p : cal.points) {
        if (!p.usable) continue;
        const double predicted = cal.rads_per_unit * p.amplitude;
        cal.max_rel_error =
            std::max(cal.max_rel_error, std::abs(p.omega_fit_rads - predicted) / predicted);
    }
    return cal;
}

double PhotonCalibration::photons_at(double amplitude_rads) const {
    if (!fit_converged || gauss_width_mhz <= 0.0) {
        throw FitError("photons_at: calibration curve unavailable");
    }
    const double amp_mhz = amplitude_rads / kTwoPi / 1e6;
    const double ratio = amp_mhz / gauss_width_mhz;
    return 0.5 * ratio * ratio;
}

PhotonCalibration ramsey_photon_calibration(const SystemModel& base,
                                            const PulseSchedule& schedule,
                                            const std::vector<double>& amplitudes_rads,
                                            double dt) {
    if (amplitudes_rads.empty() || amplitudes_rads.front() != 0.0) {
        throw std::invalid_argument(
            "ramsey_photon_calibration: amplitude list must start with the zero reference");
    }

    SystemModel model = base;
    model.omega_rabi = 0.0;
    model.probe.start = schedule.probe_start;
    model.probe.duration = schedule.probe_duration;

    EvolveOptions opts;
    opts.dt = dt;
    opts.duration = schedule.record_duration;
    opts.store_states = false;

    PhotonCalibration cal;
    cal.points.reserve(amplitudes_rads.size());
    for (double eps : amplitudes_rads) {
        model.probe.amplitude = Complex(eps, 0.0);
        const StateTrajectory traj =
            evolve(model, product_state(model.space, QubitPrep::Plus), opts);

        RamseyPoint point;
        point.amplitude_rads = eps;
        point.photons_emitted = model.kappa() * trapezoid(traj.n_exp, dt);
        const DensityMatrix rho_q = partial_trace_cavity(model.space, traj.final_state());
        point.fringe_amplitude = phase_fringe(rho_q.mat).amplitude;
        cal.points.push_back(point);
    }

    cal.reference_fringe = cal.points.front().fringe_amplitude;
    if (cal.reference_fringe < 1e-12) {
        throw FitError(
            "ramsey_photon_calibration: probe-off fringe vanished; window too long to normalize");
    }
    for (RamseyPoint& p : cal.points) {
        p.normalized = p.fringe_amplitude / cal.reference_fringe;
        if (p.normalized <= kCoherenceFloor) {
            // Contrast has sunk into the numerical floor; N would be -inf.
            // The point stays in the output, flagged, but takes no further part.
            p.excluded = true;
            p.photons_ramsey = std::numeric_limits<double>::quiet_NaN();
        } else {
            p.photons_ramsey = -0.5 * std::log(p.normalized);
        }
    }

    // Contrast-versus-amplitude curve, with the amplitude axis in MHz so the
    // fitted width lands at an interpretable scale.
    std::vector<double> x, y;
    for (const RamseyPoint& p : cal.points) {
        if (p.excluded) continue;
        x.push_back(p.amplitude_rads / kTwoPi / 1e6);
        y.push_back(p.normalized);
    }
    double w0 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] > 0.0 && y[k] > 0.0 && y[k] < 1.0) {
            w0 = std::max(w0, x[k] / std::sqrt(-std::log(y[k])));
        }
    }
    if (w0 > 0.0) {
        Eigen::VectorXd p0(2);
        p0 << 1.0, w0;
        const FitResult fit = least_squares(GaussianFixedCenterModel(), x, y, p0);
        cal.fit_converged = fit.converged;
        if (fit.converged) {
            cal.gauss_amp = fit.params(0);
            cal.gauss_width_mhz = fit.params(1);
        }
    }
    return cal;
}

} // namespace dispersim
