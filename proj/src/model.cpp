#include "dispersim/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dispersim/errors.hpp"
#include "dispersim/lindblad.hpp"

namespace dispersim {

double gamma_phi(const SystemModel& model) {
    if (model.t1 <= 0.0 || model.t2_star <= 0.0) {
        throw std::invalid_argument("gamma_phi: T1 and T2* must be positive");
    }
    const double rate = 1.0 / model.t2_star - 0.5 / model.t1;
    if (rate < -1e-9) {
        throw std::invalid_argument("gamma_phi: T2* exceeds 2*T1 (got T2* = " +
                                    std::to_string(model.t2_star * 1e6) + " us, T1 = " +
                                    std::to_string(model.t1 * 1e6) + " us)");
    }
    return std::max(rate, 0.0);
}

void validate_model(const SystemModel& model, const PulseSchedule& schedule) {
    if (model.space.n_max < 1) {
        throw std::invalid_argument("model: n_max must be at least 1");
    }
    if (model.kappa_in < 0.0 || model.kappa_out < 0.0 || model.kappa() <= 0.0) {
        throw std::invalid_argument("model: port couplings must be non-negative with kappa > 0");
    }
    if (model.decoherence) {
        gamma_phi(model); // throws on inconsistent T1/T2*
    }
    if (schedule.record_duration <= 0.0) {
        throw std::invalid_argument("schedule: record duration must be positive");
    }
    if (schedule.probe_duration < 0.0 || schedule.probe_start < 0.0 ||
        schedule.probe_end() > schedule.record_duration + 1e-12) {
        throw std::invalid_argument("schedule: probe window must lie inside the record");
    }
    if (std::abs(model.probe.amplitude) > 0.0 &&
        (std::abs(model.probe.start - schedule.probe_start) > 1e-12 ||
         std::abs(model.probe.duration - schedule.probe_duration) > 1e-12)) {
        throw std::invalid_argument("schedule: model probe window disagrees with schedule");
    }
    if (model.omega_rabi != 0.0) {
        // The sigma_x term is not windowed, so the drive must span the full
        // record for the simulated dynamics to mean what the schedule says.
        if (schedule.drive_start > 1e-12 ||
            schedule.drive_end() < schedule.record_duration - 1e-12) {
            throw std::invalid_argument(
                "schedule: qubit drive must cover the record window when Omega != 0");
        }
    }
}

Operator hamiltonian_at_amplitude(const SystemModel& model, Complex eps) {
    const QubitOps q = qubit_operators(model.space);
    const Matrix n = number(model.space).mat;
    Matrix h = 0.5 * model.omega_rabi * q.sx.mat + model.chi * (n * q.sz.mat);
    if (eps != Complex(0.0, 0.0)) {
        h += eps * creation(model.space).mat + std::conj(eps) * annihilation(model.space).mat;
    }
    return {h, "H"};
}

Operator hamiltonian(const SystemModel& model, double t) {
    return hamiltonian_at_amplitude(model, model.probe.value(t));
}

std::vector<Operator> collapse_operators(const SystemModel& model) {
    std::vector<Operator> ops;
    ops.push_back({std::sqrt(model.kappa()) * annihilation(model.space).mat, "cavity_decay"});
    if (model.decoherence) {
        const QubitOps q = qubit_operators(model.space);
        if (model.t1 < std::numeric_limits<double>::infinity()) {
            ops.push_back({std::sqrt(1.0 / model.t1) * q.sm.mat, "relaxation"});
        }
        const double gphi = gamma_phi(model);
        if (gphi > 0.0) {
            ops.push_back({std::sqrt(0.5 * gphi) * q.sz.mat, "dephasing"});
        }
    }
    return ops;
}

double max_stable_substep(const SystemModel& model) {
    const double root_dim = std::sqrt(static_cast<double>(model.space.cavity_dim()));
    double rate = std::abs(model.omega_rabi);
    rate = std::max(rate, std::abs(model.chi) * model.space.n_max);
    rate = std::max(rate, model.kappa() * model.space.cavity_dim());
    rate = std::max(rate, 2.0 * std::abs(model.probe.amplitude) * root_dim);
    if (model.decoherence) {
        rate = std::max(rate, 1.0 / model.t1);
        rate = std::max(rate, gamma_phi(model));
    }
    if (rate <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 0.01 / rate;
}

namespace {

// With the qubit drive off and the qubit starting in |g>, the qubit factor is
// stationary and the cavity reduces to a driven, damped mode detuned by -chi.
// Emitted photons over the record window, kappa * integral of <n> dt, then
// scale exactly as |eps|^2 apart from truncation bias, which the refinement
// loop below mops up.
double emitted_photons_cavity_only(const SystemModel& model, const PulseSchedule& schedule,
                                   double eps, double dt, double occupancy_tol) {
    const int nc = model.space.cavity_dim();
    Matrix a = Matrix::Zero(nc, nc);
    for (int n = 1; n < nc; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Matrix num = (a.adjoint() * a).eval();

    Matrix h_on = -model.chi * num + eps * (a.adjoint() + a);
    Matrix h_off = -model.chi * num;
    const std::vector<Operator> decay{{std::sqrt(model.kappa()) * a, "cavity_decay"}};
    const Superoperator gen_on = liouvillian({h_on, "Hc_on"}, decay);
    const Superoperator gen_off = liouvillian({h_off, "Hc_off"}, decay);

    SystemModel scaled = model;
    scaled.omega_rabi = 0.0;
    scaled.probe.amplitude = Complex(eps, 0.0);
    const double substep = max_stable_substep(scaled);
    const Matrix e_on = step_propagator(gen_on, dt, substep);
    const Matrix e_off = step_propagator(gen_off, dt, substep);

    const long n_steps = std::lround(schedule.record_duration / dt);
    Vector state = Vector::Zero(nc * nc);
    state(0) = 1.0; // vacuum
    std::vector<double> n_trace(n_steps + 1);

    auto mean_n = [&](const Vector& v) {
        Complex acc(0.0, 0.0);
        for (int k = 0; k < nc; ++k) acc += static_cast<double>(k) * v(k * nc + k);
        return acc.real();
    };
    auto top_level = [&](const Vector& v) { return v((nc - 1) * nc + (nc - 1)).real(); };

    n_trace[0] = mean_n(state);
    for (long i = 0; i < n_steps; ++i) {
        const double t_mid = (static_cast<double>(i) + 0.5) * dt;
        const bool on = t_mid >= schedule.probe_start && t_mid < schedule.probe_end();
        state = (on ? e_on : e_off) * state;
        n_trace[i + 1] = mean_n(state);
        if (top_level(state) > occupancy_tol) {
            throw TruncationError("drive calibration pushed population into the top Fock level",
                                  (i + 1) * dt);
        }
    }
    return model.kappa() * trapezoid(n_trace, dt);
}

} // namespace

double drive_amplitude_for_photons(SystemModel model, const PulseSchedule& schedule,
                                   double n_target, double dt, double rel_tol, int max_iter) {
    if (n_target < 0.0) {
        throw std::invalid_argument("drive calibration: photon target must be non-negative");
    }
    if (n_target == 0.0) return 0.0;
    if (schedule.probe_duration <= 0.0) {
        throw std::invalid_argument("drive calibration: probe window has zero duration");
    }

    model.omega_rabi = 0.0;
    model.probe.start = schedule.probe_start;
    model.probe.duration = schedule.probe_duration;

    // Steady-state estimate for the bracket seed: n_ss = eps^2 / ((k/2)^2 + chi^2).
    const double denom = 0.25 * model.kappa() * model.kappa() + model.chi * model.chi;
    double eps = std::sqrt(n_target / (model.kappa() * schedule.probe_duration) * denom);

    double photons = emitted_photons_cavity_only(model, schedule, eps, dt, 1e-4);
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(photons - n_target) <= rel_tol * n_target) {
            return eps;
        }
        if (photons <= 0.0) {
            throw std::runtime_error("drive calibration: emitted-photon response vanished");
        }
        eps *= std::sqrt(n_target / photons);
        photons = emitted_photons_cavity_only(model, schedule, eps, dt, 1e-4);
    }
    throw std::runtime_error("drive calibration did not converge within iteration budget");
}

} // namespace dispersim
