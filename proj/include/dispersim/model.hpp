// model.hpp — Driven dispersive qubit-cavity system in the probe rotating
// frame. The Hamiltonian is
//
//     H(t) = (Omega/2) sx + chi n sz + eps(t) a_dag + conj(eps(t)) a
//
// with the probe envelope eps(t) a square pulse. Decay channels are cavity
// leakage sqrt(kappa) a, qubit relaxation sqrt(1/T1) sm, and pure dephasing
// sqrt(gamma_phi/2) sz with gamma_phi = 1/T2* - 1/(2 T1).
#pragma once

#include <vector>

#include "dispersim/hilbert.hpp"
#include "dispersim/numeric.hpp"

namespace dispersim {

struct ProbePulse {
    Complex amplitude{0.0, 0.0}; // eps, rad/s
    double start{0.0};           // seconds
    double duration{0.0};        // seconds

    bool active(double t) const { return t >= start && t < start + duration; }
    Complex value(double t) const { return active(t) ? amplitude : Complex(0.0, 0.0); }
};

struct SystemModel {
    double omega_rabi{mhz_to_rads(3.0)}; // Omega, rad/s
    double chi{mhz_to_rads(-4.0)};       // dispersive shift, rad/s
    double kappa_in{0.1 * mhz_to_rads(0.9)};  // input-port (weak) coupling, rad/s
    double kappa_out{0.9 * mhz_to_rads(0.9)}; // output-port coupling, rad/s
    double t1{13.5e-6};                  // seconds
    double t2_star{2.5e-6};              // seconds
    bool decoherence{true};              // include T1/T2* channels
    ProbePulse probe;
    HilbertSpec space;

    double kappa() const { return kappa_in + kappa_out; }
};

struct PulseSchedule {
    double drive_start{0.0};
    double drive_duration{3.0e-6};
    double probe_start{0.0};
    double probe_duration{2.0e-6};
    double record_duration{3.0e-6};

    double probe_end() const { return probe_start + probe_duration; }
    double drive_end() const { return drive_start + drive_duration; }
};

// Pure-dephasing rate; throws std::invalid_argument when T2* > 2 T1 would
// make it negative.
double gamma_phi(const SystemModel& model);

// Sanity checks shared by every entry point that accepts a model/schedule
// pair (positive rates, probe window inside the record, qubit drive covering
// the record whenever Omega != 0; time-dependent Omega is unsupported).
void validate_model(const SystemModel& model, const PulseSchedule& schedule);

Operator hamiltonian(const SystemModel& model, double t);

// Same Hamiltonian with the probe amplitude forced, ignoring the pulse window.
Operator hamiltonian_at_amplitude(const SystemModel& model, Complex eps);

std::vector<Operator> collapse_operators(const SystemModel& model);

// Smallest integration substep that resolves the fastest generator scale.
double max_stable_substep(const SystemModel& model);

// Find the probe amplitude (real, rad/s) for which the full record window
// emits n_target photons (kappa * integral of <n> dt), with the qubit drive
// off and qubit in |g>. Bisection to a relative tolerance on the photon
// number. n_target = 0 returns 0.
double drive_amplitude_for_photons(SystemModel model, const PulseSchedule& schedule,
                                   double n_target, double dt = 1e-9,
                                   double rel_tol = 0.01, int max_iter = 80);

} // namespace dispersim
