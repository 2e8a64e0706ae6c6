#include "dispersim/lindblad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "dispersim/errors.hpp"

namespace dispersim {

Superoperator liouvillian(const Operator& hamiltonian, const std::vector<Operator>& collapse) {
    const int d = hamiltonian.dim();
    if (hamiltonian.mat.rows() != hamiltonian.mat.cols()) {
        throw std::invalid_argument("liouvillian: Hamiltonian must be square");
    }
    const Matrix id = Matrix::Identity(d, d);
    const Complex i1(0.0, 1.0);
    Matrix l = -i1 * (kron(id, hamiltonian.mat) - kron(hamiltonian.mat.transpose(), id));
    for (const Operator& c : collapse) {
        if (c.dim() != d) {
            throw std::invalid_argument("liouvillian: collapse operator '" + c.label +
                                        "' has mismatched dimension");
        }
        const Matrix cdc = c.mat.adjoint() * c.mat;
        l += kron(c.mat.conjugate(), c.mat);
        l -= 0.5 * kron(id, cdc);
        l -= 0.5 * kron(cdc.transpose(), id);
    }
    Superoperator out;
    out.dim = d;
    out.mat = l.sparseView();
    out.mat.makeCompressed();
    return out;
}

Matrix matrix_power(const Matrix& m, long exponent) {
    if (exponent < 0) {
        throw std::invalid_argument("matrix_power: exponent must be non-negative");
    }
    Matrix result = Matrix::Identity(m.rows(), m.cols());
    Matrix base = m;
    while (exponent > 0) {
        if (exponent & 1) {
            result = (result * base).eval();
        }
        exponent >>= 1;
        if (exponent > 0) {
            base = (base * base).eval();
        }
    }
    return result;
}

Matrix step_propagator(const Superoperator& gen, double dt, double max_substep) {
    if (dt <= 0.0) {
        throw std::invalid_argument("step_propagator: dt must be positive");
    }
    long n_sub = 1;
    if (std::isfinite(max_substep) && max_substep > 0.0 && dt > max_substep) {
        n_sub = static_cast<long>(std::ceil(dt / max_substep - 1e-12));
    }
    const double h = dt / static_cast<double>(n_sub);
    const Eigen::Index dd = gen.mat.rows();
    const Eigen::SparseMatrix<Complex> a = (gen.mat * Complex(h, 0.0)).eval();
    // Degree-4 Taylor polynomial of exp(h L), assembled by Horner steps.
    Matrix m = Matrix::Identity(dd, dd);
    for (int k = 4; k >= 1; --k) {
        m = (Matrix::Identity(dd, dd) + (a * m) / static_cast<double>(k)).eval();
    }
    return matrix_power(m, n_sub);
}

PiecewiseGenerator::PiecewiseGenerator(const SystemModel& model) : probe_(model.probe) {
    const std::vector<Operator> collapse = collapse_operators(model);
    off_ = liouvillian(hamiltonian_at_amplitude(model, Complex(0.0, 0.0)), collapse);
    if (probe_.amplitude == Complex(0.0, 0.0)) {
        on_ = off_;
    } else {
        on_ = liouvillian(hamiltonian_at_amplitude(model, probe_.amplitude), collapse);
    }
}

StepPropagators make_step_propagators(const SystemModel& model, double dt) {
    const PiecewiseGenerator gen(model);
    const double substep = max_stable_substep(model);
    StepPropagators props;
    props.dt = dt;
    props.off = step_propagator(gen.probe_off_generator(), dt, substep);
    props.on = (model.probe.amplitude == Complex(0.0, 0.0))
                   ? props.off
                   : step_propagator(gen.probe_on_generator(), dt, substep);
    return props;
}

DensityMatrix StateTrajectory::final_state() const {
    if (times.empty()) {
        throw std::runtime_error("trajectory is empty");
    }
    return {last_state, times.back()};
}

namespace {

void check_edge_alignment(double edge, double t0, double duration, double dt) {
    if (edge <= t0 || edge >= t0 + duration) return; // outside the window: no step crosses it
    const double steps = (edge - t0) / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw std::invalid_argument(
            "evolve: probe edge at " + std::to_string(edge * 1e6) +
            " us does not fall on the storage grid; align the schedule to dt");
    }
}

} // namespace

StateTrajectory evolve(const SystemModel& model, const DensityMatrix& rho0,
                       const EvolveOptions& opts, const StepPropagators* precomputed) {
    const int d = model.space.dim();
    if (rho0.mat.rows() != d || rho0.mat.cols() != d) {
        throw std::invalid_argument("evolve: initial state does not match the model space");
    }
    if (opts.dt <= 0.0 || opts.duration < 0.0) {
        throw std::invalid_argument("evolve: dt must be positive and duration non-negative");
    }
    const long n_steps = std::lround(opts.duration / opts.dt);
    if (std::abs(n_steps * opts.dt - opts.duration) > 1e-6 * opts.dt) {
        throw std::invalid_argument("evolve: duration must be a whole number of dt steps");
    }
    if (model.probe.amplitude != Complex(0.0, 0.0)) {
        check_edge_alignment(model.probe.start, opts.t0, opts.duration, opts.dt);
        check_edge_alignment(model.probe.start + model.probe.duration, opts.t0, opts.duration,
                             opts.dt);
    }
    if (precomputed && std::abs(precomputed->dt - opts.dt) > 1e-18) {
        throw std::invalid_argument("evolve: precomputed propagators were built for another dt");
    }

    StepPropagators local;
    const StepPropagators& props = precomputed ? *precomputed : (local = make_step_propagators(model, opts.dt), local);

    const Matrix num_op = number(model.space).mat;
    const QubitOps qops = qubit_operators(model.space);
    const Matrix a_op = annihilation(model.space).mat;
    const int nc = model.space.cavity_dim();

    StateTrajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.trace_re.reserve(n_steps + 1);
    traj.n_exp.reserve(n_steps + 1);
    traj.sx_exp.reserve(n_steps + 1);
    traj.sz_exp.reserve(n_steps + 1);
    traj.coh_ge_abs.reserve(n_steps + 1);
    traj.a_exp.reserve(n_steps + 1);
    if (opts.store_states) traj.states.reserve(n_steps + 1);

    Vector state = Eigen::Map<const Vector>(rho0.mat.data(), static_cast<Eigen::Index>(d) * d);

    auto record = [&](double t, const Vector& v) {
        const Eigen::Map<const Matrix> rho(v.data(), d, d);

        const double tr = rho.trace().real();
        if (std::abs(tr - 1.0) > opts.trace_tol) {
            throw IntegrationError("trace drifted to " + std::to_string(tr), t);
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                                 Eigen::EigenvaluesOnly);
        const double lambda_min = es.eigenvalues().minCoeff();
        if (lambda_min < -opts.positivity_tol) {
            throw IntegrationError("state developed negative eigenvalue " +
                                       std::to_string(lambda_min),
                                   t);
        }
        // A one-level cavity has no headroom to police; the guard only makes
        // sense once there is a level the dynamics should never reach.
        if (nc > 1) {
            double top = 0.0;
            for (int q = 0; q < 2; ++q) {
                top += rho(q * nc + (nc - 1), q * nc + (nc - 1)).real();
            }
            if (top > opts.occupancy_tol) {
                throw TruncationError("top Fock level reached population " +
                                          std::to_string(top) + "; raise n_max",
                                      t);
            }
        }

        traj.times.push_back(t);
        traj.trace_re.push_back(tr);
        traj.n_exp.push_back(expectation(num_op, rho).real());
        traj.sx_exp.push_back(expectation(qops.sx.mat, rho).real());
        traj.sz_exp.push_back(expectation(qops.sz.mat, rho).real());
        Complex coh(0.0, 0.0);
        for (int k = 0; k < nc; ++k) coh += rho(k, nc + k);
        traj.coh_ge_abs.push_back(std::abs(coh));
        traj.a_exp.push_back(expectation(a_op, rho));
        if (opts.store_states) traj.states.push_back(rho);
    };

    record(opts.t0, state);
    for (long i = 0; i < n_steps; ++i) {
        const double t_mid = opts.t0 + (static_cast<double>(i) + 0.5) * opts.dt;
        state = ((model.probe.active(t_mid) ? props.on : props.off) * state).eval();
        record(opts.t0 + static_cast<double>(i + 1) * opts.dt, state);
    }
    traj.last_state = Eigen::Map<const Matrix>(state.data(), d, d);
    return traj;
}

} // namespace dispersim
