// lindblad.hpp — Master-equation propagation on the vectorized state.
//
// The generator acts on column-stacked density matrices, vec(A X B) =
// (B^T (x) A) vec(X):
//
//   L = -i (I(x)H - H^T(x)I)
//       + sum_k [ conj(C_k)(x)C_k - (I(x)C_k'C_k + (C_k'C_k)^T(x)I) / 2 ]
//
// Time stepping uses the exact propagator of each piecewise-constant
// segment, approximated by the degree-4 Taylor polynomial of exp(h L) on a
// substep h small enough that h * (fastest rate) <= 0.01, composed up to the
// requested storage step by repeated squaring. For a constant generator this
// is identical to classical RK4 applied to d/dt vec(rho) = L vec(rho).
#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "dispersim/model.hpp"

namespace dispersim {

struct Superoperator {
    int dim{0}; // Hilbert-space dimension D; mat is D^2 x D^2
    Eigen::SparseMatrix<Complex> mat;

    Matrix dense() const { return Matrix(mat); }
};

Superoperator liouvillian(const Operator& hamiltonian, const std::vector<Operator>& collapse);

// exp(dt L) to fourth order per substep; substeps no longer than max_substep.
Matrix step_propagator(const Superoperator& gen, double dt, double max_substep);

Matrix matrix_power(const Matrix& m, long exponent);

// The two generators a model can present (probe on / probe off), with the
// lookup used by both the integrator and the correlation sweep.
class PiecewiseGenerator {
public:
    explicit PiecewiseGenerator(const SystemModel& model);

    bool probe_on(double t) const { return probe_.active(t); }
    const Superoperator& at(double t) const { return probe_on(t) ? on_ : off_; }
    const Superoperator& probe_on_generator() const { return on_; }
    const Superoperator& probe_off_generator() const { return off_; }

private:
    ProbePulse probe_;
    Superoperator on_, off_;
};

struct EvolveOptions {
    double dt{1e-9};       // storage grid step, seconds
    double duration{3e-6}; // integration window, seconds
    double t0{0.0};
    bool store_states{true};
    double trace_tol{1e-6};
    double positivity_tol{1e-6};
    double occupancy_tol{1e-4}; // ceiling on top Fock-level population
};

// Storage-step propagators for the two generator branches. Building these is
// the expensive part of an evolve call; callers that run several evolutions
// of the same model at the same dt should build once and pass them in.
struct StepPropagators {
    double dt{0.0};
    Matrix on, off;
};

StepPropagators make_step_propagators(const SystemModel& model, double dt);

struct StateTrajectory {
    std::vector<double> times; // seconds
    std::vector<Matrix> states; // filled when store_states was set
    std::vector<double> trace_re;
    std::vector<double> n_exp;
    std::vector<double> sx_exp;
    std::vector<double> sz_exp;
    std::vector<double> coh_ge_abs; // |<g|rho_qubit|e>| of the reduced qubit
    std::vector<Complex> a_exp;
    Matrix last_state; // always kept, even when store_states is off

    int size() const { return static_cast<int>(times.size()); }
    DensityMatrix final_state() const;
};

// March rho0 across [t0, t0 + duration] on the storage grid. Probe edges
// must fall on grid points. Throws IntegrationError when the trace or
// positivity tolerance is breached and TruncationError when the top Fock
// level accumulates more than occupancy_tol population. When `precomputed`
// is given it must have been built for this model at opts.dt.
StateTrajectory evolve(const SystemModel& model, const DensityMatrix& rho0,
                       const EvolveOptions& opts,
                       const StepPropagators* precomputed = nullptr);

} // namespace dispersim
