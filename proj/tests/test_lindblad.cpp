#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "dispersim/errors.hpp"
#include "dispersim/hilbert.hpp"
#include "dispersim/lindblad.hpp"
#include "dispersim/model.hpp"
#include "dispersim/numeric.hpp"

using namespace dispersim;

namespace {

// Column-stacking used throughout the generator: X(r, c) lands at c * D + r.
Vector vec_of(const Matrix& x) {
    const int d = static_cast<int>(x.rows());
    Vector v(d * d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) v(c * d + r) = x(r, c);
    }
    return v;
}

// Master-equation right-hand side evaluated directly on a matrix, one basis
// element at a time. Deliberately ignorant of the Kronecker identities the
// production generator is built from.
Matrix rhs_direct(const Matrix& h, const std::vector<Operator>& collapse, const Matrix& rho) {
    const Complex i1(0.0, 1.0);
    Matrix out = -i1 * (h * rho - rho * h);
    for (const Operator& c : collapse) {
        const Matrix cdc = c.mat.adjoint() * c.mat;
        out += c.mat * rho * c.mat.adjoint() - 0.5 * (cdc * rho + rho * cdc);
    }
    return out;
}

} // namespace

TEST_CASE("generator matches the entrywise master equation at n_max = 1") {
    SystemModel model;
    model.space.n_max = 1;
    model.probe.amplitude = Complex(1.5e6, 4.0e5);
    model.probe.start = 0.0;
    model.probe.duration = 1e-6;

    const Operator h = hamiltonian_at_amplitude(model, model.probe.amplitude);
    const auto collapse = collapse_operators(model);
    const int d = model.space.dim();

    // Column k of the oracle generator is the vectorized derivative of the
    // k-th matrix unit.
    Matrix oracle = Matrix::Zero(d * d, d * d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            Matrix unit = Matrix::Zero(d, d);
            unit(r, c) = 1.0;
            oracle.col(c * d + r) = vec_of(rhs_direct(h.mat, collapse, unit));
        }
    }

    const Superoperator gen = liouvillian(h, collapse);
    REQUIRE(gen.dim == d);
    const double scale = oracle.cwiseAbs().maxCoeff();
    CHECK((gen.dense() - oracle).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("step propagator agrees with the dense matrix exponential") {
    SystemModel model;
    model.space.n_max = 1;
    model.probe.amplitude = Complex(2.0e6, 0.0);
    const Superoperator gen = liouvillian(
        hamiltonian_at_amplitude(model, model.probe.amplitude), collapse_operators(model));

    const double dt = 1e-9;
    const Matrix prop = step_propagator(gen, dt, max_stable_substep(model));
    const Matrix exact = (gen.dense() * dt).exp();
    CHECK((prop - exact).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("matrix power by squaring") {
    Matrix m(2, 2);
    m << Complex(0.0, 1.0), 2.0, 0.5, -1.0;
    CHECK((matrix_power(m, 0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((matrix_power(m, 1) - m).cwiseAbs().maxCoeff() == 0.0);
    CHECK((matrix_power(m, 5) - m * m * m * m * m).cwiseAbs().maxCoeff() < 1e-13);
    CHECK_THROWS_AS(matrix_power(m, -1), std::invalid_argument);
}

TEST_CASE("empty damped cavity decays at kappa") {
    SystemModel model;
    model.omega_rabi = 0.0;
    model.decoherence = false;
    model.space.n_max = 3;
    model.probe.amplitude = 0.0;

    EvolveOptions opts;
    opts.duration = 1.0e-6;

    const StateTrajectory traj = evolve(model, product_state(model.space, QubitPrep::Ground, 1), opts);
    const double kappa = model.kappa();
    for (int k = 0; k < traj.size(); k += 100) {
        CHECK(traj.n_exp[k] == doctest::Approx(std::exp(-kappa * traj.times[k])).epsilon(1e-6));
        CHECK(std::abs(traj.trace_re[k] - 1.0) < 1e-9);
    }
}

TEST_CASE("resonant Rabi flopping matches the closed form") {
    SystemModel model;
    model.omega_rabi = mhz_to_rads(3.0);
    model.decoherence = false;
    model.space.n_max = 0; // cavity idle in vacuum
    model.probe.amplitude = 0.0;

    EvolveOptions opts;
    opts.duration = 2.0e-6;

    const StateTrajectory traj = evolve(model, product_state(model.space, QubitPrep::Ground), opts);
    for (int k = 0; k < traj.size(); k += 50) {
        CHECK(traj.sz_exp[k] ==
              doctest::Approx(-std::cos(model.omega_rabi * traj.times[k])).epsilon(1e-7).scale(1.0));
    }
    // Purity must survive unitary evolution.
    const Matrix rho = traj.final_state().mat;
    CHECK((rho * rho).trace().real() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pure dephasing closes the coherence at exp(-t/T2*)") {
    SystemModel model;
    model.omega_rabi = 0.0;
    model.space.n_max = 0;
    model.probe.amplitude = 0.0;
    model.t1 = 1.0e3; // effectively no relaxation
    model.t2_star = 2.0e-6;

    EvolveOptions opts;
    opts.duration = 3.0e-6;

    const StateTrajectory traj = evolve(model, product_state(model.space, QubitPrep::Plus), opts);
    for (int k = 0; k < traj.size(); k += 200) {
        const double expect = 0.5 * std::exp(-traj.times[k] / model.t2_star);
        CHECK(traj.coh_ge_abs[k] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("relaxation-limited decay from the excited state") {
    SystemModel model;
    model.omega_rabi = 0.0;
    model.space.n_max = 0;
    model.probe.amplitude = 0.0;
    model.t2_star = 2.0 * model.t1; // gamma_phi exactly zero

    EvolveOptions opts;
    opts.duration = 5.0e-6;

    const StateTrajectory traj = evolve(model, product_state(model.space, QubitPrep::Excited), opts);
    for (int k = 0; k < traj.size(); k += 250) {
        const double pe = std::exp(-traj.times[k] / model.t1);
        CHECK(traj.sz_exp[k] == doctest::Approx(2.0 * pe - 1.0).epsilon(1e-7).scale(1.0));
    }
}

TEST_CASE("driven detuned cavity follows the classical field equation") {
    // Qubit pinned in |g> shifts the cavity by -chi; the field then obeys
    //   d alpha/dt = -(i delta + kappa/2) alpha - i eps,  delta = -chi,
    // and the state stays coherent, so <n> = |alpha|^2 as well.
    SystemModel model;
    model.omega_rabi = 0.0;
    model.decoherence = false;
    model.space.n_max = 4;
    model.probe.amplitude = Complex(1.0e6, 0.0);
    model.probe.start = 0.0;
    model.probe.duration = 2.0e-6;

    EvolveOptions opts;
    opts.duration = 3.0e-6;
    opts.store_states = false;

    const StateTrajectory traj = evolve(model, product_state(model.space, QubitPrep::Ground), opts);

    // Independent fine-step integration of the field equation.
    const double delta = -model.chi;
    const double kappa = model.kappa();
    const Complex i1(0.0, 1.0);
    const double h = 0.25e-9;
    Complex alpha = 0.0;
    double t = 0.0;
    for (int k = 0; k < traj.size(); ++k) {
        if (k > 0) {
            const int sub = 4; // storage step over h
            for (int s = 0; s < sub; ++s) {
                // The pulse is exactly square and its edges sit on the storage
                // grid, so no substep straddles a switch; sampling the
                // amplitude at the midpoint keeps the oracle consistent with
                // the piecewise-constant dynamics.
                const Complex eps = model.probe.value(t + 0.5 * h);
                auto f = [&](Complex a) { return -(i1 * delta + 0.5 * kappa) * a - i1 * eps; };
                const Complex k1 = f(alpha);
                const Complex k2 = f(alpha + 0.5 * h * k1);
                const Complex k3 = f(alpha + 0.5 * h * k2);
                const Complex k4 = f(alpha + h * k3);
                alpha += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += h;
            }
        }
        if (k % 100 == 0) {
            CHECK(std::abs(traj.a_exp[k] - alpha) < 1e-7);
            CHECK(traj.n_exp[k] == doctest::Approx(std::norm(alpha)).epsilon(1e-6).scale(1e-3));
        }
    }
}

TEST_CASE("precomputed propagators change nothing") {
    SystemModel model;
    model.space.n_max = 2;
    model.probe.amplitude = Complex(1.0e6, 0.0);
    model.probe.start = 0.0;
    model.probe.duration = 1.0e-6;

    EvolveOptions opts;
    opts.duration = 2.0e-6;
    opts.store_states = false;

    const DensityMatrix rho0 = product_state(model.space, QubitPrep::Plus);
    const StepPropagators props = make_step_propagators(model, opts.dt);
    const StateTrajectory a = evolve(model, rho0, opts);
    const StateTrajectory b = evolve(model, rho0, opts, &props);

    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k) {
        CHECK(a.n_exp[k] == b.n_exp[k]);
        CHECK(a.sx_exp[k] == b.sx_exp[k]);
    }

    StepPropagators wrong = make_step_propagators(model, 2.0 * opts.dt);
    CHECK_THROWS_AS(evolve(model, rho0, opts, &wrong), std::invalid_argument);
}

TEST_CASE("integration guards") {
    SystemModel model;
    model.space.n_max = 2;
    model.probe.amplitude = 0.0;
    EvolveOptions opts;
    opts.duration = 1.0e-6;
    opts.store_states = false;

    SUBCASE("trace drift") {
        DensityMatrix bad = product_state(model.space, QubitPrep::Ground);
        bad.mat *= 0.5;
        CHECK_THROWS_AS(evolve(model, bad, opts), IntegrationError);
    }
    SUBCASE("negative eigenvalue") {
        DensityMatrix bad = product_state(model.space, QubitPrep::Ground);
        bad.mat(1, 1) = -0.01;
        bad.mat(0, 0) = 1.01;
        CHECK_THROWS_AS(evolve(model, bad, opts), IntegrationError);
    }
    SUBCASE("truncation overflow is its own error type") {
        model.probe.amplitude = Complex(2.0e7, 0.0);
        model.probe.start = 0.0;
        model.probe.duration = 1.0e-6;
        const DensityMatrix rho0 = product_state(model.space, QubitPrep::Ground);
        CHECK_THROWS_AS(evolve(model, rho0, opts), TruncationError);
    }
    SUBCASE("probe edges must sit on the storage grid") {
        model.probe.amplitude = Complex(1.0e6, 0.0);
        model.probe.start = 0.5e-9;
        model.probe.duration = 1.0e-6;
        const DensityMatrix rho0 = product_state(model.space, QubitPrep::Ground);
        CHECK_THROWS_AS(evolve(model, rho0, opts), std::invalid_argument);
    }
    SUBCASE("duration must be a whole number of steps") {
        opts.duration = 1.0005e-6;
        opts.dt = 1e-9;
        const DensityMatrix rho0 = product_state(model.space, QubitPrep::Ground);
        CHECK_THROWS_AS(evolve(model, rho0, opts), std::invalid_argument);
    }
}
