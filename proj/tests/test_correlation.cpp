#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "dispersim/correlation.hpp"
#include "dispersim/model.hpp"
#include "dispersim/numeric.hpp"

using namespace dispersim;

namespace {

Vector vec_of(const Matrix& x) {
    const int d = static_cast<int>(x.rows());
    Vector v(d * d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) v(c * d + r) = x(r, c);
    }
    return v;
}

Matrix unvec(const Vector& v, int d) {
    Matrix m(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) m(r, c) = v(c * d + r);
    }
    return m;
}

// Small piecewise-constant model used by the exact-propagation oracle. The
// probe switches off in the middle of a coarse interval on purpose.
SystemModel oracle_model() {
    SystemModel model;
    model.space.n_max = 2;
    model.omega_rabi = mhz_to_rads(3.0);
    model.probe.amplitude = Complex(0.8e6, 0.0);
    model.probe.start = 0.0;
    model.probe.duration = 0.375e-6;
    return model;
}

} // namespace

TEST_CASE("regression grid matches dense matrix-exponential propagation") {
    const SystemModel model = oracle_model();
    const int d = model.space.dim();

    EvolveOptions opts;
    opts.dt = 1e-9;
    opts.duration = 0.8e-6;
    const double dt_c = 50e-9;

    const CorrelationResult got = two_time_correlator(
        model, product_state(model.space, QubitPrep::Minus), dt_c, opts);
    const long n_points = static_cast<long>(got.times.size());
    REQUIRE(n_points == 17);

    // Exact interval propagators: exp(L dt) for the three kinds of coarse
    // interval (all on, all off, and the one containing the pulse edge).
    const auto collapse = collapse_operators(model);
    const Matrix l_on =
        liouvillian(hamiltonian_at_amplitude(model, model.probe.amplitude), collapse).dense();
    const Matrix l_off =
        liouvillian(hamiltonian_at_amplitude(model, Complex(0.0, 0.0)), collapse).dense();

    auto interval = [&](double t0, double t1) -> Matrix {
        const double edge = model.probe.start + model.probe.duration;
        if (t1 <= edge) return (l_on * (t1 - t0)).exp();
        if (t0 >= edge) return (l_off * (t1 - t0)).exp();
        return Matrix((l_off * (t1 - edge)).exp() * (l_on * (edge - t0)).exp());
    };

    const Matrix a_op = annihilation(model.space).mat;
    const Matrix adag = a_op.adjoint();

    // States at the coarse times by exact chaining.
    std::vector<Vector> states(n_points);
    states[0] = vec_of(product_state(model.space, QubitPrep::Minus).mat);
    for (long k = 1; k < n_points; ++k) {
        states[k] = interval(got.times[k - 1], got.times[k]) * states[k - 1];
    }

    double worst = 0.0;
    for (long j = 0; j < n_points; ++j) {
        Vector seed = vec_of(a_op * unvec(states[j], d));
        for (long i = j; i < n_points; ++i) {
            if (i > j) seed = (interval(got.times[i - 1], got.times[i]) * seed).eval();
            const Complex expect = (adag * unvec(seed, d)).trace();
            worst = std::max(worst, std::abs(got.c(i, j) - expect));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("grid invariants on a driven run") {
    const SystemModel model = oracle_model();

    EvolveOptions opts;
    opts.dt = 1e-9;
    opts.duration = 0.8e-6;
    const double dt_c = 25e-9;

    const CorrelationResult corr = two_time_correlator(
        model, product_state(model.space, QubitPrep::Minus), dt_c, opts);
    const long n = static_cast<long>(corr.times.size());
    const long m = std::lround(dt_c / opts.dt);

    SUBCASE("diagonal equals the photon-number series") {
        for (long k = 0; k < n; ++k) {
            CHECK(std::abs(corr.c(k, k).imag()) < 1e-10);
            CHECK(corr.c(k, k).real() ==
                  doctest::Approx(corr.trajectory.n_exp[static_cast<std::size_t>(k) * m])
                      .epsilon(1e-8)
                      .scale(1.0));
        }
    }

    SUBCASE("conjugate symmetry") {
        double worst = 0.0;
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                worst = std::max(worst, std::abs(corr.c(i, j) - std::conj(corr.c(j, i))));
            }
        }
        CHECK(worst < 1e-8);
    }

    SUBCASE("kernel is positive semidefinite") {
        // c(t1,t2) is a Gram kernel of emission operators, so any sampled
        // matrix of it must be PSD up to integration error.
        Eigen::SelfAdjointEigenSolver<Matrix> es(corr.c, Eigen::EigenvaluesOnly);
        const double floor = -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff());
        CHECK(es.eigenvalues().minCoeff() >= floor);
    }
}

TEST_CASE("undriven vacuum correlator vanishes identically") {
    SystemModel model;
    model.space.n_max = 2;
    model.omega_rabi = mhz_to_rads(3.0); // qubit drive alone creates no photons
    model.probe.amplitude = 0.0;

    EvolveOptions opts;
    opts.dt = 1e-9;
    opts.duration = 0.4e-6;

    const CorrelationResult corr = two_time_correlator(
        model, product_state(model.space, QubitPrep::Ground), 50e-9, opts);
    CHECK(corr.c.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("seed propagation is linear and consistent with state evolution") {
    const SystemModel model = oracle_model();
    const int d = model.space.dim();
    const double dt = 1e-9;

    Matrix a = Matrix::Zero(d, d);
    a(0, 1) = Complex(0.3, -0.2);
    a(4, 2) = 1.7;
    Matrix b = Matrix::Identity(d, d) * Complex(0.0, 0.5);
    b(3, 3) = -2.0;

    const Matrix fa = regression_seed_propagate(model, a, 0.0, 0.3e-6, dt);
    const Matrix fb = regression_seed_propagate(model, b, 0.0, 0.3e-6, dt);
    const Matrix fab = regression_seed_propagate(model, a + 2.0 * b, 0.0, 0.3e-6, dt);
    CHECK((fab - fa - 2.0 * fb).cwiseAbs().maxCoeff() < 1e-12);

    // A physical state used as a seed must reproduce the evolve result.
    const DensityMatrix rho0 = product_state(model.space, QubitPrep::Plus);
    EvolveOptions opts;
    opts.dt = dt;
    opts.duration = 0.3e-6;
    opts.store_states = false;
    const StateTrajectory traj = evolve(model, rho0, opts);
    const Matrix carried = regression_seed_propagate(model, rho0.mat, 0.0, 0.3e-6, dt);
    CHECK((carried - traj.final_state().mat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grid validation") {
    const SystemModel model = oracle_model();
    const DensityMatrix rho0 = product_state(model.space, QubitPrep::Minus);

    EvolveOptions opts;
    opts.dt = 7e-9;
    opts.duration = 0.8e-6;

    SUBCASE("coarse step must be a multiple of the fine step") {
        CHECK_THROWS_AS(two_time_correlator(model, rho0, 30e-9, opts), std::invalid_argument);
    }
    SUBCASE("duration must be a whole number of coarse steps") {
        opts.dt = 1e-9;
        CHECK_THROWS_AS(two_time_correlator(model, rho0, 0.3e-6, opts), std::invalid_argument);
    }
    SUBCASE("negative interval rejected") {
        CHECK_THROWS_AS(
            regression_seed_propagate(model, rho0.mat, 1e-6, 0.5e-6, 1e-9),
            std::invalid_argument);
    }
}
