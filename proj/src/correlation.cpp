#include "dispersim/correlation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dispersim {

namespace {

// Run-length pattern of probe-on flags across the fine steps inside one
// coarse step. Most coarse steps are all-on or all-off; only the steps
// containing a pulse edge produce mixed patterns.
std::vector<std::pair<bool, long>> fine_step_pattern(const ProbePulse& probe, double t_start,
                                                     double dt_fine, long m) {
    std::vector<std::pair<bool, long>> runs;
    for (long i = 0; i < m; ++i) {
        const bool on = probe.active(t_start + (static_cast<double>(i) + 0.5) * dt_fine);
        if (!runs.empty() && runs.back().first == on) {
            ++runs.back().second;
        } else {
            runs.emplace_back(on, 1);
        }
    }
    return runs;
}

} // namespace

CorrelationResult two_time_correlator(const SystemModel& model, const DensityMatrix& rho0,
                                      double dt_coarse, EvolveOptions opts) {
    if (dt_coarse <= 0.0) {
        throw std::invalid_argument("two_time_correlator: dt_coarse must be positive");
    }
    const long m = std::lround(dt_coarse / opts.dt);
    if (m < 1 || std::abs(static_cast<double>(m) * opts.dt - dt_coarse) > 1e-9 * dt_coarse) {
        throw std::invalid_argument(
            "two_time_correlator: dt_coarse must be a whole multiple of the fine step");
    }
    const long n_c = std::lround(opts.duration / dt_coarse);
    if (n_c < 1 ||
        std::abs(static_cast<double>(n_c) * dt_coarse - opts.duration) > 1e-9 * opts.duration) {
        throw std::invalid_argument(
            "two_time_correlator: duration must be a whole number of coarse steps");
    }

    opts.store_states = true;
    const StepPropagators props = make_step_propagators(model, opts.dt);

    CorrelationResult out;
    out.trajectory = evolve(model, rho0, opts, &props);

    const int d = model.space.dim();
    const Eigen::Index dd = static_cast<Eigen::Index>(d) * d;
    const Matrix a_op = annihilation(model.space).mat;
    const Vector w = Eigen::Map<const Vector>(a_op.data(), dd);

    // One propagator per coarse step, cached by run pattern. Powers of the
    // plain on/off step propagators cover everything except edge-crossing
    // steps, which compose from short run powers.
    std::map<std::vector<std::pair<bool, long>>, Matrix> cache;
    auto coarse_propagator = [&](long k) -> const Matrix& {
        const double t_start = opts.t0 + static_cast<double>(k) * dt_coarse;
        auto runs = fine_step_pattern(model.probe, t_start, opts.dt, m);
        auto it = cache.find(runs);
        if (it == cache.end()) {
            Matrix e = Matrix::Identity(dd, dd);
            for (const auto& [on, count] : runs) {
                e = (matrix_power(on ? props.on : props.off, count) * e).eval();
            }
            it = cache.emplace(std::move(runs), std::move(e)).first;
        }
        return it->second;
    };

    const long n_points = n_c + 1;
    out.times.resize(n_points);
    out.c = Matrix::Zero(n_points, n_points);
    Matrix block(dd, n_points);

    auto seed = [&](long j) {
        const Matrix s = a_op * out.trajectory.states[static_cast<std::size_t>(j) * m];
        block.col(j) = Eigen::Map<const Vector>(s.data(), dd);
    };

    out.times[0] = opts.t0;
    seed(0);
    out.c(0, 0) = w.dot(block.col(0));
    for (long k = 1; k < n_points; ++k) {
        out.times[k] = opts.t0 + static_cast<double>(k) * dt_coarse;
        block.leftCols(k) = (coarse_propagator(k - 1) * block.leftCols(k)).eval();
        seed(k);
        for (long j = 0; j <= k; ++j) {
            const Complex v = w.dot(block.col(j));
            out.c(k, j) = v;
            out.c(j, k) = std::conj(v);
        }
    }
    return out;
}

Matrix regression_seed_propagate(const SystemModel& model, const Matrix& seed, double t_from,
                                 double t_to, double dt) {
    if (t_to < t_from) {
        throw std::invalid_argument("regression_seed_propagate: t_to must not precede t_from");
    }
    if (dt <= 0.0) {
        throw std::invalid_argument("regression_seed_propagate: dt must be positive");
    }
    const int d = model.space.dim();
    if (seed.rows() != d || seed.cols() != d) {
        throw std::invalid_argument("regression_seed_propagate: seed does not match model space");
    }
    const long n = std::lround((t_to - t_from) / dt);
    if (std::abs(static_cast<double>(n) * dt - (t_to - t_from)) > 1e-6 * dt) {
        throw std::invalid_argument(
            "regression_seed_propagate: interval must be a whole number of steps");
    }
    const StepPropagators props = make_step_propagators(model, dt);
    Vector v = Eigen::Map<const Vector>(seed.data(), static_cast<Eigen::Index>(d) * d);
    for (long i = 0; i < n; ++i) {
        const double t_mid = t_from + (static_cast<double>(i) + 0.5) * dt;
        v = ((model.probe.active(t_mid) ? props.on : props.off) * v).eval();
    }
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

} // namespace dispersim
