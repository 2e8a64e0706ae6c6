#include "dispersim/fitcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dispersim/errors.hpp"
#include "dispersim/numeric.hpp"

namespace dispersim {

Eigen::VectorXd FitModel::lower_bounds() const {
    return Eigen::VectorXd::Constant(n_params(), -std::numeric_limits<double>::infinity());
}

namespace {

struct SortedData {
    std::vector<double> x, y;
};

// Canonical (x, y) ordering makes the optimizer exactly permutation-invariant
// despite non-associative float sums.
SortedData canonical_sort(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    SortedData out;
    out.x.reserve(x.size());
    out.y.reserve(y.size());
    for (std::size_t i : idx) {
        out.x.push_back(x[i]);
        out.y.push_back(y[i]);
    }
    return out;
}

double sum_squared_residuals(const FitModel& model, const SortedData& d,
                             const Eigen::VectorXd& p) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double r = model.eval(p, d.x[i]) - d.y[i];
        ssr += r * r;
    }
    return ssr;
}

Eigen::VectorXd clamp_to_bounds(Eigen::VectorXd p, const Eigen::VectorXd& lb) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (p(k) < lb(k)) p(k) = lb(k);
    }
    return p;
}

} // namespace

FitResult least_squares(const FitModel& model, const std::vector<double>& x,
                        const std::vector<double>& y, const Eigen::VectorXd& init) {
    const int np = model.n_params();
    if (x.size() != y.size()) {
        throw std::invalid_argument("least_squares: x and y lengths differ");
    }
    if (static_cast<int>(x.size()) < np) {
        throw std::invalid_argument("least_squares: '" + model.name() + "' needs at least " +
                                    std::to_string(np) + " points");
    }
    if (init.size() != np || !init.allFinite()) {
        throw std::invalid_argument("least_squares: initial guess must be finite with " +
                                    std::to_string(np) + " entries");
    }

    const SortedData d = canonical_sort(x, y);
    const Eigen::VectorXd lb = model.lower_bounds();
    const long n = static_cast<long>(d.x.size());

    FitResult res;
    res.params = clamp_to_bounds(init, lb);
    double ssr = sum_squared_residuals(model, d, res.params);

    Eigen::MatrixXd jac(n, np);
    Eigen::RowVectorXd jrow(np);
    Eigen::VectorXd r(n);
    double lambda = 1e-3;
    const int max_iter = 500;

    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        for (long i = 0; i < n; ++i) {
            r(i) = model.eval(res.params, d.x[i]) - d.y[i];
            model.jacobian(res.params, d.x[i], jrow);
            jac.row(i) = jrow;
        }
        const Eigen::MatrixXd h = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        const double diag_floor = 1e-12 * (h.trace() / np + 1e-300);

        if (g.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, ssr)) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        int bad_solves = 0;
        while (lambda < 1e15) {
            Eigen::MatrixXd a = h;
            for (int k = 0; k < np; ++k) {
                a(k, k) += lambda * std::max(h(k, k), diag_floor);
            }
            const Eigen::VectorXd delta = a.ldlt().solve(-g);
            if (!delta.allFinite()) {
                lambda *= 10.0;
                if (++bad_solves > 40) {
                    throw FitError("least_squares: normal equations for '" + model.name() +
                                   "' stay singular under damping");
                }
                continue;
            }
            const Eigen::VectorXd trial = clamp_to_bounds(res.params + delta, lb);
            const double trial_ssr = sum_squared_residuals(model, d, trial);
            if (trial_ssr <= ssr) {
                const double rel_step =
                    (trial - res.params).norm() / (res.params.norm() + 1e-30);
                const double improvement = ssr - trial_ssr;
                res.params = trial;
                ssr = trial_ssr;
                lambda = std::max(lambda / 3.0, 1e-14);
                accepted = true;
                if (rel_step < 1e-10) res.converged = true;
                // Stalled cost (ftol): accepted steps that no longer move the
                // sum of squares are an optimum for every practical purpose,
                // even when a sloppy direction keeps the step size finite.
                if (improvement <= 1e-12 * (ssr + 1e-300)) res.converged = true;
                break;
            }
            lambda *= 2.0;
        }
        if (!accepted || res.converged) {
            // Damping exhausted without improvement also counts as a stop;
            // the flag then reports whether the stop was a real optimum.
            break;
        }
    }

    res.residual_norm = std::sqrt(ssr);
    res.covariance = Eigen::MatrixXd::Zero(np, np);
    if (n > np) {
        for (long i = 0; i < n; ++i) {
            model.jacobian(res.params, d.x[i], jrow);
            jac.row(i) = jrow;
        }
        const Eigen::MatrixXd h = jac.transpose() * jac;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
        if (lu.isInvertible()) {
            res.covariance = lu.inverse() * (ssr / static_cast<double>(n - np));
        }
    }
    return res;
}

double max_jacobian_deviation(const FitModel& model, const Eigen::VectorXd& p,
                              const std::vector<double>& x) {
    const int np = model.n_params();
    Eigen::RowVectorXd analytic(np);
    Eigen::VectorXd pp = p, pm = p;
    double worst = 0.0;
    for (double xi : x) {
        model.jacobian(p, xi, analytic);
        for (int k = 0; k < np; ++k) {
            const double h = std::max(std::abs(p(k)) * 1e-5, 1e-8);
            pp = p;
            pm = p;
            pp(k) += h;
            pm(k) -= h;
            const double fd = (model.eval(pp, xi) - model.eval(pm, xi)) / (2.0 * h);
            const double denom = std::max({std::abs(analytic(k)), std::abs(fd), 1e-12});
            worst = std::max(worst, std::abs(analytic(k) - fd) / denom);
        }
    }
    return worst;
}

double SinusoidModel::eval(const Eigen::VectorXd& p, double x) const {
    return p(0) * std::sin(kTwoPi * p(1) * x + p(2)) + p(3);
}

void SinusoidModel::jacobian(const Eigen::VectorXd& p, double x,
                             Eigen::Ref<Eigen::RowVectorXd> row) const {
    const double theta = kTwoPi * p(1) * x + p(2);
    const double s = std::sin(theta), c = std::cos(theta);
    row(0) = s;
    row(1) = p(0) * c * kTwoPi * x;
    row(2) = p(0) * c;
    row(3) = 1.0;
}

double LineModel::eval(const Eigen::VectorXd& p, double x) const { return p(0) * x + p(1); }

void LineModel::jacobian(const Eigen::VectorXd&, double x,
                         Eigen::Ref<Eigen::RowVectorXd> row) const {
    row(0) = x;
    row(1) = 1.0;
}

double GaussianFixedCenterModel::eval(const Eigen::VectorXd& p, double x) const {
    const double u = x / p(1);
    return p(0) * std::exp(-u * u);
}

void GaussianFixedCenterModel::jacobian(const Eigen::VectorXd& p, double x,
                                        Eigen::Ref<Eigen::RowVectorXd> row) const {
    const double u = x / p(1);
    const double e = std::exp(-u * u);
    row(0) = e;
    row(1) = p(0) * e * 2.0 * x * x / (p(1) * p(1) * p(1));
}

Eigen::VectorXd GaussianFixedCenterModel::lower_bounds() const {
    Eigen::VectorXd lb(2);
    lb << -std::numeric_limits<double>::infinity(), 1e-12;
    return lb;
}

LorentzianSumModel::LorentzianSumModel(int n_peaks, double min_hwhm)
    : peaks_(n_peaks), min_hwhm_(min_hwhm) {
    if (n_peaks < 1) throw std::invalid_argument("lorentzian_sum: need at least one peak");
    if (min_hwhm <= 0.0) throw std::invalid_argument("lorentzian_sum: min_hwhm must be positive");
}

double LorentzianSumModel::eval(const Eigen::VectorXd& p, double x) const {
    double y = 0.0;
    for (int k = 0; k < peaks_; ++k) {
        const double dx = x - p(3 * k);
        const double g = p(3 * k + 1);
        y += p(3 * k + 2) * (g / M_PI) / (dx * dx + g * g);
    }
    return y;
}

void LorentzianSumModel::jacobian(const Eigen::VectorXd& p, double x,
                                  Eigen::Ref<Eigen::RowVectorXd> row) const {
    for (int k = 0; k < peaks_; ++k) {
        const double dx = x - p(3 * k);
        const double g = p(3 * k + 1);
        const double a = p(3 * k + 2);
        const double denom = dx * dx + g * g;
        row(3 * k) = a * (g / M_PI) * 2.0 * dx / (denom * denom);
        row(3 * k + 1) = (a / M_PI) * (dx * dx - g * g) / (denom * denom);
        row(3 * k + 2) = (g / M_PI) / denom;
    }
}

Eigen::VectorXd LorentzianSumModel::lower_bounds() const {
    Eigen::VectorXd lb(3 * peaks_);
    for (int k = 0; k < peaks_; ++k) {
        lb(3 * k) = -std::numeric_limits<double>::infinity();
        lb(3 * k + 1) = min_hwhm_;
        lb(3 * k + 2) = 0.0;
    }
    return lb;
}

double ExponentialModel::eval(const Eigen::VectorXd& p, double x) const {
    return p(0) * std::exp(-p(1) * x) + p(2);
}

void ExponentialModel::jacobian(const Eigen::VectorXd& p, double x,
                                Eigen::Ref<Eigen::RowVectorXd> row) const {
    const double e = std::exp(-p(1) * x);
    row(0) = e;
    row(1) = -p(0) * x * e;
    row(2) = 1.0;
}

namespace {

// y = A sin(x + phi) + c with the period pinned; used for phase fringes.
class FringeModel : public FitModel {
public:
    int n_params() const override { return 3; }
    std::string name() const override { return "fringe"; }
    double eval(const Eigen::VectorXd& p, double x) const override {
        return p(0) * std::sin(x + p(1)) + p(2);
    }
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override {
        row(0) = std::sin(x + p(1));
        row(1) = p(0) * std::cos(x + p(1));
        row(2) = 1.0;
    }
};

void normalize_amplitude(double& amp, double& phase) {
    if (amp < 0.0) {
        amp = -amp;
        phase += M_PI;
    }
    while (phase > M_PI) phase -= kTwoPi;
    while (phase <= -M_PI) phase += kTwoPi;
}

} // namespace

SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_sinusoid: lengths differ");
    if (x.size() < 4) throw std::invalid_argument("fit_sinusoid: needs at least 4 points");

    const SortedData d = canonical_sort(x, y);
    const auto [ymin_it, ymax_it] = std::minmax_element(d.y.begin(), d.y.end());
    SinusoidFit out;
    if (*ymax_it - *ymin_it <= 1e-14 * (std::abs(*ymax_it) + std::abs(*ymin_it) + 1.0)) {
        out.offset = d.y.front();
        out.detail.converged = false; // frequency unidentifiable on flat data
        return out;
    }
    const double span = d.x.back() - d.x.front();
    if (span <= 0.0) throw std::invalid_argument("fit_sinusoid: zero abscissa span");

    const long n = static_cast<long>(d.x.size());
    const double mean = std::accumulate(d.y.begin(), d.y.end(), 0.0) / static_cast<double>(n);
    const double f_lo = 0.5 / span;
    const double f_hi = 0.5 * static_cast<double>(n - 1) / span;
    const long n_grid = std::max<long>(64, 4 * n);
    double best_f = f_lo, best_power = -1.0;
    for (long k = 0; k <= n_grid; ++k) {
        const double f = f_lo + (f_hi - f_lo) * static_cast<double>(k) / n_grid;
        double cs = 0.0, sn = 0.0;
        for (long i = 0; i < n; ++i) {
            const double theta = kTwoPi * f * d.x[i];
            cs += (d.y[i] - mean) * std::cos(theta);
            sn += (d.y[i] - mean) * std::sin(theta);
        }
        const double power = cs * cs + sn * sn;
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }

    // Linear solve for the in-phase/quadrature amplitudes at the picked
    // frequency, which lands the refinement inside its convergence basin.
    Eigen::MatrixXd basis(n, 3);
    Eigen::VectorXd rhs(n);
    for (long i = 0; i < n; ++i) {
        const double theta = kTwoPi * best_f * d.x[i];
        basis(i, 0) = std::sin(theta);
        basis(i, 1) = std::cos(theta);
        basis(i, 2) = 1.0;
        rhs(i) = d.y[i];
    }
    const Eigen::VectorXd abc = basis.colPivHouseholderQr().solve(rhs);

    Eigen::VectorXd p0(4);
    p0 << std::hypot(abc(0), abc(1)), best_f, std::atan2(abc(1), abc(0)), abc(2);
    SinusoidModel model;
    out.detail = least_squares(model, d.x, d.y, p0);
    out.amplitude = out.detail.params(0);
    out.frequency = out.detail.params(1);
    out.phase = out.detail.params(2);
    out.offset = out.detail.params(3);
    normalize_amplitude(out.amplitude, out.phase);
    if (out.frequency < 0.0) {
        // sin(-2pi f x + phi) = sin(2pi f x + (pi - phi)) with negated amplitude
        out.frequency = -out.frequency;
        out.phase = M_PI - out.phase;
        out.amplitude = -out.amplitude;
        normalize_amplitude(out.amplitude, out.phase);
    }
    return out;
}

SinusoidFit fit_phase_fringe(const std::vector<double>& phase, const std::vector<double>& y) {
    if (phase.size() != y.size()) throw std::invalid_argument("fit_phase_fringe: lengths differ");
    if (phase.size() < 4) throw std::invalid_argument("fit_phase_fringe: needs at least 4 points");

    const SortedData d = canonical_sort(phase, y);
    const long n = static_cast<long>(d.x.size());
    double s = 0.0, c = 0.0, mean = 0.0;
    for (long i = 0; i < n; ++i) {
        s += d.y[i] * std::sin(d.x[i]);
        c += d.y[i] * std::cos(d.x[i]);
        mean += d.y[i];
    }
    mean /= static_cast<double>(n);

    SinusoidFit out;
    out.frequency = 1.0 / kTwoPi; // fixed by the model
    const double a0 = 2.0 * s / static_cast<double>(n);
    const double b0 = 2.0 * c / static_cast<double>(n);
    if (std::hypot(a0, b0) == 0.0 && *std::max_element(d.y.begin(), d.y.end()) ==
                                         *std::min_element(d.y.begin(), d.y.end())) {
        out.offset = mean;
        out.detail.converged = true; // zero fringe is the exact solution
        return out;
    }

    Eigen::VectorXd p0(3);
    p0 << std::hypot(a0, b0), std::atan2(b0, a0), mean;
    FringeModel model;
    out.detail = least_squares(model, d.x, d.y, p0);
    out.amplitude = out.detail.params(0);
    out.phase = out.detail.params(1);
    out.offset = out.detail.params(2);
    normalize_amplitude(out.amplitude, out.phase);
    return out;
}

} // namespace dispersim
