// fitcore.hpp — Deterministic nonlinear least squares (damped Gauss-Newton
// with a Levenberg-Marquardt schedule) plus the concrete fit forms used by
// the analysis pipeline: sinusoid, line, fixed-center Gaussian, sum of
// Lorentzians, decaying exponential.
//
// Determinism contract: data is canonically sorted before fitting, all
// initialization rules are closed-form, and no randomness enters anywhere,
// so identical inputs give bit-identical results regardless of data order.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dispersim {

class FitModel {
public:
    virtual ~FitModel() = default;
    virtual int n_params() const = 0;
    virtual std::string name() const = 0;
    virtual double eval(const Eigen::VectorXd& p, double x) const = 0;
    // row(k) = d eval / d p(k) at (p, x)
    virtual void jacobian(const Eigen::VectorXd& p, double x,
                          Eigen::Ref<Eigen::RowVectorXd> row) const = 0;
    // Elementwise floor on parameters (-inf where unconstrained); steps are
    // projected onto the feasible box.
    virtual Eigen::VectorXd lower_bounds() const;
};

struct FitResult {
    Eigen::VectorXd params;
    double residual_norm{0.0}; // sqrt(sum of squared residuals)
    int iterations{0};
    bool converged{false};
    Eigen::MatrixXd covariance; // linearized estimate at the solution
};

FitResult least_squares(const FitModel& model, const std::vector<double>& x,
                        const std::vector<double>& y, const Eigen::VectorXd& init);

// Largest relative deviation between the analytic Jacobian and a central
// finite difference over the given abscissas (used by the self-checks).
double max_jacobian_deviation(const FitModel& model, const Eigen::VectorXd& p,
                              const std::vector<double>& x);

// y = A sin(2 pi f x + phi) + c; params (A, f, phi, c)
class SinusoidModel : public FitModel {
public:
    int n_params() const override { return 4; }
    std::string name() const override { return "sinusoid"; }
    double eval(const Eigen::VectorXd& p, double x) const override;
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override;
};

// y = slope x + intercept
class LineModel : public FitModel {
public:
    int n_params() const override { return 2; }
    std::string name() const override { return "line"; }
    double eval(const Eigen::VectorXd& p, double x) const override;
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override;
};

// y = A exp(-(x/w)^2), center pinned at zero; params (A, w)
class GaussianFixedCenterModel : public FitModel {
public:
    int n_params() const override { return 2; }
    std::string name() const override { return "gaussian_fixed_center"; }
    double eval(const Eigen::VectorXd& p, double x) const override;
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override;
    Eigen::VectorXd lower_bounds() const override;
};

// y = sum_k area_k (hwhm_k / pi) / ((x - center_k)^2 + hwhm_k^2)
// params per peak: (center, hwhm, area); hwhm > 0 and area >= 0 enforced.
class LorentzianSumModel : public FitModel {
public:
    explicit LorentzianSumModel(int n_peaks, double min_hwhm);
    int n_params() const override { return 3 * peaks_; }
    std::string name() const override { return "lorentzian_sum"; }
    double eval(const Eigen::VectorXd& p, double x) const override;
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override;
    Eigen::VectorXd lower_bounds() const override;
    int peaks() const { return peaks_; }

private:
    int peaks_;
    double min_hwhm_;
};

// y = A exp(-rate x) + c; params (A, rate, c)
class ExponentialModel : public FitModel {
public:
    int n_params() const override { return 3; }
    std::string name() const override { return "exponential"; }
    double eval(const Eigen::VectorXd& p, double x) const override;
    void jacobian(const Eigen::VectorXd& p, double x,
                  Eigen::Ref<Eigen::RowVectorXd> row) const override;
};

struct SinusoidFit {
    double amplitude{0.0};
    double frequency{0.0}; // cycles per x unit
    double phase{0.0};
    double offset{0.0};
    FitResult detail;
};

// Self-initializing sinusoid fit: coarse periodogram for the frequency, then
// a linear solve for amplitude/phase/offset, then refinement. Constant data
// is flagged (converged = false, amplitude 0) rather than treated as error.
SinusoidFit fit_sinusoid(const std::vector<double>& x, const std::vector<double>& y);

// Least-squares fringe y = A sin(phase + phi0) + c over one full period of
// uniformly spaced phases; A >= 0. Used for Ramsey phase sweeps.
SinusoidFit fit_phase_fringe(const std::vector<double>& phase, const std::vector<double>& y);

} // namespace dispersim
