#include "dispersim/hilbert.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace dispersim {

int default_n_max(double n_target) {
    double base = std::max(n_target, 1.0);
    return static_cast<int>(std::ceil(4.0 * base)) + 6;
}

void DensityMatrix::validate() const {
    if (mat.rows() != mat.cols() || mat.rows() == 0) {
        throw std::invalid_argument("density matrix must be square and non-empty");
    }
    if (!mat.allFinite()) {
        throw std::invalid_argument("density matrix has non-finite entries");
    }
    const double herm = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) {
        throw std::invalid_argument("density matrix not Hermitian (deviation " +
                                    std::to_string(herm) + ")");
    }
    const Complex tr = mat.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > 1e-8) {
        throw std::invalid_argument("density matrix trace deviates from 1 by " +
                                    std::to_string(std::abs(tr - Complex(1.0, 0.0))));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (mat + mat.adjoint()),
                                             Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues().minCoeff();
    if (lambda_min < -1e-8) {
        throw std::invalid_argument("density matrix has negative eigenvalue " +
                                    std::to_string(lambda_min));
    }
}

namespace {

Matrix cavity_annihilation(int n_max) {
    Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

} // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Complex expectation(const Matrix& op, const Matrix& rho) {
    return op.transpose().cwiseProduct(rho).sum();
}

Operator annihilation(const HilbertSpec& spec) {
    return {kron(Matrix::Identity(2, 2), cavity_annihilation(spec.n_max)), "a"};
}

Operator creation(const HilbertSpec& spec) {
    return {annihilation(spec).mat.adjoint(), "a_dag"};
}

Operator number(const HilbertSpec& spec) {
    Matrix n = Matrix::Zero(spec.cavity_dim(), spec.cavity_dim());
    for (int k = 0; k <= spec.n_max; ++k) n(k, k) = static_cast<double>(k);
    return {kron(Matrix::Identity(2, 2), n), "n"};
}

QubitOps qubit_operators(const HilbertSpec& spec) {
    const Matrix ic = Matrix::Identity(spec.cavity_dim(), spec.cavity_dim());
    Matrix sx(2, 2), sy(2, 2), sz(2, 2), sp(2, 2), sm(2, 2);
    const Complex i1(0.0, 1.0);
    sx << 0, 1, 1, 0;
    sy << 0, i1, -i1, 0; // rows/cols ordered |g>,|e>: <g|sy|e> = +i
    sz << -1, 0, 0, 1;
    sp << 0, 0, 1, 0; // |e><g|
    sm << 0, 1, 0, 0; // |g><e|
    return {{kron(sx, ic), "sx"},
            {kron(sy, ic), "sy"},
            {kron(sz, ic), "sz"},
            {kron(sp, ic), "sp"},
            {kron(sm, ic), "sm"}};
}

Operator identity(const HilbertSpec& spec) {
    return {Matrix::Identity(spec.dim(), spec.dim()), "I"};
}

Operator tensor(const Operator& a, const Operator& b) {
    return {kron(a.mat, b.mat), a.label + "(x)" + b.label};
}

DensityMatrix partial_trace_cavity(const HilbertSpec& spec, const DensityMatrix& rho) {
    const int nc = spec.cavity_dim();
    if (rho.mat.rows() != spec.dim()) {
        throw std::invalid_argument("partial_trace_cavity: state dimension mismatch");
    }
    Matrix rq = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < nc; ++k) {
                rq(i, j) += rho.mat(i * nc + k, j * nc + k);
            }
        }
    }
    return {rq, rho.time};
}

DensityMatrix fock_state(const HilbertSpec& spec, int n) {
    if (n < 0 || n > spec.n_max) {
        throw std::invalid_argument("fock_state: level outside truncation");
    }
    Matrix rho = Matrix::Zero(spec.cavity_dim(), spec.cavity_dim());
    rho(n, n) = 1.0;
    return {rho, 0.0};
}

Eigen::Vector2cd qubit_ket(QubitPrep prep) {
    const double s = 1.0 / std::sqrt(2.0);
    switch (prep) {
        case QubitPrep::Ground: return {1.0, 0.0};
        case QubitPrep::Excited: return {0.0, 1.0};
        case QubitPrep::Plus: return {s, s};
        case QubitPrep::Minus: return {s, -s};
    }
    throw std::invalid_argument("unknown qubit preparation");
}

std::string prep_label(QubitPrep prep) {
    switch (prep) {
        case QubitPrep::Ground: return "g";
        case QubitPrep::Excited: return "e";
        case QubitPrep::Plus: return "plus";
        case QubitPrep::Minus: return "minus";
    }
    return "?";
}

DensityMatrix product_state(const HilbertSpec& spec, QubitPrep prep, int n_fock) {
    const Eigen::Vector2cd q = qubit_ket(prep);
    Matrix rq = q * q.adjoint();
    Matrix rc = fock_state(spec, n_fock).mat;
    DensityMatrix rho{kron(rq, rc), 0.0};
    rho.validate();
    return rho;
}

} // namespace dispersim
