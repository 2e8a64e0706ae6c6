// hilbert.hpp — Operators and states on a truncated qubit (x) cavity space.
//
// Conventions used throughout:
//   * joint basis index = qubit_index * (n_max + 1) + fock_index  (qubit factor first)
//   * qubit basis order |g>, |e>;  sigma_z |e> = +|e>, sigma_z |g> = -|g>
//   * |+/-> = (|g> +/- |e>)/sqrt(2) are the sigma_x eigenstates
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dispersim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct HilbertSpec {
    int n_max{10}; // highest retained Fock level; cavity dimension is n_max + 1

    int cavity_dim() const { return n_max + 1; }
    int dim() const { return 2 * (n_max + 1); }
};

// Suggested truncation for a target emitted-photon number when a config does
// not pin n_max explicitly. Deliberately generous; the occupancy guard in the
// integrator is the binding check.
int default_n_max(double n_target);

// A labelled matrix on the joint space (or a factor of it).
struct Operator {
    Matrix mat;
    std::string label;

    int dim() const { return static_cast<int>(mat.rows()); }
};

// Validated density matrix snapshot. Construction does not validate (the
// integrator applies its own tolerances); call validate() where the strict
// invariants are required.
struct DensityMatrix {
    Matrix mat;
    double time{0.0}; // seconds

    // Hermiticity within 1e-10, unit trace within 1e-8, lowest eigenvalue
    // above -1e-8. Throws std::invalid_argument naming the failed check.
    void validate() const;
};

// Cavity-factor ladder operators lifted to the joint space (identity on the
// qubit factor).
Operator annihilation(const HilbertSpec& spec);
Operator creation(const HilbertSpec& spec);
Operator number(const HilbertSpec& spec);

// Pauli operators lifted to the joint space (identity on the cavity factor).
struct QubitOps {
    Operator sx, sy, sz, sp, sm;
};
QubitOps qubit_operators(const HilbertSpec& spec);

Operator identity(const HilbertSpec& spec);

// Kronecker product, qubit-factor-first convention.
Operator tensor(const Operator& a, const Operator& b);

// Plain Kronecker product of two matrices (left factor varies slowest).
Matrix kron(const Matrix& a, const Matrix& b);

// Tr[op * rho], computed entrywise.
Complex expectation(const Matrix& op, const Matrix& rho);

// Reduce a joint-space state to its 2x2 qubit factor.
DensityMatrix partial_trace_cavity(const HilbertSpec& spec, const DensityMatrix& rho);

// Product-state constructors.
DensityMatrix fock_state(const HilbertSpec& spec, int n);

enum class QubitPrep { Ground, Excited, Plus, Minus };

// |prep><prep| (x) |n><n| on the joint space.
DensityMatrix product_state(const HilbertSpec& spec, QubitPrep prep, int n_fock = 0);

Eigen::Vector2cd qubit_ket(QubitPrep prep);
std::string prep_label(QubitPrep prep);

} // namespace dispersim
