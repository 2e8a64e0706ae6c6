// correlation.hpp — Two-time correlator c(t1,t2) = <a'(t1) a(t2)> by the
// quantum regression theorem: for t1 >= t2, seed a*rho(t2), carry the seed
// forward under the state generator, and read Tr[a' seed]. The grid is
// filled for t1 >= t2 and mirrored by conjugate symmetry.
#pragma once

#include "dispersim/lindblad.hpp"

namespace dispersim {

struct CorrelationResult {
    std::vector<double> times;  // coarse grid, seconds
    Matrix c;                   // c(i,j) = <a'(t_i) a(t_j)>; diagonal is <n>(t_i)
    StateTrajectory trajectory; // fine-grid evolution with states stored
};

// Coarse grid step dt_coarse must be a multiple of opts.dt, and opts.duration
// a multiple of dt_coarse; opts.store_states is forced on. All the regression
// seeds march together as one block, so cost is one fine evolution plus
// n_c*(n_c+1)/2 propagator applications on the coarse grid.
CorrelationResult two_time_correlator(const SystemModel& model, const DensityMatrix& rho0,
                                      double dt_coarse, EvolveOptions opts);

// Carry an arbitrary operator seed from t_from to t_to under the model
// generator. Seeds are not states: no trace or positivity checks apply.
Matrix regression_seed_propagate(const SystemModel& model, const Matrix& seed, double t_from,
                                 double t_to, double dt);

} // namespace dispersim
