#pragma once

#include "rdslab/cocycle.hpp"

namespace rdslab {

// Linearized cocycle D_xi phi~^t over one span as a dense matrix on the
// truncated space. At g = 0 it is diag(e^{(mu - lambda_k) t}).
struct CocycleMatrix {
    Eigen::MatrixXd entries;
    double t0 = 0.0;           // span length
    StateVector base_point;    // xi the derivative is taken at
    double path_offset = 0.0;  // shift of the underlying path view
};

// Solves the matrix variational equation along the frozen trajectory of xi
// with the same exponential-trapezoidal scheme as the state solver (the
// matrix is the exact derivative of the discrete flow map up to the Picard
// tolerance).
CocycleMatrix linearize(const SpectralModel& model, const PathView& path,
                        const Nonlinearity& nonlin, const StateVector& xi, double t,
                        const SolverOptions& opts = {});

// Max relative error of central finite differences against linearize over a
// random orthonormal set of directions.
double fd_derivative_check(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StateVector& xi, double t,
                           double eps, int n_directions = 8, std::uint64_t seed = 0x5eed,
                           const SolverOptions& opts = {});

} // namespace rdslab
