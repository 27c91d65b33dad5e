#include "rdslab/variational.hpp"

#include <Eigen/LU>
#include <cmath>

#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

CocycleMatrix linearize(const SpectralModel& model, const PathView& path,
                        const Nonlinearity& nonlin, const StateVector& xi, double t,
                        const SolverOptions& opts) {
    if (t < 0.0) throw config_error("linearize: t must be >= 0");
    const int n = model.n_modes();
    const long n_steps = path.grid_index(t) - path.grid_index(0.0);
    const double dt = path.dt();

    CocycleMatrix out;
    out.t0 = t;
    out.base_point = xi;
    out.path_offset = path.shift_time();

    Eigen::VectorXd expd(n);
    for (int k = 0; k < n; ++k) expd[k] = std::exp(model.drift(k) * dt);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    if (nonlin.is_zero()) {
        for (long s = 0; s < n_steps; ++s) M = expd.asDiagonal() * M;
        out.entries = M;
        return out;
    }

    if (nonlin.constant_jacobian()) {
        const Eigen::MatrixXd J = nonlin.jacobian(StateVector::Zero(n));
        const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * J;
        const Eigen::MatrixXd rhs =
            expd.asDiagonal() * (Eigen::MatrixXd::Identity(n, n) + 0.5 * dt * J);
        const Eigen::MatrixXd step = Eigen::PartialPivLU<Eigen::MatrixXd>(lhs).solve(rhs);
        for (long s = 0; s < n_steps; ++s) M = step * M;
        out.entries = M;
        return out;
    }

    // Frozen trajectory, then one linear solve per step:
    //   (I - dt/2 J_{n+1}) M_{n+1} = D (I + dt/2 J_n) M_n.
    const Trajectory traj = solve_random_pde(model, path, nonlin, xi, t, opts);
    StateVector y = ou_eval(model, path, 0.0);
    const auto mask = dissipative_mask(model);
    Eigen::VectorXd rho(n);
    for (int k = 0; k < n; ++k) rho[k] = mask[k] ? expd[k] : 0.0;
    const long i0 = path.grid_index(0.0);

    Eigen::MatrixXd J_n = nonlin.jacobian(traj.states[0] + y);
    for (long s = 0; s < n_steps; ++s) {
        for (int k = 0; k < n; ++k) {
            if (!mask[k]) { y[k] = 0.0; continue; }
            y[k] = rho[k] * y[k] + model.boundary_coupling()(k, 0) * path.increment(0, i0 + s) +
                   model.boundary_coupling()(k, 1) * path.increment(1, i0 + s);
        }
        const Eigen::MatrixXd J_next = nonlin.jacobian(traj.states[s + 1] + y);
        const Eigen::MatrixXd rhs = expd.asDiagonal() * (M + 0.5 * dt * (J_n * M));
        const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * J_next;
        M = Eigen::PartialPivLU<Eigen::MatrixXd>(lhs).solve(rhs);
        J_n = J_next;
    }
    out.entries = M;
    return out;
}

double fd_derivative_check(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StateVector& xi, double t,
                           double eps, int n_directions, std::uint64_t seed,
                           const SolverOptions& opts) {
    if (!(eps >= 1e-8 && eps <= 1e-3))
        throw config_error("fd_derivative_check: eps must lie in [1e-8, 1e-3]");
    const int n = model.n_modes();
    n_directions = std::min(n_directions, n);

    const CocycleMatrix M = linearize(model, path, nonlin, xi, t, opts);

    GaussianRng rng(seed);
    Eigen::MatrixXd G(n, n_directions);
    for (int j = 0; j < n_directions; ++j)
        for (int i = 0; i < n; ++i) G(i, j) = rng.gaussian();
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ() *
                              Eigen::MatrixXd::Identity(n, n_directions);

    double worst = 0.0;
    for (int j = 0; j < n_directions; ++j) {
        const StateVector eta = Q.col(j);
        const StateVector plus = cocycle_apply(model, path, nonlin, t, xi + eps * eta, opts);
        const StateVector minus = cocycle_apply(model, path, nonlin, t, xi - eps * eta, opts);
        const StateVector fd = (plus - minus) / (2.0 * eps);
        const StateVector lin = M.entries * eta;
        const double denom = std::max(lin.norm(), 1e-300);
        worst = std::max(worst, (fd - lin).norm() / denom);
    }
    return worst;
}

} // namespace rdslab
