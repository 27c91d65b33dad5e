#include "rdslab/cocycle.hpp"

#include <cmath>

#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"

namespace rdslab {

namespace {

// Per-step OU companion: evolves Y_{theta_{t_n} omega}(0) along the grid with
// the same arithmetic as ou_eval, so that solver restarts at shifted views
// reproduce identical Y values bitwise.
struct OuCompanion {
    const SpectralModel& model;
    const PathView& path;
    Eigen::VectorXd rho;   // e^{a_k dt}, dissipative modes only
    Eigen::Array<bool, Eigen::Dynamic, 1> mask;
    StateVector y;
    long node = 0;

    OuCompanion(const SpectralModel& m, const PathView& p)
        : model(m), path(p), mask(dissipative_mask(m)) {
        rho.resize(m.n_modes());
        for (int k = 0; k < m.n_modes(); ++k)
            rho[k] = mask[k] ? std::exp(m.drift(k) * p.dt()) : 0.0;
        y = ou_eval(m, p, 0.0);
        node = p.grid_index(0.0);
    }

    void advance() {
        for (int k = 0; k < model.n_modes(); ++k) {
            if (!mask[k]) continue;
            y[k] = rho[k] * y[k] + model.boundary_coupling()(k, 0) * path.increment(0, node) +
                   model.boundary_coupling()(k, 1) * path.increment(1, node);
        }
        ++node;
    }
};

void check_contraction(const SpectralModel& model, const Nonlinearity& nonlin, double dt) {
    const double c = contraction_surrogate(model, dt) * nonlin.lipschitz();
    if (c >= 1.0)
        throw numerical_refusal(
            "solve_random_pde: contraction surrogate c(dt) L = " + std::to_string(c) +
            " >= 1 at the finest allowed substep; reduce dt or the Lipschitz constant");
}

} // namespace

Trajectory solve_random_pde(const SpectralModel& model, const PathView& path,
                            const Nonlinearity& nonlin, const StateVector& xi, double t_end,
                            const SolverOptions& opts) {
    if (xi.size() != model.n_modes()) throw config_error("solve_random_pde: dimension mismatch");
    const long n_steps = path.grid_index(t_end) - path.grid_index(0.0);
    const double dt = path.dt();
    if (!nonlin.is_zero()) check_contraction(model, nonlin, dt);

    OuCompanion ou(model, path);
    Eigen::VectorXd expd(model.n_modes()); // full e^{a_k dt}, all modes
    for (int k = 0; k < model.n_modes(); ++k) expd[k] = std::exp(model.drift(k) * dt);

    Trajectory traj;
    traj.times.resize(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    StateVector v = xi - ou.y; // V(0) = xi - Y_omega(0)
    traj.times[0] = 0.0;
    traj.states.push_back(v);

    StateVector gu = nonlin(v + ou.y);
    for (long n = 0; n < n_steps; ++n) {
        const StateVector y_n = ou.y;
        ou.advance();
        const StateVector& y_next = ou.y;

        if (nonlin.is_zero()) {
            v = expd.asDiagonal() * v;
        } else {
            // v_{n+1} = D v_n + dt/2 [ D g(v_n + y_n) + g(v_{n+1} + y_{n+1}) ]
            const StateVector explicit_part =
                expd.asDiagonal() * v + 0.5 * dt * (expd.asDiagonal() * gu);
            StateVector w = explicit_part + 0.5 * dt * gu; // predictor
            int it = 0;
            double corr = 0.0;
            for (; it < opts.max_picard_iters; ++it) {
                const StateVector w_new = explicit_part + 0.5 * dt * nonlin(w + y_next);
                corr = (w_new - w).norm();
                w = w_new;
                if (corr <= opts.picard_tol * std::max(1.0, w.norm())) break;
            }
            if (it == opts.max_picard_iters)
                throw numerical_refusal("solve_random_pde: Picard correction did not converge");
            traj.meta.picard_iterations += it + 1;
            traj.meta.max_correction = std::max(traj.meta.max_correction, corr);
            v = w;
            gu = nonlin(v + y_next);
        }
        traj.times[n + 1] = (n + 1) * dt;
        traj.states.push_back(v);
        traj.meta.steps++;
    }
    return traj;
}

StateVector cocycle_apply(const SpectralModel& model, const PathView& path,
                          const Nonlinearity& nonlin, double t, const StateVector& xi,
                          const SolverOptions& opts) {
    if (t < 0.0) throw config_error("cocycle_apply: t must be >= 0");
    if (t == 0.0) return xi;
    const Trajectory traj = solve_random_pde(model, path, nonlin, xi, t, opts);
    const StateVector y_t = ou_eval(model, path, t);
    return traj.states.back() + y_t;
}

StateVector linear_cocycle_apply(const SpectralModel& model, const PathView& path, double t,
                                 const StateVector& xi) {
    if (xi.size() != model.n_modes()) throw config_error("linear_cocycle_apply: dimension mismatch");
    if (t < 0.0) throw config_error("linear_cocycle_apply: t must be >= 0");
    const long n_steps = path.grid_index(t) - path.grid_index(0.0);
    const double dt = path.dt();
    const auto mask = dissipative_mask(model);

    // T0(t)(xi - Y(0)) + Y_theta_t(0) collapses to x <- e^{a dt} x + n . dW
    // on dissipative modes and to the bare semigroup elsewhere.
    StateVector x = xi;
    Eigen::VectorXd rho(model.n_modes());
    for (int k = 0; k < model.n_modes(); ++k) rho[k] = std::exp(model.drift(k) * dt);
    const long i0 = path.grid_index(0.0);
    for (long n = 0; n < n_steps; ++n) {
        for (int k = 0; k < model.n_modes(); ++k) {
            x[k] = rho[k] * x[k];
            if (mask[k])
                x[k] += model.boundary_coupling()(k, 0) * path.increment(0, i0 + n) +
                        model.boundary_coupling()(k, 1) * path.increment(1, i0 + n);
        }
    }
    return x;
}

double cocycle_residual(const SpectralModel& model, const PathView& path,
                        const Nonlinearity& nonlin, double t, double s, const StateVector& xi,
                        const SolverOptions& opts) {
    if (t < 0.0 || s < 0.0) throw config_error("cocycle_residual: t, s must be >= 0");
    const StateVector direct = cocycle_apply(model, path, nonlin, t + s, xi, opts);
    const StateVector mid = cocycle_apply(model, path, nonlin, t, xi, opts);
    const StateVector composed = cocycle_apply(model, shift(path, t), nonlin, s, mid, opts);
    return (direct - composed).norm();
}

} // namespace rdslab
