#pragma once

#include <vector>

#include "rdslab/noise_path.hpp"
#include "rdslab/nonlinearity.hpp"
#include "rdslab/spectral_model.hpp"

namespace rdslab {

struct SolveStats {
    long steps = 0;
    long picard_iterations = 0;
    double max_correction = 0.0; // largest final Picard update accepted
};

// Grid trajectory of the random-PDE component V.
struct Trajectory {
    Eigen::VectorXd times;
    std::vector<StateVector> states;
    SolveStats meta;
};

struct SolverOptions {
    double picard_tol = 1e-10;
    int max_picard_iters = 50;
};

// V(t) = T0(t)(xi - Y_omega(0)) + Int_0^t T0(t-s) g(V(s) + Y_{theta_s omega}(0)) ds.
// The nonlinearity maps into H0, so the plain semigroup appears under the
// integral (the fractional factors of the general theory cancel).
// Exponential-trapezoidal stepping, per-step fixed-point correction; refuses
// when the contraction surrogate c(dt) L = frac_norm dt^{1-beta}/(1-beta) L >= 1.
Trajectory solve_random_pde(const SpectralModel& model, const PathView& path,
                            const Nonlinearity& nonlin, const StateVector& xi, double t_end,
                            const SolverOptions& opts = {});

// Nonlinear cocycle phi~^t_omega(xi) = psi^t_omega(xi - Y_omega(0)) + Y_{theta_t omega}(0).
StateVector cocycle_apply(const SpectralModel& model, const PathView& path,
                          const Nonlinearity& nonlin, double t, const StateVector& xi,
                          const SolverOptions& opts = {});

// Linear cocycle (g = 0): per-mode affine recursion, exact on the grid.
StateVector linear_cocycle_apply(const SpectralModel& model, const PathView& path, double t,
                                 const StateVector& xi);

// || phi~^{t+s}_omega(xi) - phi~^s_{theta_t omega}(phi~^t_omega(xi)) ||.
double cocycle_residual(const SpectralModel& model, const PathView& path,
                        const Nonlinearity& nonlin, double t, double s, const StateVector& xi,
                        const SolverOptions& opts = {});

// Contraction surrogate for the step-size check of the mild fixed point.
inline double contraction_surrogate(const SpectralModel& model, double tau) {
    return model.frac_norm() * std::pow(tau, 1.0 - model.beta()) / (1.0 - model.beta());
}

} // namespace rdslab
