#pragma once

#include "rdslab/noise_path.hpp"
#include "rdslab/spectral_model.hpp"

namespace rdslab {

// The stationary boundary-noise convolution Y_omega(t), evaluated per mode by
// the exact exponential recursion over grid cells:
//
//   y_k <- e^{a_k dt} y_k + n_k . dW_i,        a_k = mu - lambda_k,
//
// summed over [max(horizon start, t - window), t]. Only dissipative modes
// (a_k < 0) are retained; non-dissipative modes are projected out of Y
// (the stationary integral diverges for them).
//
// With the full available window the shift identity
// Y_{theta_s omega}(t) = Y_omega(t + s) holds bitwise on the grid.

// Mask of modes retained in Y.
Eigen::Array<bool, Eigen::Dynamic, 1> dissipative_mask(const SpectralModel& model);

StateVector ou_eval(const SpectralModel& model, const PathView& path, double t,
                    double window = -1.0); // window < 0: use full horizon

// Upper bound on the relative truncation of the (-inf, t] integral: the
// slowest retained decay over the window actually used.
double ou_truncation_factor(const SpectralModel& model, const PathView& path, double t,
                            double window = -1.0);

// || ou_eval(shift(path,t), s) - ou_eval(path, t+s) ||; zero to machine
// precision when both sides see the same increments.
double stationarity_residual(const SpectralModel& model, const PathView& path,
                             double s, double t, double window = -1.0);

// Stationary variance of mode k under the discrete recursion (the exact
// closed form sigma_k^2 dt / (1 - e^{2 a_k dt}) with sigma_k^2 = sum_ch n_k,ch^2 q_ch).
double ou_discrete_stationary_variance(const SpectralModel& model, const Eigen::VectorXd& q,
                                       double dt, int k);
// Continuum limit sigma_k^2 / (-2 a_k).
double ou_continuum_stationary_variance(const SpectralModel& model, const Eigen::VectorXd& q, int k);

} // namespace rdslab
