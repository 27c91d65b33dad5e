#pragma once

#include <Eigen/Dense>

namespace rdslab {

// Data of a powered Gronwall instance on [0,T]:
//   u(t) <= g(t) + kappa(t) Int_0^t (t-s)^{-beta} u(s) ds,
// kappa nondecreasing, g locally integrable, both sampled on the grid.
struct GronwallInstance {
    double beta = 0.5;
    Eigen::VectorXd grid;  // increasing, grid[0] == 0
    Eigen::VectorXd kappa; // values at grid nodes, nondecreasing
    Eigen::VectorXd g;     // values at grid nodes

    void validate() const;
};

// Sum_{n>=1} alpha^{n-1} / Gamma(n(1-beta)), adaptive truncation (tail < 1e-14
// relative); evaluated in log space. Defined for alpha >= 0.
double gronwall_series(double alpha, double beta);

// Majorant R(alpha) of Lemma-type form
//   (beta+1)/(1-beta) alpha^{(1+beta)/(1-beta)} + alpha^{2/(1-beta)} e^{alpha^{1/(1-beta)}} / (1-beta),
// valid for alpha >= 1. log_r_alpha never overflows.
double r_alpha(double alpha, double beta);
double log_r_alpha(double alpha, double beta);

// Series kernel K_kappa(tau) = Sum_{n>=1} [kappa Gamma(1-beta)]^n tau^{n(1-beta)-1} / Gamma(n(1-beta)).
// Integrable singularity tau^{-beta} at 0. log-space evaluation; switches to
// the R-majorant when the series terms overflow.
double series_kernel(double kappa, double beta, double tau);
// log K_kappa(tau); finite even when the kernel itself overflows a double.
double log_series_kernel(double kappa, double beta, double tau);

// Int_0^t K_kappa(tau) dtau = Sum_{n>=1} [kappa Gamma(1-beta) t^{1-beta}]^n / Gamma(n(1-beta)+1),
// the closed Mittag-Leffler-type primitive.
double series_kernel_primitive(double kappa, double beta, double t);

// The bound of the powered Gronwall lemma, sampled on the instance grid:
//   B(t) = g(t) + Int_0^t K_{kappa(t)}(t-s) g(s) ds
// with g piecewise linear between nodes and graded quadrature toward s = t.
Eigen::VectorXd powered_gronwall_bound(const GronwallInstance& instance);

// Independent oracle: product-integration solver for the weakly singular
// Volterra equation u(t) = g(t) + kappa(t) Int_0^t (t-s)^{-beta} u(s) ds,
// run at `refinement` times the instance grid resolution on a mesh graded
// toward t = 0 (the solution has an algebraic derivative singularity there).
// Piecewise-linear product integration with exact kernel moments.
Eigen::VectorXd volterra_solve(const GronwallInstance& instance, int refinement = 4,
                               double grading = 2.0);

} // namespace rdslab
