#pragma once

#include <Eigen/Dense>

namespace rdslab {

// Crank-Nicolson finite-difference solver for the 1-d heat equation on (0,pi)
//
//   u_t = u_xx + mu*u,   d_nu u(0) = g0,  d_nu u(pi) = gpi
//
// with outward-normal flux data (d_nu u(0) = -u_x(0), d_nu u(pi) = u_x(pi)).
// Serves as the ground-truth oracle for the boundary-to-interior response of
// the spectral model; second order in space and time.
class NeumannHeatFD {
public:
    // m_cells uniform cells, i.e. m_cells+1 nodes including both endpoints.
    NeumannHeatFD(int m_cells, double mu);

    // Advance an initial profile (sampled on the nodes) to time t_end under
    // constant fluxes (g0, gpi); n_steps Crank-Nicolson steps.
    Eigen::VectorXd evolve(const Eigen::VectorXd& u0, double g0, double gpi,
                           double t_end, int n_steps) const;

    // L2(0,pi) inner products of the profile with the Neumann cosine modes
    // e_0 = 1/sqrt(pi), e_k = sqrt(2/pi) cos(kx); composite Simpson.
    Eigen::VectorXd project_modes(const Eigen::VectorXd& u, int n_modes) const;

    int nodes() const { return m_ + 1; }
    double dx() const { return dx_; }

private:
    int m_;
    double mu_;
    double dx_;
};

} // namespace rdslab
