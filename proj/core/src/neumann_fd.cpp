#include "rdslab/neumann_fd.hpp"

#include <cmath>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

// Tridiagonal solve (Thomas algorithm), diagonals (a,b,c) = (sub, main, super).
Eigen::VectorXd solve_tridiag(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& c, Eigen::VectorXd d) {
    const int n = static_cast<int>(b.size());
    Eigen::VectorXd cp(n);
    cp[0] = c[0] / b[0];
    d[0] /= b[0];
    for (int i = 1; i < n; ++i) {
        const double m = 1.0 / (b[i] - a[i] * cp[i - 1]);
        cp[i] = c[i] * m;
        d[i] = (d[i] - a[i] * d[i - 1]) * m;
    }
    for (int i = n - 2; i >= 0; --i) d[i] -= cp[i] * d[i + 1];
    return d;
}
} // namespace

NeumannHeatFD::NeumannHeatFD(int m_cells, double mu) : m_(m_cells), mu_(mu) {
    if (m_cells < 8) throw config_error("NeumannHeatFD: need at least 8 cells");
    dx_ = kPi / m_cells;
}

Eigen::VectorXd NeumannHeatFD::evolve(const Eigen::VectorXd& u0, double g0, double gpi,
                                      double t_end, int n_steps) const {
    if (u0.size() != m_ + 1) throw config_error("NeumannHeatFD::evolve: profile size mismatch");
    if (n_steps < 1 || t_end < 0.0) throw config_error("NeumannHeatFD::evolve: bad time stepping");
    const int n = m_ + 1;
    const double dt = t_end / n_steps;
    const double r = dt / (dx_ * dx_);

    // Second-order Laplacian with ghost points for the flux conditions:
    //   u_x(0) = -g0, u_x(pi) = +gpi  =>  ghost values
    //   u_{-1} = u_1 + 2 dx g0,  u_{m+1} = u_{m-1} + 2 dx gpi.
    // The flux enters the end rows as a constant source 2 g/dx.
    Eigen::VectorXd sub(n), main_d(n), sup(n);
    for (int i = 0; i < n; ++i) {
        sub[i] = -0.5 * r;
        sup[i] = -0.5 * r;
        main_d[i] = 1.0 + r - 0.5 * dt * mu_;
    }
    sup[0] = -r;      // row 0 couples twice to u_1
    sub[n - 1] = -r;  // row m couples twice to u_{m-1}
    sub[0] = 0.0;
    sup[n - 1] = 0.0;

    Eigen::VectorXd u = u0;
    Eigen::VectorXd rhs(n);
    const double src0 = 2.0 * g0 / dx_;
    const double srcpi = 2.0 * gpi / dx_;
    for (int s = 0; s < n_steps; ++s) {
        // rhs = (I + dt/2 L + dt/2 mu) u + dt * flux source
        rhs[0] = u[0] + r * (u[1] - u[0]) + 0.5 * dt * mu_ * u[0] + dt * src0;
        for (int i = 1; i < n - 1; ++i) {
            rhs[i] = u[i] + 0.5 * r * (u[i - 1] - 2.0 * u[i] + u[i + 1]) + 0.5 * dt * mu_ * u[i];
        }
        rhs[n - 1] = u[n - 1] + r * (u[n - 2] - u[n - 1]) + 0.5 * dt * mu_ * u[n - 1] + dt * srcpi;
        u = solve_tridiag(sub, main_d, sup, rhs);
    }
    return u;
}

Eigen::VectorXd NeumannHeatFD::project_modes(const Eigen::VectorXd& u, int n_modes) const {
    if (u.size() != m_ + 1) throw config_error("NeumannHeatFD::project_modes: profile size mismatch");
    if (m_ % 2 != 0) throw config_error("NeumannHeatFD::project_modes: need an even cell count for Simpson");
    Eigen::VectorXd coeffs(n_modes);
    const double c0 = 1.0 / std::sqrt(kPi);
    const double ck = std::sqrt(2.0 / kPi);
    for (int k = 0; k < n_modes; ++k) {
        double s = 0.0;
        for (int i = 0; i <= m_; ++i) {
            const double x = i * dx_;
            const double ek = (k == 0) ? c0 : ck * std::cos(k * x);
            double w = (i == 0 || i == m_) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            s += w * u[i] * ek;
        }
        coeffs[k] = s * dx_ / 3.0;
    }
    return coeffs;
}

} // namespace rdslab
