#include "rdslab/spectral_model.hpp"

#include <cmath>
#include <limits>

#include "rdslab/errors.hpp"
#include "rdslab/neumann_fd.hpp"
#include "rdslab/quadrature.hpp"

namespace rdslab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

bool is_nonneg_integer(double x) {
    return x >= 0.0 && std::abs(x - std::round(x)) < 1e-12;
}

Eigen::MatrixX2d analytic_coupling(int n_modes) {
    Eigen::MatrixX2d c(n_modes, 2);
    const double c0 = 1.0 / std::sqrt(kPi);
    const double ck = std::sqrt(2.0 / kPi);
    for (int k = 0; k < n_modes; ++k) {
        const double e0 = (k == 0) ? c0 : ck;           // e_k(0)
        const double epi = (k == 0) ? c0 : ck * ((k % 2 == 0) ? 1.0 : -1.0); // e_k(pi)
        c(k, 0) = e0;
        c(k, 1) = epi;
    }
    return c;
}

// Recover n_k by matching the FD inhomogeneous-Neumann solution at a
// calibration time: under constant unit flux at x=0 (mu = 0 operator),
// mode k of the solution is n_k (1 - e^{-k^2 t}) / k^2  (n_0 t for k=0).
Eigen::MatrixX2d fd_calibrated_coupling(int n_modes) {
    const int m_cells = 2048;
    const double t_cal = 0.01;
    const int n_steps = 256;
    NeumannHeatFD fd(m_cells, 0.0);
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(fd.nodes());
    const Eigen::VectorXd u = fd.evolve(u0, 1.0, 0.0, t_cal, n_steps);
    const Eigen::VectorXd coeffs = fd.project_modes(u, n_modes);

    Eigen::MatrixX2d c(n_modes, 2);
    for (int k = 0; k < n_modes; ++k) {
        const double lam = static_cast<double>(k) * k;
        const double gain = (k == 0) ? t_cal : -std::expm1(-lam * t_cal) / lam;
        c(k, 0) = coeffs[k] / gain;
    }
    // The x=pi response is the x=0 response reflected through x -> pi - x,
    // which flips the sign of the odd modes.
    for (int k = 0; k < n_modes; ++k) c(k, 1) = c(k, 0) * ((k % 2 == 0) ? 1.0 : -1.0);
    return c;
}
} // namespace

SpectralModel SpectralModel::build(const SpectralModelConfig& cfg) {
    if (cfg.n_modes < 2) throw config_error("build_model: n_modes must be >= 2");
    if (!(std::isfinite(cfg.mu) && std::isfinite(cfg.beta) && std::isfinite(cfg.q_star) &&
          std::isfinite(cfg.reg_shift)))
        throw config_error("build_model: parameters must be finite");
    if (!(cfg.beta > 0.25 && cfg.beta < 1.0))
        throw config_error("build_model: beta must lie in (1/4, 1), the window (1 - 1/p*, 1) for p* = 4/3");
    if (!(cfg.q_star >= 1.0 && cfg.q_star < 4.0))
        throw config_error("build_model: q_star must lie in [1, 1/(1 - 1/p*)) = [1, 4)");
    if (cfg.q_star * cfg.beta >= 1.0)
        throw config_error("build_model: q_star * beta must be < 1 for kernel integrability");
    if (cfg.reg_shift < 0.0) throw config_error("build_model: reg_shift must be >= 0");
    if (cfg.n_modes > 128) throw config_error("build_model: desk scale caps n_modes at 128");

    SpectralModel m;
    m.cfg_ = cfg;
    m.eigenvalues_.resize(cfg.n_modes);
    for (int k = 0; k < cfg.n_modes; ++k)
        m.eigenvalues_[k] = static_cast<double>(k) * k + cfg.reg_shift;

    m.coupling_ = cfg.fd_calibrated_coupling ? fd_calibrated_coupling(cfg.n_modes)
                                             : analytic_coupling(cfg.n_modes);

    // frac_norm: sup over (0, T_cal] of t^beta e^{-omega_A t} ||kernel(t)||,
    // on a log grid (the supremand is smooth and unimodal-ish; a dense grid
    // with a small safety factor is enough for a certified constant).
    const double T = cfg.calibration_horizon;
    double sup = 0.0;
    const int samples = 2000;
    for (int i = 1; i <= samples; ++i) {
        const double t = T * std::pow(10.0, -6.0 * (1.0 - static_cast<double>(i) / samples));
        sup = std::max(sup, std::pow(t, cfg.beta) * std::exp(-m.omega_A() * t) * m.isg_kernel_norm(t));
    }
    m.frac_norm_ = sup * 1.002;
    return m;
}

StateVector SpectralModel::semigroup_apply(double t, const StateVector& v) const {
    if (t < 0.0) throw config_error("semigroup_apply: t must be >= 0");
    if (v.size() != n_modes()) throw config_error("semigroup_apply: dimension mismatch");
    StateVector out(v.size());
    for (int k = 0; k < n_modes(); ++k) out[k] = std::exp(drift(k) * t) * v[k];
    return out;
}

StateVector SpectralModel::fractional_scale(double exponent, const StateVector& v) const {
    if (v.size() != n_modes()) throw config_error("fractional_scale: dimension mismatch");
    if (exponent == 0.0) return v;
    const double min_gap = (eigenvalues_.array() - cfg_.mu).minCoeff();
    if (min_gap <= 0.0 && !is_nonneg_integer(exponent)) {
        throw numerical_refusal(
            "fractional_scale: (-A0 + mu) is singular or indefinite (min(lambda_k - mu) = " +
            std::to_string(min_gap) + "); a negative or fractional power is not defined. "
            "Use reg_shift to move the spectrum.");
    }
    StateVector out(v.size());
    for (int k = 0; k < n_modes(); ++k)
        out[k] = std::pow(eigenvalues_[k] - cfg_.mu, exponent) * v[k];
    return out;
}

StateVector SpectralModel::isg_kernel_apply(double t, const BoundaryDatum& b) const {
    if (!(t > 0.0)) throw config_error("isg_kernel_apply: t must be > 0 (kernel singular at 0)");
    StateVector out = couple(b);
    for (int k = 0; k < n_modes(); ++k) out[k] *= std::exp(drift(k) * t);
    return out;
}

double SpectralModel::isg_kernel_norm(double t) const {
    if (!(t > 0.0)) throw config_error("isg_kernel_norm: t must be > 0");
    Eigen::MatrixX2d K = coupling_;
    for (int k = 0; k < n_modes(); ++k) K.row(k) *= std::exp(drift(k) * t);
    return K.jacobiSvd().singularValues()[0];
}

StateVector SpectralModel::integrated_semigroup(double t, double nu, const StateVector& x) const {
    if (t < 0.0) throw config_error("integrated_semigroup: t must be >= 0");
    if (!(nu > omega_A()))
        throw config_error("integrated_semigroup: nu must exceed omega_A = " + std::to_string(omega_A()));
    if (x.size() != n_modes()) throw config_error("integrated_semigroup: dimension mismatch");
    StateVector out = StateVector::Zero(x.size());
    if (t == 0.0) return out; // S(0) = 0
    const int cells = std::max(8, static_cast<int>(std::ceil(4.0 * t)));
    const QuadratureRule rule = graded_gauss_legendre(t, cells, 1.0);
    for (int k = 0; k < n_modes(); ++k) {
        const double a = drift(k);
        const double r = x[k] / (nu - a); // R(nu,A) x, diagonal on H0
        double integral = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            integral += rule.weights[i] * std::exp(a * rule.nodes[i]);
        out[k] = nu * integral * r + (1.0 - std::exp(a * t)) * r;
    }
    return out;
}

ResolventScalingReport SpectralModel::resolvent_scaling_report(const Eigen::VectorXd& grid) const {
    if (grid.size() < 2) throw config_error("resolvent_scaling_report: need at least two grid points");
    for (int i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(grid[i] > omega_A()))
            throw config_error("resolvent_scaling_report: grid must be positive and above omega_A");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw config_error("resolvent_scaling_report: grid must be increasing");
    }

    ResolventScalingReport rep;
    rep.lambda_grid = grid;
    rep.norms.resize(grid.size());
    rep.norms_diagonal.resize(grid.size());
    // R(lambda, A) restricted to boundary inputs, via the Laplace transform
    // of the kernel: Int_0^inf e^{-lambda t} dS_A/dt(t) b dt.
    for (int i = 0; i < grid.size(); ++i) {
        const double lam = grid[i];
        const double decay = lam - omega_A();
        const double T_cut = 40.0 / decay;
        const QuadratureRule rule = singular_rule(T_cut, 0.5, 64);
        Eigen::MatrixX2d R = Eigen::MatrixX2d::Zero(n_modes(), 2);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double t = rule.nodes[j];
            Eigen::MatrixX2d K = coupling_;
            for (int k = 0; k < n_modes(); ++k) K.row(k) *= std::exp(drift(k) * t);
            R += rule.weights[j] * std::exp(-lam * t) * K;
        }
        rep.norms[i] = R.jacobiSvd().singularValues()[0];
        rep.norms_diagonal[i] = 1.0 / (lam - omega_A());
    }

    // log-log least squares for the decay exponent
    const int n = static_cast<int>(grid.size());
    Eigen::MatrixXd Amat(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        Amat(i, 0) = std::log(grid[i]);
        Amat(i, 1) = 1.0;
        y[i] = std::log(rep.norms[i]);
    }
    const Eigen::Vector2d fit = Amat.colPivHouseholderQr().solve(y);
    rep.fitted_exponent = -fit[0];
    rep.expected_exponent = 1.0 / p_star(); // = 1 - beta at the sharp edge beta = 1 - 1/p*
    rep.monotone_tail = true;
    for (int i = 1; i < n; ++i)
        if (rep.norms[i] >= rep.norms[i - 1]) rep.monotone_tail = false;
    return rep;
}

Eigen::MatrixXd SpectralModel::collocation_matrix(int m_points) const {
    Eigen::MatrixXd M(m_points, n_modes());
    const double c0 = 1.0 / std::sqrt(kPi);
    const double ck = std::sqrt(2.0 / kPi);
    for (int j = 0; j < m_points; ++j) {
        const double x = (j + 0.5) * kPi / m_points;
        M(j, 0) = c0;
        for (int k = 1; k < n_modes(); ++k) M(j, k) = ck * std::cos(k * x);
    }
    return M;
}

Eigen::MatrixXd SpectralModel::collocation_adjoint(int m_points) const {
    // Midpoint rule; exact discrete orthogonality of the cosine modes makes
    // analysis(synthesis(v)) = v for m_points > 2 * n_modes.
    return (kPi / m_points) * collocation_matrix(m_points).transpose();
}

} // namespace rdslab
