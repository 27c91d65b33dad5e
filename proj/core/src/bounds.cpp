#include "rdslab/bounds.hpp"

#include <cmath>
#include <limits>

#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"
#include "rdslab/quadrature.hpp"
#include "rdslab/variational.hpp"

namespace rdslab {

namespace {

// Piecewise-constant upper envelope of ||Y_{theta_u omega}(0)|| over the grid
// cells of [0, t]; keeps the quadrature of the a(s) integrals an upper bound.
struct YNormEnvelope {
    double dt;
    std::vector<double> cell_max; // cell i covers [i dt, (i+1) dt]

    double operator()(double u) const {
        if (cell_max.empty()) return 0.0;
        long i = static_cast<long>(u / dt);
        i = std::max<long>(0, std::min<long>(i, static_cast<long>(cell_max.size()) - 1));
        return cell_max[i];
    }
};

YNormEnvelope y_norm_envelope(const SpectralModel& model, const PathView& path, double t) {
    YNormEnvelope env;
    env.dt = path.dt();
    const long n = path.grid_index(t) - path.grid_index(0.0);
    env.cell_max.resize(std::max<long>(n, 1), 0.0);

    const auto mask = dissipative_mask(model);
    Eigen::VectorXd rho(model.n_modes());
    for (int k = 0; k < model.n_modes(); ++k)
        rho[k] = mask[k] ? std::exp(model.drift(k) * path.dt()) : 0.0;
    StateVector y = ou_eval(model, path, 0.0);
    const long i0 = path.grid_index(0.0);
    double prev = y.norm();
    for (long i = 0; i < n; ++i) {
        for (int k = 0; k < model.n_modes(); ++k) {
            if (!mask[k]) continue;
            y[k] = rho[k] * y[k] + model.boundary_coupling()(k, 0) * path.increment(0, i0 + i) +
                   model.boundary_coupling()(k, 1) * path.increment(1, i0 + i);
        }
        const double cur = y.norm();
        env.cell_max[i] = std::max(prev, cur);
        prev = cur;
    }
    return env;
}

} // namespace

AprioriResult apriori_bound_check(const SpectralModel& model, const PathView& path,
                                  const Nonlinearity& nonlin, const StateVector& xi, double t,
                                  const SolverOptions& opts) {
    if (!(t > 0.0)) throw config_error("apriori_bound_check: t must be > 0");
    const double beta = model.beta();
    const double wA = model.omega_A();
    const double C = model.frac_norm();
    const double k1 = nonlin.kappa1();
    const double k2 = nonlin.kappa2();
    if (!std::isfinite(k1) && !std::isfinite(k2))
        throw config_error("apriori_bound_check: nonlinearity lacks linear-growth constants");

    // lhs
    const StateVector phi_t = cocycle_apply(model, path, nonlin, t, xi, opts);
    const double lhs = phi_t.norm();

    const StateVector y0 = ou_eval(model, path, 0.0);
    const StateVector yt = ou_eval(model, path, t);
    const YNormEnvelope env = y_norm_envelope(model, path, t);

    // a0(s): the xi-free part of a(s); a(s) = e^{omega_A s} ||xi - Y0|| + OU convolution,
    // and ||xi - Y0|| <= ||xi|| + ||Y0||.
    auto a0 = [&](double s) -> double {
        double conv = 0.0;
        if (s > 0.0) {
            const QuadratureRule rule = singular_rule(s, beta, 32);
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double u = s - rule.nodes[i]; // nodes graded toward 0 = distance from s
                conv += rule.weights[i] * std::pow(rule.nodes[i], -beta) *
                        std::exp(wA * rule.nodes[i]) * (k1 + k2 * env(u));
            }
        }
        return std::exp(wA * s) * y0.norm() + C * conv;
    };
    auto a_xi_coeff = [&](double s) { return std::exp(wA * s); };

    // Outer series-kernel convolution.
    const double kap = k2 * C;
    double conv_b = 0.0, conv_kappa = 0.0;
    if (kap > 0.0) {
        const QuadratureRule rule =
            graded_gauss_legendre_right(t, 48, std::max(2.0, 3.0 / (1.0 - beta)));
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = rule.nodes[i];
            const double tau = t - s;
            if (tau <= 0.0) continue;
            const double K = series_kernel(kap, beta, tau) * std::exp(wA * tau);
            conv_b += rule.weights[i] * K * a0(s);
            conv_kappa += rule.weights[i] * K * a_xi_coeff(s);
        }
    }

    AprioriResult res;
    res.kappa_t = a_xi_coeff(t) + conv_kappa;
    res.b = a0(t) + conv_b + yt.norm();
    res.check.lhs = lhs;
    res.check.rhs = res.kappa_t * xi.norm() + res.b;
    res.check.pass = lhs <= res.check.rhs * (1.0 + 1e-9);
    return res;
}

namespace {

double growth_series_bound(const SpectralModel& model, double P, double t) {
    const double beta = model.beta();
    const double g = model.frac_norm() * P;
    return std::exp(model.omega_A() * t) * (1.0 + series_kernel_primitive(g, beta, t));
}

double growth_gamma_envelope(const SpectralModel& model, double P, double t) {
    const double beta = model.beta();
    const double g = model.frac_norm() * P;
    if (g == 0.0) return std::exp(model.omega_A() * t);
    const double X = std::pow(g * std::tgamma(1.0 - beta), 1.0 / (1.0 - beta)) * t;
    const double MA = std::max(1.0, std::exp(model.omega_A() * t));
    const double Cb = std::ceil(1.0 / (1.0 - beta));
    const double xpow = (X <= 1.0) ? std::pow(X, 1.0 - beta) : X;
    return std::exp(model.omega_A() * t) + MA * Cb * (1.13 * xpow + X * std::exp(X));
}

} // namespace

DerivativeGrowthResult derivative_growth_bound(const SpectralModel& model, const PathView& path,
                                               const Nonlinearity& nonlin, const StateVector& xi,
                                               double t, const SolverOptions& opts) {
    if (!(t > 0.0)) throw config_error("derivative_growth_bound: t must be > 0");
    if (nonlin.dominating_poly().size() == 0)
        throw config_error("derivative_growth_bound: nonlinearity lacks the dominating polynomial p");

    // P = sup_{s<=t} p(||phi~^s(xi)||) along the computed orbit
    double P = 0.0;
    if (!nonlin.is_zero()) {
        const Trajectory traj = solve_random_pde(model, path, nonlin, xi, t, opts);
        const auto mask = dissipative_mask(model);
        Eigen::VectorXd rho(model.n_modes());
        for (int k = 0; k < model.n_modes(); ++k)
            rho[k] = mask[k] ? std::exp(model.drift(k) * path.dt()) : 0.0;
        StateVector y = ou_eval(model, path, 0.0);
        const long i0 = path.grid_index(0.0);
        P = nonlin.dominating_poly_eval((traj.states[0] + y).norm());
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            for (int k = 0; k < model.n_modes(); ++k) {
                if (!mask[k]) continue;
                y[k] = rho[k] * y[k] +
                       model.boundary_coupling()(k, 0) * path.increment(0, i0 + i - 1) +
                       model.boundary_coupling()(k, 1) * path.increment(1, i0 + i - 1);
            }
            P = std::max(P, nonlin.dominating_poly_eval((traj.states[i] + y).norm()));
        }
    }

    DerivativeGrowthResult res;
    res.norm = linearize(model, path, nonlin, xi, t, opts)
                   .entries.jacobiSvd()
                   .singularValues()[0];
    res.series_bound = growth_series_bound(model, P, t);
    res.gamma = growth_gamma_envelope(model, P, t);
    res.pass = res.norm <= res.series_bound * (1.0 + 1e-9);
    return res;
}

BoundCheck difference_bound_check(const SpectralModel& model, const PathView& path,
                                  const Nonlinearity& nonlin, const StateVector& xi1,
                                  const StateVector& xi2, double t, const SolverOptions& opts) {
    if (!(t > 0.0)) throw config_error("difference_bound_check: t must be > 0");
    const StateVector p1 = cocycle_apply(model, path, nonlin, t, xi1, opts);
    const StateVector p2 = cocycle_apply(model, path, nonlin, t, xi2, opts);

    double P = 0.0;
    for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const StateVector mix = theta * xi2 + (1.0 - theta) * xi1;
        if (nonlin.is_zero()) { P = std::max(P, nonlin.dominating_poly_eval(0.0)); continue; }
        const Trajectory traj = solve_random_pde(model, path, nonlin, mix, t, opts);
        const auto mask = dissipative_mask(model);
        Eigen::VectorXd rho(model.n_modes());
        for (int k = 0; k < model.n_modes(); ++k)
            rho[k] = mask[k] ? std::exp(model.drift(k) * path.dt()) : 0.0;
        StateVector y = ou_eval(model, path, 0.0);
        const long i0 = path.grid_index(0.0);
        P = std::max(P, nonlin.dominating_poly_eval((traj.states[0] + y).norm()));
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            for (int k = 0; k < model.n_modes(); ++k) {
                if (!mask[k]) continue;
                y[k] = rho[k] * y[k] +
                       model.boundary_coupling()(k, 0) * path.increment(0, i0 + i - 1) +
                       model.boundary_coupling()(k, 1) * path.increment(1, i0 + i - 1);
            }
            P = std::max(P, nonlin.dominating_poly_eval((traj.states[i] + y).norm()));
        }
    }

    BoundCheck res;
    res.lhs = (p2 - p1).norm();
    res.rhs = growth_series_bound(model, P, t) * (xi2 - xi1).norm();
    res.pass = res.lhs <= res.rhs * (1.0 + 1e-9);
    return res;
}

HolderCheck holder_derivative_check(const SpectralModel& model, const PathView& path,
                                    const Nonlinearity& nonlin, const StateVector& xi1,
                                    const StateVector& xi2, double t, const SolverOptions& opts) {
    if (!nonlin.holder())
        throw numerical_refusal("holder_derivative_check: nonlinearity has no Holder modulus data");
    const double r = nonlin.holder()->r;
    if (!(r > 0.0 && r <= 1.0)) throw config_error("holder_derivative_check: r must be in (0,1]");
    HolderCheck res;
    res.separation = (xi2 - xi1).norm();
    if (res.separation == 0.0) {
        res.ratio = 0.0;
        res.pass = true;
        return res;
    }
    const Eigen::MatrixXd d2 = linearize(model, path, nonlin, xi2, t, opts).entries;
    const Eigen::MatrixXd d1 = linearize(model, path, nonlin, xi1, t, opts).entries;
    const double num = (d2 - d1).jacobiSvd().singularValues()[0];
    res.ratio = num / std::pow(res.separation, r);
    res.pass = std::isfinite(res.ratio);
    return res;
}

HolderSweep holder_derivative_sweep(const SpectralModel& model, const PathView& path,
                                    const Nonlinearity& nonlin, const StateVector& xi,
                                    const StateVector& direction, double t,
                                    const Eigen::VectorXd& separations, double slope_tol,
                                    const SolverOptions& opts) {
    if (separations.size() < 2) throw config_error("holder_derivative_sweep: need >= 2 separations");
    HolderSweep sweep;
    sweep.separations = separations;
    sweep.ratios.resize(separations.size());
    const StateVector dir = direction / direction.norm();
    for (int i = 0; i < separations.size(); ++i) {
        const HolderCheck c =
            holder_derivative_check(model, path, nonlin, xi, xi + separations[i] * dir, t, opts);
        sweep.ratios[i] = c.ratio;
    }
    // log-log slope; a zero numerator (constant derivative) counts as pass.
    if ((sweep.ratios.array() <= 0.0).any()) {
        sweep.slope = 0.0;
        sweep.pass = true;
        return sweep;
    }
    const int n = static_cast<int>(separations.size());
    Eigen::MatrixXd A(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = std::log(separations[i]);
        A(i, 1) = 1.0;
        y[i] = std::log(sweep.ratios[i]);
    }
    sweep.slope = Eigen::Vector2d(A.colPivHouseholderQr().solve(y))[0];
    sweep.pass = sweep.slope >= -slope_tol;
    return sweep;
}

KernelIntegrability kernel_integrability_check(const SpectralModel& model, double q_star,
                                               double tau) {
    if (tau < 0.0) throw config_error("kernel_integrability_check: tau must be >= 0");
    if (!(q_star >= 1.0)) throw config_error("kernel_integrability_check: q_star must be >= 1");
    KernelIntegrability res;
    res.finite = q_star * model.beta() < 1.0;
    if (tau == 0.0) {
        res.integral = 0.0;
        res.majorant = 0.0;
        res.refinement_values = Eigen::VectorXd::Zero(1);
        return res;
    }

    const double beta = model.beta();
    const double wA = model.omega_A();
    const int levels = 5;
    res.refinement_values.resize(levels);
    for (int l = 0; l < levels; ++l) {
        const int cells = 24 << l;
        const QuadratureRule rule = singular_rule(tau, std::min(0.95, q_star * beta), cells);
        double v = 0.0;
        if (res.finite) {
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                v += rule.weights[i] * std::pow(model.isg_kernel_norm(rule.nodes[i]), q_star);
        } else {
            // declared divergent: expose the divergence of the bound integrand
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                v += rule.weights[i] * std::pow(rule.nodes[i], -q_star * beta) *
                     std::exp(q_star * wA * rule.nodes[i]);
        }
        res.refinement_values[l] = v;
    }

    if (res.finite) {
        res.integral = res.refinement_values[levels - 1];
        const QuadratureRule rule = singular_rule(tau, q_star * beta, 96);
        double m = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            m += rule.weights[i] * std::pow(rule.nodes[i], -q_star * beta) *
                 std::exp(q_star * wA * rule.nodes[i]);
        res.majorant = std::pow(model.frac_norm(), q_star) * m;
    } else {
        res.integral = std::numeric_limits<double>::infinity();
        res.majorant = std::numeric_limits<double>::infinity();
    }
    return res;
}

Eigen::VectorXd trace_mode_sums(const Eigen::VectorXd& eigenvalues, double tau,
                                const Eigen::VectorXi& counts) {
    if (!(tau > 0.0)) throw config_error("trace_mode_sums: tau must be > 0");
    Eigen::VectorXd sums(counts.size());
    for (int c = 0; c < counts.size(); ++c) {
        const int n = std::min<int>(counts[c], static_cast<int>(eigenvalues.size()));
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            const double lam = eigenvalues[k];
            s += (lam > 1e-12) ? -std::expm1(-2.0 * lam * tau) / (2.0 * lam) : tau;
        }
        sums[c] = s;
    }
    return sums;
}

Eigen::VectorXd synthetic_spectrum(int count, double c, int dimension) {
    if (count < 1 || dimension < 1) throw config_error("synthetic_spectrum: bad arguments");
    Eigen::VectorXd lam(count);
    for (int k = 1; k <= count; ++k)
        lam[k - 1] = c * std::pow(static_cast<double>(k), 2.0 / dimension);
    return lam;
}

} // namespace rdslab
