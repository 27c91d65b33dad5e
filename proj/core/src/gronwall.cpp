#include "rdslab/gronwall.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rdslab/errors.hpp"
#include "rdslab/quadrature.hpp"

namespace rdslab {

namespace {
constexpr double kLogMax = 706.0; // just below log(DBL_MAX)

double interp_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double t) {
    const int n = static_cast<int>(x.size());
    if (t <= x[0]) return y[0];
    if (t >= x[n - 1]) return y[n - 1];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x[mid] <= t ? lo : hi) = mid;
    }
    const double w = (t - x[lo]) / (x[lo + 1] - x[lo]);
    return (1.0 - w) * y[lo] + w * y[lo + 1];
}
} // namespace

void GronwallInstance::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw config_error("GronwallInstance: beta must be in (0,1)");
    const int n = static_cast<int>(grid.size());
    if (n < 2 || kappa.size() != n || g.size() != n)
        throw config_error("GronwallInstance: grid/kappa/g sizes must match, >= 2 nodes");
    if (grid[0] != 0.0) throw config_error("GronwallInstance: grid must start at 0");
    for (int i = 1; i < n; ++i) {
        if (grid[i] <= grid[i - 1]) throw config_error("GronwallInstance: grid must increase");
        if (kappa[i] < kappa[i - 1] - 1e-14)
            throw config_error("GronwallInstance: kappa must be nondecreasing");
    }
    if (!kappa.allFinite() || !g.allFinite())
        throw config_error("GronwallInstance: kappa and g must be finite");
    if (kappa.minCoeff() < 0.0) throw config_error("GronwallInstance: kappa must be >= 0");
}

double gronwall_series(double alpha, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw config_error("gronwall_series: beta must be in (0,1)");
    if (alpha < 0.0) throw config_error("gronwall_series: alpha must be >= 0");
    const double la = (alpha > 0.0) ? std::log(alpha) : -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int n = 1; n <= 100000; ++n) {
        const double logterm = (n - 1) * la - std::lgamma(n * (1.0 - beta));
        if (logterm > kLogMax) return std::numeric_limits<double>::infinity();
        const double term = std::exp(logterm);
        sum += term;
        // past the Gamma minimum the terms decay superexponentially
        if (n * (1.0 - beta) > 2.0 && term < 1e-14 * std::max(sum, 1e-300)) break;
    }
    return sum;
}

double log_r_alpha(double alpha, double beta) {
    if (!(alpha >= 1.0)) throw config_error("r_alpha: the majorant requires alpha >= 1");
    if (!(beta > 0.0 && beta < 1.0)) throw config_error("r_alpha: beta must be in (0,1)");
    const double la = std::log(alpha);
    const double om = 1.0 - beta;
    const double log_t1 = std::log((beta + 1.0) / om) + (1.0 + beta) / om * la;
    double log_exp_arg = la / om; // log(alpha^{1/(1-beta)})
    const double arg = (log_exp_arg < kLogMax) ? std::exp(log_exp_arg)
                                               : std::numeric_limits<double>::infinity();
    const double log_t2 = 2.0 / om * la + arg - std::log(om);
    const double m = std::max(log_t1, log_t2);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(log_t1 - m) + std::exp(log_t2 - m));
}

double r_alpha(double alpha, double beta) {
    const double lr = log_r_alpha(alpha, beta);
    return (lr > kLogMax) ? std::numeric_limits<double>::infinity() : std::exp(lr);
}

double series_kernel(double kappa, double beta, double tau) {
    if (kappa == 0.0) return 0.0;
    const double lk = log_series_kernel(kappa, beta, tau);
    return (lk > kLogMax) ? std::numeric_limits<double>::infinity() : std::exp(lk);
}

double log_series_kernel(double kappa, double beta, double tau) {
    if (!(tau > 0.0)) throw config_error("series_kernel: tau must be > 0");
    if (!(kappa > 0.0)) throw config_error("log_series_kernel: kappa must be > 0");
    const double log_c = std::log(kappa) + std::lgamma(1.0 - beta);
    const double log_alpha = log_c + (1.0 - beta) * std::log(tau);
    const double prefix = log_c - beta * std::log(tau);
    // Sum_{n>=1} alpha^{n-1}/Gamma(n(1-beta)) by shifted log-sum-exp: track the
    // running maximum exponent so huge alpha stays representable.
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    logs.reserve(256);
    for (int n = 1; n <= 200000; ++n) {
        const double lt = (n - 1) * log_alpha - std::lgamma(n * (1.0 - beta));
        logs.push_back(lt);
        max_log = std::max(max_log, lt);
        if (n * (1.0 - beta) > 2.0 && lt < max_log - 36.0) break; // tail < 2e-16 of the max
    }
    double acc = 0.0;
    for (double lt : logs) acc += std::exp(lt - max_log);
    return prefix + max_log + std::log(acc);
}

double series_kernel_primitive(double kappa, double beta, double t) {
    if (t < 0.0) throw config_error("series_kernel_primitive: t must be >= 0");
    if (t == 0.0 || kappa == 0.0) return 0.0;
    const double om = 1.0 - beta;
    const double ly = std::log(kappa) + std::lgamma(om) + om * std::log(t);
    double sum = 0.0;
    for (int n = 1; n <= 100000; ++n) {
        const double logterm = n * ly - std::lgamma(n * om + 1.0);
        if (logterm > kLogMax) return std::numeric_limits<double>::infinity();
        const double term = std::exp(logterm);
        sum += term;
        if (n * om > 2.0 && term < 1e-14 * std::max(sum, 1e-300)) break;
    }
    return sum;
}

Eigen::VectorXd powered_gronwall_bound(const GronwallInstance& inst) {
    inst.validate();
    const int n = static_cast<int>(inst.grid.size());
    Eigen::VectorXd bound(n);
    bound[0] = inst.g[0];
    for (int i = 1; i < n; ++i) {
        const double t = inst.grid[i];
        const double kap = inst.kappa[i];
        // kernel singular at s = t; grade the mesh toward the right endpoint
        const QuadratureRule rule =
            graded_gauss_legendre_right(t, 48, std::max(2.0, 3.0 / (1.0 - inst.beta)));
        double conv = 0.0;
        for (std::size_t jq = 0; jq < rule.nodes.size(); ++jq) {
            const double s = rule.nodes[jq];
            const double tau = t - s;
            if (tau <= 0.0) continue;
            conv += rule.weights[jq] * series_kernel(kap, inst.beta, tau) *
                    interp_linear(inst.grid, inst.g, s);
        }
        bound[i] = inst.g[i] + conv;
    }
    return bound;
}

Eigen::VectorXd volterra_solve(const GronwallInstance& inst, int refinement) {
    inst.validate();
    if (refinement < 1) throw config_error("volterra_solve: refinement must be >= 1");
    const int n_coarse = static_cast<int>(inst.grid.size());
    const double T = inst.grid[n_coarse - 1];
    const long m = static_cast<long>(refinement) * (n_coarse - 1) * 4;
    const double h = T / m;
    const double beta = inst.beta;
    const double om = 1.0 - beta;

    // product integration with piecewise-linear u against the kernel
    // (t_i - s)^{-beta}: exact moments of the hat functions.
    // Int_{s_j}^{s_{j+1}} (t_i - s)^{-beta} [linear interp of u] ds
    // with tau = t_i - s running over [a, b] = [t_i - s_{j+1}, t_i - s_j]:
    //   m0 = (b^{om} - a^{om})/om,
    //   m1 = (b^{om+1} - a^{om+1})/(om+1)   (moment of tau about 0)
    // u(s) = u_j (tau - a)/h + u_{j+1} (b - tau)/h on the cell.
    std::vector<double> u(m + 1);
    std::vector<double> t(m + 1);
    for (long i = 0; i <= m; ++i) t[i] = i * h;
    u[0] = inst.g[0];
    for (long i = 1; i <= m; ++i) {
        const double ti = t[i];
        const double kap = interp_linear(inst.grid, inst.kappa, ti);
        // cells [s_j, s_{j+1}], tau = t_i - s in [a,b]; on each cell
        // u(tau) = u_{j+1} + (u_j - u_{j+1})(tau - a)/h, so
        // Int = u_{j+1} m0 + (u_j - u_{j+1})(m1 - a m0)/h.
        double conv = 0.0;
        for (long j = 0; j + 1 < i; ++j) {
            const double a = ti - t[j + 1];
            const double b = ti - t[j];
            const double m0 = (std::pow(b, om) - std::pow(a, om)) / om;
            const double m1 = (std::pow(b, om + 1.0) - std::pow(a, om + 1.0)) / (om + 1.0);
            conv += u[j + 1] * m0 + (u[j] - u[j + 1]) * (m1 - a * m0) / h;
        }
        // last cell with u_i unknown: a = 0, b = h,
        // Int = u_i (m0 - m1/h) + u_{i-1} m1/h.
        const double m0 = std::pow(h, om) / om;
        const double m1 = std::pow(h, om + 1.0) / (om + 1.0);
        const double known = conv + u[i - 1] * m1 / h;
        const double coeff = m0 - m1 / h;
        const double gi = interp_linear(inst.grid, inst.g, ti);
        const double denom = 1.0 - kap * coeff;
        if (denom <= 0.0)
            throw numerical_refusal("volterra_solve: step too coarse for the kernel strength");
        u[i] = (gi + kap * known) / denom;
    }

    // sample back on the coarse grid
    Eigen::VectorXd out(n_coarse);
    for (int i = 0; i < n_coarse; ++i) {
        const double ti = inst.grid[i];
        const long j = static_cast<long>(std::llround(ti / h));
        if (std::abs(j * h - ti) < 1e-9 * std::max(1.0, ti) && j >= 0 && j <= m) {
            out[i] = u[j];
        } else {
            // coarse node off the fine grid: linear interpolation
            const long j0 = std::min<long>(m - 1, static_cast<long>(ti / h));
            const double w = (ti - t[j0]) / h;
            out[i] = (1.0 - w) * u[j0] + w * u[j0 + 1];
        }
    }
    return out;
}

} // namespace rdslab
