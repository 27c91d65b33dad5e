#include "rdslab/ornstein_uhlenbeck.hpp"

#include <cmath>
#include <limits>

#include "rdslab/errors.hpp"

namespace rdslab {

Eigen::Array<bool, Eigen::Dynamic, 1> dissipative_mask(const SpectralModel& model) {
    Eigen::Array<bool, Eigen::Dynamic, 1> mask(model.n_modes());
    for (int k = 0; k < model.n_modes(); ++k) mask[k] = model.drift(k) < 0.0;
    return mask;
}

StateVector ou_eval(const SpectralModel& model, const PathView& path, double t, double window) {
    const long it = path.grid_index(t); // validates grid alignment and horizon
    long i_start = 0;
    if (window >= 0.0) {
        const double x = window / path.dt();
        const long w = static_cast<long>(std::llround(x));
        if (std::abs(x - w) > 1e-9 * std::max(1.0, std::abs(x)))
            throw config_error("ou_eval: window must be a grid multiple");
        i_start = std::max<long>(0, it - w);
    }
    const auto mask = dissipative_mask(model);
    const int n_ch = path.n_channels();
    if (model.boundary_coupling().rows() != model.n_modes())
        throw config_error("ou_eval: model coupling size mismatch");
    if (n_ch != 2) throw config_error("ou_eval: expected the two boundary channels");

    StateVector y = StateVector::Zero(model.n_modes());
    const double dt = path.dt();
    for (int k = 0; k < model.n_modes(); ++k) {
        if (!mask[k]) continue;
        const double rho = std::exp(model.drift(k) * dt);
        double yk = 0.0;
        for (long i = i_start; i < it; ++i) {
            yk = rho * yk + model.boundary_coupling()(k, 0) * path.increment(0, i) +
                 model.boundary_coupling()(k, 1) * path.increment(1, i);
        }
        y[k] = yk;
    }
    return y;
}

double ou_truncation_factor(const SpectralModel& model, const PathView& path, double t,
                            double window) {
    const long it = path.grid_index(t);
    long i_start = 0;
    if (window >= 0.0) i_start = std::max<long>(0, it - static_cast<long>(std::llround(window / path.dt())));
    const double used_window = (it - i_start) * path.dt();
    double slowest = -std::numeric_limits<double>::infinity();
    const auto mask = dissipative_mask(model);
    for (int k = 0; k < model.n_modes(); ++k)
        if (mask[k]) slowest = std::max(slowest, model.drift(k));
    if (!std::isfinite(slowest)) return 0.0; // nothing retained
    return std::exp(slowest * used_window);
}

double stationarity_residual(const SpectralModel& model, const PathView& path,
                             double s, double t, double window) {
    const PathView shifted = shift(path, t);
    const StateVector lhs = ou_eval(model, shifted, s, window);
    const StateVector rhs = ou_eval(model, path, t + s, window);
    return (lhs - rhs).norm();
}

double ou_discrete_stationary_variance(const SpectralModel& model, const Eigen::VectorXd& q,
                                       double dt, int k) {
    const double a = model.drift(k);
    if (!(a < 0.0)) throw numerical_refusal("ou variance: mode " + std::to_string(k) + " is not dissipative");
    double s2 = 0.0;
    for (int ch = 0; ch < q.size(); ++ch)
        s2 += model.boundary_coupling()(k, ch) * model.boundary_coupling()(k, ch) * q[ch];
    return s2 * dt / (-std::expm1(2.0 * a * dt));
}

double ou_continuum_stationary_variance(const SpectralModel& model, const Eigen::VectorXd& q, int k) {
    const double a = model.drift(k);
    if (!(a < 0.0)) throw numerical_refusal("ou variance: mode " + std::to_string(k) + " is not dissipative");
    double s2 = 0.0;
    for (int ch = 0; ch < q.size(); ++ch)
        s2 += model.boundary_coupling()(k, ch) * model.boundary_coupling()(k, ch) * q[ch];
    return s2 / (-2.0 * a);
}

} // namespace rdslab
