#include "rdslab/stationary.hpp"

#include <cmath>
#include <limits>

#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"

namespace rdslab {

namespace {

struct ModeSplit {
    std::vector<int> stable, unstable, neutral;
};

ModeSplit split_modes(const SpectralModel& model) {
    ModeSplit s;
    for (int k = 0; k < model.n_modes(); ++k) {
        const double a = model.drift(k);
        if (a < -1e-12) s.stable.push_back(k);
        else if (a > 1e-12) s.unstable.push_back(k);
        else s.neutral.push_back(k);
    }
    return s;
}

double contraction_margin_for(const SpectralModel& model, const Nonlinearity& nonlin,
                              const ModeSplit& modes, bool hyperbolic) {
    const double beta = model.beta();
    if (modes.unstable.empty() && modes.neutral.empty()) {
        // paper form: ||G|| frac_norm Int_0^inf s^{-beta} e^{omega_A s} ds
        if (!std::isfinite(nonlin.bound()))
            throw numerical_refusal(
                "stationary point: requires a globally bounded nonlinearity (||G|| < inf)");
        const double frac_int = std::tgamma(1.0 - beta) / std::pow(-model.omega_A(), 1.0 - beta);
        return nonlin.bound() * model.frac_norm() * frac_int;
    }
    if (!hyperbolic)
        throw numerical_refusal("stationary_point: non-dissipative mode present (omega_A = " +
                                std::to_string(model.omega_A()) +
                                " >= 0); the stationary integral requires omega_A < 0");
    // hyperbolic surrogate: Lipschitz constant times the L1 norms of the split kernels
    double a_s = -std::numeric_limits<double>::infinity();
    double a_u = std::numeric_limits<double>::infinity();
    for (int k : modes.stable) a_s = std::max(a_s, model.drift(k));
    for (int k : modes.unstable) a_u = std::min(a_u, model.drift(k));
    double l1 = 0.0;
    if (!modes.stable.empty()) l1 += 1.0 / std::abs(a_s);
    if (!modes.unstable.empty()) l1 += 1.0 / a_u;
    return nonlin.lipschitz() * l1;
}

} // namespace

StationaryArc stationary_arc(const SpectralModel& model, const PathView& path,
                             const Nonlinearity& nonlin, double t_lo, double t_hi,
                             bool hyperbolic, const StationaryOptions& opts) {
    if (!(t_hi >= t_lo)) throw config_error("stationary_arc: need t_hi >= t_lo");
    const double dt = path.dt();
    const ModeSplit modes = split_modes(model);
    const double margin = contraction_margin_for(model, nonlin, modes, hyperbolic);
    if (margin >= 1.0)
        throw numerical_refusal("stationary point: contraction margin " + std::to_string(margin) +
                                " >= 1, fixed point not certified");

    const long i_lo = path.grid_index(t_lo);
    const long i_hi_req = path.grid_index(t_hi);
    // expanding modes need the forward tail of the reverse-time integral
    const long i_hi = modes.unstable.empty() ? i_hi_req : i_hi_req;
    const long n_nodes = i_hi - i_lo + 1;
    const int nm = model.n_modes();

    StationaryArc arc;
    arc.i_lo = i_lo;
    arc.t_lo = t_lo;
    arc.contraction_margin = margin;

    // OU values on the nodes, one exact recursion from the horizon start
    arc.Y.resize(n_nodes);
    {
        const auto mask = dissipative_mask(model);
        Eigen::VectorXd rho(nm);
        for (int k = 0; k < nm; ++k) rho[k] = mask[k] ? std::exp(model.drift(k) * dt) : 0.0;
        StateVector y = ou_eval(model, path, t_lo);
        arc.Y[0] = y;
        for (long i = 1; i < n_nodes; ++i) {
            for (int k = 0; k < nm; ++k) {
                if (!mask[k]) { y[k] = 0.0; continue; }
                y[k] = rho[k] * y[k] +
                       model.boundary_coupling()(k, 0) * path.increment(0, i_lo + i - 1) +
                       model.boundary_coupling()(k, 1) * path.increment(1, i_lo + i - 1);
            }
            arc.Y[i] = y;
        }
    }

    if (nonlin.is_zero()) {
        arc.V.assign(n_nodes, StateVector::Zero(nm));
        arc.residual = 0.0;
        arc.iterations = 0;
        return arc;
    }

    Eigen::VectorXd expd(nm);
    for (int k = 0; k < nm; ++k) expd[k] = std::exp(model.drift(k) * dt);

    std::vector<StateVector> V(n_nodes, StateVector::Zero(nm));
    std::vector<StateVector> G(n_nodes);
    double prev_delta = -1.0;
    double ratio_max = 0.0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        for (long i = 0; i < n_nodes; ++i) G[i] = nonlin(V[i] + arc.Y[i]);
        for (int k : modes.neutral) {
            for (long i = 0; i < n_nodes; ++i) {
                if (std::abs(G[i][k]) > 1e-12)
                    throw numerical_refusal("stationary point: neutral mode " + std::to_string(k) +
                                            " is forced by the nonlinearity; mask it or detune mu");
            }
        }
        std::vector<StateVector> Vn(n_nodes, StateVector::Zero(nm));
        // dissipative modes: forward sweep from the left edge (V = 0 there)
        for (long i = 1; i < n_nodes; ++i) {
            for (int k : modes.stable)
                Vn[i][k] = expd[k] * Vn[i - 1][k] + 0.5 * dt * (expd[k] * G[i - 1][k] + G[i][k]);
        }
        // expanding modes: backward sweep from the right edge
        for (long i = n_nodes - 2; i >= 0; --i) {
            for (int k : modes.unstable) {
                const double einv = 1.0 / expd[k]; // e^{-a dt} < 1
                Vn[i][k] = einv * Vn[i + 1][k] - 0.5 * dt * (G[i][k] + einv * G[i + 1][k]);
            }
        }
        double delta = 0.0;
        for (long i = 0; i < n_nodes; ++i) delta = std::max(delta, (Vn[i] - V[i]).norm());
        V.swap(Vn);
        arc.iterations = it + 1;
        if (prev_delta > 0.0 && delta > 0.0) ratio_max = std::max(ratio_max, delta / prev_delta);
        prev_delta = delta;
        arc.residual = delta;
        if (delta <= opts.tol) break;
    }
    if (arc.residual > opts.tol)
        throw numerical_refusal("stationary point: fixed point not reached (defect " +
                                std::to_string(arc.residual) + ")");
    arc.observed_ratio = ratio_max;
    arc.V = std::move(V);
    return arc;
}

namespace {

StationaryPoint point_from_arc(const StationaryArc& arc, const PathView& path, double window) {
    StationaryPoint out;
    const long i0 = path.grid_index(0.0) - arc.i_lo;
    out.Z = arc.V[i0] + arc.Y[i0];
    out.V0 = arc.V[i0];
    out.window = window;
    out.residual = arc.residual;
    out.contraction_margin = arc.contraction_margin;
    out.observed_ratio = arc.observed_ratio;
    out.iterations = arc.iterations;
    return out;
}

} // namespace

StationaryPoint stationary_point(const SpectralModel& model, const PathView& path,
                                 const Nonlinearity& nonlin, double window,
                                 const StationaryOptions& opts) {
    if (!(window > 0.0)) throw config_error("stationary_point: window must be > 0");
    const StationaryArc arc = stationary_arc(model, path, nonlin, -window, 0.0, false, opts);
    return point_from_arc(arc, path, window);
}

StationaryPoint hyperbolic_stationary_point(const SpectralModel& model, const PathView& path,
                                            const Nonlinearity& nonlin, double window,
                                            const StationaryOptions& opts) {
    if (!(window > 0.0)) throw config_error("hyperbolic_stationary_point: window must be > 0");
    const bool needs_future = (model.drifts().array() > 1e-12).any();
    const StationaryArc arc =
        stationary_arc(model, path, nonlin, -window, needs_future ? window : 0.0, true, opts);
    return point_from_arc(arc, path, window);
}

double stationary_orbit_defect(const SpectralModel& model, const PathView& path,
                               const Nonlinearity& nonlin, double window, double t,
                               bool hyperbolic, const StationaryOptions& opts,
                               const SolverOptions& solver) {
    const StationaryPoint z0 = hyperbolic
                                   ? hyperbolic_stationary_point(model, path, nonlin, window, opts)
                                   : stationary_point(model, path, nonlin, window, opts);
    const StationaryPoint zt =
        hyperbolic ? hyperbolic_stationary_point(model, shift(path, t), nonlin, window, opts)
                   : stationary_point(model, shift(path, t), nonlin, window, opts);
    const StateVector advanced = cocycle_apply(model, path, nonlin, t, z0.Z, solver);
    return (advanced - zt.Z).norm();
}

} // namespace rdslab
