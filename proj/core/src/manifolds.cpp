#include "rdslab/manifolds.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"

namespace rdslab {

namespace {

constexpr double kLogTailTarget = 18.42; // ln(1e8): geometric truncation at defect < 1e-8

// --- tangent-ball sample nodes (sparse cross patterns, degree-3 friendly) ---
Eigen::MatrixXd ball_nodes(int dim, double radius) {
    if (dim == 0) return Eigen::MatrixXd::Zero(0, 1);
    std::vector<Eigen::VectorXd> pts;
    pts.push_back(Eigen::VectorXd::Zero(dim));
    for (int i = 0; i < dim; ++i) {
        for (double s : {1.0, -1.0, 0.5, -0.5}) {
            Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
            p[i] = s * radius;
            pts.push_back(p);
        }
    }
    const double diag = radius / std::sqrt(2.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j)
            for (double si : {1.0, -1.0})
                for (double sj : {1.0, -1.0}) {
                    Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
                    p[i] = si * diag;
                    p[j] = sj * diag;
                    pts.push_back(p);
                }
    Eigen::MatrixXd out(dim, static_cast<int>(pts.size()));
    for (std::size_t c = 0; c < pts.size(); ++c) out.col(c) = pts[c];
    return out;
}

std::vector<Eigen::VectorXi> monomials_deg3(int dim) {
    std::vector<Eigen::VectorXi> out;
    std::function<void(Eigen::VectorXi&, int, int)> rec = [&](Eigen::VectorXi& cur, int pos,
                                                              int left) {
        if (pos == dim) {
            out.push_back(cur);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            cur[pos] = e;
            rec(cur, pos + 1, left - e);
        }
        cur[pos] = 0;
    };
    Eigen::VectorXi cur = Eigen::VectorXi::Zero(dim);
    rec(cur, 0, 3);
    return out;
}

Eigen::VectorXd monomial_row(const std::vector<Eigen::VectorXi>& mons,
                             const Eigen::VectorXd& x) {
    Eigen::VectorXd row(mons.size());
    for (std::size_t m = 0; m < mons.size(); ++m) {
        double v = 1.0;
        for (int i = 0; i < x.size(); ++i)
            for (int e = 0; e < mons[m][i]; ++e) v *= x[i];
        row[m] = v;
    }
    return row;
}

struct Frame {
    Eigen::MatrixXd M;    // [tangent | complement] (or [C S U] for center charts)
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    int d_t = 0; // tangent block size
};

} // namespace

// --- StationaryOrbit ------------------------------------------------------

StationaryOrbit::StationaryOrbit(const SpectralModel& model, const PathView& path,
                                 const Nonlinearity& nonlin, double t0, long n_lo, long n_hi,
                                 const ChartOptions& opts)
    : model_(model), path_(path), nonlin_(nonlin), t0_(t0) {
    const double dt = path.dt();
    steps_per_block_ = static_cast<long>(std::llround(t0 / dt));
    if (std::abs(steps_per_block_ * dt - t0) > 1e-9 * std::max(1.0, t0))
        throw config_error("StationaryOrbit: t0 must be a grid multiple of dt");
    const bool expanding = (model.drifts().array() > 1e-12).any();
    const double pad_l = opts.stationary_window;
    const double pad_r = expanding && !nonlin.is_zero() ? opts.stationary_window : 0.0;
    arc_ = stationary_arc(model, path, nonlin, static_cast<double>(n_lo) * t0 - pad_l,
                          static_cast<double>(n_hi) * t0 + pad_r, opts.hyperbolic_base, opts.stat);
}

StateVector StationaryOrbit::Z(long n) const {
    const long idx = path_.grid_index(static_cast<double>(n) * t0_) - arc_.i_lo;
    if (idx < 0 || idx >= static_cast<long>(arc_.V.size()))
        throw config_error("StationaryOrbit: node outside the prepared span");
    return arc_.V[idx] + arc_.Y[idx];
}

const Eigen::MatrixXd& StationaryOrbit::block(long n) const {
    auto it = b_.find(n);
    if (it != b_.end()) return it->second;
    const PathView v = shift(path_, static_cast<double>(n) * t0_);
    Eigen::MatrixXd B = linearize(model_, v, nonlin_, Z(n), t0_, SolverOptions{}).entries;
    return b_.emplace(n, std::move(B)).first->second;
}

BlockFn StationaryOrbit::block_fn() const {
    return [this](long n) { return block(n); };
}

// --- chart internals -------------------------------------------------------

namespace {

struct ChartSetup {
    Eigen::MatrixXd tangent, complement; // at node 0
    int horizon = 0;
    double upsilon = 0.0;
};

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() == 0) return b;
    if (b.cols() == 0) return a;
    Eigen::MatrixXd m(a.rows(), a.cols() + b.cols());
    m << a, b;
    return m;
}

// nonlinear one-step remainder N_n(x) = phi~^{t0}(Z_n + x) - Z_{n+1} - B_n x
StateVector lp_remainder(const SpectralModel& model, const PathView& path,
                         const Nonlinearity& nonlin, const StationaryOrbit& orbit, double t0,
                         long n, const StateVector& x, const SolverOptions& solver) {
    if (nonlin.is_zero()) return StateVector::Zero(x.size());
    const PathView v = shift(path, static_cast<double>(n) * t0);
    const StateVector img = cocycle_apply(model, v, nonlin, t0, orbit.Z(n) + x, solver);
    return img - orbit.Z(n + 1) - orbit.block(n) * x;
}

ManifoldChart finish_chart(ChartKind kind, const StationaryPoint& Z, const ChartSetup& setup,
                           const Eigen::MatrixXd& section, const Eigen::MatrixXd& nodes,
                           const Eigen::MatrixXd& values, double radius, double t0,
                           double lp_defect, int lp_iters) {
    ManifoldChart chart;
    chart.kind = kind;
    chart.Z = Z.Z;
    chart.tangent = setup.tangent;
    chart.section = section;
    chart.complement = setup.complement;
    chart.nodes = nodes;
    chart.values = values;
    chart.radius = radius;
    chart.upsilon = setup.upsilon;
    chart.t0 = t0;
    chart.lp_defect = lp_defect;
    chart.lp_iterations = lp_iters;
    chart.lp_horizon = setup.horizon;

    // degree-3 least-squares interpolant of the graph over the nodes
    const int ds = static_cast<int>(nodes.rows());
    if (ds > 0 && nodes.cols() > 0) {
        const auto mons = monomials_deg3(ds);
        Eigen::MatrixXd A(nodes.cols(), mons.size());
        for (int c = 0; c < nodes.cols(); ++c) A.row(c) = monomial_row(mons, nodes.col(c)).transpose();
        const auto qr = A.colPivHouseholderQr();
        chart.poly.resize(values.rows(), static_cast<int>(mons.size()));
        for (int r = 0; r < values.rows(); ++r)
            chart.poly.row(r) = qr.solve(values.row(r).transpose()).transpose();
    }
    return chart;
}

} // namespace

Eigen::VectorXd ManifoldChart::graph_eval(const Eigen::VectorXd& section_coords) const {
    if (poly.rows() == 0) return Eigen::VectorXd::Zero(complement.cols());
    const auto mons = monomials_deg3(static_cast<int>(section.cols()));
    return poly * monomial_row(mons, section_coords);
}

StateVector ManifoldChart::embed(const Eigen::VectorXd& section_coords) const {
    return Z + section * section_coords + complement * graph_eval(section_coords);
}

namespace {

// Shared LP driver. `kind` selects boundary conditions. Returns graph values
// (complement coords at node 0) for one tangent sample; throws on
// non-contraction (caller shrinks the radius).
struct LpResult {
    Eigen::VectorXd graph0;
    std::vector<StateVector> states; // x_n + Z_n over the node range
    long n_lo = 0;
    double final_delta = 0.0;
    int iterations = 0;
};

LpResult lp_solve(ChartKind kind, const SpectralModel& model, const PathView& path,
                  const Nonlinearity& nonlin, const StationaryOrbit& orbit,
                  const std::vector<Frame>& frames, long n_lo, long n_hi,
                  const Eigen::VectorXd& xi_tangent_coords, double upsilon, double t0,
                  double radius, const ChartOptions& opts) {
    const int N = model.n_modes();
    const long n_nodes = n_hi - n_lo + 1;
    const int d_t = frames[0].d_t;
    const int d_q = N - d_t;

    // cocycle blocks in frame coordinates: K_n = M_{n+1}^{-1} B_n M_n
    std::vector<Eigen::MatrixXd> K(n_nodes - 1);
    for (long i = 0; i + 1 < n_nodes; ++i)
        K[i] = frames[i + 1].lu.solve(orbit.block(n_lo + i) * frames[i].M);

    const long i0 = -n_lo; // index of node 0
    std::vector<Eigen::VectorXd> a(n_nodes, Eigen::VectorXd::Zero(d_t)); // tangent coords
    std::vector<Eigen::VectorXd> c(n_nodes, Eigen::VectorXd::Zero(d_q)); // complement coords
    std::vector<StateVector> x(n_nodes, StateVector::Zero(N));
    std::vector<StateVector> rem(n_nodes - 1, StateVector::Zero(N));

    auto weight = [&](long i) -> double {
        const long n = n_lo + i;
        switch (kind) {
            case ChartKind::stable: return std::exp(upsilon * t0 * static_cast<double>(n));
            case ChartKind::unstable: return std::exp(upsilon * t0 * static_cast<double>(-n));
            case ChartKind::center: return std::exp(-upsilon * t0 * std::abs(static_cast<double>(n)));
        }
        return 1.0;
    };

    double prev_delta = std::numeric_limits<double>::infinity();
    int grew = 0;
    LpResult res;
    for (int it = 0; it < opts.max_lp_iters; ++it) {
        // remainders at current states
        for (long i = 0; i + 1 < n_nodes; ++i)
            rem[i] = lp_remainder(model, path, nonlin, orbit, t0, n_lo + i, x[i], opts.solver);

        std::vector<Eigen::VectorXd> a_new(n_nodes, Eigen::VectorXd::Zero(d_t));
        std::vector<Eigen::VectorXd> c_new(n_nodes, Eigen::VectorXd::Zero(d_q));

        auto coords = [&](long i, const StateVector& v) -> Eigen::VectorXd {
            return frames[i].lu.solve(v);
        };

        if (kind == ChartKind::stable) {
            // tangent (stable) coords forward from the prescribed data
            a_new[i0] = xi_tangent_coords;
            for (long i = i0; i + 1 < n_nodes; ++i) {
                const Eigen::VectorXd w = coords(i + 1, rem[i]);
                a_new[i + 1] = K[i].topLeftCorner(d_t, d_t) * a_new[i] +
                               K[i].topRightCorner(d_t, d_q) * c[i] + w.head(d_t);
            }
            // complement (expanding/neutral) coords backward from 0 at the far end
            for (long i = n_nodes - 2; i >= i0; --i) {
                const Eigen::VectorXd w = coords(i + 1, rem[i]);
                const Eigen::VectorXd rhs =
                    c_new[i + 1] - K[i].bottomLeftCorner(d_q, d_t) * a_new[i] - w.tail(d_q);
                c_new[i] = K[i].bottomRightCorner(d_q, d_q).partialPivLu().solve(rhs);
            }
        } else { // unstable
            // tangent (unstable) coords backward from the prescribed data at 0
            a_new[i0] = xi_tangent_coords;
            for (long i = i0 - 1; i >= 0; --i) {
                const Eigen::VectorXd w = coords(i + 1, rem[i]);
                const Eigen::VectorXd rhs =
                    a_new[i + 1] - K[i].topRightCorner(d_t, d_q) * c[i] - w.head(d_t);
                a_new[i] = K[i].topLeftCorner(d_t, d_t).partialPivLu().solve(rhs);
            }
            // complement (contracting) coords forward from 0 at the far past
            for (long i = 0; i + 1 <= i0; ++i) {
                const Eigen::VectorXd w = coords(i + 1, rem[i]);
                c_new[i + 1] = K[i].bottomRightCorner(d_q, d_q) * c_new[i] +
                               K[i].bottomLeftCorner(d_q, d_t) * a_new[i] + w.tail(d_q);
            }
        }

        double delta = 0.0;
        for (long i = 0; i < n_nodes; ++i) {
            const StateVector x_new =
                frames[i].M.leftCols(d_t) * a_new[i] + frames[i].M.rightCols(d_q) * c_new[i];
            delta = std::max(delta, weight(i) * (x_new - x[i]).norm());
            x[i] = x_new;
            if (x[i].norm() > 50.0 * radius + 1e-12)
                throw numerical_refusal("lp_solve: iterate left the chart neighborhood");
        }
        a = a_new;
        c = c_new;
        res.iterations = it + 1;
        res.final_delta = delta;
        if (delta <= opts.lp_tol * std::max(1.0, radius)) break;
        if (delta > prev_delta * 1.0001) {
            if (++grew >= 3) throw numerical_refusal("lp_solve: iteration not contracting");
        } else {
            grew = 0;
        }
        prev_delta = delta;
        if (it + 1 == opts.max_lp_iters)
            throw numerical_refusal("lp_solve: iteration did not converge");
    }

    res.graph0 = c[i0];
    res.n_lo = n_lo;
    res.states.resize(n_nodes);
    for (long i = 0; i < n_nodes; ++i) res.states[i] = orbit.Z(n_lo + i) + x[i];
    return res;
}

} // namespace

// (center charts use a three-block variant defined further down)

namespace {

LpResult lp_solve_center(const SpectralModel& model, const PathView& path,
                         const Nonlinearity& nonlin, const StationaryOrbit& orbit,
                         const std::vector<Frame>& frames, long n_lo, long n_hi, int d_c, int d_s,
                         int d_u, const Eigen::VectorXd& xi_center_coords, double upsilon,
                         double t0, double radius, const ChartOptions& opts) {
    const int N = model.n_modes();
    const long n_nodes = n_hi - n_lo + 1;
    std::vector<Eigen::MatrixXd> K(n_nodes - 1);
    for (long i = 0; i + 1 < n_nodes; ++i)
        K[i] = frames[i + 1].lu.solve(orbit.block(n_lo + i) * frames[i].M);

    const long i0 = -n_lo;
    std::vector<Eigen::VectorXd> cc(n_nodes, Eigen::VectorXd::Zero(d_c));
    std::vector<Eigen::VectorXd> ss(n_nodes, Eigen::VectorXd::Zero(d_s));
    std::vector<Eigen::VectorXd> uu(n_nodes, Eigen::VectorXd::Zero(d_u));
    std::vector<StateVector> x(n_nodes, StateVector::Zero(N));
    std::vector<StateVector> rem(n_nodes - 1, StateVector::Zero(N));

    auto weight = [&](long i) {
        return std::exp(-upsilon * t0 * std::abs(static_cast<double>(n_lo + i)));
    };

    double prev_delta = std::numeric_limits<double>::infinity();
    int grew = 0;
    LpResult res;
    for (int it = 0; it < opts.max_lp_iters; ++it) {
        for (long i = 0; i + 1 < n_nodes; ++i)
            rem[i] = lp_remainder(model, path, nonlin, orbit, t0, n_lo + i, x[i], opts.solver);

        std::vector<Eigen::VectorXd> c_new(n_nodes, Eigen::VectorXd::Zero(d_c));
        std::vector<Eigen::VectorXd> s_new(n_nodes, Eigen::VectorXd::Zero(d_s));
        std::vector<Eigen::VectorXd> u_new(n_nodes, Eigen::VectorXd::Zero(d_u));

        auto wcoords = [&](long i) { return frames[i].lu.solve(rem[i - 1]).eval(); };

        // center coords: prescribed at node 0, forward and backward
        c_new[i0] = xi_center_coords;
        for (long i = i0; i + 1 < n_nodes; ++i) {
            const Eigen::VectorXd w = wcoords(i + 1);
            c_new[i + 1] = K[i].block(0, 0, d_c, d_c) * c_new[i] +
                           K[i].block(0, d_c, d_c, d_s) * ss[i] +
                           K[i].block(0, d_c + d_s, d_c, d_u) * uu[i] + w.head(d_c);
        }
        for (long i = i0 - 1; i >= 0; --i) {
            const Eigen::VectorXd w = wcoords(i + 1);
            const Eigen::VectorXd rhs = c_new[i + 1] - K[i].block(0, d_c, d_c, d_s) * ss[i] -
                                        K[i].block(0, d_c + d_s, d_c, d_u) * uu[i] - w.head(d_c);
            c_new[i] = K[i].block(0, 0, d_c, d_c).partialPivLu().solve(rhs);
        }
        // stable coords forward from the far past
        for (long i = 0; i + 1 < n_nodes; ++i) {
            const Eigen::VectorXd w = wcoords(i + 1);
            s_new[i + 1] = K[i].block(d_c, d_c, d_s, d_s) * s_new[i] +
                           K[i].block(d_c, 0, d_s, d_c) * c_new[i] +
                           K[i].block(d_c, d_c + d_s, d_s, d_u) * uu[i] + w.segment(d_c, d_s);
        }
        // unstable coords backward from the far future
        for (long i = n_nodes - 2; i >= 0; --i) {
            const Eigen::VectorXd w = wcoords(i + 1);
            const Eigen::VectorXd rhs = u_new[i + 1] -
                                        K[i].block(d_c + d_s, 0, d_u, d_c) * c_new[i] -
                                        K[i].block(d_c + d_s, d_c, d_u, d_s) * s_new[i] -
                                        w.tail(d_u);
            u_new[i] = K[i].block(d_c + d_s, d_c + d_s, d_u, d_u).partialPivLu().solve(rhs);
        }

        double delta = 0.0;
        for (long i = 0; i < n_nodes; ++i) {
            const StateVector x_new = frames[i].M.leftCols(d_c) * c_new[i] +
                                      frames[i].M.middleCols(d_c, d_s) * s_new[i] +
                                      frames[i].M.rightCols(d_u) * u_new[i];
            delta = std::max(delta, weight(i) * (x_new - x[i]).norm());
            x[i] = x_new;
            if (x[i].norm() > 50.0 * radius + 1e-12)
                throw numerical_refusal("lp_solve_center: iterate left the chart neighborhood");
        }
        cc = c_new;
        ss = s_new;
        uu = u_new;
        res.iterations = it + 1;
        res.final_delta = delta;
        if (delta <= opts.lp_tol * std::max(1.0, radius)) break;
        if (delta > prev_delta * 1.0001) {
            if (++grew >= 3) throw numerical_refusal("lp_solve_center: iteration not contracting");
        } else {
            grew = 0;
        }
        prev_delta = delta;
        if (it + 1 == opts.max_lp_iters)
            throw numerical_refusal("lp_solve_center: iteration did not converge");
    }

    Eigen::VectorXd graph(d_s + d_u);
    graph << ss[i0], uu[i0];
    res.graph0 = graph;
    res.n_lo = n_lo;
    res.states.resize(n_nodes);
    for (long i = 0; i < n_nodes; ++i) res.states[i] = orbit.Z(n_lo + i) + x[i];
    return res;
}

struct BuiltFrames {
    std::vector<Frame> frames;
    Eigen::MatrixXd tangent0, complement0;
    int d_c = 0, d_s = 0, d_u = 0;
};

BuiltFrames build_frames(ChartKind kind, const BlockFn& blocks, long n_lo, long n_hi,
                         const LyapunovSpectrum& spectrum, const OseledetsSplitting& split,
                         int window, double t0) {
    BuiltFrames bf;
    const std::vector<int>& center_hint = split.center_groups;
    for (long n = n_lo; n <= n_hi; ++n) {
        const NodeSplitting ns = window_splitting(blocks, n, window, t0, spectrum.exponents,
                                                  spectrum.multiplicities, center_hint);
        Frame f;
        Eigen::MatrixXd T, Q;
        switch (kind) {
            case ChartKind::stable:
                T = ns.S;
                Q = hcat(ns.U, ns.C);
                break;
            case ChartKind::unstable:
                T = ns.U;
                Q = hcat(ns.S, ns.C);
                break;
            case ChartKind::center:
                T = ns.C;
                Q = hcat(ns.S, ns.U);
                f.M = hcat(hcat(ns.C, ns.S), ns.U);
                bf.d_c = static_cast<int>(ns.C.cols());
                bf.d_s = static_cast<int>(ns.S.cols());
                bf.d_u = static_cast<int>(ns.U.cols());
                break;
        }
        if (kind != ChartKind::center) f.M = hcat(T, Q);
        f.d_t = static_cast<int>(T.cols());
        f.lu = Eigen::PartialPivLU<Eigen::MatrixXd>(f.M);
        if (n == 0) {
            bf.tangent0 = T;
            bf.complement0 = Q;
        }
        bf.frames.push_back(std::move(f));
    }
    return bf;
}

ManifoldChart build_chart(ChartKind kind, const SpectralModel& model, const PathView& path,
                          const Nonlinearity& nonlin, const StationaryPoint& Z,
                          const LyapunovSpectrum& spectrum, double upsilon, double radius,
                          const ChartOptions& opts) {
    const OseledetsSplitting split = oseledets_splitting(spectrum, opts.center_threshold);
    const double mu_s = split.mu_stable_top;      // max negative exponent
    const double mu_u = split.mu_unstable_bottom; // min positive exponent
    const bool has_s = split.S_basis.cols() > 0;
    const bool has_u = split.U_basis.cols() > 0;
    const bool has_c = split.C_basis.cols() > 0;

    double ups = upsilon;
    switch (kind) {
        case ChartKind::stable:
            if (!has_s) throw numerical_refusal("stable_chart: no stable direction");
            if (!(ups > 0.0 && ups < -mu_s))
                throw config_error("stable_chart: upsilon must lie in (0, " +
                                   std::to_string(-mu_s) + ")");
            break;
        case ChartKind::unstable:
            if (!has_u) throw numerical_refusal("unstable_chart: no unstable direction");
            if (!(ups > 0.0 && ups < mu_u))
                throw config_error("unstable_chart: upsilon must lie in (0, " +
                                   std::to_string(mu_u) + ")");
            break;
        case ChartKind::center: {
            if (!has_c) throw numerical_refusal("center_chart: no center direction");
            const double mu_plus = has_u ? mu_u : std::numeric_limits<double>::infinity();
            const double mu_minus = has_s ? -mu_s : std::numeric_limits<double>::infinity();
            ups = 0.5 * std::min(mu_plus, mu_minus);
            if (!std::isfinite(ups) || ups <= 0.0)
                throw numerical_refusal("center_chart: no hyperbolic gap around the center");
            break;
        }
    }

    // geometric truncation horizon from the spectral gaps
    double q = std::numeric_limits<double>::infinity();
    switch (kind) {
        case ChartKind::stable:
            if (has_u) q = std::min(q, mu_u + 2.0 * ups);
            if (has_c) q = std::min(q, 2.0 * ups);
            break;
        case ChartKind::unstable:
            if (has_s) q = std::min(q, -mu_s + 2.0 * ups);
            if (has_c) q = std::min(q, 2.0 * ups);
            break;
        case ChartKind::center:
            if (has_s) q = std::min(q, -mu_s - ups);
            if (has_u) q = std::min(q, mu_u - ups);
            break;
    }
    int M = opts.lp_horizon;
    if (M <= 0)
        M = std::isfinite(q) ? std::clamp(static_cast<int>(std::ceil(kLogTailTarget / (q * opts.t0))),
                                          6, 400)
                             : 6;

    long n_lo = 0, n_hi = 0;
    switch (kind) {
        case ChartKind::stable: n_lo = 0; n_hi = M; break;
        case ChartKind::unstable: n_lo = -M; n_hi = 0; break;
        case ChartKind::center: n_lo = -M; n_hi = M; break;
    }

    const int W = opts.split_window;
    StationaryOrbit orbit(model, path, nonlin, opts.t0, n_lo - W - 1, n_hi + W + 1, opts);
    const BuiltFrames bf = build_frames(kind, orbit.block_fn(), n_lo, n_hi, spectrum, split,
                                        opts.split_window, opts.t0);

    const int d_t = static_cast<int>(bf.tangent0.cols());
    const int ds = std::min(d_t, opts.max_section_dim);
    const Eigen::MatrixXd section = bf.tangent0.leftCols(ds);

    double r = radius;
    while (true) {
        const Eigen::MatrixXd nodes = ball_nodes(ds, r);
        Eigen::MatrixXd values(bf.complement0.cols(), nodes.cols());
        double worst_defect = 0.0;
        int worst_iters = 0;
        bool ok = true;
        try {
            for (int c = 0; c < nodes.cols(); ++c) {
                Eigen::VectorXd tangent_coords = Eigen::VectorXd::Zero(d_t);
                tangent_coords.head(ds) = nodes.col(c);
                LpResult lr;
                if (kind == ChartKind::center)
                    lr = lp_solve_center(model, path, nonlin, orbit, bf.frames, n_lo, n_hi, bf.d_c,
                                         bf.d_s, bf.d_u, tangent_coords, ups, opts.t0, r, opts);
                else
                    lr = lp_solve(kind, model, path, nonlin, orbit, bf.frames, n_lo, n_hi,
                                  tangent_coords, ups, opts.t0, r, opts);
                values.col(c) = lr.graph0;
                worst_defect = std::max(worst_defect, lr.final_delta);
                worst_iters = std::max(worst_iters, lr.iterations);
            }
        } catch (const numerical_refusal&) {
            ok = false;
        }
        if (ok) {
            ChartSetup setup;
            setup.tangent = bf.tangent0;
            setup.complement = bf.complement0;
            setup.horizon = M;
            setup.upsilon = ups;
            return finish_chart(kind, Z, setup, section, nodes, values, r, opts.t0, worst_defect,
                                worst_iters);
        }
        r *= 0.5;
        if (r < opts.min_radius)
            throw numerical_refusal("chart construction failed: radius shrank below " +
                                    std::to_string(opts.min_radius));
    }
}

} // namespace

ManifoldChart stable_chart(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StationaryPoint& Z,
                           const LyapunovSpectrum& spectrum, double upsilon, double radius,
                           const ChartOptions& opts) {
    return build_chart(ChartKind::stable, model, path, nonlin, Z, spectrum, upsilon, radius, opts);
}

ManifoldChart unstable_chart(const SpectralModel& model, const PathView& path,
                             const Nonlinearity& nonlin, const StationaryPoint& Z,
                             const LyapunovSpectrum& spectrum, double upsilon, double radius,
                             const ChartOptions& opts) {
    return build_chart(ChartKind::unstable, model, path, nonlin, Z, spectrum, upsilon, radius, opts);
}

ManifoldChart center_chart(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StationaryPoint& Z,
                           const LyapunovSpectrum& spectrum, double radius,
                           const ChartOptions& opts) {
    return build_chart(ChartKind::center, model, path, nonlin, Z, spectrum, 0.0, radius, opts);
}

std::vector<StateVector> unstable_history(const SpectralModel& model, const PathView& path,
                                          const Nonlinearity& nonlin, const StationaryPoint& Z,
                                          const LyapunovSpectrum& spectrum, double upsilon,
                                          const Eigen::VectorXd& section_coords, double radius,
                                          const ChartOptions& opts) {
    const OseledetsSplitting split = oseledets_splitting(spectrum, opts.center_threshold);
    if (split.U_basis.cols() == 0)
        throw numerical_refusal("unstable_history: no unstable direction");
    const double mu_u = split.mu_unstable_bottom;
    if (!(upsilon > 0.0 && upsilon < mu_u))
        throw config_error("unstable_history: upsilon must lie in (0, " + std::to_string(mu_u) + ")");
    const bool has_s = split.S_basis.cols() > 0;
    const bool has_c = split.C_basis.cols() > 0;
    double q = std::numeric_limits<double>::infinity();
    if (has_s) q = std::min(q, -split.mu_stable_top + 2.0 * upsilon);
    if (has_c) q = std::min(q, 2.0 * upsilon);
    int M = opts.lp_horizon;
    if (M <= 0)
        M = std::isfinite(q)
                ? std::clamp(static_cast<int>(std::ceil(kLogTailTarget / (q * opts.t0))), 6, 400)
                : 6;

    const int W = opts.split_window;
    StationaryOrbit orbit(model, path, nonlin, opts.t0, -M - W - 1, W + 1, opts);
    const BuiltFrames bf = build_frames(ChartKind::unstable, orbit.block_fn(), -M, 0, spectrum,
                                        split, opts.split_window, opts.t0);
    Eigen::VectorXd tangent_coords = Eigen::VectorXd::Zero(bf.tangent0.cols());
    tangent_coords.head(section_coords.size()) = section_coords;
    const LpResult lr = lp_solve(ChartKind::unstable, model, path, nonlin, orbit, bf.frames, -M, 0,
                                 tangent_coords, upsilon, opts.t0, radius, opts);
    return lr.states;
}

DecayFit decay_rate_check(const SpectralModel& model, const PathView& path,
                          const Nonlinearity& nonlin, const ManifoldChart& chart,
                          const Eigen::VectorXd& coords_a, const Eigen::VectorXd& coords_b,
                          int n_max, const ChartOptions& opts) {
    if (n_max <= 0) throw config_error("decay_rate_check: n_max must be positive");
    StateVector xa = chart.embed(coords_a);
    StateVector xb = chart.embed(coords_b);
    StationaryOrbit orbit(model, path, nonlin, chart.t0, 0, n_max, opts);

    DecayFit fit;
    fit.log_distances.resize(n_max + 1);
    fit.log_distances[0] = std::log((xa - xb).norm());
    int used = 1;
    for (int n = 0; n < n_max; ++n) {
        const PathView v = shift(path, static_cast<double>(n) * chart.t0);
        xa = cocycle_apply(model, v, nonlin, chart.t0, xa, opts.solver);
        xb = cocycle_apply(model, v, nonlin, chart.t0, xb, opts.solver);
        fit.log_distances[n + 1] = std::log((xa - xb).norm());
        ++used;
        if ((xa - orbit.Z(n + 1)).norm() > 10.0 * chart.radius) {
            fit.truncated = true;
            break;
        }
    }
    fit.n_used = used;
    // least-squares slope of log distance per block
    const int m = used;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += i;
        sy += fit.log_distances[i];
        sxx += static_cast<double>(i) * i;
        sxy += i * fit.log_distances[i];
    }
    fit.rate_per_block = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.log_distances.conservativeResize(m);
    return fit;
}

} // namespace rdslab
