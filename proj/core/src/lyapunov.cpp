#include "rdslab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

namespace {

// QR with the R diagonal forced positive (sign-fixed for reproducibility).
void qr_positive(const Eigen::MatrixXd& A, Eigen::MatrixXd& Q, Eigen::VectorXd& log_diag) {
    const int n = static_cast<int>(A.rows());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    log_diag.resize(n);
    for (int k = 0; k < n; ++k) {
        const double d = R(k, k);
        if (d < 0.0) Q.col(k) *= -1.0;
        const double ad = std::abs(d);
        if (ad < 1e-300)
            throw numerical_refusal("lyapunov: degenerate R diagonal (mode underflow)");
        log_diag[k] = std::log(ad);
    }
}

std::vector<std::vector<int>> group_indices(const Eigen::VectorXd& sorted_desc, double gap_tol) {
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < sorted_desc.size(); ++i) {
        if (groups.empty() || sorted_desc[groups.back().back()] - sorted_desc[i] > gap_tol)
            groups.push_back({});
        groups.back().push_back(i);
    }
    return groups;
}

} // namespace

BlockFn make_block_fn(const SpectralModel& model, const PathView& path,
                      const Nonlinearity& nonlin, const OrbitFn& orbit, double t0,
                      const SolverOptions& opts) {
    return [&model, path, &nonlin, orbit, t0, opts](long n) -> Eigen::MatrixXd {
        const PathView v = shift(path, static_cast<double>(n) * t0);
        return linearize(model, v, nonlin, orbit(n), t0, opts).entries;
    };
}

double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() == 0 || b.cols() == 0) return 0.0;
    const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() *
                               Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b).householderQ() *
                               Eigen::MatrixXd::Identity(b.rows(), b.cols());
    const Eigen::VectorXd s = (qa.transpose() * qb).jacobiSvd().singularValues();
    const double c = std::clamp(s.minCoeff(), -1.0, 1.0);
    return std::acos(c);
}

NodeSplitting window_splitting(const BlockFn& block, long node, int window, double t0,
                               const Eigen::VectorXd& exponents,
                               const Eigen::VectorXi& multiplicities,
                               const std::vector<int>& center_groups_hint) {
    if (window < 1) throw config_error("window_splitting: window must be >= 1");
    const Eigen::MatrixXd B0 = block(node);
    const int n = static_cast<int>(B0.rows());

    // forward product over [node, node + window]
    Eigen::MatrixXd Pf = B0;
    for (int j = 1; j < window; ++j) Pf = block(node + j) * Pf;
    // backward product over [node - window, node]
    Eigen::MatrixXd Pb = block(node - 1);
    for (int j = 2; j <= window; ++j) Pb = Pb * block(node - j);

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd_f(Pf, Eigen::ComputeFullV);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd_b(Pb, Eigen::ComputeFullU);

    // Partition the N singular directions by cumulative multiplicities of the
    // distinct exponents (both SVDs order singular values decreasingly, which
    // matches the decreasing exponents).
    NodeSplitting out;
    std::vector<std::pair<int, int>> spans; // (offset, size) per distinct exponent
    int off = 0;
    for (int gidx = 0; gidx < exponents.size(); ++gidx) {
        spans.push_back({off, multiplicities[gidx]});
        off += multiplicities[gidx];
    }
    if (off != n)
        throw numerical_refusal("window_splitting: multiplicities do not fill the space");

    std::vector<Eigen::MatrixXd> stable_parts, unstable_parts, center_parts;
    for (int gidx = 0; gidx < exponents.size(); ++gidx) {
        const auto [o, sz] = spans[gidx];
        const bool is_center =
            std::find(center_groups_hint.begin(), center_groups_hint.end(), gidx) !=
            center_groups_hint.end();
        if (!is_center && exponents[gidx] < 0.0) {
            stable_parts.push_back(svd_f.matrixV().middleCols(o, sz));
        } else if (!is_center && exponents[gidx] > 0.0) {
            unstable_parts.push_back(svd_b.matrixU().middleCols(o, sz));
        } else {
            center_parts.push_back(svd_b.matrixU().middleCols(o, sz));
        }
    }
    auto hcat = [n](const std::vector<Eigen::MatrixXd>& parts) {
        int cols = 0;
        for (const auto& p : parts) cols += static_cast<int>(p.cols());
        Eigen::MatrixXd m(n, cols);
        int at = 0;
        for (const auto& p : parts) {
            m.middleCols(at, p.cols()) = p;
            at += static_cast<int>(p.cols());
        }
        return m;
    };
    out.S = hcat(stable_parts);
    out.U = hcat(unstable_parts);
    out.C = hcat(center_parts);
    return out;
}

LyapunovSpectrum lyapunov_spectrum(const SpectralModel& model, const PathView& path,
                                   const Nonlinearity& nonlin, const OrbitFn& orbit,
                                   const LyapunovOptions& opts) {
    const int n = model.n_modes();
    if (opts.n_blocks < 2) throw config_error("lyapunov_spectrum: need at least 2 blocks");
    const double t0 = opts.t0;
    if (!(t0 > 0.0)) throw config_error("lyapunov_spectrum: t0 must be > 0");

    // reject a non-stationary base orbit (sampled nodes)
    if (!nonlin.is_zero() && !nonlin.constant_jacobian()) {
        for (long probe : {static_cast<long>(0), opts.n_blocks / 2}) {
            const PathView v = shift(path, static_cast<double>(probe) * t0);
            const StateVector advanced =
                cocycle_apply(model, v, nonlin, t0, orbit(probe), opts.solver);
            const double defect = (advanced - orbit(probe + 1)).norm();
            if (defect > opts.stationarity_tol)
                throw numerical_refusal(
                    "lyapunov_spectrum: base orbit is not stationary (defect " +
                    std::to_string(defect) + ")");
        }
    }

    const BlockFn block = make_block_fn(model, path, nonlin, orbit, t0, opts.solver);

    LyapunovSpectrum spec;
    spec.t0 = t0;
    spec.n_blocks = opts.n_blocks;
    spec.convergence.resize(opts.n_blocks, n);

    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd history(opts.n_blocks, n); // per-block log diag R
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (long j = 0; j < opts.n_blocks; ++j) {
        Eigen::MatrixXd Z = block(j) * Q;
        Eigen::VectorXd logd;
        qr_positive(Z, Q, logd);
        history.row(j) = logd.transpose();
        acc += logd;
        spec.convergence.row(j) = (acc / (static_cast<double>(j + 1) * t0)).transpose();
    }
    spec.raw_exponents = acc / (static_cast<double>(opts.n_blocks) * t0);

    // distinct exponents by gap grouping
    Eigen::VectorXd sorted = spec.raw_exponents;
    std::sort(sorted.data(), sorted.data() + n, std::greater<double>());
    const auto groups = group_indices(sorted, opts.gap_tol);
    spec.exponents.resize(groups.size());
    spec.multiplicities.resize(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        double m = 0.0;
        for (int idx : groups[gi]) m += sorted[idx];
        spec.exponents[gi] = m / groups[gi].size();
        spec.multiplicities[gi] = static_cast<int>(groups[gi].size());
    }

    // moving-block bootstrap CIs on the per-block samples
    {
        const long L = std::max<long>(1, static_cast<long>(std::sqrt((double)opts.n_blocks)));
        GaussianRng rng(opts.bootstrap_seed);
        Eigen::MatrixXd means(opts.bootstrap_resamples, n);
        for (int b = 0; b < opts.bootstrap_resamples; ++b) {
            Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
            long got = 0;
            while (got < opts.n_blocks) {
                const long start =
                    static_cast<long>(rng.uniform() * static_cast<double>(opts.n_blocks - L + 1));
                const long take = std::min(L, opts.n_blocks - got);
                for (long j = 0; j < take; ++j) s += history.row(start + j).transpose();
                got += take;
            }
            means.row(b) = (s / (static_cast<double>(opts.n_blocks) * t0)).transpose();
        }
        Eigen::VectorXd half(n);
        for (int k = 0; k < n; ++k) {
            Eigen::VectorXd col = means.col(k);
            std::sort(col.data(), col.data() + col.size());
            const int lo = static_cast<int>(0.025 * (col.size() - 1));
            const int hi = static_cast<int>(0.975 * (col.size() - 1));
            half[k] = 0.5 * (col[hi] - col[lo]);
        }
        // per distinct exponent: worst CI of its members (raw order follows sorted order)
        spec.ci.resize(groups.size());
        // map sorted positions back to raw columns by rank
        std::vector<int> rank(n);
        std::iota(rank.begin(), rank.end(), 0);
        std::sort(rank.begin(), rank.end(), [&](int a, int b) {
            return spec.raw_exponents[a] > spec.raw_exponents[b];
        });
        int pos = 0;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            double w = 0.0;
            for (std::size_t j = 0; j < groups[gi].size(); ++j, ++pos) w = std::max(w, half[rank[pos]]);
            spec.ci[gi] = w;
        }
    }

    // bases at time 0 from window products
    {
        int W = opts.window > 0 ? opts.window
                                : std::max(4, static_cast<int>(0.2 * opts.n_blocks));
        W = std::min<long>(W, opts.n_blocks);
        // the backward window needs path history; clamp to what is available
        const double back_avail = -path.t_minus();
        const int Wb = std::max(1, std::min<int>(W, static_cast<int>(back_avail / t0)));
        const int Wf = W;
        const bool need_forward = (spec.exponents.array() < 0.0).any();
        const bool need_backward = (spec.exponents.array() >= 0.0).any();
        // forward product on [0, Wf] for the contracting groups, backward on
        // [-Wb, 0] for the expanding/neutral ones
        Eigen::JacobiSVD<Eigen::MatrixXd> svd_f, svd_b;
        if (need_forward) {
            Eigen::MatrixXd Pf = block(0);
            for (int j = 1; j < Wf; ++j) Pf = block(j) * Pf;
            svd_f.compute(Pf, Eigen::ComputeFullV);
        }
        if (need_backward) {
            if (back_avail < t0)
                throw config_error(
                    "lyapunov_spectrum: nonnegative exponents need path history before time 0 "
                    "for the backward window products");
            Eigen::MatrixXd Pb = block(-1);
            for (int j = 2; j <= Wb; ++j) Pb = Pb * block(-j);
            svd_b.compute(Pb, Eigen::ComputeFullU);
        }
        int off = 0;
        for (int gi = 0; gi < spec.exponents.size(); ++gi) {
            const int sz = spec.multiplicities[gi];
            if (spec.exponents[gi] < 0.0)
                spec.bases.push_back(svd_f.matrixV().middleCols(off, sz));
            else
                spec.bases.push_back(svd_b.matrixU().middleCols(off, sz));
            off += sz;
        }
    }
    return spec;
}

OseledetsSplitting oseledets_splitting(const LyapunovSpectrum& spectrum, double threshold) {
    OseledetsSplitting out;
    const int n_groups = static_cast<int>(spectrum.exponents.size());
    if (n_groups == 0) throw config_error("oseledets_splitting: empty spectrum");
    int n = 0;
    for (int gi = 0; gi < n_groups; ++gi) n += spectrum.multiplicities[gi];

    double mu_stable_top = -std::numeric_limits<double>::infinity();
    double mu_unstable_bottom = std::numeric_limits<double>::infinity();
    for (int gi = 0; gi < n_groups; ++gi) {
        const double mu = spectrum.exponents[gi];
        if (std::abs(mu) < threshold) {
            out.center_groups.push_back(gi);
            continue;
        }
        if (std::abs(mu) < 2.0 * spectrum.ci[gi])
            throw numerical_refusal(
                "oseledets_splitting: exponent " + std::to_string(mu) +
                " is classification-ambiguous (within 2x CI of zero but above the center threshold)");
        if (mu < 0.0) {
            out.stable_groups.push_back(gi);
            mu_stable_top = std::max(mu_stable_top, mu);
        } else {
            out.unstable_groups.push_back(gi);
            mu_unstable_bottom = std::min(mu_unstable_bottom, mu);
        }
    }
    out.mu_stable_top = mu_stable_top;
    out.mu_unstable_bottom = mu_unstable_bottom;

    auto cat = [&](const std::vector<int>& gids) {
        int cols = 0;
        for (int gi : gids) cols += static_cast<int>(spectrum.bases[gi].cols());
        Eigen::MatrixXd m(n, cols);
        int at = 0;
        for (int gi : gids) {
            m.middleCols(at, spectrum.bases[gi].cols()) = spectrum.bases[gi];
            at += static_cast<int>(spectrum.bases[gi].cols());
        }
        return m;
    };
    out.S_basis = cat(out.stable_groups);
    out.U_basis = cat(out.unstable_groups);
    out.C_basis = cat(out.center_groups);

    // projections along the splitting: columns [S C U] form a basis of H0
    Eigen::MatrixXd M(n, n);
    const int sc = static_cast<int>(out.S_basis.cols());
    const int cc = static_cast<int>(out.C_basis.cols());
    const int uc = static_cast<int>(out.U_basis.cols());
    if (sc + cc + uc != n)
        throw numerical_refusal("oseledets_splitting: bases do not span the truncated space");
    M << out.S_basis, out.C_basis, out.U_basis;
    const Eigen::MatrixXd Minv = M.partialPivLu().inverse();
    auto proj = [&](int offset, int count) {
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < count; ++i) D(offset + i, offset + i) = 1.0;
        return (M * D * Minv).eval();
    };
    out.P_S = proj(0, sc);
    out.P_C = proj(sc, cc);
    out.P_U = proj(sc + cc, uc);
    return out;
}

IntegrabilityReport integrability_estimate(
    const SpectralModel& model, const std::vector<NoisePath>& ensemble,
    const Nonlinearity& nonlin,
    const std::function<StateVector(const PathView&)>& base_point, double t0, int norm_grid,
    const SolverOptions& opts) {
    if (ensemble.size() < 100)
        throw config_error("integrability_estimate: ensemble too small (need >= 100 paths)");
    if (!(t0 > 0.0)) throw config_error("integrability_estimate: t0 must be > 0");

    IntegrabilityReport rep;
    rep.n_paths = static_cast<int>(ensemble.size());
    rep.samples.resize(rep.n_paths);
    for (int i = 0; i < rep.n_paths; ++i) {
        const PathView v(ensemble[i]);
        const StateVector z = base_point(v);
        double worst = 0.0;
        for (int j = 1; j <= norm_grid; ++j) {
            const double t = t0 * j / norm_grid;
            // forward factor psi~^t_omega
            const double nf = linearize(model, v, nonlin, z, t, opts)
                                  .entries.jacobiSvd()
                                  .singularValues()[0];
            worst = std::max(worst, std::log(std::max(1.0, nf)));
            // backward factor psi~^{t0-t}_{theta_t omega}
            if (t < t0) {
                const PathView vs = shift(v, t);
                const StateVector zs =
                    nonlin.constant_jacobian() ? z : cocycle_apply(model, v, nonlin, t, z, opts);
                const double nb = linearize(model, vs, nonlin, zs, t0 - t, opts)
                                      .entries.jacobiSvd()
                                      .singularValues()[0];
                worst = std::max(worst, std::log(std::max(1.0, nb)));
            }
        }
        rep.samples[i] = worst;
    }

    Eigen::VectorXd sorted = rep.samples;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    rep.mean = rep.samples.mean();
    auto quant = [&](double q) {
        return sorted[static_cast<int>(q * (sorted.size() - 1))];
    };
    rep.q50 = quant(0.5);
    rep.q90 = quant(0.9);
    rep.q99 = quant(0.99);

    GaussianRng rng(0xC1);
    const int B = 400;
    Eigen::VectorXd boot(B);
    for (int b = 0; b < B; ++b) {
        double s = 0.0;
        for (int i = 0; i < rep.n_paths; ++i)
            s += rep.samples[static_cast<int>(rng.uniform() * rep.n_paths)];
        boot[b] = s / rep.n_paths;
    }
    std::sort(boot.data(), boot.data() + B);
    rep.ci_halfwidth = 0.5 * (boot[static_cast<int>(0.975 * (B - 1))] -
                              boot[static_cast<int>(0.025 * (B - 1))]);

    const double m = rep.mean;
    double m2 = 0.0, m4 = 0.0;
    for (int i = 0; i < rep.n_paths; ++i) {
        const double d = rep.samples[i] - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= rep.n_paths;
    m4 /= rep.n_paths;
    rep.excess_kurtosis = (m2 > 0.0) ? m4 / (m2 * m2) - 3.0 : 0.0;
    rep.heavy_tail_alarm = rep.excess_kurtosis > 10.0;
    return rep;
}

} // namespace rdslab
