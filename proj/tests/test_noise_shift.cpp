#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "rdslab/errors.hpp"
#include "rdslab/noise_path.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/spectral_model.hpp"

using namespace rdslab;

namespace {
SpectralModel canonical(int n, double mu) {
    SpectralModelConfig cfg;
    cfg.n_modes = n;
    cfg.mu = mu;
    return SpectralModel::build(cfg);
}

Eigen::VectorXd unit_q() { return Eigen::VectorXd::Ones(2); }
} // namespace

TEST_CASE("sample_path: determinism, zero intensity, parameter validation") {
    const NoisePath a = NoisePath::sample(1e-3, -1.0, 1.0, unit_q(), 42);
    const NoisePath b = NoisePath::sample(1e-3, -1.0, 1.0, unit_q(), 42);
    CHECK(a.increments() == b.increments()); // bit-identical

    const NoisePath c = NoisePath::sample(1e-3, -1.0, 1.0, Eigen::VectorXd::Zero(2), 42);
    CHECK(c.increments().cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(NoisePath::sample(0.0, -1.0, 1.0, unit_q(), 1), config_error);
    CHECK_THROWS_AS(NoisePath::sample(1e-3, 1.0, 2.0, unit_q(), 1), config_error);
    Eigen::VectorXd bad_q(2);
    bad_q << 1.0, -0.5;
    CHECK_THROWS_AS(NoisePath::sample(1e-3, -1.0, 1.0, bad_q, 1), config_error);
}

TEST_CASE("sample_path: per-channel variance matches q dt within 1%") {
    const double dt = 1e-3;
    Eigen::VectorXd q(2);
    q << 0.8, 1.7;
    const NoisePath p = NoisePath::sample(dt, -500.0, 500.0, q, 2024); // 1e6 increments
    for (int ch = 0; ch < 2; ++ch) {
        const auto row = p.increments().row(ch);
        const double mean = row.mean();
        const double var = (row.array() - mean).square().sum() / (row.size() - 1);
        CHECK(var == doctest::Approx(q[ch] * dt).epsilon(0.01));
    }
}

TEST_CASE("shift: identity, group property, horizon and grid validation") {
    const NoisePath p = NoisePath::sample(0.25, -4.0, 4.0, unit_q(), 5);
    const PathView v(p);

    const PathView s0 = shift(v, 0.0);
    CHECK(s0.shift_time() == 0.0);
    CHECK(s0.increment(0, 3) == v.increment(0, 3));

    const PathView s1 = shift(shift(v, 0.5), 0.25);
    const PathView s2 = shift(v, 0.75);
    CHECK(s1.shift_time() == s2.shift_time());
    for (long i = 0; i < 8; ++i)
        CHECK(s1.increment(1, s1.grid_index(0.0) + i) == s2.increment(1, s2.grid_index(0.0) + i));

    CHECK_THROWS_AS(shift(v, 0.1), config_error);   // off-grid
    CHECK_THROWS_AS(shift(v, 100.0), config_error); // out of horizon
}

TEST_CASE("Wiener shift identity W_t(theta_s omega) = W_{t+s} - W_s, exact") {
    const NoisePath p = NoisePath::sample(0.125, -8.0, 8.0, unit_q(), 99);
    const PathView v(p);
    GaussianRng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const double s = 0.125 * static_cast<long>(rng.uniform() * 32) - 2.0;
        const double t = 0.125 * static_cast<long>(rng.uniform() * 24);
        const PathView vs = shift(v, s);
        const Eigen::VectorXd lhs = vs.wiener(t);
        const Eigen::VectorXd rhs = v.wiener(t + s) - v.wiener(s);
        CHECK((lhs - rhs).norm() == 0.0); // identical sums of identical terms
    }
}

TEST_CASE("ou_eval: linearity in the path and exact on-grid stationarity") {
    const SpectralModel m = canonical(6, -0.5);
    const NoisePath zero = NoisePath::sample(1e-2, -10.0, 10.0, Eigen::VectorXd::Zero(2), 7);
    CHECK(ou_eval(m, PathView(zero), 1.0).norm() == 0.0);

    const NoisePath p = NoisePath::sample(1e-2, -10.0, 10.0, unit_q(), 7);
    const PathView v(p);
    GaussianRng rng(17);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double t = 1e-2 * static_cast<long>(rng.uniform() * 300);
        const double s = 1e-2 * static_cast<long>(rng.uniform() * 300);
        worst = std::max(worst, stationarity_residual(m, v, s, t));
    }
    CHECK(worst == 0.0); // bitwise identity by construction

    CHECK_THROWS_AS(ou_eval(m, v, 100.0), config_error);
}

TEST_CASE("ou_eval: non-dissipative modes are projected out of Y") {
    const SpectralModel m = canonical(4, 0.5); // mode 0 has drift +0.5
    const NoisePath p = NoisePath::sample(1e-2, -5.0, 5.0, unit_q(), 13);
    const StateVector y = ou_eval(m, PathView(p), 0.0);
    CHECK(y[0] == 0.0);
    CHECK(y.tail(3).norm() > 0.0);
}

TEST_CASE("ou stationary variance: Monte Carlo vs the discrete closed form") {
    const double dt = 2.5e-3;
    const SpectralModel m = canonical(4, 0.0); // drifts 0, -1, -4, -9
    const NoisePath p = NoisePath::sample(dt, -2.0, 2500.0 + dt, unit_q(), 31337);
    const PathView v(p);

    // evolve the recursion once over 1e6 steps, recording mode 2 (a = -4)
    const int k = 2;
    const double rho = std::exp(m.drift(k) * dt);
    const long i0 = v.grid_index(0.0);
    const long n = 1000000;
    double y = 0.0, sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
        y = rho * y + m.boundary_coupling()(k, 0) * v.increment(0, i0 + i) +
            m.boundary_coupling()(k, 1) * v.increment(1, i0 + i);
        sum += y;
        sumsq += y * y;
    }
    const double var = sumsq / n - (sum / n) * (sum / n);
    const double disc = ou_discrete_stationary_variance(m, p.q(), dt, k);
    const double cont = ou_continuum_stationary_variance(m, p.q(), k);
    CHECK(var == doctest::Approx(disc).epsilon(0.03));
    CHECK(disc == doctest::Approx(cont).epsilon(0.03)); // |a| dt = 0.01
    CHECK(var == doctest::Approx(cont).epsilon(0.03));
}

TEST_CASE("measure preservation proxy: shifted increment moments match unshifted") {
    const NoisePath p = NoisePath::sample(1e-3, -60.0, 60.0, unit_q(), 404);
    const PathView v(p);
    const PathView vs = shift(v, 7.0);
    const long n = 100000;
    const long i0 = v.grid_index(0.0);
    const long j0 = vs.grid_index(0.0);
    double m1 = 0, m2 = 0, s1 = 0, s2 = 0;
    for (long i = 0; i < n; ++i) {
        const double a = v.increment(0, i0 + i);
        const double b = vs.increment(0, j0 + i);
        m1 += a; m2 += b; s1 += a * a; s2 += b * b;
    }
    m1 /= n; m2 /= n; s1 = s1 / n - m1 * m1; s2 = s2 / n - m2 * m2;
    // two-sample z-test on the mean at the 1% level: |dm| <= 2.58 sqrt(2 var / n)
    CHECK(std::abs(m1 - m2) <= 2.58 * std::sqrt((s1 + s2) / n));
    // variance ratio near 1 (F-statistic well inside the 1% band for n = 1e5)
    CHECK(s1 / s2 == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("Y solves the linear problem: drift residual reproduces the increments") {
    const double dt = 1e-3;
    const SpectralModel m = canonical(4, -0.5);
    const NoisePath p = NoisePath::sample(dt, -20.0, 3.0, unit_q(), 2718);
    const PathView v(p);
    const long i0 = v.grid_index(0.0);
    const long n = 2000;

    // residual_i = (y_{i+1} - y_i) - dt a y_i - n . dW_i  per mode, RMS over steps
    const auto mask = dissipative_mask(m);
    double rms = 0.0, scale = 0.0;
    StateVector y = ou_eval(m, v, 0.0);
    for (long i = 0; i < n; ++i) {
        for (int k = 0; k < 4; ++k) {
            if (!mask[k]) continue;
            const double inc = m.boundary_coupling()(k, 0) * v.increment(0, i0 + i) +
                               m.boundary_coupling()(k, 1) * v.increment(1, i0 + i);
            const double y_next = std::exp(m.drift(k) * dt) * y[k] + inc;
            const double resid = (y_next - y[k]) - dt * m.drift(k) * y[k] - inc;
            rms += resid * resid;
            scale += inc * inc;
            y[k] = y_next;
        }
    }
    rms = std::sqrt(rms / (n * 4));
    scale = std::sqrt(scale / (n * 4));
    CHECK(rms <= std::sqrt(dt) * scale); // far below the O(dt^{1/2}) envelope
}

TEST_CASE("ou truncation windows: mismatch bounded by the slowest retained decay") {
    const SpectralModel m = canonical(4, -1.0); // slowest retained drift = -1
    const double dt = 1e-2;
    const NoisePath p = NoisePath::sample(dt, -30.0, 2.0, unit_q(), 5150);
    const PathView v(p);
    const double t = 1.0;
    const StateVector full = ou_eval(m, v, t);
    const double L1 = 8.0;
    const StateVector windowed = ou_eval(m, v, t, L1);
    // difference = e^{a L1} * (state accumulated before the window), bounded via
    // the decay factor of the slowest mode times the old-state norm
    const StateVector old_state = ou_eval(m, v, t - L1);
    const double bound = std::exp(-1.0 * L1) * old_state.norm() * 1.000001;
    CHECK((full - windowed).norm() <= bound);
    CHECK(ou_truncation_factor(m, v, t, L1) == doctest::Approx(std::exp(-1.0 * L1)));
}

TEST_CASE("binary persistence: save/load round trip is bit-exact") {
    const NoisePath p = NoisePath::sample(1e-2, -2.0, 3.0, unit_q(), 90210);
    const std::string file = (std::filesystem::temp_directory_path() / "rdslab_path_rt.bin").string();
    p.save(file);
    const NoisePath q = NoisePath::load(file);
    CHECK(q.dt() == p.dt());
    CHECK(q.t_minus() == p.t_minus());
    CHECK(q.t_plus() == p.t_plus());
    CHECK(q.seed() == p.seed());
    CHECK(q.increments() == p.increments());
    std::remove(file.c_str());
    CHECK_THROWS_AS(NoisePath::load("/nonexistent/dir/xx.bin"), io_error);
}
