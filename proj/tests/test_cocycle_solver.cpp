#include "doctest.h"

#include <cmath>

#include "rdslab/cocycle.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

namespace {
SpectralModel canonical(int n, double mu) {
    SpectralModelConfig cfg;
    cfg.n_modes = n;
    cfg.mu = mu;
    return SpectralModel::build(cfg);
}

Eigen::VectorXd unit_q() { return Eigen::VectorXd::Ones(2); }

StateVector random_state(int n, std::uint64_t seed) {
    GaussianRng rng(seed);
    StateVector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.gaussian();
    return v;
}
} // namespace

TEST_CASE("solve_random_pde: homogeneous case reduces to the semigroup") {
    const SpectralModel m = canonical(6, -0.25);
    const NoisePath zero = NoisePath::sample(1e-3, -1.0, 2.0, Eigen::VectorXd::Zero(2), 1);
    const PathView v(zero);
    const StateVector xi = random_state(6, 2);
    const Trajectory traj = solve_random_pde(m, v, Nonlinearity::zero(), xi, 1.5);
    const StateVector expect = m.semigroup_apply(1.5, xi);
    CHECK((traj.states.back() - expect).norm() <= 1e-12 * expect.norm());
}

TEST_CASE("cocycle_apply: t = 0 identity and linear agreement") {
    const SpectralModel m = canonical(6, 0.5);
    const NoisePath p = NoisePath::sample(1e-3, -2.0, 2.0, unit_q(), 33);
    const PathView v(p);
    const StateVector xi = random_state(6, 4);

    CHECK((cocycle_apply(m, v, Nonlinearity::zero(), 0.0, xi) - xi).norm() == 0.0);

    // g = 0: the nonlinear path equals the per-mode affine recursion exactly
    const StateVector a = cocycle_apply(m, v, Nonlinearity::zero(), 1.0, xi);
    const StateVector b = linear_cocycle_apply(m, v, 1.0, xi);
    CHECK((a - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
}

TEST_CASE("linear cocycle: identity is exact on-grid") {
    const SpectralModel m = canonical(6, 0.5);
    const NoisePath p = NoisePath::sample(1e-3, -2.0, 4.0, unit_q(), 44);
    const PathView v(p);
    GaussianRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const double t = 1e-3 * (1 + static_cast<long>(rng.uniform() * 1000));
        const double s = 1e-3 * (1 + static_cast<long>(rng.uniform() * 1000));
        const StateVector xi = random_state(6, 100 + trial);
        const StateVector direct = linear_cocycle_apply(m, v, t + s, xi);
        const StateVector composed =
            linear_cocycle_apply(m, shift(v, t), s, linear_cocycle_apply(m, v, t, xi));
        CHECK((direct - composed).norm() <= 1e-12 * std::max(1.0, direct.norm()));
    }
}

TEST_CASE("nonlinear cocycle: defect bounded by 10 dt and obeying the halved bound") {
    const SpectralModel m = canonical(8, 0.5);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    GaussianRng rng(6);
    for (double dt : {1e-3, 5e-4}) {
        const NoisePath p = NoisePath::sample(dt, -1.0, 3.0, unit_q(), 777);
        const PathView v(p);
        double worst = 0.0;
        for (int trial = 0; trial < 5; ++trial) {
            const double t = dt * (100 + static_cast<long>(rng.uniform() * 400));
            const double s = dt * (100 + static_cast<long>(rng.uniform() * 400));
            const StateVector xi = 0.5 * random_state(8, 50 + trial);
            worst = std::max(worst, cocycle_residual(m, v, g, t, s, xi));
        }
        CHECK(worst <= 10.0 * dt);
    }
}

TEST_CASE("a priori growth: bounded g, dissipative model stays near the OU orbit") {
    const SpectralModel m = canonical(6, -0.5);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.05);
    const NoisePath p = NoisePath::sample(1e-3, -30.0, 3.0, unit_q(), 888);
    const PathView v(p);
    const StateVector xi = random_state(6, 9);
    const StateVector end = cocycle_apply(m, v, g, 2.0, xi);
    // || phi~^t(xi) || <= e^{omega_A t} ||xi|| + C(omega): crude but certified
    // envelope: OU sup over the window plus the integrated bounded forcing
    double ou_sup = 0.0;
    for (double t = 0.0; t <= 2.0 + 1e-9; t += 0.1)
        ou_sup = std::max(ou_sup, ou_eval(m, v, t).norm());
    const double envelope = std::exp(m.omega_A() * 2.0) * xi.norm() +
                            (1.0 + ou_sup) + g.bound() / (-m.omega_A());
    CHECK(end.norm() <= envelope);
}

TEST_CASE("uniqueness proxy: Picard tolerance controls restart differences") {
    const SpectralModel m = canonical(6, 0.0);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.2);
    const NoisePath p = NoisePath::sample(1e-3, -1.0, 2.0, unit_q(), 999);
    const PathView v(p);
    const StateVector xi = random_state(6, 10);

    SolverOptions tight;
    tight.picard_tol = 1e-13;
    SolverOptions loose;
    loose.picard_tol = 1e-8;
    const StateVector a = cocycle_apply(m, v, g, 1.0, xi, tight);
    const StateVector b = cocycle_apply(m, v, g, 1.0, xi, loose);
    CHECK((a - b).norm() <= 1e-6);
}

TEST_CASE("step-size failure: contraction surrogate refusal") {
    const SpectralModel m = canonical(6, 0.0);
    // enormous Lipschitz constant makes c(dt) L >= 1 at dt = 0.05
    const Nonlinearity g = Nonlinearity::linear(200.0, 6);
    const NoisePath p = NoisePath::sample(0.05, -1.0, 2.0, unit_q(), 31);
    CHECK_THROWS_AS(solve_random_pde(m, PathView(p), g, StateVector::Zero(6), 1.0),
                    numerical_refusal);
}

TEST_CASE("self-convergence: dt refinement at first order or better") {
    const SpectralModel m = canonical(8, 0.0);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    const StateVector xi = random_state(8, 12);
    const double T = 1.0;

    StateVector sols[3];
    int idx = 0;
    for (double dt : {1e-3, 5e-4, 2.5e-4}) {
        const NoisePath p = NoisePath::sample(dt, -0.5, 1.5, Eigen::VectorXd::Zero(2), 55);
        sols[idx++] = cocycle_apply(m, PathView(p), g, T, xi);
    }
    const double e1 = (sols[0] - sols[2]).norm();
    const double e2 = (sols[1] - sols[2]).norm();
    CHECK(e2 < e1);
    const double order = std::log2(e1 / e2) - 1.0; // crude lower bound on the rate
    CHECK(order >= 0.9);
}

TEST_CASE("decomposition identity: X = V + Y matches Euler-Maruyama at O(sqrt(dt))") {
    const SpectralModel m = canonical(6, 0.0);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    const double T = 1.0;
    const StateVector xi = random_state(6, 14);

    auto run = [&](double dt) {
        const NoisePath p = NoisePath::sample(dt, -25.0, 1.5, unit_q(), 616);
        const PathView v(p);
        const StateVector decomposed = cocycle_apply(m, v, g, T, xi);

        // direct Euler-Maruyama on the truncated SPDE, same increments: the
        // unstable/neutral modes keep their noise here, so compare the
        // dissipative block only (Y projects the others out by design).
        StateVector x = xi;
        const long i0 = v.grid_index(0.0);
        const long n = v.grid_index(T) - i0;
        for (long i = 0; i < n; ++i) {
            const StateVector drift = m.drifts().cwiseProduct(x) + g(x);
            for (int k = 0; k < 6; ++k) {
                x[k] += dt * drift[k];
                if (m.drift(k) < 0.0)
                    x[k] += m.boundary_coupling()(k, 0) * v.increment(0, i0 + i) +
                            m.boundary_coupling()(k, 1) * v.increment(1, i0 + i);
            }
        }
        double err2 = 0.0;
        for (int k = 0; k < 6; ++k)
            if (m.drift(k) < 0.0) err2 += std::pow(decomposed[k] - x[k], 2);
        return std::sqrt(err2);
    };
    const double err_coarse = run(2e-3);
    const double err_fine = run(5e-4);
    CHECK(err_coarse <= std::sqrt(2e-3) * 5.0);
    CHECK(err_fine <= std::sqrt(5e-4) * 5.0);
    CHECK(err_fine < err_coarse);
}

TEST_CASE("cocycle_residual: trivial zero and linear exactness") {
    const SpectralModel m = canonical(6, 0.5);
    const NoisePath p = NoisePath::sample(1e-3, -1.0, 2.0, unit_q(), 21);
    const PathView v(p);
    const StateVector xi = random_state(6, 15);
    CHECK(cocycle_residual(m, v, Nonlinearity::zero(), 0.0, 0.7, xi) <= 1e-12);
    CHECK(cocycle_residual(m, v, Nonlinearity::zero(), 0.4, 0.7, xi) <= 1e-12);
}
