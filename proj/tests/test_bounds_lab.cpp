#include "doctest.h"

#include <cmath>

#include "rdslab/bounds.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/ornstein_uhlenbeck.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

namespace {
SpectralModel canonical(int n, double mu, double beta = 0.5) {
    SpectralModelConfig cfg;
    cfg.n_modes = n;
    cfg.mu = mu;
    cfg.beta = beta;
    return SpectralModel::build(cfg);
}

Eigen::VectorXd unit_q() { return Eigen::VectorXd::Ones(2); }

GronwallInstance instance_on_grid(double beta, double T, int nodes,
                                  const std::function<double(double)>& kappa,
                                  const std::function<double(double)>& g) {
    GronwallInstance inst;
    inst.beta = beta;
    inst.grid.resize(nodes);
    inst.kappa.resize(nodes);
    inst.g.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double t = T * i / (nodes - 1);
        inst.grid[i] = t;
        inst.kappa[i] = kappa(t);
        inst.g[i] = g(t);
    }
    return inst;
}
} // namespace

TEST_CASE("volterra oracle: kappa = 1, g = 1, beta = 1/2 hits the Mittag-Leffler values") {
    // u(t) = E_{1/2}(sqrt(pi t)): frozen high-precision values
    const GronwallInstance inst = instance_on_grid(
        0.5, 1.0, 101, [](double) { return 1.0; }, [](double) { return 1.0; });
    const Eigen::VectorXd u = volterra_solve(inst, 8);
    CHECK(u[25] == doctest::Approx(3.925770813084331).epsilon(2e-4));  // t = 0.25
    CHECK(u[50] == doctest::Approx(9.253822738685289).epsilon(2e-4));  // t = 0.5
    CHECK(u[100] == doctest::Approx(45.99932608938286).epsilon(2e-4)); // t = 1
}

TEST_CASE("powered_gronwall_bound matches the Volterra solution for constant kappa") {
    const GronwallInstance inst = instance_on_grid(
        0.5, 1.0, 51, [](double) { return 1.0; }, [](double) { return 1.0; });
    const Eigen::VectorXd bound = powered_gronwall_bound(inst);
    const Eigen::VectorXd u = volterra_solve(inst, 16);
    for (int i = 1; i < inst.grid.size(); ++i)
        CHECK(bound[i] == doctest::Approx(u[i]).epsilon(1e-6));
}

TEST_CASE("gronwall dominance: bound above the oracle on 100 random instances") {
    GaussianRng rng(0xD0);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double beta = 0.3 + 0.4 * rng.uniform();
        const double T = 0.5 + rng.uniform();
        const double k0 = 0.2 + 1.2 * rng.uniform();
        const double k1 = 1.5 * rng.uniform();          // kappa(t) = k0 + k1 t, nondecreasing
        const double g0 = 0.2 + rng.uniform();
        const double gw = 6.28 * rng.uniform();
        const double ga = 0.5 * rng.uniform();
        const GronwallInstance inst = instance_on_grid(
            beta, T, 41, [&](double t) { return k0 + k1 * t; },
            [&](double t) { return g0 + ga * std::sin(gw * t) + 0.2 * t; });
        if (inst.g.minCoeff() <= 0.0) continue; // keep g positive per the lemma hypothesis
        const Eigen::VectorXd u = volterra_solve(inst, 6);
        const Eigen::VectorXd bound = powered_gronwall_bound(inst);
        for (int i = 0; i < inst.grid.size(); ++i)
            CHECK(u[i] <= bound[i] * (1.0 + 1e-4) + 1e-12);
        ++checked;
    }
    CHECK(checked >= 90);
}

TEST_CASE("r_alpha: spot value, series dominance on the grid, hypothesis checks") {
    // R(1) at beta = 1/2 is 3 + 2e; the series value is the frozen partial sum
    CHECK(r_alpha(1.0, 0.5) == doctest::Approx(3.0 + 2.0 * std::exp(1.0)).epsilon(1e-12));
    const double series = gronwall_series(1.0, 0.5);
    CHECK(series == doctest::Approx(5.573169664310040).epsilon(1e-10));
    CHECK(series <= r_alpha(1.0, 0.5));

    for (double alpha : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0})
        for (double beta : {0.3, 0.5, 0.7})
            CHECK(gronwall_series(alpha, beta) <= r_alpha(alpha, beta));

    CHECK_THROWS_AS(r_alpha(0.5, 0.5), config_error); // alpha >= 1 required

    // beta -> 1^- divergence of the majorant (monotone sweep)
    double prev = 0.0;
    for (double beta : {0.5, 0.7, 0.85, 0.95}) {
        const double lr = log_r_alpha(1.0, beta);
        CHECK(lr > prev);
        prev = lr;
    }
}

TEST_CASE("series kernel: log-space evaluation survives huge arguments") {
    // kappa T^{1-beta} large enough to overflow naive term-by-term summation
    const double k = series_kernel(80.0, 0.5, 4.0);
    CHECK(std::isfinite(k));
    CHECK(k > 0.0);
    // monotone in kappa and tau
    CHECK(series_kernel(2.0, 0.5, 1.0) > series_kernel(1.0, 0.5, 1.0));
    CHECK(series_kernel(1.0, 0.5, 2.0) > series_kernel(1.0, 0.5, 1.5));
}

TEST_CASE("gronwall bound monotone in g and kappa") {
    const auto base = instance_on_grid(
        0.4, 1.0, 31, [](double) { return 0.8; }, [](double t) { return 1.0 + 0.3 * t; });
    auto bumped_g = base;
    bumped_g.g.array() += 0.2;
    auto bumped_k = base;
    bumped_k.kappa.array() += 0.3;
    const Eigen::VectorXd b0 = powered_gronwall_bound(base);
    const Eigen::VectorXd bg = powered_gronwall_bound(bumped_g);
    const Eigen::VectorXd bk = powered_gronwall_bound(bumped_k);
    for (int i = 0; i < base.grid.size(); ++i) {
        CHECK(bg[i] >= b0[i]);
        CHECK(bk[i] >= b0[i]);
    }
}

TEST_CASE("apriori bound: linear case reduces to the semigroup plus OU terms") {
    const SpectralModel m = canonical(6, -0.5);
    const NoisePath p = NoisePath::sample(1e-3, -30.0, 2.0, unit_q(), 21);
    const PathView v(p);
    GaussianRng rng(22);
    StateVector xi(6);
    for (int i = 0; i < 6; ++i) xi[i] = rng.gaussian();

    const AprioriResult r0 = apriori_bound_check(m, v, Nonlinearity::zero(), xi, 1.0);
    CHECK(r0.check.pass);
    CHECK(r0.kappa_t == doctest::Approx(std::exp(m.omega_A() * 1.0)));

    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.05);
    const AprioriResult r1 = apriori_bound_check(m, v, g, xi, 1.0);
    CHECK(r1.check.pass);
    CHECK(r1.check.rhs >= r1.check.lhs);
    CHECK(std::isfinite(r1.b));
}

TEST_CASE("derivative growth bound: equality at g = 0, domination for smooth g") {
    const SpectralModel m = canonical(6, -0.5);
    const NoisePath p = NoisePath::sample(1e-3, -30.0, 2.0, unit_q(), 23);
    const PathView v(p);
    const StateVector xi = StateVector::Zero(6);

    const DerivativeGrowthResult r0 =
        derivative_growth_bound(m, v, Nonlinearity::zero(), xi, 1.0);
    CHECK(r0.norm == doctest::Approx(std::exp(m.omega_A() * 1.0)).epsilon(1e-10));
    CHECK(r0.series_bound == doctest::Approx(r0.norm).epsilon(1e-12)); // equality case
    CHECK(r0.gamma == doctest::Approx(r0.norm).epsilon(1e-12));
    CHECK(r0.pass);

    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    const DerivativeGrowthResult r1 = derivative_growth_bound(m, v, g, xi, 1.0);
    CHECK(r1.pass);
    CHECK(r1.norm <= r1.series_bound * (1 + 1e-9));
    CHECK(r1.series_bound <= r1.gamma * (1 + 1e-9));

    // linear g: both sides in closed form, diagonal rates mu - lambda_k + c
    const double c = 0.1;
    const DerivativeGrowthResult r2 =
        derivative_growth_bound(m, v, Nonlinearity::linear(c, 6), xi, 1.0);
    CHECK(r2.norm == doctest::Approx(std::exp((m.omega_A() + c) * 1.0)).epsilon(1e-6));
    CHECK(r2.pass);
}

TEST_CASE("difference bound holds on sampled pairs") {
    const SpectralModel m = canonical(6, -0.5);
    const NoisePath p = NoisePath::sample(1e-3, -30.0, 2.0, unit_q(), 24);
    const PathView v(p);
    GaussianRng rng(25);
    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    for (int trial = 0; trial < 5; ++trial) {
        StateVector a(6), b(6);
        for (int i = 0; i < 6; ++i) {
            a[i] = rng.gaussian();
            b[i] = rng.gaussian();
        }
        const BoundCheck chk = difference_bound_check(m, v, g, a, b, 1.0);
        CHECK(chk.pass);
    }
}

TEST_CASE("holder modulus: zero separation, linear-constancy, tanh sweep") {
    const SpectralModel m = canonical(6, -0.5);
    const NoisePath p = NoisePath::sample(1e-3, -30.0, 2.0, unit_q(), 26);
    const PathView v(p);
    const StateVector xi = StateVector::Zero(6);

    const Nonlinearity g = Nonlinearity::scaled_tanh(m, 0.1);
    const HolderCheck same = holder_derivative_check(m, v, g, xi, xi, 1.0);
    CHECK(same.ratio == 0.0);
    CHECK(same.pass);

    // derivative of a linear map is constant in xi: numerator identically zero
    const Nonlinearity lin = Nonlinearity::linear(0.3, 6);
    StateVector far = xi;
    far[0] += 0.5;
    const HolderCheck linchk = holder_derivative_check(m, v, lin, xi, far, 1.0);
    CHECK(linchk.ratio <= 1e-12);

    Eigen::VectorXd seps(4);
    seps << 1e-1, 1e-2, 1e-3, 1e-4;
    StateVector dir = StateVector::Zero(6);
    dir[1] = 1.0;
    const HolderSweep sweep = holder_derivative_sweep(m, v, g, xi, dir, 1.0, seps);
    CHECK(sweep.pass);
    CHECK(sweep.slope >= -0.15);

    const Nonlinearity table = Nonlinearity::custom_table(
        m, Eigen::VectorXd::LinSpaced(5, -2.0, 2.0), Eigen::VectorXd::LinSpaced(5, -0.2, 0.2));
    CHECK_THROWS_AS(holder_derivative_check(m, v, table, xi, far, 1.0), numerical_refusal);
}

TEST_CASE("kernel integrability: finite classification, majorant, divergence trend") {
    const SpectralModel m = canonical(32, 0.0, 0.5);

    const KernelIntegrability fin = kernel_integrability_check(m, 1.0, 1.0); // q* beta = 0.5
    CHECK(fin.finite);
    CHECK(std::isfinite(fin.integral));
    CHECK(fin.integral <= fin.majorant);
    const int L = fin.refinement_values.size();
    CHECK(std::abs(fin.refinement_values[L - 1] - fin.refinement_values[L - 2]) <=
          1e-6 * fin.refinement_values[L - 1]);

    const KernelIntegrability div = kernel_integrability_check(m, 2.4, 1.0); // q* beta = 1.2
    CHECK_FALSE(div.finite);
    // divergence trend: refinements grow without stabilizing
    for (int i = 1; i < div.refinement_values.size(); ++i)
        CHECK(div.refinement_values[i] > div.refinement_values[i - 1] * 1.2);

    const KernelIntegrability zero = kernel_integrability_check(m, 1.0, 0.0);
    CHECK(zero.integral == 0.0);
}

TEST_CASE("trace-class diagnostic: n = 1 converges, n = 2 diverges") {
    Eigen::VectorXi counts(4);
    counts << 250, 500, 1000, 2000;
    const Eigen::VectorXd s1 = trace_mode_sums(synthetic_spectrum(2000, 1.0, 1), 1.0, counts);
    const Eigen::VectorXd s2 = trace_mode_sums(synthetic_spectrum(2000, 1.0, 2), 1.0, counts);

    // n = 1: increments vanish (frozen limit ~ 0.7545)
    CHECK(s1[3] - s1[2] < 1e-3);
    CHECK(s1[3] == doctest::Approx(0.7545).epsilon(1e-3));
    // n = 2: increments stay at log(2)/2 per doubling
    CHECK(s2[2] - s2[1] == doctest::Approx(0.5 * std::log(2.0)).epsilon(0.01));
    CHECK(s2[3] - s2[2] == doctest::Approx(0.5 * std::log(2.0)).epsilon(0.01));
}
