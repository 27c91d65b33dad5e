#include "doctest.h"

#include <cmath>

#include "rdslab/errors.hpp"
#include "rdslab/neumann_fd.hpp"
#include "rdslab/quadrature.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/spectral_model.hpp"

using namespace rdslab;

namespace {
constexpr double kPi = 3.14159265358979323846264338328;

SpectralModel canonical(int n, double mu, double beta = 0.5, double q = 1.5,
                        double reg = 0.0) {
    SpectralModelConfig cfg;
    cfg.n_modes = n;
    cfg.mu = mu;
    cfg.beta = beta;
    cfg.q_star = q;
    cfg.reg_shift = reg;
    return SpectralModel::build(cfg);
}

// closed-form integrated semigroup, the independent route for the nu-formula
double isg_closed(double a, double t) {
    if (std::abs(a * t) < 1e-10) return t * (1.0 + 0.5 * a * t);
    return std::expm1(a * t) / a;
}
} // namespace

TEST_CASE("build_model: canonical Neumann spectrum and window checks") {
    const SpectralModel m = canonical(8, 0.0);
    for (int k = 0; k < 8; ++k) CHECK(m.eigenvalues()[k] == doctest::Approx(k * k));
    CHECK(m.omega_A() == doctest::Approx(0.0));
    CHECK(m.p_star() == doctest::Approx(4.0 / 3.0));

    const SpectralModel m2 = canonical(4, 0.5, 0.3, 2.0);
    CHECK(m2.omega_A() == doctest::Approx(0.5));
    CHECK(m2.drift(0) > 0.0); // one unstable mode
    for (int k = 1; k < 4; ++k) CHECK(m2.drift(k) < 0.0);

    CHECK_THROWS_AS(canonical(8, 0.0, 0.2), config_error);  // beta below 1 - 1/p* = 1/4
    CHECK_THROWS_AS(canonical(8, 0.0, 0.99), config_error); // q* beta >= 1
    CHECK_THROWS_AS(canonical(1, 0.0), config_error);
    CHECK_THROWS_AS(canonical(8, 0.0, 0.5, 4.5), config_error); // q* outside [1, 4)
}

TEST_CASE("boundary coupling: FD calibration reproduces the cosine traces") {
    const SpectralModel m = canonical(16, 0.0);
    const double c0 = 1.0 / std::sqrt(kPi);
    const double ck = std::sqrt(2.0 / kPi);
    CHECK(m.boundary_coupling()(0, 0) == doctest::Approx(c0).epsilon(2e-3));
    for (int k = 1; k < 16; ++k) {
        CHECK(m.boundary_coupling()(k, 0) == doctest::Approx(ck).epsilon(2e-2));
        CHECK(m.boundary_coupling()(k, 1) ==
              doctest::Approx(ck * ((k % 2 == 0) ? 1.0 : -1.0)).epsilon(2e-2));
    }
}

TEST_CASE("semigroup_apply: identity at 0, decay bounds, FD cross-check") {
    const SpectralModel m = canonical(8, 0.0);
    StateVector v = StateVector::Random(8);
    CHECK((m.semigroup_apply(0.0, v) - v).norm() == doctest::Approx(0.0));
    CHECK_THROWS_AS(m.semigroup_apply(-0.1, v), config_error);

    // operator norm equals exp(omega_A t); dissipative model decays like e^{-(lambda_0 - mu) t}
    const SpectralModel md = canonical(8, -0.5);
    StateVector e0 = StateVector::Zero(8);
    e0[0] = 1.0;
    CHECK(md.semigroup_apply(2.0, e0).norm() == doctest::Approx(std::exp(-0.5 * 2.0)));

    // the positive-spectrum convention: reg_shift = 2 mu gives || T_{0,mu}(t) || <= e^{-mu t}
    const double mu = 0.4;
    const SpectralModel ms = canonical(8, mu, 0.5, 1.5, 2.0 * mu);
    for (double t : {0.3, 1.0, 2.5}) {
        double norm = 0.0;
        for (int k = 0; k < 8; ++k) norm = std::max(norm, std::exp(ms.drift(k) * t));
        CHECK(norm <= std::exp(-mu * t) * (1.0 + 1e-12));
    }

    // mode-1 heat decay against the finite-difference oracle
    const int modes = 8;
    const SpectralModel mh = canonical(modes, 0.0);
    NeumannHeatFD fd(1024, 0.0);
    Eigen::VectorXd u0(fd.nodes());
    for (int i = 0; i < fd.nodes(); ++i)
        u0[i] = std::sqrt(2.0 / kPi) * std::cos(i * kPi / 1024);
    const Eigen::VectorXd u1 = fd.evolve(u0, 0.0, 0.0, 1.0, 2000);
    const Eigen::VectorXd coeffs = fd.project_modes(u1, modes);
    StateVector e1 = StateVector::Zero(modes);
    e1[1] = 1.0;
    const StateVector spectral = mh.semigroup_apply(1.0, e1);
    CHECK(coeffs[1] == doctest::Approx(spectral[1]).epsilon(1e-3));
    CHECK(spectral[1] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("semigroup law holds to machine precision") {
    const SpectralModel m = canonical(8, 0.3);
    GaussianRng rng(7);
    StateVector v(8);
    for (int k = 0; k < 8; ++k) v[k] = rng.gaussian();
    const StateVector a = m.semigroup_apply(0.7, m.semigroup_apply(0.55, v));
    const StateVector b = m.semigroup_apply(1.25, v);
    CHECK((a - b).norm() <= 1e-13 * b.norm());
}

TEST_CASE("fractional_scale: identity, inverse pair, singular refusal") {
    const SpectralModel m = canonical(4, -1.0); // lambda - mu = (1, 2, 5, 10)
    StateVector v = StateVector::Ones(4);
    CHECK((m.fractional_scale(0.0, v) - v).norm() == 0.0);
    const StateVector round = m.fractional_scale(-1.0, m.fractional_scale(1.0, v));
    CHECK((round - v).norm() <= 1e-14);

    // inverse square root halves the coefficient sitting at lambda - mu = 4
    const SpectralModel m2 = canonical(3, 0.0, 0.5, 1.5, /*reg_shift=*/1.0); // lambda - mu = (1, 2, 5)
    StateVector w = StateVector::Ones(3);
    const StateVector s = m2.fractional_scale(-0.5, w);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[2] == doctest::Approx(1.0 / std::sqrt(5.0)));
    const SpectralModel m14 = canonical(2, -3.0); // lambda - mu = (3, 4)
    const StateVector s14 = m14.fractional_scale(-0.5, StateVector::Ones(2));
    CHECK(s14[1] == doctest::Approx(0.5)); // 4^{-1/2}

    const SpectralModel msing = canonical(4, 0.0); // lambda_0 - mu = 0
    CHECK_THROWS_AS(msing.fractional_scale(-0.5, StateVector::Ones(4)), numerical_refusal);
}

TEST_CASE("isg kernel: linearity, FD oracle, singular envelope") {
    const SpectralModel m = canonical(8, 0.0);
    CHECK(m.isg_kernel_apply(0.5, BoundaryDatum{0.0, 0.0}).norm() == 0.0);
    CHECK_THROWS_AS(m.isg_kernel_apply(0.0, BoundaryDatum{1.0, 0.0}), config_error);

    // S_A(t) b = Int_0^t kernel(s) b ds against the FD constant-flux run,
    // compared on the first N mode coefficients (the truncated object).
    const int modes = 32;
    const SpectralModel mk = canonical(modes, 0.0);
    const double T = 0.1;
    NeumannHeatFD fd(4096, 0.0);
    const Eigen::VectorXd u =
        fd.evolve(Eigen::VectorXd::Zero(fd.nodes()), 1.0, 0.0, T, 800);
    const Eigen::VectorXd fd_coeffs = fd.project_modes(u, modes);

    const QuadratureRule rule = singular_rule(T, mk.beta(), 64);
    StateVector integrated = StateVector::Zero(modes);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        integrated += rule.weights[i] * mk.isg_kernel_apply(rule.nodes[i], BoundaryDatum{1.0, 0.0});
    CHECK((integrated - fd_coeffs).norm() / fd_coeffs.norm() < 5e-3);

    // kernel singularity: sup_t t^beta ||kernel(t)|| stays bounded as t -> 0
    double sup = 0.0;
    for (double t = 1.0; t > 1e-8; t *= 0.5)
        sup = std::max(sup, std::pow(t, mk.beta()) * mk.isg_kernel_norm(t));
    CHECK(sup < 10.0);
    CHECK(sup <= mk.frac_norm() * 1.01); // frac_norm is the calibrated envelope constant
}

TEST_CASE("kernel q*-integrability: finite below the window, growing toward it") {
    const SpectralModel m = canonical(32, 0.0);
    // q* beta < 1: the integral stabilizes under refinement
    double prev = -1.0;
    for (int cells : {32, 64, 128}) {
        const QuadratureRule rule = graded_gauss_legendre(1.0, cells, 6.0);
        double v = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            v += rule.weights[i] * std::pow(m.isg_kernel_norm(rule.nodes[i]), m.q_star());
        if (prev > 0.0) CHECK(std::abs(v - prev) / prev < 1e-6);
        prev = v;
    }
    CHECK(prev > 0.0);
    CHECK(std::isfinite(prev));
}

TEST_CASE("integrated semigroup: nu-formula, S(0)=0, derivative, functional equation") {
    const SpectralModel m = canonical(8, 0.25);
    GaussianRng rng(11);
    StateVector x(8);
    for (int k = 0; k < 8; ++k) x[k] = rng.gaussian();

    CHECK(m.integrated_semigroup(0.0, 5.0, x).norm() == 0.0); // S(0) = 0
    CHECK_THROWS_AS(m.integrated_semigroup(1.0, m.omega_A() - 0.1, x), config_error);

    // nu-independence of the displayed formula
    const StateVector s1 = m.integrated_semigroup(0.8, 1.7, x);
    const StateVector s2 = m.integrated_semigroup(0.8, 9.3, x);
    CHECK((s1 - s2).norm() < 1e-10 * std::max(1.0, s1.norm()));

    // agreement with the closed diagonal form
    for (int k = 0; k < 8; ++k)
        CHECK(s1[k] == doctest::Approx(isg_closed(m.drift(k), 0.8) * x[k]).epsilon(1e-10));

    // d/dt S(t) x = T(t) x via central differences, O(h^2)
    const double t = 0.6, h = 1e-4;
    const StateVector d = (m.integrated_semigroup(t + h, 3.0, x) -
                           m.integrated_semigroup(t - h, 3.0, x)) /
                          (2.0 * h);
    const StateVector Tx = m.semigroup_apply(t, x);
    CHECK((d - Tx).norm() / Tx.norm() < 1e-7);

    // S(t) S(s) x = Int_0^t [S(s+r) - S(r)] x dr  (quadrature on the rhs)
    const double tt = 0.7, ss = 0.4;
    StateVector lhs(8), rhs(8);
    for (int k = 0; k < 8; ++k)
        lhs[k] = isg_closed(m.drift(k), tt) * isg_closed(m.drift(k), ss) * x[k];
    const QuadratureRule rule = gauss_legendre(0.0, tt);
    rhs.setZero();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double r = rule.nodes[i];
        rhs += rule.weights[i] *
               (m.integrated_semigroup(ss + r, 2.0, x) - m.integrated_semigroup(r, 2.0, x));
    }
    CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, lhs.norm()));

    // nondegeneracy: S(t) x = 0 on a grid forces x = 0
    Eigen::MatrixXd probe(8, 5);
    for (int j = 0; j < 5; ++j) probe.col(j) = m.integrated_semigroup(0.2 * (j + 1), 2.0, x);
    CHECK(probe.colwise().norm().minCoeff() > 0.0);
}

TEST_CASE("resolvent scaling: diagonal law, decay-exponent fit, monotone tail") {
    const SpectralModel m = canonical(64, 0.0);
    Eigen::VectorXd grid(25);
    for (int i = 0; i < 25; ++i) grid[i] = std::pow(10.0, 1.0 + 3.0 * i / 24.0);
    const ResolventScalingReport rep = m.resolvent_scaling_report(grid);

    for (int i = 0; i < grid.size(); ++i)
        CHECK(rep.norms_diagonal[i] == doctest::Approx(1.0 / (grid[i] - m.omega_A())));

    // quadrature Laplace transform against the closed form n_k/(lambda + lambda_k - mu)
    for (int i : {0, 12, 24}) {
        Eigen::MatrixX2d R(m.n_modes(), 2);
        for (int k = 0; k < m.n_modes(); ++k)
            R.row(k) = m.boundary_coupling().row(k) / (grid[i] + m.eigenvalues()[k] - m.mu());
        const double closed = R.jacobiSvd().singularValues()[0];
        CHECK(rep.norms[i] == doctest::Approx(closed).epsilon(1e-6));
    }

    // expected exponent: 1/p* = 1 - beta at the sharp window edge beta = 1 - 1/p*
    CHECK(rep.expected_exponent == doctest::Approx(0.75));
    CHECK(std::abs(rep.fitted_exponent - rep.expected_exponent) <= 0.05);
    CHECK(rep.monotone_tail);

    CHECK_THROWS_AS(m.resolvent_scaling_report(Eigen::VectorXd::Zero(3)), config_error);
}
