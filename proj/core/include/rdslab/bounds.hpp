#pragma once

#include "rdslab/cocycle.hpp"
#include "rdslab/gronwall.hpp"

namespace rdslab {

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double margin() const { return rhs - lhs; }
};

// A priori bound || phi~^t_omega(xi) || <= kappa(t) ||xi|| + b(t, omega):
//   a(s) = e^{omega_A s}||xi - Y(0)|| + C Int_0^s (s-u)^{-beta} e^{omega_A (s-u)} (k1 + k2 ||Y_u||) du
//   rhs  = a(t) + Int_0^t K(t-s) e^{omega_A (t-s)} a(s) ds + ||Y_t||,
// with C = frac_norm and K the powered-Gronwall series kernel of strength
// k2 * frac_norm. The returned b is the xi-independent part (used for the
// L^p moment study).
struct AprioriResult {
    BoundCheck check;
    double kappa_t = 0.0; // coefficient of ||xi||
    double b = 0.0;       // random part
};
AprioriResult apriori_bound_check(const SpectralModel& model, const PathView& path,
                                  const Nonlinearity& nonlin, const StateVector& xi, double t,
                                  const SolverOptions& opts = {});

// Derivative growth ||D_xi phi~^t|| <= Gamma(t, xi, omega):
//   series form: e^{omega_A t} (1 + Sum_{n>=1} [g Gamma(1-beta) t^{1-beta}]^n / Gamma(n(1-beta)+1)),
//   g = frac_norm * P,  P = sup_{s<=t} p(||phi~^s(xi)||),
// plus the closed-form envelope M_A C_beta (1.13 X^{1-beta} + X e^X) with
// X = (g Gamma(1-beta))^{1/(1-beta)} t. Asserts the linearized norm is below
// the series form (and reports the envelope).
struct DerivativeGrowthResult {
    double norm = 0.0;         // ||linearize||
    double series_bound = 0.0; // certified bound
    double gamma = 0.0;        // paper-shape envelope >= series_bound
    bool pass = false;
};
DerivativeGrowthResult derivative_growth_bound(const SpectralModel& model, const PathView& path,
                                               const Nonlinearity& nonlin, const StateVector& xi,
                                               double t, const SolverOptions& opts = {});

// Difference bound || phi~^t(xi2) - phi~^t(xi1) || <= Gamma~(t, xi2, xi1) ||xi2 - xi1||,
// Gamma~ evaluated with P~ = sup over s and sampled theta of p(||phi~^s(theta xi2 + (1-theta) xi1)||).
BoundCheck difference_bound_check(const SpectralModel& model, const PathView& path,
                                  const Nonlinearity& nonlin, const StateVector& xi1,
                                  const StateVector& xi2, double t, const SolverOptions& opts = {});

// Empirical Holder modulus of the derivative map at separation ||xi2 - xi1||:
//   ratio = ||linearize(xi2) - linearize(xi1)|| / ||xi2 - xi1||^r.
// pass = ratio finite; the exponent itself is certified by the sweep below.
struct HolderCheck {
    double ratio = 0.0;
    double separation = 0.0;
    bool pass = false;
};
HolderCheck holder_derivative_check(const SpectralModel& model, const PathView& path,
                                    const Nonlinearity& nonlin, const StateVector& xi1,
                                    const StateVector& xi2, double t,
                                    const SolverOptions& opts = {});

// Shrinking-separation sweep along a fixed direction; fits the slope of
// log(ratio) against log(separation). Boundedness of the modulus at exponent
// r requires slope >= -tol.
struct HolderSweep {
    Eigen::VectorXd separations;
    Eigen::VectorXd ratios;
    double slope = 0.0;
    bool pass = false;
};
HolderSweep holder_derivative_sweep(const SpectralModel& model, const PathView& path,
                                    const Nonlinearity& nonlin, const StateVector& xi,
                                    const StateVector& direction, double t,
                                    const Eigen::VectorXd& separations, double slope_tol = 0.15,
                                    const SolverOptions& opts = {});

// Kernel integrability Int_0^tau ||dS_A/dt||^{q*} dt. `finite` is the
// certified classification q* beta < 1 (the beta-corrected version of the
// q*-integrability display). When finite, `majorant` is
// frac_norm^{q*} Int_0^tau t^{-q* beta} e^{q* omega_A t} dt and integral <= majorant.
// `refinement_values`: quadrature refinements of the integral when finite,
// of the divergent majorant when not (the divergence trend).
struct KernelIntegrability {
    double integral = 0.0;
    bool finite = false;
    double majorant = 0.0;
    Eigen::VectorXd refinement_values;
};
KernelIntegrability kernel_integrability_check(const SpectralModel& model, double q_star,
                                               double tau);

// Trace-class diagnostic of the cylindrical remark: partial sums of
// Sum_k (1 - e^{-2 lambda_k tau}) / (2 lambda_k) at geometrically growing
// counts (lambda = 0 contributes the limit value tau).
Eigen::VectorXd trace_mode_sums(const Eigen::VectorXd& eigenvalues, double tau,
                                const Eigen::VectorXi& counts);
// lambda_k = c k^{2/n}, k = 1..count, the synthetic spectra of the remark.
Eigen::VectorXd synthetic_spectrum(int count, double c, int dimension);

} // namespace rdslab
