#pragma once

#include <functional>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/variational.hpp"

namespace rdslab {

// Base orbit for the linearization: Z at node n (time n t0, in path view time).
// Use the zero orbit for constant-Jacobian nonlinearities; a stationary orbit
// otherwise.
using OrbitFn = std::function<StateVector(long)>;

inline OrbitFn zero_orbit(int n_modes) {
    return [n_modes](long) { return StateVector::Zero(n_modes); };
}

struct LyapunovOptions {
    double t0 = 0.1;
    long n_blocks = 1000;
    // window (in blocks) for the fast-subspace SVD products; 0 = 20% of n_blocks
    int window = 0;
    double gap_tol = 0.05;        // distinct-exponent grouping width (absolute)
    int bootstrap_resamples = 200;
    std::uint64_t bootstrap_seed = 0xB005;
    double stationarity_tol = 1e-3; // rejection threshold for non-stationary orbits
    SolverOptions solver{};
};

struct LyapunovSpectrum {
    double t0 = 0.0;
    long n_blocks = 0;
    Eigen::VectorXd raw_exponents;     // all N, Benettin order (decreasing after transient)
    Eigen::VectorXd exponents;         // distinct, strictly decreasing
    Eigen::VectorXi multiplicities;
    Eigen::VectorXd ci;                // bootstrap half-widths (95%) per distinct exponent
    std::vector<Eigen::MatrixXd> bases; // per distinct exponent: orthonormal basis of H^i at time 0
    Eigen::MatrixXd convergence;       // running exponent estimates (n_blocks x N), for plots
};

// Benettin QR accumulation of the linearized cocycle along an orbit, plus
// window-product SVD bases for the Oseledets subspaces at time 0. Negative
// exponent groups use the right singular subspaces of the forward product on
// [0, W t0]; nonnegative groups use the left singular subspaces of the
// backward product on [-W t0, 0] (so the path must extend W t0 into the past).
LyapunovSpectrum lyapunov_spectrum(const SpectralModel& model, const PathView& path,
                                   const Nonlinearity& nonlin, const OrbitFn& orbit,
                                   const LyapunovOptions& opts);

struct OseledetsSplitting {
    Eigen::MatrixXd S_basis, U_basis, C_basis; // N x (dim) each, possibly empty
    Eigen::MatrixXd P_S, P_U, P_C;             // projections along the splitting
    std::vector<int> stable_groups, unstable_groups, center_groups; // indices into spectrum.exponents
    double mu_stable_top = 0.0;    // max{mu_j : mu_j < 0}   (rate window of stable charts)
    double mu_unstable_bottom = 0.0; // min{mu_j : mu_j > 0} (rate window of unstable charts)
};

// Groups the spectrum by the sign of the exponents; |mu| < threshold is
// classified center. Requires an unambiguous gap: every non-center exponent
// must clear 2x its bootstrap CI away from 0.
OseledetsSplitting oseledets_splitting(const LyapunovSpectrum& spectrum, double threshold);

struct IntegrabilityReport {
    int n_paths = 0;
    double mean = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
    double ci_halfwidth = 0.0; // bootstrap CI of the mean
    double excess_kurtosis = 0.0;
    bool heavy_tail_alarm = false;
    Eigen::VectorXd samples; // per-path sup_{t in [0,t0]} max of the two log^+ norms
};

// Monte Carlo estimate of the MET integrability functional
//   max{ sup_{t in [0,t0]} log^+ ||psi~^t_omega||, sup_t log^+ ||psi~^{t0-t}_{theta_t omega}|| }
// over an ensemble of independent paths (>= 100 required).
IntegrabilityReport integrability_estimate(
    const SpectralModel& model, const std::vector<NoisePath>& ensemble,
    const Nonlinearity& nonlin,
    const std::function<StateVector(const PathView&)>& base_point, double t0,
    int norm_grid = 8, const SolverOptions& opts = {});

// --- helpers shared with the manifold module ---------------------------

using BlockFn = std::function<Eigen::MatrixXd(long)>; // n-th t0-block of the linearized cocycle

// Blocks linearized along an orbit: B_n = D_{Z_n} phi~^{t0}_{theta_{n t0} omega}.
BlockFn make_block_fn(const SpectralModel& model, const PathView& path,
                      const Nonlinearity& nonlin, const OrbitFn& orbit, double t0,
                      const SolverOptions& opts = {});

struct NodeSplitting {
    Eigen::MatrixXd S, U, C;
};

// Subspaces at a node from window products of blocks, grouped by matching
// log(singular value)/(W t0) to the distinct exponents.
NodeSplitting window_splitting(const BlockFn& block, long node, int window, double t0,
                               const Eigen::VectorXd& exponents,
                               const Eigen::VectorXi& multiplicities,
                               const std::vector<int>& center_groups_hint = {});

// Largest principal angle between the column spans (radians).
double principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

} // namespace rdslab
