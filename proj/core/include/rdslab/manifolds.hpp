#pragma once

#include <map>

#include "rdslab/lyapunov.hpp"
#include "rdslab/stationary.hpp"

namespace rdslab {

enum class ChartKind { stable, unstable, center };

// Local manifold chart at a stationary point: graph over (a section of) the
// tangent subspace, values in the complementary coordinates.
struct ManifoldChart {
    ChartKind kind = ChartKind::stable;
    StateVector Z;
    Eigen::MatrixXd tangent;    // N x d, full tangent basis (S, U or C)
    Eigen::MatrixXd section;    // N x ds, the sampled directions (ds <= 3)
    Eigen::MatrixXd complement; // N x (N - d), complementary coordinates
    Eigen::MatrixXd nodes;      // ds x n_nodes, tangent-ball sample coordinates
    Eigen::MatrixXd values;     // (N - d) x n_nodes, graph values at the nodes
    double radius = 0.0;        // validated radius (after adaptive shrinking)
    double upsilon = 0.0;
    double t0 = 0.0;
    Eigen::MatrixXd poly;       // degree-3 least-squares interpolant of the graph

    Eigen::VectorXd graph_eval(const Eigen::VectorXd& section_coords) const;
    StateVector embed(const Eigen::VectorXd& section_coords) const;

    double lp_defect = 0.0; // final weighted LP correction
    int lp_iterations = 0;
    int lp_horizon = 0;     // blocks used before geometric truncation
};

struct ChartOptions {
    double t0 = 0.1;
    int lp_horizon = 0;      // 0: chosen from the spectral gaps (tail defect < 1e-8)
    int split_window = 12;   // window (blocks) for the per-node splittings
    int max_lp_iters = 60;
    double lp_tol = 1e-9;
    double min_radius = 1e-6;
    double center_threshold = 1e-3;
    double stationary_window = 20.0;
    bool hyperbolic_base = true; // use the mode-split stationary construction
    int max_section_dim = 2;
    StationaryOptions stat{};
    SolverOptions solver{};
};

// Z_n and B_n = D_{Z_n} phi~^{t0} along the stationary orbit for nodes
// n_lo..n_hi. Z comes from one global stationary arc over the padded span
// (no forward propagation, which would drift along expanding directions);
// blocks are linearized lazily per node.
class StationaryOrbit {
public:
    StationaryOrbit(const SpectralModel& model, const PathView& path, const Nonlinearity& nonlin,
                    double t0, long n_lo, long n_hi, const ChartOptions& opts);

    StateVector Z(long n) const;
    const Eigen::MatrixXd& block(long n) const;
    BlockFn block_fn() const;
    double t0() const { return t0_; }

private:
    const SpectralModel& model_;
    PathView path_;
    const Nonlinearity& nonlin_;
    double t0_;
    long steps_per_block_ = 0;
    StationaryArc arc_;
    mutable std::map<long, Eigen::MatrixXd> b_;
};

// Discrete Lyapunov-Perron charts on the t0-grid. The tangent data comes from
// the Oseledets splitting of `spectrum`; upsilon must lie in the admissible
// window (0, -mu_stable_top) / (0, mu_unstable_bottom) / (0, min(mu+, -mu-)).
// The radius shrinks adaptively when the LP iteration fails to contract and
// construction fails below min_radius.
ManifoldChart stable_chart(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StationaryPoint& Z,
                           const LyapunovSpectrum& spectrum, double upsilon, double radius,
                           const ChartOptions& opts = {});

ManifoldChart unstable_chart(const SpectralModel& model, const PathView& path,
                             const Nonlinearity& nonlin, const StationaryPoint& Z,
                             const LyapunovSpectrum& spectrum, double upsilon, double radius,
                             const ChartOptions& opts = {});

ManifoldChart center_chart(const SpectralModel& model, const PathView& path,
                           const Nonlinearity& nonlin, const StationaryPoint& Z,
                           const LyapunovSpectrum& spectrum, double radius,
                           const ChartOptions& opts = {});

// Backward history constructed by the unstable-chart LP: states at nodes
// -horizon..0 (x_n + Z_n), for the backward-decay checks.
std::vector<StateVector> unstable_history(const SpectralModel& model, const PathView& path,
                                          const Nonlinearity& nonlin, const StationaryPoint& Z,
                                          const LyapunovSpectrum& spectrum, double upsilon,
                                          const Eigen::VectorXd& section_coords, double radius,
                                          const ChartOptions& opts = {});

struct DecayFit {
    double rate_per_block = 0.0; // slope of log distance per block
    int n_used = 0;
    bool truncated = false;
    Eigen::VectorXd log_distances;
};

// Pairwise forward contraction of two chart points (embedded via the chart),
// fitted over n_max blocks against the independently recomputed stationary
// orbit; truncates when the pair leaves the chart neighborhood.
DecayFit decay_rate_check(const SpectralModel& model, const PathView& path,
                          const Nonlinearity& nonlin, const ManifoldChart& chart,
                          const Eigen::VectorXd& coords_a, const Eigen::VectorXd& coords_b,
                          int n_max, const ChartOptions& opts = {});

} // namespace rdslab
