#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace rdslab {

// Two-sided grid of per-channel Brownian increments on [t_minus, t_plus].
// Increment i covers [t_minus + i dt, t_minus + (i+1) dt] and has variance
// q_ch * dt. Only increments are stored: the Wiener shift theta_s then acts
// as an exact array offset.
class NoisePath {
public:
    static NoisePath sample(double dt, double t_minus, double t_plus,
                            const Eigen::VectorXd& q, std::uint64_t seed);

    double dt() const { return dt_; }
    double t_minus() const { return t_minus_; }
    double t_plus() const { return t_plus_; }
    int n_channels() const { return static_cast<int>(increments_.rows()); }
    long n_steps() const { return static_cast<long>(increments_.cols()); }
    std::uint64_t seed() const { return seed_; }
    const Eigen::VectorXd& q() const { return q_; }
    const Eigen::MatrixXd& increments() const { return increments_; }

    // Binary persistence; reload is bit-exact.
    void save(const std::string& filename) const;
    static NoisePath load(const std::string& filename);

private:
    double dt_ = 0.0;
    double t_minus_ = 0.0;
    double t_plus_ = 0.0;
    std::uint64_t seed_ = 0;
    Eigen::VectorXd q_;
    Eigen::MatrixXd increments_; // n_channels x n_steps

    friend class PathView;
};

// Read-only window onto a NoisePath realizing omega' = theta_s omega.
// View-time 0 corresponds to base-time s; the view's increment i is the
// base increment i + s/dt.
class PathView {
public:
    explicit PathView(const NoisePath& base) : base_(&base), offset_steps_(0) {}

    double dt() const { return base_->dt(); }
    double t_minus() const { return base_->t_minus() - shift_time(); }
    double t_plus() const { return base_->t_plus() - shift_time(); }
    int n_channels() const { return base_->n_channels(); }
    double shift_time() const { return offset_steps_ * base_->dt(); }
    long offset_steps() const { return offset_steps_; }
    const NoisePath& base() const { return *base_; }

    // Increment over [t, t+dt] at base-aligned index i = grid_index(t).
    // grid_index already accounts for the shift (view time t corresponds to
    // base time t + shift_time), so indices address the base array directly.
    double increment(int channel, long step_index) const {
        return base_->increments_(channel, step_index);
    }
    // Base-aligned grid index of view-time t (must be a grid multiple within horizon).
    long grid_index(double t) const;
    bool on_grid(double t) const;

    // W_t(omega') by prefix summation of increments (W_0 = 0).
    Eigen::VectorXd wiener(double t) const;

private:
    const NoisePath* base_;
    long offset_steps_;

    friend PathView shift(const PathView&, double);
};

// theta_s: exact grid shift. s must be a grid multiple; the shifted window
// must stay inside the base horizon. Composes: shift(shift(p,s),t) == shift(p,s+t).
PathView shift(const PathView& view, double s);
inline PathView shift(const NoisePath& path, double s) { return shift(PathView(path), s); }

} // namespace rdslab
