#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdslab/spectral_model.hpp"

namespace rdslab {

// Holder modulus of the derivative: ||DG(x) - DG(y)|| <= ||x-y||^r Q(||x||,||y||),
// Q an increasing polynomial in max(||x||,||y||) with the given coefficients.
struct HolderModulus {
    double r = 1.0;
    Eigen::VectorXd q_coeffs; // Q(s) = sum_i q_coeffs[i] s^i
    double evaluate(double s1, double s2) const {
        const double s = std::max(s1, s2);
        double acc = 0.0, p = 1.0;
        for (int i = 0; i < q_coeffs.size(); ++i) { acc += q_coeffs[i] * p; p *= s; }
        return acc;
    }
};

// Mode-space action of the Nemytskii operator G : H0 -> H0 together with the
// analytic data the Section-4 bounds need. All maps are pure.
class Nonlinearity {
public:
    using Map = std::function<StateVector(const StateVector&)>;
    using Jacobian = std::function<Eigen::MatrixXd(const StateVector&)>;

    Nonlinearity() = default;
    Nonlinearity(std::string name, Map g, Jacobian dg, double lipschitz, double bound,
                 Eigen::VectorXd dominating_poly, std::optional<HolderModulus> holder,
                 bool constant_jacobian)
        : name_(std::move(name)), g_(std::move(g)), dg_(std::move(dg)), lipschitz_(lipschitz),
          bound_(bound), dominating_poly_(std::move(dominating_poly)), holder_(std::move(holder)),
          constant_jacobian_(constant_jacobian) {}

    const std::string& name() const { return name_; }
    StateVector operator()(const StateVector& v) const { return g_ ? g_(v) : StateVector::Zero(v.size()); }
    Eigen::MatrixXd jacobian(const StateVector& v) const;
    bool is_zero() const { return !g_; }
    // Jacobian independent of the state (zero and linear presets): linearized
    // products are then base-orbit independent.
    bool constant_jacobian() const { return constant_jacobian_; }

    double lipschitz() const { return lipschitz_; }
    double bound() const { return bound_; } // sup norm, +inf when unbounded
    // ||D_xi G|| <= p(||xi||); p increasing polynomial, coefficient vector.
    const Eigen::VectorXd& dominating_poly() const { return dominating_poly_; }
    double dominating_poly_eval(double s) const {
        double acc = 0.0, p = 1.0;
        for (int i = 0; i < dominating_poly_.size(); ++i) { acc += dominating_poly_[i] * p; p *= s; }
        return acc;
    }
    // Linear growth ||G(h)|| <= kappa1 + kappa2 ||h||.
    double kappa1() const { return std::isfinite(bound_) ? bound_ : 0.0; }
    double kappa2() const { return std::isfinite(bound_) ? 0.0 : lipschitz_; }

    const std::optional<HolderModulus>& holder() const { return holder_; }

    // --- presets --------------------------------------------------------
    static Nonlinearity zero();
    // g(u) = c u (mode space).
    static Nonlinearity linear(double c, int n_modes);
    // Nemytskii u(x) -> a tanh(u(x)) through de-aliased collocation on a
    // 4N-point midpoint grid.
    static Nonlinearity scaled_tanh(const SpectralModel& model, double a);
    // Pointwise map given by a table of (v, g(v)) pairs, linearly
    // interpolated, applied through the same collocation route.
    static Nonlinearity custom_table(const SpectralModel& model, const Eigen::VectorXd& v_nodes,
                                     const Eigen::VectorXd& g_values);
    // Wrap a nonlinearity so that the listed mode components of the output
    // (and the matching Jacobian rows) vanish.
    static Nonlinearity mode_masked(const Nonlinearity& inner, const std::vector<int>& zero_modes,
                                    int n_modes);

private:
    std::string name_ = "zero";
    Map g_;
    Jacobian dg_;
    double lipschitz_ = 0.0;
    double bound_ = 0.0;
    Eigen::VectorXd dominating_poly_ = Eigen::VectorXd::Zero(1);
    std::optional<HolderModulus> holder_{};
    bool constant_jacobian_ = true;
};

} // namespace rdslab
