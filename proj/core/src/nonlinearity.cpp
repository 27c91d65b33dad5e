#include "rdslab/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {
constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kInf = std::numeric_limits<double>::infinity();
} // namespace

Eigen::MatrixXd Nonlinearity::jacobian(const StateVector& v) const {
    if (!dg_) return Eigen::MatrixXd::Zero(v.size(), v.size());
    return dg_(v);
}

Nonlinearity Nonlinearity::zero() { return Nonlinearity(); }

Nonlinearity Nonlinearity::linear(double c, int n_modes) {
    Eigen::VectorXd poly(1);
    poly[0] = std::abs(c);
    return Nonlinearity(
        "linear",
        [c](const StateVector& v) -> StateVector { return c * v; },
        [c, n_modes](const StateVector&) {
            return (c * Eigen::MatrixXd::Identity(n_modes, n_modes)).eval();
        },
        std::abs(c), kInf, poly,
        HolderModulus{1.0, Eigen::VectorXd::Zero(1)}, true);
}

Nonlinearity Nonlinearity::scaled_tanh(const SpectralModel& model, double a) {
    const int n = model.n_modes();
    const int m = 4 * n;
    // shared_ptr so the closures stay cheap to copy
    auto synth = std::make_shared<Eigen::MatrixXd>(model.collocation_matrix(m));
    auto anal = std::make_shared<Eigen::MatrixXd>(model.collocation_adjoint(m));

    auto g = [a, synth, anal](const StateVector& v) -> StateVector {
        Eigen::VectorXd vals = (*synth) * v;
        for (int j = 0; j < vals.size(); ++j) vals[j] = a * std::tanh(vals[j]);
        return (*anal) * vals;
    };
    auto dg = [a, synth, anal](const StateVector& v) -> Eigen::MatrixXd {
        Eigen::VectorXd vals = (*synth) * v;
        for (int j = 0; j < vals.size(); ++j) {
            const double c = std::cosh(vals[j]);
            vals[j] = a / (c * c);
        }
        return (*anal) * vals.asDiagonal() * (*synth);
    };

    Eigen::VectorXd poly(1);
    poly[0] = std::abs(a); // |d/du a tanh(u)| <= a
    // |(a tanh)'| Lipschitz with constant 0.7699 a pointwise; on the truncated
    // space the L2->L2 modulus picks up the collocation norm-equivalence factor.
    const double c_equiv = std::sqrt(2.0 * m / kPi);
    HolderModulus holder{1.0, Eigen::VectorXd::Constant(1, 0.7699 * std::abs(a) * c_equiv)};
    return Nonlinearity("scaled_tanh", g, dg, std::abs(a), std::abs(a) * std::sqrt(kPi), poly,
                        holder, false);
}

Nonlinearity Nonlinearity::custom_table(const SpectralModel& model, const Eigen::VectorXd& v_nodes,
                                        const Eigen::VectorXd& g_values) {
    if (v_nodes.size() != g_values.size() || v_nodes.size() < 2)
        throw config_error("custom_table: need matching node/value arrays with >= 2 entries");
    for (int i = 1; i < v_nodes.size(); ++i)
        if (v_nodes[i] <= v_nodes[i - 1]) throw config_error("custom_table: nodes must increase");

    const int n = model.n_modes();
    const int m = 4 * n;
    auto synth = std::make_shared<Eigen::MatrixXd>(model.collocation_matrix(m));
    auto anal = std::make_shared<Eigen::MatrixXd>(model.collocation_adjoint(m));
    auto nodes = std::make_shared<Eigen::VectorXd>(v_nodes);
    auto values = std::make_shared<Eigen::VectorXd>(g_values);

    auto interp = [nodes, values](double x) -> double {
        const auto& xs = *nodes;
        const auto& ys = *values;
        if (x <= xs[0]) return ys[0];
        const int last = static_cast<int>(xs.size()) - 1;
        if (x >= xs[last]) return ys[last];
        int lo = 0, hi = last;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (xs[mid] <= x ? lo : hi) = mid;
        }
        const double w = (x - xs[lo]) / (xs[lo + 1] - xs[lo]);
        return (1.0 - w) * ys[lo] + w * ys[lo + 1];
    };
    auto slope = [nodes, values](double x) -> double {
        const auto& xs = *nodes;
        const auto& ys = *values;
        const int last = static_cast<int>(xs.size()) - 1;
        if (x <= xs[0] || x >= xs[last]) return 0.0;
        int lo = 0, hi = last;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (xs[mid] <= x ? lo : hi) = mid;
        }
        return (ys[lo + 1] - ys[lo]) / (xs[lo + 1] - xs[lo]);
    };

    auto g = [synth, anal, interp](const StateVector& v) -> StateVector {
        Eigen::VectorXd vals = (*synth) * v;
        for (int j = 0; j < vals.size(); ++j) vals[j] = interp(vals[j]);
        return (*anal) * vals;
    };
    auto dg = [synth, anal, slope](const StateVector& v) -> Eigen::MatrixXd {
        Eigen::VectorXd vals = (*synth) * v;
        for (int j = 0; j < vals.size(); ++j) vals[j] = slope(vals[j]);
        return (*anal) * vals.asDiagonal() * (*synth);
    };

    double lip = 0.0;
    for (int i = 1; i < v_nodes.size(); ++i)
        lip = std::max(lip, std::abs((g_values[i] - g_values[i - 1]) / (v_nodes[i] - v_nodes[i - 1])));
    const double bound = g_values.cwiseAbs().maxCoeff() * std::sqrt(kPi);
    Eigen::VectorXd poly(1);
    poly[0] = lip;
    // Piecewise-linear tables are Lipschitz but not C^1; no Holder modulus.
    return Nonlinearity("custom_table", g, dg, lip, bound, poly, std::nullopt, false);
}

Nonlinearity Nonlinearity::mode_masked(const Nonlinearity& inner, const std::vector<int>& zero_modes,
                                       int n_modes) {
    auto mask = std::make_shared<Eigen::VectorXd>(Eigen::VectorXd::Ones(n_modes));
    for (int k : zero_modes) {
        if (k < 0 || k >= n_modes) throw config_error("mode_masked: mode index out of range");
        (*mask)[k] = 0.0;
    }
    Nonlinearity in = inner;
    auto g = [in, mask](const StateVector& v) -> StateVector {
        return mask->asDiagonal() * in(v);
    };
    auto dg = [in, mask](const StateVector& v) -> Eigen::MatrixXd {
        return mask->asDiagonal() * in.jacobian(v);
    };
    return Nonlinearity(inner.name() + "_masked", g, dg, inner.lipschitz(), inner.bound(),
                        inner.dominating_poly(), inner.holder(), inner.constant_jacobian());
}

} // namespace rdslab
