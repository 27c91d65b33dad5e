#include "rdslab/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {
// 16-point Gauss-Legendre abscissae/weights on [-1,1].
constexpr double kGlX[8] = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGlW[8] = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};
} // namespace

QuadratureRule gauss_legendre(double a, double b) {
    QuadratureRule r;
    const double mid = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    r.nodes.reserve(16);
    r.weights.reserve(16);
    for (int i = 7; i >= 0; --i) {
        r.nodes.push_back(mid - hw * kGlX[i]);
        r.weights.push_back(hw * kGlW[i]);
    }
    for (int i = 0; i < 8; ++i) {
        r.nodes.push_back(mid + hw * kGlX[i]);
        r.weights.push_back(hw * kGlW[i]);
    }
    return r;
}

QuadratureRule graded_gauss_legendre(double T, int cells, double grading) {
    if (T < 0.0) throw config_error("graded_gauss_legendre: T must be >= 0");
    QuadratureRule r;
    if (T == 0.0) return r;
    double prev = 0.0;
    for (int j = 1; j <= cells; ++j) {
        const double next = T * std::pow(static_cast<double>(j) / cells, grading);
        const QuadratureRule cell = gauss_legendre(prev, next);
        r.nodes.insert(r.nodes.end(), cell.nodes.begin(), cell.nodes.end());
        r.weights.insert(r.weights.end(), cell.weights.begin(), cell.weights.end());
        prev = next;
    }
    return r;
}

QuadratureRule graded_gauss_legendre_right(double T, int cells, double grading) {
    QuadratureRule left = graded_gauss_legendre(T, cells, grading);
    QuadratureRule r;
    r.nodes.resize(left.nodes.size());
    r.weights.resize(left.weights.size());
    for (std::size_t i = 0; i < left.nodes.size(); ++i) {
        const std::size_t j = left.nodes.size() - 1 - i;
        r.nodes[i] = T - left.nodes[j];
        r.weights[i] = left.weights[j];
    }
    return r;
}

QuadratureRule singular_rule(double T, double beta, int cells) {
    const double grading = std::max(2.0, 3.0 / std::max(1e-3, 1.0 - beta));
    return graded_gauss_legendre(T, cells, grading);
}

} // namespace rdslab
