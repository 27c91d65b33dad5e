#pragma once

#include <functional>
#include <vector>

namespace rdslab {

// Nodes/weights of a composite quadrature rule on [a,b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    double integrate(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

// 16-point Gauss-Legendre on [a,b].
QuadratureRule gauss_legendre(double a, double b);

// Composite Gauss-Legendre on [0,T] with a mesh graded toward 0,
// cell boundaries T*(j/cells)^grading. Designed for integrands with an
// integrable t^{-beta} singularity at 0; grading >= 2/(1-beta) makes the
// first-cell error commensurate with the smooth cells.
QuadratureRule graded_gauss_legendre(double T, int cells, double grading);

// Same mesh but graded toward the right endpoint T (for kernels singular at T).
QuadratureRule graded_gauss_legendre_right(double T, int cells, double grading);

// Convenience: grading chosen from beta so that the t^{-beta} model integrand
// integrates to ~1e-8 relative accuracy with the default cell count.
QuadratureRule singular_rule(double T, double beta, int cells = 48);

} // namespace rdslab
