// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

namespace ouevolve {

/// Gauss–Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule; nodes ascending. Cached per n.
const GaussLegendreRule& gauss_legendre(int n);

/// Nodes and weights of the composite rule with `panels` equal panels on [a, b].
struct QuadraturePoints {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadraturePoints composite_gauss_legendre(double a, double b, int order, int panels);

/// n-point Gauss rule for the weight x^b on [0, 1], b > -1 (Golub-Welsch).
QuadraturePoints gauss_jacobi01(int n, double b);

}  // namespace ouevolve
