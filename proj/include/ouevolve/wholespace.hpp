// SPDX-License-Identifier: MIT
#pragma once

#include <memory>
#include <vector>

#include "ouevolve/grid.hpp"
#include "ouevolve/propagator.hpp"

namespace ouevolve {

/// Density of N(0, Q_{t,s}) at x, via the Cholesky factor.
double kernel_eval(const KernelParams& params, const Vector& x);

struct WholeSpaceOptions {
    double kernel_cut = 8.0;  // stencil radius in standard deviations
    int interp_order = 3;     // pullback interpolation, 1 or 3
    /// Samples below this fraction of max|f| are treated as outside the
    /// support when bounding the convolution (their values are still used
    /// inside the bounding box).
    double support_threshold = 1e-17;
};

enum class GradientPath { kernel_gradient, finite_difference };

/// The whole-space evolution (P(t,s) f)(x) = (k(t,s,.) * f)(U(s,t) x + g(t,s)).
///
/// f is extended by zero beyond its grid box. The convolution is evaluated on
/// f's lattice by a truncated stencil of the sampled kernel, renormalized to
/// unit discrete mass, and only on the lattice nodes that the pullback
/// interpolation actually touches.
class WholeSpace {
public:
    explicit WholeSpace(std::shared_ptr<const PropagatorCache> cache, WholeSpaceOptions options = {});

    const PropagatorCache& cache() const { return *cache_; }
    const WholeSpaceOptions& options() const { return options_; }

    GridFunction apply(double t, double s, const GridFunction& f, const Grid& out) const;
    std::vector<double> apply_points(double t, double s, const GridFunction& f,
                                     const std::vector<Vector>& points) const;

    /// D_x P(t,s) f, one GridFunction per component.
    std::vector<GridFunction> gradient(double t, double s, const GridFunction& f, const Grid& out,
                                       GradientPath path = GradientPath::kernel_gradient) const;
    std::vector<Vector> gradient_points(double t, double s, const GridFunction& f,
                                        const std::vector<Vector>& points,
                                        GradientPath path = GradientPath::kernel_gradient) const;

    /// max over probes of |(u(t+dt) - u(t-dt)) / (2 dt) - L(t) u(t)|, with L by
    /// grid finite differences on f's grid.
    double pde_residual(double t, double s, const GridFunction& f,
                        const std::vector<Vector>& probes, double dt) const;

private:
    enum class Kind { value, gradient, fd_gradient };
    std::vector<std::vector<double>> evaluate(double t, double s, const GridFunction& f,
                                              const std::vector<Vector>& points, Kind kind) const;

    std::shared_ptr<const PropagatorCache> cache_;
    WholeSpaceOptions options_;
};

}  // namespace ouevolve
