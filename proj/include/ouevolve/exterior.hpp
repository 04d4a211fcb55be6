// SPDX-License-Identifier: MIT
#pragma once

#include <memory>
#include <vector>

#include "ouevolve/bounded.hpp"
#include "ouevolve/grid.hpp"
#include "ouevolve/propagator.hpp"
#include "ouevolve/wholespace.hpp"

namespace ouevolve {

/// Radial cut-offs built from the quintic smoothstep:
///   phi = 0 for |x| <= R+1, 1 for |x| >= R+2;
///   eta = 1 for |x| <= R+2, 0 for |x| >= R+5/2.
class CutoffPair {
public:
    explicit CutoffPair(double R) : R_(R) {}

    double R() const { return R_; }
    double phi(const Vector& x) const;
    double eta(const Vector& x) const;
    Vector grad_phi(const Vector& x) const;
    Matrix hess_phi(const Vector& x) const;

    /// Checks the defining properties at every node; NumericalError if any fails.
    void check_on(const Grid& g) const;

private:
    double R_;
};

struct ExteriorOptions {
    int quad_nodes = 8;  // Gauss-Legendre nodes per time integral (in tau, r = s + tau^2)
    int first_level_nodes = 16;  // nodes of the outermost integral when larger than quad_nodes
    /// The outermost `two_sided_levels` integrals are split at the midpoint
    /// with r = t - tau^2 on the upper half, which resolves the layer of
    /// W(t,r) F(r,s) f at r -> t near the annulus.
    int two_sided_levels = 1;
    int k_max = 3;
    double norm_p = 2.0;
    /// Convergence requirement on the last retained term relative to the sum.
    double series_tol = 0.1;
    bool strict = true;  // throw ToleranceNotMet when series_tol is not met
    WholeSpaceOptions wholespace;
    BoundedOptions bounded;
};

struct PicardDiagnostics {
    std::vector<double> term_norms;   // ||P_k(t,s) f||_p, k = 0..K
    std::vector<double> term_bound;   // fitted Gamma-quotient envelope for ||P_k f||_p
    std::vector<double> tail_bound;   // C^{n+1} Gamma(1/2)^n / [(n-1)/2]! (t-s)^{(n-1)/2} ||f||_p, n = 1..K
    std::vector<int> quad_nodes_per_level;
    int truncation_k = 0;
    double est_series_error = 0.0;   // ||P_K f||_p
    double fitted_C = 0.0;
    bool converged = true;
    long w_applications = 0;
    long f_applications = 0;
    long skipped_subtrees = 0;
    double wall_time_s = 0.0;
};

struct PicardResult {
    GridFunction solution;
    std::vector<GridFunction> terms;
    PicardDiagnostics diagnostics;
};

struct IntegralEquationCheck {
    double defect = 0.0;            // ||P f - (W f + int P(t,r) F(r,s) f dr)||_p
    double est_series_error = 0.0;
    int quadrature_nodes = 0;       // outer nodes used by the check
};

struct TimeNode {
    double r = 0.0;
    double weight = 0.0;
};

/// Quadrature for int_s^t g(r) dr with r = s + tau^2 and Gauss-Legendre in
/// tau; `two_sided` splits at the midpoint and maps the upper half by
/// r = t - tau^2 (2 * nodes points).
std::vector<TimeNode> picard_time_rule(double t, double s, int nodes, bool two_sided);

/// The exterior evolution built by gluing the whole-space and bounded-domain
/// systems with the cut-offs and summing the Picard series of the resulting
/// Volterra equation P = W + int P(t,r) F(r,s) dr.
class ExteriorSystem {
public:
    ExteriorSystem(std::shared_ptr<const PropagatorCache> cache, DomainSpec domain, Grid grid,
                   ExteriorOptions options = {});

    const Grid& grid() const { return grid_; }
    const DomainSpec& domain() const { return domain_; }
    const ExteriorOptions& options() const { return options_; }
    const CutoffPair& cutoffs() const { return cutoffs_; }
    const std::vector<char>& omega_mask() const { return omega_mask_; }
    const std::vector<char>& annulus_mask() const { return annulus_mask_; }
    const WholeSpace& wholespace() const { return ws_; }
    const BoundedProblem& bounded() const { return *bounded_; }

    /// f restricted to Omega (masked values zeroed).
    GridFunction restrict_to_omega(const GridFunction& f) const;

    GridFunction apply_W(double t, double s, const GridFunction& f) const;
    /// Correction operator; the result vanishes off the annulus.
    GridFunction apply_F(double t, double s, const GridFunction& f) const;

    /// Truncated series sum_{k <= k_max} P_k f. A non-negative `nodes` uses
    /// that rule on every level; otherwise the options decide.
    PicardResult picard_apply(double t, double s, const GridFunction& f, int k_max = -1,
                              int nodes = -1) const;

    /// L(t) u on Omega by grid finite differences.
    GridFunction apply_L(double t, const GridFunction& u) const;

    /// max |u| over Omega nodes with a grid neighbour outside Omega.
    double boundary_trace(const GridFunction& u) const;

    /// Omega nodes at least `cells` grid cells from the annulus, the obstacle
    /// and the box edge.
    std::vector<std::size_t> interior_probes(int cells = 2) const;

    double t_derivative_residual(double t, double s, const GridFunction& f, double dt) const;
    double s_derivative_residual(double t, double s, const GridFunction& f, double ds) const;

    IntegralEquationCheck integral_equation_check(double t, double s, const GridFunction& f,
                                                  int outer_nodes) const;

private:
    void accumulate(double t, double s, const GridFunction& g, double weight, int level,
                    const std::vector<int>& nodes, std::vector<GridFunction>& terms,
                    PicardDiagnostics& diag, double skip_tol) const;
    double probe_l2(const GridFunction& r) const;

    std::shared_ptr<const PropagatorCache> cache_;
    DomainSpec domain_;
    Grid grid_;
    ExteriorOptions options_;
    CutoffPair cutoffs_;
    WholeSpace ws_;
    std::unique_ptr<BoundedProblem> bounded_;
    std::vector<char> omega_mask_;
    std::vector<char> annulus_mask_;
    std::vector<std::size_t> annulus_nodes_;
    std::vector<Vector> annulus_points_;
    GridFunction phi_;
    GridFunction eta_;
};

}  // namespace ouevolve
