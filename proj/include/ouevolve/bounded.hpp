// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ouevolve/grid.hpp"

namespace ouevolve {

struct BoundedOptions {
    double theta = 0.5;   // 1/2 Crank-Nicolson, 1 implicit Euler
    double dt = 1e-3;     // maximal time step
    /// When positive, the step is also capped at (t - s) / min_steps. This
    /// makes the step grid depend on t - s, so leave it at 0 whenever
    /// identical step grids across calls matter.
    int min_steps = 0;
    /// Implicit Euler substeps replacing the first step when theta < 1. Zero
    /// gives pure Crank-Nicolson, which is exactly multiplicative over
    /// identical step grids but leaves rough data oscillating.
    int startup_steps = 2;
    double solver_tol = 1e-10;
    bool check_max_principle = false;
};

struct BoundedStats {
    int steps = 0;
    int upwind_rows = 0;  // rows using upwind drift in the last assembly
    double max_solver_residual = 0.0;
    std::vector<std::string> warnings;
};

/// Finite-difference realization of the Dirichlet evolution system on the
/// masked region D. Unknowns are the mask points off the box edge; every
/// other node is pinned to 0.
class BoundedProblem {
public:
    BoundedProblem(std::shared_ptr<const CoefficientSet> coeffs, Grid grid, std::vector<char> mask,
                   BoundedOptions options = {});

    const Grid& grid() const { return grid_; }
    const std::vector<char>& mask() const { return mask_; }
    const BoundedOptions& options() const { return options_; }
    const CoefficientSet& coeffs() const { return *coeffs_; }
    std::size_t unknowns() const { return unknown_nodes_.size(); }
    const std::vector<std::size_t>& unknown_nodes() const { return unknown_nodes_; }

    /// L(t) on the unknowns. Central second differences, 4-point cross for
    /// mixed terms, central drift unless |b_i| h_i / a_ii > 2 (then upwind).
    Eigen::SparseMatrix<double> assemble_L(double t, int* upwind_rows = nullptr) const;

    /// theta-scheme from s to t: fixed steps of options().dt from s and a
    /// final partial step landing on t.
    GridFunction evolve(double t, double s, const GridFunction& f, BoundedStats* stats = nullptr) const;

private:
    struct Factorization;
    Eigen::SparseMatrix<double> operator_at(double t, int* upwind_rows) const;
    std::shared_ptr<const Factorization> factor(double tau_new, double step, double theta) const;
    std::vector<double> step_once(const std::vector<double>& u, double tau, double step, double theta,
                                  BoundedStats* stats) const;

    std::shared_ptr<const CoefficientSet> coeffs_;
    Grid grid_;
    std::vector<char> mask_;
    BoundedOptions options_;
    std::vector<std::size_t> unknown_nodes_;
    std::vector<long> node_to_unknown_;
    // L for autonomous coefficients, assembled once.
    Eigen::SparseMatrix<double> L_const_;
    int upwind_const_ = 0;

    mutable std::mutex cache_mutex_;
    mutable std::vector<std::pair<std::pair<double, double>, std::shared_ptr<const Factorization>>> factor_cache_;
};

struct SmoothingRow {
    double gap = 0.0;
    double norm_q = 0.0;       // ||P_D(t,s) f||_q
    double grad_norm_p = 0.0;  // ||D_x P_D(t,s) f||_p
};

std::vector<SmoothingRow> smoothing_probe_bounded(const BoundedProblem& problem, double p, double q,
                                                  const GridFunction& f,
                                                  const std::vector<double>& gaps, double s = 0.0);

}  // namespace ouevolve
