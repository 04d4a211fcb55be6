// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ouevolve/bounded.hpp"
#include "ouevolve/exterior.hpp"
#include "ouevolve/grid.hpp"
#include "ouevolve/propagator.hpp"
#include "ouevolve/wholespace.hpp"

namespace ouevolve {

struct RateReport {
    std::vector<std::pair<double, double>> pairs;  // (gap, value)
    double fitted_slope = 0.0;
    double fitted_logC = 0.0;
    double r_squared = 0.0;
    double target_slope = 0.0;
    double tolerance = 0.0;
    double min_r_squared = 0.98;
    bool r_squared_applies = true;
    bool pass = false;
};

/// Least squares of log(value) against log(gap). The r^2 requirement is not
/// applied when the target slope is zero: a flat power law has no variance for
/// the fit to explain.
RateReport rate_fit(const std::vector<std::pair<double, double>>& samples, double target_slope,
                    double tolerance, double min_r_squared = 0.98);

/// Uniform view of the three evolution systems for the verification harness.
class Evolution {
public:
    virtual ~Evolution() = default;
    virtual std::string name() const = 0;
    virtual const Grid& grid() const = 0;
    /// f as admissible initial data for this system (mask applied).
    virtual GridFunction prepare(const GridFunction& f) const { return f; }
    virtual GridFunction apply(double t, double s, const GridFunction& f) const = 0;
    /// D_x P(t,s) f; finite differences of apply() unless overridden.
    virtual std::vector<GridFunction> gradient(double t, double s, const GridFunction& f) const;
    /// Same, when u = apply(t, s, f) is already at hand.
    virtual std::vector<GridFunction> gradient_of(double, double, const GridFunction&,
                                                  const GridFunction& u) const {
        return ouevolve::gradient(u);
    }
};

class WholeSpaceEvolution : public Evolution {
public:
    WholeSpaceEvolution(const WholeSpace& ws, Grid grid) : ws_(ws), grid_(grid) {}
    std::string name() const override { return "wholespace"; }
    const Grid& grid() const override { return grid_; }
    GridFunction apply(double t, double s, const GridFunction& f) const override;
    std::vector<GridFunction> gradient(double t, double s, const GridFunction& f) const override;
    std::vector<GridFunction> gradient_of(double t, double s, const GridFunction& f,
                                          const GridFunction& u) const override;

private:
    const WholeSpace& ws_;
    Grid grid_;
};

class BoundedEvolution : public Evolution {
public:
    explicit BoundedEvolution(const BoundedProblem& problem) : problem_(problem) {}
    std::string name() const override { return "bounded"; }
    const Grid& grid() const override { return problem_.grid(); }
    GridFunction prepare(const GridFunction& f) const override { return f.with_mask(problem_.mask()); }
    GridFunction apply(double t, double s, const GridFunction& f) const override;

private:
    const BoundedProblem& problem_;
};

class ExteriorEvolution : public Evolution {
public:
    explicit ExteriorEvolution(const ExteriorSystem& system, int k_max = -1, int nodes = -1)
        : system_(system), k_max_(k_max), nodes_(nodes) {}
    std::string name() const override { return "exterior"; }
    const Grid& grid() const override { return system_.grid(); }
    GridFunction prepare(const GridFunction& f) const override { return system_.restrict_to_omega(f); }
    GridFunction apply(double t, double s, const GridFunction& f) const override;

private:
    const ExteriorSystem& system_;
    int k_max_;
    int nodes_;
};

/// Gaussian bumps at `center` with widths log-spaced in [w_min, w_max].
std::vector<GridFunction> bump_family(const Grid& g, const Vector& center, double w_min,
                                      double w_max, int count);

/// Fits sup_f ||P(s+gap, s) f||_q / ||f||_p over the family against
/// gap^{-(d/2)(1/p - 1/q)}. A single profile fixes the spatial scale and
/// measures an L^1-type rate instead of the operator norm, hence the family.
RateReport verify_smoothing(const Evolution& evo, double p, double q,
                            const std::vector<GridFunction>& family, const std::vector<double>& gaps,
                            double tolerance, double s = 0.0);

/// Same for sup_f ||D_x P f||_p / ||f||_p against gap^{-1/2}.
RateReport verify_gradient_smoothing(const Evolution& evo, double p,
                                     const std::vector<GridFunction>& family,
                                     const std::vector<double>& gaps, double tolerance,
                                     double s = 0.0);

struct SmoothingReports {
    RateReport lq;
    RateReport gradient;
};

/// Both fits above from a single evolution per (datum, gap).
SmoothingReports verify_smoothing_rates(const Evolution& evo, double p, double q,
                                        const std::vector<GridFunction>& family,
                                        const std::vector<double>& gaps, double lq_tolerance,
                                        double gradient_tolerance, double s = 0.0);

struct SobolevRow {
    double gap = 0.0;
    double ratio = 0.0;  // ||P f||_{k,p} / ||f||_{k,p}
    double gain = 0.0;   // ||P f||_{2,p} / ||f||_{1,p} * gap^{1/2}
};

struct SobolevReport {
    int k = 1;
    double p = 2.0;
    std::vector<SobolevRow> rows;
    double sup_ratio = 0.0;
    double sup_gain = 0.0;
};

SobolevReport verify_sobolev_stability(const Evolution& evo, int k, double p, const GridFunction& f,
                                       const std::vector<double>& gaps, double s = 0.0);

struct Lemma32Report {
    std::vector<double> beta_terms;       // Beta-function recursion
    std::vector<double> gamma_terms;      // closed Gamma quotient
    std::vector<double> quadrature_terms; // nested numerical quadrature (first n_quad terms)
    double max_quadrature_rel_diff = 0.0;
    double max_gamma_rel_diff = 0.0;
    double series_sum = 0.0;
    double series_bound = 0.0;  // sum_n T_n(T) / T^alpha
    bool super_geometric = false;  // term ratios decrease beyond n = 4
    bool uniform_flag = false;
};

/// Scalar instance of the iterated-convolution lemma with R = C0 (t-s)^alpha,
/// S = C0 (t-s)^beta, evaluated at t - s = T.
Lemma32Report lemma32_demo(double alpha, double beta, double C0, double T, int n_terms,
                           int n_quad = 6, int quad_nodes = 10);

struct MonteCarloReport {
    Matrix sample_cov;
    Matrix exact_cov;
    Vector sample_mean;
    double cov_err = 0.0;          // relative Frobenius error
    double cov_tol = 0.0;          // 5 / sqrt(n_paths)
    double mean_max_sigma = 0.0;   // max_i |mean_i| / (sqrt(Q_ii / n))
    double mean_flow_err = 0.0;    // |U(s,t) x + g - y_ode(s)| / (1 + |x|)
    bool pass = false;
};

MonteCarloReport mc_covariance_check(const PropagatorCache& cache, double t, double s, long n_paths,
                                     int n_steps, std::uint64_t seed, const Vector& x0);

/// ||P(t,s) f - P(t,r) P(r,s) f||_2 / ||f||_2.
double ck_defect(const Evolution& evo, double t, double r, double s, const GridFunction& f);

struct SingularFit {
    double A = 0.0;
    double B = 0.0;
    double gamma = 0.0;  // exponent of the singular part
    double rms_log_residual = 0.0;
    double envelope_C = 0.0;  // max value / (1 + gap^{-1/2})
};

/// Fits value = A + B gap^gamma with A, B >= 0 (grid search in gamma).
SingularFit fit_singular_part(const std::vector<std::pair<double, double>>& samples);

/// n points log-spaced in [lo, hi].
std::vector<double> log_spaced(double lo, double hi, int n);

}  // namespace ouevolve
