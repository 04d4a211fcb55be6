// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ouevolve/coefficients.hpp"

namespace ouevolve {

struct PropagatorOptions {
    double ode_tol = 1e-12;    // per-unit-time error target of the RK4 flow
    double max_substep = 1e-2;  // cap on the RK4 substep
    int quad_nodes = 8;         // Gauss–Legendre panel order
    double quad_tol = 1e-12;    // relative change between panel doublings
    int max_panels = 1024;
};

/// Frozen (t, s) slice of the Gaussian kernel: covariance Q_{t,s}, drift
/// g(t,s) and the backward propagator U(s,t) used by the affine pullback.
struct KernelParams {
    double t = 0.0;
    double s = 0.0;
    Matrix U_st;    // U(s, t)
    Vector g_ts;    // g(t, s)
    Matrix Q_ts;    // symmetrized covariance
    Matrix chol;    // lower Cholesky factor of Q_ts
    Matrix Q_inv;
    double logdet = 0.0;
    double sigma_min = 0.0;  // sqrt of the extreme eigenvalues of Q_ts
    double sigma_max = 0.0;

    int dim() const { return static_cast<int>(Q_ts.rows()); }
};

/// The matrix evolution family U(t,s) of dU/dt = -M(t) U, U(s,s) = I, and the
/// integrals g(t,s) = int_s^t U(s,r) c(r) dr and
/// Q_{t,s} = int_s^t U(s,r) Q(r) Q(r)^T U(s,r)^T dr.
///
/// Results are memoized by the exact bit patterns of the requested times; the
/// cache is safe for concurrent readers.
class PropagatorCache {
public:
    explicit PropagatorCache(std::shared_ptr<const CoefficientSet> coeffs,
                             PropagatorOptions options = {});

    const CoefficientSet& coeffs() const { return *coeffs_; }
    std::shared_ptr<const CoefficientSet> coeffs_ptr() const { return coeffs_; }
    const PropagatorOptions& options() const { return options_; }
    int dim() const { return coeffs_->dim(); }

    /// U(a, b). For a >= b integrates V' = -M V from b to a; for a < b
    /// integrates V' = V M from a to b, which is U(b, a)^{-1}.
    Matrix flow_U(double a, double b) const;

    Vector drift_g(double t, double s) const;

    /// Populates every field of KernelParams. Requires t > s.
    KernelParams covariance_Q(double t, double s) const;

    /// U(s, r_i) for ascending r_i >= s along one RK4 trajectory.
    std::vector<Matrix> backward_trajectory(double s, const std::vector<double>& r) const;

private:
    struct Integrals {
        Vector g;
        Matrix Q;
    };
    struct KeyHash {
        std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
            return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
        }
    };
    using Key = std::pair<std::uint64_t, std::uint64_t>;

    static Key key(double a, double b);
    double substep() const;
    Integrals integrals(double t, double s) const;
    Matrix integrate_flow(double a, double b) const;

    std::shared_ptr<const CoefficientSet> coeffs_;
    PropagatorOptions options_;
    double m_scale_ = 0.0;

    mutable std::mutex mutex_;
    mutable std::unordered_map<Key, Matrix, KeyHash> flow_memo_;
    mutable std::unordered_map<Key, Integrals, KeyHash> integral_memo_;
    mutable std::unordered_map<Key, KernelParams, KeyHash> kernel_memo_;
};

struct ConstantsSample {
    double t = 0.0;
    double s = 0.0;
    double inv_sqrt_norm = 0.0;  // ||Q_{t,s}^{-1/2}||_2
    double sqrt_det = 0.0;       // (det Q_{t,s})^{1/2}
};

struct ConstantsReport {
    double C_inv_sqrt = 0.0;  // max (t-s)^{1/2} ||Q_{t,s}^{-1/2}||
    double C_det = 0.0;       // min (t-s)^{-d/2} (det Q_{t,s})^{1/2}
    std::vector<ConstantsSample> samples;
};

/// Scans log-spaced gaps t - s in [1e-4, T] with 0 <= s <= t <= T.
ConstantsReport estimate_constants(const PropagatorCache& cache, double T, int n_pairs);

}  // namespace ouevolve
