// SPDX-License-Identifier: MIT
#include "ouevolve/propagator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "ouevolve/errors.hpp"
#include "ouevolve/quadrature.hpp"

namespace ouevolve {

namespace {

// One classical RK4 step for the forward (V' = -M V) or reversed (V' = V M) form.
Matrix rk4_step(const CoefficientSet& c, const Matrix& V, double tau, double h, bool reversed) {
    auto rhs = [&](double time, const Matrix& X) -> Matrix {
        const Matrix m = c.M(time);
        return reversed ? Matrix(X * m) : Matrix(-m * X);
    };
    const Matrix k1 = rhs(tau, V);
    const Matrix k2 = rhs(tau + 0.5 * h, V + 0.5 * h * k1);
    const Matrix k3 = rhs(tau + 0.5 * h, V + 0.5 * h * k2);
    const Matrix k4 = rhs(tau + h, V + h * k3);
    return V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances V across [from, to] (from <= to) with substeps no larger than h.
Matrix advance(const CoefficientSet& c, Matrix V, double from, double to, double h,
               bool reversed) {
    const double span = to - from;
    if (span <= 0.0) return V;
    const auto n = static_cast<long>(std::ceil(span / h - 1e-12));
    const double step = span / static_cast<double>(std::max(1L, n));
    for (long i = 0; i < std::max(1L, n); ++i) {
        const double tau = from + static_cast<double>(i) * step;
        V = rk4_step(c, V, tau, step, reversed);
        if (!V.allFinite()) throw DivergenceError("propagator diverged at tau = " + std::to_string(tau));
    }
    return V;
}

}  // namespace

PropagatorCache::PropagatorCache(std::shared_ptr<const CoefficientSet> coeffs,
                                 PropagatorOptions options)
    : coeffs_(std::move(coeffs)), options_(options) {
    if (!coeffs_) throw ConfigError("PropagatorCache needs coefficients");
    if (!(options_.ode_tol > 0.0)) throw ConfigError("ode_tol must be positive");
    if (options_.quad_nodes < 2) throw ConfigError("quad_nodes must be at least 2");
    // Scale of M for the substep heuristic, sampled on [0, 1].
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        if (t > coeffs_->t_max()) break;
        m_scale_ = std::max(m_scale_, coeffs_->M(t).norm());
    }
}

PropagatorCache::Key PropagatorCache::key(double a, double b) {
    return {std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)};
}

double PropagatorCache::substep() const {
    return std::min(options_.max_substep, std::pow(options_.ode_tol, 0.25) / (1.0 + m_scale_));
}

Matrix PropagatorCache::integrate_flow(double a, double b) const {
    const int d = dim();
    const Matrix I = Matrix::Identity(d, d);
    if (a == b) return I;
    if (a > b) return advance(*coeffs_, I, b, a, substep(), false);
    return advance(*coeffs_, I, a, b, substep(), true);
}

Matrix PropagatorCache::flow_U(double a, double b) const {
    if (!(a >= 0.0) || !(b >= 0.0)) throw ConfigError("flow_U: times must be non-negative");
    if (a == b) return Matrix::Identity(dim(), dim());
    const Key k = key(a, b);
    {
        std::lock_guard lock(mutex_);
        if (auto it = flow_memo_.find(k); it != flow_memo_.end()) return it->second;
    }
    Matrix U = integrate_flow(a, b);
    std::lock_guard lock(mutex_);
    flow_memo_.emplace(k, U);
    return U;
}

std::vector<Matrix> PropagatorCache::backward_trajectory(double s,
                                                         const std::vector<double>& r) const {
    std::vector<Matrix> out;
    out.reserve(r.size());
    Matrix V = Matrix::Identity(dim(), dim());
    double at = s;
    const double h = substep();
    for (double ri : r) {
        if (ri < at) throw ConfigError("backward_trajectory: nodes must be ascending and >= s");
        V = advance(*coeffs_, V, at, ri, h, true);
        at = ri;
        out.push_back(V);
    }
    return out;
}

PropagatorCache::Integrals PropagatorCache::integrals(double t, double s) const {
    const Key k = key(t, s);
    {
        std::lock_guard lock(mutex_);
        if (auto it = integral_memo_.find(k); it != integral_memo_.end()) return it->second;
    }
    const int d = dim();
    Integrals result{Vector::Zero(d), Matrix::Zero(d, d)};
    if (t > s) {
        auto evaluate = [&](int panels) {
            const auto q = composite_gauss_legendre(s, t, options_.quad_nodes, panels);
            const auto U = backward_trajectory(s, q.nodes);
            Integrals acc{Vector::Zero(d), Matrix::Zero(d, d)};
            for (std::size_t i = 0; i < q.nodes.size(); ++i) {
                const double r = q.nodes[i];
                const Matrix UQ = U[i] * coeffs_->Q(r);
                acc.g += q.weights[i] * (U[i] * coeffs_->c(r));
                acc.Q += q.weights[i] * (UQ * UQ.transpose());
            }
            return acc;
        };
        int panels = 1;
        Integrals prev = evaluate(panels);
        while (true) {
            panels *= 2;
            Integrals next = evaluate(panels);
            const double dq = (next.Q - prev.Q).norm();
            const double dg = (next.g - prev.g).norm();
            const bool q_ok = dq <= options_.quad_tol * next.Q.norm();
            const bool g_ok = dg <= options_.quad_tol * next.g.norm() + 1e-15 * (t - s);
            if (q_ok && g_ok) {
                result = std::move(next);
                break;
            }
            if (panels >= options_.max_panels) {
                throw ToleranceNotMet("propagator quadrature did not converge for (t,s) = (" +
                                          std::to_string(t) + ", " + std::to_string(s) + ")",
                                      std::max(dq / std::max(next.Q.norm(), 1e-300), dg));
            }
            prev = std::move(next);
        }
    }
    std::lock_guard lock(mutex_);
    integral_memo_.emplace(k, result);
    return result;
}

Vector PropagatorCache::drift_g(double t, double s) const {
    if (!(t >= s)) throw ConfigError("drift_g: need t >= s");
    return integrals(t, s).g;
}

KernelParams PropagatorCache::covariance_Q(double t, double s) const {
    if (!(t > s)) throw ConfigError("covariance_Q: need t > s");
    const Key k = key(t, s);
    {
        std::lock_guard lock(mutex_);
        if (auto it = kernel_memo_.find(k); it != kernel_memo_.end()) return it->second;
    }
    const Integrals I = integrals(t, s);
    KernelParams p;
    p.t = t;
    p.s = s;
    p.g_ts = I.g;
    p.Q_ts = 0.5 * (I.Q + I.Q.transpose());
    p.U_st = flow_U(s, t);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(p.Q_ts);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    Eigen::LLT<Matrix> llt(p.Q_ts);
    if (llt.info() != Eigen::Success || !(lmin > 0.0))
        throw DegenerateCovariance("Q_{t,s} is not positive definite", lmin);
    p.chol = llt.matrixL();
    p.logdet = 2.0 * p.chol.diagonal().array().log().sum();
    p.Q_inv = llt.solve(Matrix::Identity(dim(), dim()));
    p.sigma_min = std::sqrt(lmin);
    p.sigma_max = std::sqrt(lmax);

    std::lock_guard lock(mutex_);
    kernel_memo_.emplace(k, p);
    return p;
}

ConstantsReport estimate_constants(const PropagatorCache& cache, double T, int n_pairs) {
    if (!(T > 0.0)) throw ConfigError("estimate_constants: T must be positive");
    if (n_pairs < 10) throw ConfigError("estimate_constants: n_pairs must be at least 10");
    const double gap_min = std::min(1e-4, T);
    const int d = cache.dim();
    ConstantsReport report;
    report.C_inv_sqrt = 0.0;
    report.C_det = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_pairs; ++i) {
        const double gap = gap_min * std::pow(T / gap_min, static_cast<double>(i) / (n_pairs - 1));
        const double s = (T - gap) * 0.5 * (i % 3);
        const double t = s + gap;
        const KernelParams kp = cache.covariance_Q(t, s);
        ConstantsSample sample{t, s, 1.0 / kp.sigma_min, std::exp(0.5 * kp.logdet)};
        report.C_inv_sqrt = std::max(report.C_inv_sqrt, std::sqrt(gap) * sample.inv_sqrt_norm);
        report.C_det = std::min(report.C_det, std::pow(gap, -0.5 * d) * sample.sqrt_det);
        report.samples.push_back(sample);
    }
    if (!std::isfinite(report.C_inv_sqrt) || !(report.C_det > 0.0))
        throw NumericalError("estimate_constants: non-finite constants");
    return report;
}

}  // namespace ouevolve
