// SPDX-License-Identifier: MIT
#include "ouevolve/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "ouevolve/errors.hpp"

namespace ouevolve {

namespace {

GaussLegendreRule compute_rule(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1) throw ConfigError("Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

QuadraturePoints composite_gauss_legendre(double a, double b, int order, int panels) {
    const auto& rule = gauss_legendre(order);
    QuadraturePoints q;
    q.nodes.reserve(static_cast<std::size_t>(order) * panels);
    q.weights.reserve(static_cast<std::size_t>(order) * panels);
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        for (int i = 0; i < order; ++i) {
            q.nodes.push_back(mid + 0.5 * width * rule.nodes[i]);
            q.weights.push_back(0.5 * width * rule.weights[i]);
        }
    }
    return q;
}

QuadraturePoints gauss_jacobi01(int n, double b) {
    if (n < 1) throw ConfigError("Gauss-Jacobi order must be positive");
    if (!(b > -1.0)) throw ConfigError("Gauss-Jacobi exponent must exceed -1");
    // Jacobi weight (1-y)^0 (1+y)^b on [-1, 1], then y = 2x - 1.
    const double al = 0.0;
    const double be = b;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + al + be;
        J(k, k) = (k == 0) ? (be - al) / (al + be + 2.0) : (be * be - al * al) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double sm = 2.0 * m + al + be;
            const double off = std::sqrt(4.0 * m * (m + al) * (m + be) * (m + al + be) /
                                         (sm * sm * (sm + 1.0) * (sm - 1.0)));
            J(k, k + 1) = J(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    // Total mass of x^b on [0, 1].
    const double mu0 = 1.0 / (b + 1.0);
    QuadraturePoints q;
    for (int k = 0; k < n; ++k) {
        const double y = eig.eigenvalues()(k);
        const double v = eig.eigenvectors()(0, k);
        q.nodes.push_back(0.5 * (y + 1.0));
        q.weights.push_back(mu0 * v * v);
    }
    return q;
}

}  // namespace ouevolve
