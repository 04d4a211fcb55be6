// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "ouevolve/errors.hpp"
#include "ouevolve/propagator.hpp"

using namespace ouevolve;

namespace {

std::shared_ptr<const PropagatorCache> cache_for(const std::string& tag, FamilyParams p) {
    return std::make_shared<const PropagatorCache>(std::make_shared<const CoefficientSet>(builtin_family(tag, p)));
}

std::shared_ptr<const PropagatorCache> heat(int dim = 1) {
    FamilyParams p;
    p.dim = dim;
    return cache_for("heat", p);
}

std::shared_ptr<const PropagatorCache> scalar_m1(const char* drift = nullptr) {
    FamilyParams p;
    p.a = Expression::constant(1.0);
    if (drift) p.drift = {Expression::parse(drift)};
    return cache_for("scalar_commuting", p);
}

std::shared_ptr<const PropagatorCache> rotation(const char* omega = "1") {
    FamilyParams p;
    p.dim = 2;
    p.omega = Expression::parse(omega);
    return cache_for("rotation", p);
}

}  // namespace

TEST(FlowU, IdentityWithoutDrift) {
    const auto c = heat(2);
    for (auto [t, s] : {std::pair{1.0, 0.0}, {0.3, 2.0}, {5.0, 5.0}})
        EXPECT_TRUE(c->flow_U(t, s).isApprox(Matrix::Identity(2, 2), 1e-15));
}

TEST(FlowU, ScalarExponential) { EXPECT_NEAR(scalar_m1()->flow_U(0.5, 0.0)(0, 0), std::exp(-0.5), 1e-12); }

TEST(FlowU, RotationByMinusGap) {
    Matrix expected(2, 2);
    expected << 0, 1, -1, 0;
    EXPECT_LE((rotation()->flow_U(std::numbers::pi / 2, 0.0) - expected).norm(), 1e-10);
}

TEST(FlowU, NegativeTimesRejected) { EXPECT_THROW(heat()->flow_U(-1.0, 0.0), ConfigError); }

TEST(DriftG, ZeroWithoutC) { EXPECT_EQ(heat(2)->drift_g(1.0, 0.0).norm(), 0.0); }

TEST(DriftG, ConstantIntegrand) {
    FamilyParams p;
    p.dim = 2;
    p.drift = {Expression::constant(1.0), Expression::constant(0.0)};
    const Vector g = cache_for("drifted", p)->drift_g(3.0, 1.0);
    EXPECT_NEAR(g(0), 2.0, 1e-12);
    EXPECT_NEAR(g(1), 0.0, 1e-12);
}

TEST(DriftG, ScalarClosedForm) { EXPECT_NEAR(scalar_m1("1")->drift_g(1.0, 0.0)(0), std::exp(1.0) - 1.0, 1e-10); }

TEST(CovarianceQ, Heat) {
    const auto kp = heat()->covariance_Q(1.0, 0.0);
    EXPECT_NEAR(kp.Q_ts(0, 0), 1.0, 1e-12);
}

TEST(CovarianceQ, HeatScalesWithSigmaSquared) {
    FamilyParams p;
    p.sigma = 1.5;
    EXPECT_NEAR(cache_for("heat", p)->covariance_Q(2.0, 1.2).Q_ts(0, 0), 2.25 * 0.8, 1e-12);
}

TEST(CovarianceQ, RotationIsGapTimesIdentity) {
    const auto kp = rotation("1 + t")->covariance_Q(0.75, 0.5);
    EXPECT_LE((kp.Q_ts - 0.25 * Matrix::Identity(2, 2)).norm(), 1e-10);
}

TEST(CovarianceQ, ScalarClosedForm) {
    const auto kp = scalar_m1()->covariance_Q(1.0, 0.0);
    EXPECT_NEAR(kp.Q_ts(0, 0), (std::exp(2.0) - 1.0) / 2.0, 1e-9);
    EXPECT_NEAR(kp.logdet, std::log((std::exp(2.0) - 1.0) / 2.0), 1e-9);
}

TEST(CovarianceQ, NeedsPositiveGap) { EXPECT_THROW(heat()->covariance_Q(1.0, 1.0), ConfigError); }

TEST(CovarianceQ, CommutingClosedFormInTwoDimensions) {
    // M(t) = a(t) A0 with a(t) = 2t: U(s,r) = exp(A0 (r^2 - s^2)).
    Matrix A0(2, 2);
    A0 << 1, 2, 0, 3;
    FamilyParams p;
    p.dim = 2;
    p.a = Expression::parse("2*t");
    p.A0 = A0;
    const auto c = cache_for("scalar_commuting", p);
    Eigen::EigenSolver<Matrix> es(A0);
    const Matrix V = es.eigenvectors().real();
    const Matrix Vinv = V.inverse();
    auto expA = [&](double x) {
        Vector d = es.eigenvalues().real();
        for (int i = 0; i < 2; ++i) d(i) = std::exp(x * d(i));
        return Matrix(V * d.asDiagonal() * Vinv);
    };
    const double t = 0.8, s = 0.3;
    EXPECT_LE((c->flow_U(t, s) - expA(-(t * t - s * s))).norm(), 1e-9);
    // Q_{t,s} = int_s^t exp(A0 u) exp(A0 u)^T dr with u = r^2 - s^2, by fine Simpson.
    Matrix Q = Matrix::Zero(2, 2);
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double r = s + (t - s) * i / n;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const Matrix E = expA(r * r - s * s);
        Q += w * E * E.transpose();
    }
    Q *= (t - s) / (3.0 * n);
    EXPECT_LE((c->covariance_Q(t, s).Q_ts - Q).norm() / Q.norm(), 1e-8);
}

TEST(PropagatorProperties, CocycleAndInverse) {
    const auto c = rotation("1 + 0.5*sin(3*t)");
    const double tol = 10.0 * c->options().ode_tol * 2.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        double a = u(rng), b = u(rng), m = u(rng);
        if (a > b) std::swap(a, b);
        if (m < a) std::swap(m, a);
        if (m > b) std::swap(m, b);
        const double s = a, r = m, t = b;
        EXPECT_LE((c->flow_U(t, s) - c->flow_U(t, r) * c->flow_U(r, s)).norm(), tol);
        EXPECT_LE((c->flow_U(t, s) * c->flow_U(s, t) - Matrix::Identity(2, 2)).norm(), tol);
    }
}

TEST(PropagatorProperties, CovarianceMonotoneInT) {
    FamilyParams p;
    p.dim = 2;
    p.a = Expression::parse("cos(t)");
    Matrix A0(2, 2);
    A0 << 0.5, -1, 2, 0.1;
    p.A0 = A0;
    const auto c = cache_for("scalar_commuting", p);
    Matrix prev = c->covariance_Q(0.05, 0.0).Q_ts;
    for (double t = 0.1; t <= 2.0; t += 0.1) {
        const Matrix cur = c->covariance_Q(t, 0.0).Q_ts;
        Eigen::SelfAdjointEigenSolver<Matrix> es(cur - prev);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
        prev = cur;
    }
}

TEST(PropagatorProperties, CacheReturnsBitwiseEqualResults) {
    const auto c = rotation("1 + t");
    const Matrix a = c->covariance_Q(0.9, 0.1).Q_ts;
    const Matrix b = c->covariance_Q(0.9, 0.1).Q_ts;
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * 4));
}

TEST(EstimateConstants, HeatAndRotationAreExactlyOne) {
    for (const auto& c : {heat(), rotation()}) {
        const auto rep = estimate_constants(*c, 1.0, 24);
        EXPECT_NEAR(rep.C_inv_sqrt, 1.0, 1e-6);
        EXPECT_NEAR(rep.C_det, 1.0, 1e-6);
    }
}

TEST(EstimateConstants, ScalarMatchesClosedForm) {
    const auto rep = estimate_constants(*scalar_m1(), 1.0, 24);
    double expected = 0.0;
    for (const auto& smp : rep.samples) {
        const double gap = smp.t - smp.s;
        expected = std::max(expected, std::sqrt(gap / ((std::exp(2.0 * gap) - 1.0) / 2.0)));
    }
    EXPECT_NEAR(rep.C_inv_sqrt, expected, 1e-8);
    EXPECT_LE(rep.C_inv_sqrt, 1.0);
    EXPECT_GT(rep.C_det, 0.0);
}
