// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ouevolve/wholespace.hpp"

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

Vector v1(double x) { return Vector::Constant(1, x); }

double normal(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var); }

const Grid kLine(-16.0, 16.0, 32 * 64 + 1);

}  // namespace

TEST(KernelEval, StandardNormalAtZero) {
    EXPECT_NEAR(kernel_eval(heat()->covariance_Q(1.0, 0.0), v1(0.0)), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-14);
}

TEST(KernelEval, ModeValueFromLogdet) {
    FamilyParams p;
    p.dim = 2;
    p.omega = Expression::parse("1 + t");
    p.sigma = 0.7;
    const auto kp = cache_for("rotation", p)->covariance_Q(1.3, 0.4);
    EXPECT_NEAR(kernel_eval(kp, Vector::Zero(2)), std::exp(-0.5 * kp.logdet) / (2.0 * std::numbers::pi), 1e-14);
}

TEST(KernelEval, HalfVarianceDensity) {
    EXPECT_NEAR(kernel_eval(heat()->covariance_Q(0.5, 0.0), v1(1.0)), std::exp(-1.0) / std::sqrt(std::numbers::pi),
                1e-14);
}

TEST(KernelEval, UnitMassOverCutBox) {
    FamilyParams p;
    p.dim = 2;
    p.a = Expression::constant(0.4);
    const auto kp = cache_for("scalar_commuting", p)->covariance_Q(0.6, 0.0);
    const double r = 8.0 * kp.sigma_max;
    const int n = 401;
    const double h = 2 * r / (n - 1);
    double mass = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) mass += kernel_eval(kp, Vector{{-r + i * h, -r + j * h}});
    EXPECT_NEAR(mass * h * h, 1.0, 1e-8);
}

TEST(WholeSpace, ZeroStaysZero) {
    const WholeSpace ws(heat());
    EXPECT_EQ(lp_norm(ws.apply(1.0, 0.0, GridFunction(kLine), kLine), INFINITY), 0.0);
}

TEST(WholeSpace, EqualTimesIsIdentity) {
    const WholeSpace ws(heat());
    const GridFunction f = gaussian_bump(kLine, v1(0.3), 0.5);
    const GridFunction u = ws.apply(0.5, 0.5, f, kLine);
    for (std::size_t k = 0; k < f.values.size(); ++k) EXPECT_EQ(u.values[k], f.values[k]);
}

TEST(WholeSpace, GaussianConvolution) {
    const WholeSpace ws(heat());
    const GridFunction u = ws.apply(1.0, 0.0, gaussian_bump(kLine, v1(0.0), 1.0), kLine);
    EXPECT_NEAR(u.values[kLine.size() / 2], 1.0 / std::sqrt(4.0 * std::numbers::pi), 1e-12);
    double err = 0.0;
    for (std::size_t k = 0; k < kLine.size(); ++k)
        err = std::max(err, std::abs(u.values[k] - normal(kLine.point(k)(0), 2.0)));
    EXPECT_LE(err, 1e-10);
}

TEST(WholeSpace, DriftShiftsTheMean) {
    FamilyParams p;
    p.drift = {Expression::constant(0.75)};
    const WholeSpace ws(cache_for("drifted", p));
    // u(t,x) = E f(x + c (t - s) + W), so the profile moves by -c (t - s).
    const GridFunction u = ws.apply(1.0, 0.0, gaussian_bump(kLine, v1(0.0), 1.0), kLine);
    double err = 0.0;
    for (std::size_t k = 0; k < kLine.size(); ++k)
        err = std::max(err, std::abs(u.values[k] - normal(kLine.point(k)(0) + 0.75, 2.0)));
    EXPECT_LE(err, 1e-9);
}

TEST(WholeSpace, RotationInvisibleForRadialData) {
    FamilyParams p;
    p.dim = 2;
    p.omega = Expression::parse("1 + t");
    const Grid g({-6.0, -6.0}, {6.0, 6.0}, {121, 121});
    const GridFunction f = gaussian_bump(g, Vector::Zero(2), 0.6);
    const GridFunction rot = WholeSpace(cache_for("rotation", p)).apply(0.7, 0.2, f, g);
    const GridFunction hot = WholeSpace(heat(2)).apply(0.7, 0.2, f, g);
    EXPECT_LE(lp_norm(rot - hot, 2.0), 1e-5 * lp_norm(hot, 2.0));
}

TEST(WholeSpace, ChapmanKolmogorovHeatAndRotation) {
    {
        const WholeSpace ws(heat());
        const GridFunction f = gaussian_bump(kLine, v1(0.2), 0.4);
        const GridFunction one = ws.apply(1.0, 0.0, f, kLine);
        const GridFunction two = ws.apply(1.0, 0.37, ws.apply(0.37, 0.0, f, kLine), kLine);
        EXPECT_LE(lp_norm(one - two, 2.0), 1e-4 * lp_norm(f, 2.0));
    }
    {
        FamilyParams p;
        p.dim = 2;
        p.omega = Expression::parse("1 + t");
        const WholeSpace ws(cache_for("rotation", p));
        const Grid g({-8.0, -8.0}, {8.0, 8.0}, {129, 129});
        const GridFunction f = gaussian_bump(g, Vector{{1.0, 0.5}}, 0.5);
        const GridFunction one = ws.apply(1.0, 0.0, f, g);
        const GridFunction two = ws.apply(1.0, 0.5, ws.apply(0.5, 0.0, f, g), g);
        EXPECT_LE(lp_norm(one - two, 2.0), 1e-4 * lp_norm(f, 2.0));
    }
}

TEST(WholeSpace, HeatIsAnLpContraction) {
    const WholeSpace ws(heat());
    const GridFunction f = smoothed_indicator(kLine, v1(-1.0), v1(2.0), 0.3);
    for (double p : {1.5, 2.0, 4.0})
        for (double gap : {0.01, 0.1, 1.0})
            EXPECT_LE(lp_norm(ws.apply(gap, 0.0, f, kLine), p), 1.05 * lp_norm(f, p));
}

TEST(WholeSpaceGradient, ValuesAgainstClosedForm) {
    const WholeSpace ws(heat());
    const GridFunction f = gaussian_bump(kLine, v1(0.0), 1.0);
    const auto du = ws.gradient_points(1.0, 0.0, f, {v1(0.0), v1(1.0)});
    EXPECT_LE(std::abs(du[0](0)), 1e-8);
    EXPECT_NEAR(du[1](0), -0.5 * std::exp(-0.25) / std::sqrt(4.0 * std::numbers::pi), 1e-9);
}

TEST(WholeSpaceGradient, ConstantDataHasZeroGradientInside) {
    const WholeSpace ws(heat());
    const GridFunction f(kLine, 1.0);
    const auto du = ws.gradient_points(0.1, 0.0, f, {v1(0.0), v1(3.0)});
    for (const auto& d : du) EXPECT_LE(std::abs(d(0)), 1e-10);
}

TEST(WholeSpaceGradient, PathsAgree) {
    FamilyParams p;
    p.a = Expression::constant(1.0);
    const WholeSpace ws(cache_for("scalar_commuting", p));
    const Grid g(-8.0, 8.0, 16 * 1024 + 1);
    const GridFunction f = gaussian_bump(g, v1(0.4), 0.7);
    const auto a = ws.gradient(0.8, 0.1, f, g, GradientPath::kernel_gradient);
    const auto b = ws.gradient(0.8, 0.1, f, g, GradientPath::finite_difference);
    EXPECT_LE(lp_norm(a[0] - b[0], 2.0), 1e-6 * lp_norm(a[0], 2.0));
}

TEST(WholeSpaceGradient, FiniteDifferencePathIsSecondOrder) {
    FamilyParams p;
    p.dim = 2;
    p.omega = Expression::parse("1 + t");
    const WholeSpace ws(cache_for("rotation", p));
    double e[2];
    for (int level = 0; level < 2; ++level) {
        const int n = (64 << level) + 1;
        const Grid g({-8.0, -8.0}, {8.0, 8.0}, {n, n});
        const GridFunction f = gaussian_bump(g, Vector{{1.0, 0.5}}, 0.7);
        const auto a = ws.gradient(0.8, 0.1, f, g, GradientPath::kernel_gradient);
        const auto b = ws.gradient(0.8, 0.1, f, g, GradientPath::finite_difference);
        e[level] = (lp_norm(a[0] - b[0], 2.0) + lp_norm(a[1] - b[1], 2.0)) / lp_norm(a[0], 2.0);
    }
    EXPECT_LE(e[1], 1e-2);
    EXPECT_NEAR(e[0] / e[1], 4.0, 0.8);
}

TEST(WholeSpaceResidual, ZeroDataAndSecondOrder) {
    const WholeSpace ws(heat());
    std::vector<Vector> probes;
    for (double x = -2.0; x <= 2.0; x += 0.5) probes.push_back(v1(x));
    EXPECT_EQ(ws.pde_residual(0.5, 0.0, GridFunction(kLine), probes, 1e-3), 0.0);
    double r[2];
    for (int level = 0; level < 2; ++level) {
        const Grid g(-16.0, 16.0, 32 * (64 << level) + 1);
        r[level] = ws.pde_residual(0.5, 0.0, gaussian_bump(g, v1(0.3), 0.5), probes, 2e-3 / (1 << level));
    }
    EXPECT_LE(r[0], 5e-3);
    EXPECT_NEAR(r[0] / r[1], 4.0, 1.2);
}
