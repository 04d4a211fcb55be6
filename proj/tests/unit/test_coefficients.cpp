// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ouevolve/coefficients.hpp"
#include "ouevolve/errors.hpp"

using namespace ouevolve;

namespace {

CoefficientSet constant_Q(const Matrix& Q) {
    const int d = static_cast<int>(Q.rows());
    return CoefficientSet(
        d, [Q](double) { return Q; }, [d](double) { return Matrix(Matrix::Zero(d, d)); },
        [d](double) { return Vector(Vector::Zero(d)); }, 1e-3, FamilyTag::custom, true);
}

}  // namespace

TEST(Expression, ArithmeticAndFunctions) {
    EXPECT_DOUBLE_EQ(Expression::parse("1 + 2*t")(0.5), 2.0);
    EXPECT_DOUBLE_EQ(Expression::parse("-t^2")(3.0), -9.0);
    EXPECT_NEAR(Expression::parse("sin(t) + exp(0)")(std::numbers::pi / 2), 2.0, 1e-15);
    EXPECT_NEAR(Expression::parse("pi")(0.0), std::numbers::pi, 1e-15);
    EXPECT_FALSE(Expression::parse("3").depends_on_time());
    EXPECT_TRUE(Expression::parse("cos(t)").depends_on_time());
}

TEST(Expression, ParseErrorsAreConfigErrors) {
    EXPECT_THROW(Expression::parse("1 +"), ConfigError);
    EXPECT_THROW(Expression::parse("foo(t)"), ConfigError);
    EXPECT_THROW(Expression::parse("(t"), ConfigError);
}

TEST(Ellipticity, IdentityGivesOne) {
    const auto rep = check_ellipticity(constant_Q(Matrix::Identity(2, 2)), 0.0, 5.0, 10);
    EXPECT_NEAR(rep.min_singular_value, 1.0, 1e-14);
}

TEST(Ellipticity, DiagonalGivesSmallestEntry) {
    Matrix Q = Matrix::Zero(2, 2);
    Q(0, 0) = 2.0;
    Q(1, 1) = 3.0;
    EXPECT_NEAR(check_ellipticity(constant_Q(Q), 0.0, 1.0, 10).min_singular_value, 2.0, 1e-14);
}

TEST(Ellipticity, ScalarOscillationMinimumNearThreePiHalves) {
    const CoefficientSet c(
        1, [](double t) { return Matrix::Constant(1, 1, 1.0 + 0.5 * std::sin(t)); },
        [](double) { return Matrix(Matrix::Zero(1, 1)); }, [](double) { return Vector(Vector::Zero(1)); }, 0.4,
        FamilyTag::custom);
    const int n = 100;
    const double T = 2.0 * std::numbers::pi;
    double expected = 1e300;
    for (int i = 0; i < n; ++i) expected = std::min(expected, 1.0 + 0.5 * std::sin(T * i / (n - 1)));
    const auto rep = check_ellipticity(c, 0.0, T, n);
    EXPECT_NEAR(rep.min_singular_value, expected, 1e-14);
    EXPECT_NEAR(rep.min_singular_value, 0.5, 1e-3);
    EXPECT_NEAR(rep.at_time, 1.5 * std::numbers::pi, T / (n - 1));
}

TEST(BuiltinFamily, Heat) {
    FamilyParams p;
    const auto c = builtin_family("heat", p);
    EXPECT_EQ(c.dim(), 1);
    EXPECT_DOUBLE_EQ(c.Q(0.3)(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(c.M(0.3)(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(c.c(0.3)(0), 0.0);
    EXPECT_DOUBLE_EQ(c.mu(), 1.0);
}

TEST(BuiltinFamily, RotationWithConstantOmega) {
    FamilyParams p;
    p.dim = 2;
    const auto c = builtin_family("rotation", p);
    Matrix J(2, 2);
    J << 0, -1, 1, 0;
    EXPECT_TRUE(c.M(0.0).isApprox(J));
    EXPECT_TRUE(c.M(7.0).isApprox(J));
    EXPECT_TRUE(c.Q(1.0).isApprox(Matrix::Identity(2, 2)));
    EXPECT_DOUBLE_EQ(c.mu(), 1.0);
}

TEST(BuiltinFamily, ScalarCommutingEchoesA) {
    FamilyParams p;
    p.a = Expression::parse("t");
    const auto c = builtin_family("scalar_commuting", p);
    EXPECT_DOUBLE_EQ(c.M(0.7)(0, 0), 0.7);
    EXPECT_DOUBLE_EQ(c.M(2.0)(0, 0), 2.0);
}

TEST(BuiltinFamily, UnknownTagRejected) { EXPECT_THROW(builtin_family("nope", FamilyParams{}), ConfigError); }

TEST(BuiltinFamily, EllipticityAtLeastDocumentedMu) {
    for (const std::string tag : {"heat", "scalar_commuting", "rotation", "drifted"}) {
        FamilyParams p;
        p.dim = tag == "rotation" ? 2 : 1;
        p.sigma = 1.7;
        if (tag == "drifted") p.drift = {Expression::parse("sin(t)")};
        const auto c = builtin_family(tag, p);
        EXPECT_GE(check_ellipticity(c, 0.0, 3.0, 50).min_singular_value, c.mu() - 1e-12) << tag;
    }
}

TEST(CoefficientSet, EvaluatorsAreDeterministic) {
    FamilyParams p;
    p.dim = 2;
    p.omega = Expression::parse("1 + sin(3*t)");
    const auto c = builtin_family("rotation", p);
    const Matrix a = c.M(0.123456789);
    const Matrix b = c.M(0.123456789);
    EXPECT_EQ(0, std::memcmp(a.data(), b.data(), sizeof(double) * 4));
}

TEST(CoefficientSet, NonFiniteEntriesNameTheTime) {
    FamilyParams p;
    p.a = Expression::parse("1/(t - 1)");
    const auto c = builtin_family("scalar_commuting", p);
    try {
        c.M(1.0);
        FAIL() << "expected EvaluationError";
    } catch (const EvaluationError& e) {
        EXPECT_DOUBLE_EQ(e.time(), 1.0);
    }
}

TEST(CustomFamily, DefaultMuIsScannedMinimumWithMargin) {
    const std::vector<std::vector<Expression>> Q{{Expression::parse("2 + sin(t)")}};
    const std::vector<std::vector<Expression>> M{{Expression::constant(0.0)}};
    const auto c = custom_family(Q, M, {Expression::constant(0.0)}, std::nullopt, 2.0 * std::numbers::pi);
    EXPECT_NEAR(c.mu(), 0.99 * 1.0, 1e-3);
    EXPECT_LE(c.mu(), 1.0);
}

TEST(CustomFamily, RejectsMuAboveSingularValues) {
    const std::vector<std::vector<Expression>> Q{{Expression::constant(1.0)}};
    const std::vector<std::vector<Expression>> M{{Expression::constant(0.0)}};
    EXPECT_THROW(custom_family(Q, M, {Expression::constant(0.0)}, 2.0, 1.0), ConfigError);
}
