// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ouevolve/bounded.hpp"
#include "ouevolve/errors.hpp"

using namespace ouevolve;

namespace {

std::shared_ptr<const CoefficientSet> heat(double sigma = std::sqrt(2.0), int dim = 1) {
    FamilyParams p;
    p.sigma = sigma;
    p.dim = dim;
    return std::make_shared<const CoefficientSet>(builtin_family("heat", p));
}

const double kPi = std::numbers::pi;

BoundedProblem on_zero_pi(BoundedOptions o, int n = 257, std::shared_ptr<const CoefficientSet> c = heat()) {
    const Grid g(0.0, kPi, n);
    return BoundedProblem(std::move(c), g, std::vector<char>(g.size(), 1), o);
}

}  // namespace

TEST(AssembleL, LaplacianStencil) {
    const BoundedProblem bp = on_zero_pi({}, 11);
    const auto L = bp.assemble_L(0.0);
    const double h = kPi / 10, h2 = h * h;
    // Unknown 4 is grid node 5.
    EXPECT_NEAR(L.coeff(4, 3), 1.0 / h2, 1e-9);
    EXPECT_NEAR(L.coeff(4, 4), -2.0 / h2, 1e-9);
    EXPECT_NEAR(L.coeff(4, 5), 1.0 / h2, 1e-9);
}

TEST(AssembleL, CentralDriftStencil) {
    FamilyParams p;
    p.sigma = 10.0;
    p.drift = {Expression::constant(1.0)};
    const BoundedProblem bp = on_zero_pi({}, 11, std::make_shared<const CoefficientSet>(builtin_family("drifted", p)));
    const auto L = bp.assemble_L(0.0);
    const double h = kPi / 10, diff = 50.0 / (h * h);
    EXPECT_NEAR(L.coeff(4, 5) - diff, 1.0 / (2 * h), 1e-8);
    EXPECT_NEAR(L.coeff(4, 3) - diff, -1.0 / (2 * h), 1e-8);
}

TEST(AssembleL, RotationDriftRow) {
    FamilyParams p;
    p.dim = 2;
    p.sigma = 4.0;
    const auto c = std::make_shared<const CoefficientSet>(builtin_family("rotation", p));
    const Grid g({-2.0, -2.0}, {2.0, 2.0}, {9, 9});
    const BoundedProblem bp(c, g, std::vector<char>(g.size(), 1));
    const auto L = bp.assemble_L(0.0);
    // Node (6, 4) is x = (1, 0): drift b = J x = (0, 1) acts along the second axis only.
    const auto& nodes = bp.unknown_nodes();
    auto unknown = [&](int i, int j) {
        return static_cast<int>(std::find(nodes.begin(), nodes.end(), g.index(i, j)) - nodes.begin());
    };
    const int row = unknown(6, 4);
    const double h = 0.5, diff = 8.0 / (h * h);
    EXPECT_NEAR(L.coeff(row, unknown(6, 5)) - diff, 1.0 / (2 * h), 1e-9);
    EXPECT_NEAR(L.coeff(row, unknown(6, 3)) - diff, -1.0 / (2 * h), 1e-9);
    EXPECT_NEAR(L.coeff(row, unknown(7, 4)), diff, 1e-9);
    EXPECT_NEAR(L.coeff(row, unknown(5, 4)), diff, 1e-9);
}

TEST(Evolve, ZeroStaysZero) {
    const BoundedProblem bp = on_zero_pi({});
    EXPECT_EQ(lp_norm(bp.evolve(0.5, 0.0, GridFunction(bp.grid())), INFINITY), 0.0);
}

TEST(Evolve, FirstEigenmode) {
    BoundedOptions o;
    o.dt = 1e-3;
    const BoundedProblem bp = on_zero_pi(o);
    const GridFunction u = bp.evolve(0.5, 0.0, sine_mode(bp.grid(), 1));
    EXPECT_NEAR(lp_norm(u, INFINITY), std::exp(-0.5), 2e-3);
}

TEST(Evolve, SecondEigenmode) {
    BoundedOptions o;
    o.dt = 1e-3;
    const BoundedProblem bp = on_zero_pi(o);
    const GridFunction u = bp.evolve(0.25, 0.0, sine_mode(bp.grid(), 2));
    EXPECT_NEAR(lp_norm(u, INFINITY), std::exp(-1.0), 2e-3);
}

TEST(Evolve, CrankNicolsonTemporalOrder) {
    // Coarse steps on a fine grid so the time error dominates.
    auto err = [](double dt) {
        BoundedOptions o;
        o.dt = dt;
        o.startup_steps = 0;
        const BoundedProblem bp = on_zero_pi(o, 1025);
        const GridFunction f = sine_mode(bp.grid(), 1);
        const GridFunction u = bp.evolve(0.5, 0.0, f);
        // Spatial part removed by using the discrete eigenvalue.
        const double h = kPi / 1024;
        const double lam = 4.0 * std::pow(std::sin(h / 2), 2) / (h * h);
        return std::abs(lp_norm(u, INFINITY) - std::exp(-lam * 0.5));
    };
    EXPECT_NEAR(err(0.05) / err(0.025), 4.0, 1.2);
}

TEST(Evolve, BoundaryPinnedToZero) {
    const BoundedProblem bp = on_zero_pi({});
    const GridFunction u = bp.evolve(0.3, 0.0, GridFunction(bp.grid(), 1.0));
    EXPECT_EQ(u.values.front(), 0.0);
    EXPECT_EQ(u.values.back(), 0.0);
}

TEST(Evolve, ExactlyMultiplicativeOnIdenticalStepGrids) {
    BoundedOptions o;
    o.dt = 1.0 / 64;
    o.startup_steps = 0;
    const BoundedProblem bp = on_zero_pi(o, 129);
    const GridFunction f = smoothed_indicator(bp.grid(), Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), 0.3);
    const GridFunction one = bp.evolve(0.5, 0.0, f);
    const GridFunction two = bp.evolve(0.5, 0.25, bp.evolve(0.25, 0.0, f));
    EXPECT_LE(lp_norm(one - two, 2.0), 1e-8 * lp_norm(f, 2.0));
}

TEST(Evolve, NearlyMultiplicativeOtherwise) {
    BoundedOptions o;
    o.dt = 1.0 / 256;
    const BoundedProblem bp = on_zero_pi(o, 257);
    const GridFunction f = gaussian_bump(bp.grid(), Vector::Constant(1, 1.5), 0.3);
    const GridFunction one = bp.evolve(0.5, 0.0, f);
    const GridFunction two = bp.evolve(0.5, 0.3137, bp.evolve(0.3137, 0.0, f));
    EXPECT_LE(lp_norm(one - two, 2.0), 1e-3 * lp_norm(f, 2.0));
}

TEST(Evolve, ImplicitEulerMaximumPrinciple) {
    BoundedOptions o;
    o.theta = 1.0;
    o.dt = 1e-2;
    o.check_max_principle = true;
    FamilyParams p;
    p.dim = 2;
    const auto c = std::make_shared<const CoefficientSet>(builtin_family("rotation", p));
    const Grid g({-3.0, -3.0}, {3.0, 3.0}, {41, 41});
    const BoundedProblem bp(c, g, std::vector<char>(g.size(), 1), o);
    const GridFunction f = sharp_bump(g, Vector{{0.5, 0.0}});
    const GridFunction u = bp.evolve(0.5, 0.0, f);
    EXPECT_LE(lp_norm(u, INFINITY), lp_norm(f, INFINITY));
}

TEST(Evolve, RejectsReversedTimes) {
    const BoundedProblem bp = on_zero_pi({});
    EXPECT_THROW(bp.evolve(0.1, 0.2, GridFunction(bp.grid())), ConfigError);
}

TEST(SmoothingProbe, EigenmodeNormsBounded) {
    BoundedOptions o;
    o.dt = 5e-4;
    const BoundedProblem bp = on_zero_pi(o, 129);
    const GridFunction f = sine_mode(bp.grid(), 1);
    const auto rows = smoothing_probe_bounded(bp, 2.0, 2.0, f, {0.01, 0.1, 1.0});
    for (const auto& r : rows) EXPECT_LE(r.norm_q, 1.05 * lp_norm(f, 2.0));
}
