// SPDX-License-Identifier: MIT
#include <gtest/gtest.h>

#include <cmath>

#include "ouevolve/errors.hpp"
#include "ouevolve/exterior.hpp"

using namespace ouevolve;

namespace {

std::shared_ptr<const PropagatorCache> heat(int dim = 1) {
    FamilyParams p;
    p.dim = dim;
    return std::make_shared<const PropagatorCache>(std::make_shared<const CoefficientSet>(builtin_family("heat", p)));
}

DomainSpec interval() {
    DomainSpec d;
    d.kind = DomainKind::interval_complement;
    d.a = 1.0;
    d.R = 2.0;
    return d;
}

ExteriorOptions options(double dt) {
    ExteriorOptions o;
    o.bounded.dt = dt;
    o.strict = false;
    return o;
}

Vector v1(double x) { return Vector::Constant(1, x); }

const Grid kGrid = Grid::with_spacing(1, -20.0, 20.0, 1.0 / 16);

}  // namespace

TEST(Cutoffs, DefiningProperties) {
    const CutoffPair c(2.0);
    for (double r = 0.0; r <= 8.0; r += 0.01) {
        const Vector x{{r * 0.6, r * 0.8}};
        if (r <= 3.0) EXPECT_EQ(c.phi(x), 0.0);
        if (r >= 4.0) EXPECT_EQ(c.phi(x), 1.0);
        if (r <= 4.0) EXPECT_EQ(c.eta(x), 1.0);
        if (r >= 4.5) EXPECT_EQ(c.eta(x), 0.0);
        EXPECT_GE(c.phi(x), 0.0);
        EXPECT_LE(c.phi(x), 1.0);
        // eta = 1 wherever phi < 1, so (1 - phi) eta = 1 - phi.
        EXPECT_DOUBLE_EQ((1.0 - c.phi(x)) * c.eta(x), 1.0 - c.phi(x));
    }
    EXPECT_NO_THROW(c.check_on(Grid({-8.0, -8.0}, {8.0, 8.0}, {65, 65})));
}

TEST(Cutoffs, DerivativesMatchDifferences) {
    const CutoffPair c(2.0);
    const double h = 1e-5;
    for (const Vector& x : {Vector{{2.1, 2.3}}, Vector{{-3.2, 0.4}}}) {
        const Vector g = c.grad_phi(x);
        const Matrix H = c.hess_phi(x);
        for (int i = 0; i < 2; ++i) {
            Vector e = Vector::Zero(2);
            e(i) = h;
            EXPECT_NEAR(g(i), (c.phi(x + e) - c.phi(x - e)) / (2 * h), 1e-8);
            const Vector dg = (c.grad_phi(x + e) - c.grad_phi(x - e)) / (2 * h);
            for (int k = 0; k < 2; ++k) EXPECT_NEAR(H(k, i), dg(k), 1e-6);
        }
    }
}

TEST(TimeRule, ExactForPolynomialsAndTheSquareRootSingularity) {
    const double t = 1.3, s = 0.4;
    for (bool two : {false, true}) {
        const auto rule = picard_time_rule(t, s, 8, two);
        EXPECT_EQ(rule.size(), two ? 16u : 8u);
        double cube = 0.0;
        for (const auto& n : rule) cube += n.weight * n.r * n.r * n.r;
        EXPECT_NEAR(cube, (std::pow(t, 4) - std::pow(s, 4)) / 4.0, 1e-13);
    }
    double sing = 0.0;
    for (const auto& n : picard_time_rule(t, s, 8, false)) sing += n.weight / std::sqrt(n.r - s);
    EXPECT_NEAR(sing, 2.0 * std::sqrt(t - s), 1e-13);
}

TEST(Exterior, RejectsWholeSpaceAndSmallBoxes) {
    EXPECT_THROW(ExteriorSystem(heat(), DomainSpec{}, kGrid), ConfigError);
    EXPECT_THROW(ExteriorSystem(heat(), interval(), Grid::with_spacing(1, -4.0, 4.0, 0.125)), ConfigError);
}

TEST(Exterior, ZeroDataGivesZeroEverywhere) {
    const ExteriorSystem ex(heat(), interval(), kGrid, options(1.0 / 64));
    const GridFunction z(kGrid);
    EXPECT_EQ(lp_norm(ex.apply_W(0.5, 0.0, z), INFINITY), 0.0);
    EXPECT_EQ(lp_norm(ex.apply_F(0.5, 0.0, z), INFINITY), 0.0);
    EXPECT_EQ(lp_norm(ex.picard_apply(0.5, 0.0, z).solution, INFINITY), 0.0);
    EXPECT_EQ(ex.boundary_trace(z), 0.0);
    EXPECT_EQ(ex.t_derivative_residual(0.3, 0.1, z, 1e-2), 0.0);
}

TEST(Exterior, WAtEqualTimesIsTheData) {
    const ExteriorSystem ex(heat(), interval(), kGrid, options(1.0 / 64));
    const GridFunction f = ex.restrict_to_omega(smoothed_indicator(kGrid, v1(1.5), v1(5.0), 0.4));
    const GridFunction w = ex.apply_W(0.2, 0.2, f);
    EXPECT_LE(lp_norm(w - f, INFINITY), 1e-14);
}

TEST(Exterior, FarFieldMatchesWholeSpace) {
    const ExteriorSystem ex(heat(), interval(), kGrid, options(1.0 / 64));
    const GridFunction f = ex.restrict_to_omega(gaussian_bump(kGrid, v1(10.0), 0.3));
    const GridFunction w = ex.apply_W(0.05, 0.0, f);
    const GridFunction u0 = ex.wholespace().apply(0.05, 0.0, f, kGrid);
    EXPECT_LE(lp_norm(w - u0, 2.0), 1e-6 * lp_norm(u0, 2.0));
    EXPECT_LE(lp_norm(ex.apply_F(0.05, 0.0, f), 2.0), 1e-6 * lp_norm(f, 2.0));
    const auto res = ex.picard_apply(0.05, 0.0, f);
    EXPECT_LE(res.diagnostics.term_norms[1], 1e-6 * res.diagnostics.term_norms[0]);
}

TEST(Exterior, CorrectionSupportedInAnnulus) {
    const ExteriorSystem ex(heat(), interval(), kGrid, options(1.0 / 64));
    const GridFunction f = ex.restrict_to_omega(smoothed_indicator(kGrid, v1(2.5), v1(4.5), 0.4));
    const GridFunction F = ex.apply_F(0.3, 0.0, f);
    double inside = 0.0;
    for (std::size_t k = 0; k < kGrid.size(); ++k) {
        if (!ex.annulus_mask()[k]) EXPECT_EQ(F.values[k], 0.0);
        else inside = std::max(inside, std::abs(F.values[k]));
    }
    EXPECT_GT(inside, 0.0);
}

TEST(Exterior, PicardTermsDecayUnderTheEnvelope) {
    const ExteriorSystem ex(heat(), interval(), Grid::with_spacing(1, -20.0, 20.0, 1.0 / 32), options(1.0 / 128));
    const GridFunction f = ex.restrict_to_omega(smoothed_indicator(ex.grid(), v1(1.3), v1(1.7), 0.2));
    const auto res = ex.picard_apply(0.2, 0.0, f, 3);
    const auto& d = res.diagnostics;
    ASSERT_EQ(d.term_norms.size(), 4u);
    for (int k = 0; k < 3; ++k) EXPECT_LT(d.term_norms[k + 1], d.term_norms[k]);
    EXPECT_LE(d.term_norms[3], d.term_bound[3]);
    EXPECT_EQ(d.est_series_error, d.term_norms[3]);
}

TEST(Exterior, SolutionVanishesOnTheObstacleBoundary) {
    const double h = 1.0 / 32;
    const ExteriorSystem ex(heat(), interval(), Grid::with_spacing(1, -20.0, 20.0, h), options(1.0 / 128));
    const GridFunction f = ex.restrict_to_omega(smoothed_indicator(ex.grid(), v1(1.4), v1(2.0), 0.3));
    const GridFunction u = ex.picard_apply(0.5, 0.0, f).solution;
    double dmax = 0.0;
    for (const auto& g : gradient(u)) dmax = std::max(dmax, lp_norm(g, INFINITY));
    EXPECT_LE(ex.boundary_trace(u), 5.0 * h * dmax);
    const GridFunction control = ex.wholespace().apply(0.5, 0.0, f, ex.grid());
    EXPECT_GT(ex.boundary_trace(control), 5.0 * h * dmax);
}

TEST(Exterior, ChapmanKolmogorovSmallAtModerateResolution) {
    const ExteriorSystem ex(heat(), interval(), Grid::with_spacing(1, -20.0, 20.0, 1.0 / 32), options(1.0 / 128));
    const GridFunction f = ex.restrict_to_omega(smoothed_indicator(ex.grid(), v1(3.9), v1(4.5), 0.4));
    const GridFunction one = ex.picard_apply(0.5, 0.0, f).solution;
    const GridFunction two = ex.picard_apply(0.5, 0.2, ex.picard_apply(0.2, 0.0, f).solution).solution;
    EXPECT_LE(lp_norm(one - two, 2.0), 1e-2 * lp_norm(f, 2.0));
}
