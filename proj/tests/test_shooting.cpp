#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sltrace/reference.hpp"
#include "sltrace/shooting.hpp"

using namespace sltrace;

namespace {

double wrap(double angle) { return std::remainder(angle, 2.0 * std::numbers::pi); }

} // namespace

// u'' = x u, u(0) = 1, u'(0) = 0, power series in mpmath.
TEST(IntegratePiece, LinearPotentialPowerSeries) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    IntegratorStats stats;
    const auto s = integrate_piece(p, 1, {1.0, 0.0, 0.0}, 0.0, {}, &stats);
    EXPECT_EQ(s.x, 0.3);
    EXPECT_NEAR(s.u, 1.0045040515190607, 1e-12);
    EXPECT_NEAR(s.du, 0.045081045574928134, 1e-12);
    EXPECT_GT(stats.steps, 0u);
    EXPECT_EQ(stats.rel_tol, ShootingOptions{}.rel_tol);
}

TEST(IntegratePiece, ConstantPotentialClosedForm) {
    const auto p = fixtures::p0_problem({1.0});
    for (double lambda : {-30.0, 0.5, 1.5, 50.0, 2500.0}) {
        const auto s = integrate_piece(p, 2, {0.4, -1.3, 0.3}, lambda);
        const double k2 = lambda - 1.0;
        double u, du;
        if (k2 > 0) {
            const double k = std::sqrt(k2);
            u = 0.4 * std::cos(0.4 * k) - 1.3 / k * std::sin(0.4 * k);
            du = -0.4 * k * std::sin(0.4 * k) - 1.3 * std::cos(0.4 * k);
        } else {
            const double k = std::sqrt(-k2);
            u = 0.4 * std::cosh(0.4 * k) - 1.3 / k * std::sinh(0.4 * k);
            du = 0.4 * k * std::sinh(0.4 * k) - 1.3 * std::cosh(0.4 * k);
        }
        const double scale = std::hypot(u, du / std::max(1.0, std::sqrt(std::abs(lambda))));
        EXPECT_NEAR(s.u, u, 1e-9 * scale) << lambda;
        EXPECT_NEAR(s.du, du, 1e-9 * scale * std::max(1.0, std::sqrt(std::abs(lambda)))) << lambda;
    }
}

TEST(IntegratePiece, PreconditionsAndGuards) {
    const auto p = fixtures::p0_problem({1.0});
    EXPECT_THROW(integrate_piece(p, 2, {1.0, 0.0, 0.0}, 1.0), PositionError);
    EXPECT_THROW(integrate_piece(p, 4, {1.0, 0.0, 0.0}, 1.0), DomainError);
    EXPECT_THROW(integrate_piece(p, 1, {1.0, 0.0, 0.0}, std::nan("")), NonFiniteError);
    EXPECT_THROW(integrate_piece(p, 1, {1.0, 0.0, 0.0}, -1e7), OverflowGuard);
    const auto z = integrate_piece(p, 1, {0.0, 0.0, 0.0}, 3.0);
    EXPECT_EQ(z.u, 0.0);
    EXPECT_EQ(z.du, 0.0);
}

TEST(Transmission, ScalesBothComponents) {
    const auto p = fixtures::p0_problem();
    const auto a = apply_transmission(p, Interface::c1, {2.0, -4.0, 0.3});
    EXPECT_DOUBLE_EQ(a.u, 1.0);
    EXPECT_DOUBLE_EQ(a.du, -2.0);
    const auto b = apply_transmission(p, Interface::c2, {3.0, 6.0, 0.7});
    EXPECT_DOUBLE_EQ(b.u, 2.0);
    EXPECT_DOUBLE_EQ(b.du, 4.0);
    EXPECT_THROW(apply_transmission(p, Interface::c2, {1.0, 0.0, 0.3}), PositionError);
}

// Airy-function shooting through both interfaces, mpmath (tests/oracles).
TEST(PropagateSolution, LinearPotentialPolarOracle) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    struct Case {
        double lambda, angle, lnR;
    };
    const Case cases[] = {{100.0, -2.5935824081736855, -1.097581748883035},
                          {1e4, -0.53344299801816182, -1.0986001077245085},
                          {1e6, 0.97328592601904076, -1.0986123805330005},
                          {4e7, -2.6123235270033329, -1.0986122856051234}};
    for (const auto& c : cases) {
        const auto bd = propagate_solution(p, c.lambda);
        EXPECT_NEAR(wrap(bd.theta_b - c.angle), 0.0, 2e-9) << c.lambda;
        EXPECT_NEAR(std::log(std::hypot(bd.phi_b, bd.dphi_b / bd.sigma)) + bd.log_scale, c.lnR, 1e-9) << c.lambda;
    }
}

TEST(PropagateSolution, LinearPotentialCartesianOracle) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    const auto a = propagate_solution(p, 0.5);
    EXPECT_NEAR(a.phi_b, 0.30532499438887905, 1e-11);
    EXPECT_NEAR(a.dphi_b, -0.0027777360243294027, 1e-11);
    const auto b = propagate_solution(p, -20.0);
    EXPECT_NEAR(b.phi_b / 15.278513300179719, 1.0, 1e-10);
    EXPECT_NEAR(b.dphi_b / 69.815593519918712, 1.0, 1e-10);
}

TEST(PropagateSolution, LargeNegativeLambdaIsRescaled) {
    const auto p = fixtures::p0_problem({1.0});
    const auto bd = propagate_solution(p, -1e6);
    EXPECT_NE(bd.log_scale, 0.0);
    EXPECT_TRUE(std::isfinite(bd.phi_b));
    EXPECT_TRUE(std::isfinite(omega_from(p, -1e6, bd)));
    EXPECT_TRUE(std::isfinite(counting_angle(p, -1e6, bd)));
    EXPECT_EQ(eigen_count(counting_angle(p, -1e6, bd)), 0);
}

TEST(CharFunction, QZeroMatchesClosedForm) {
    for (double h : {0.0, 1.0, -10.0}) {
        const auto p = fixtures::plain_qzero(h);
        for (double lambda : {-50.0, -3.0, 0.0, 0.7, 1.0, 12.0, 400.0, 9e4}) {
            const double ref = oracle_omega_qzero(1.0, 1.0, h, lambda);
            const double scale = std::abs(lambda - h) + std::sqrt(std::abs(lambda)) + 1.0;
            const double grow = lambda < 0 ? std::cosh(std::sqrt(-lambda)) : 1.0;
            EXPECT_NEAR(char_function(p, lambda), ref, 1e-10 * scale * grow) << h << " " << lambda;
        }
    }
}

TEST(CharFunction, AmplitudeAndCountingAngleReconstructOmega) {
    const auto p = fixtures::p0_problem({0.0, 1.0}, 0.5);
    for (double lambda : {-40.0, -0.3, 0.2, 3.0, 77.0, 5e3}) {
        const auto bd = propagate_solution(p, lambda);
        const double w = omega_from(p, lambda, bd);
        const double F = counting_angle(p, lambda, bd);
        const double amp = omega_amplitude(p, lambda, bd);
        const double m = bd.negative_factors;
        EXPECT_NEAR(w, amp * std::sin(F + m * std::numbers::pi), 1e-12 * amp) << lambda;
    }
}

TEST(CountingAngle, CountsQZeroEigenvalues) {
    // roots of tan s = -s: 4.1159, 24.139, 63.659, 122.889
    const auto p = fixtures::plain_qzero(0.0);
    auto N = [&](double l) { return eigen_count(counting_angle(p, l, propagate_solution(p, l))); };
    EXPECT_EQ(N(-5.0), 0);
    EXPECT_EQ(N(1.0), 1);
    EXPECT_EQ(N(4.0), 1);
    EXPECT_EQ(N(4.2), 2);
    EXPECT_EQ(N(24.2), 3);
    EXPECT_EQ(N(100.0), 4);
    EXPECT_EQ(N(123.0), 5);
}

TEST(CountingAngle, NegativeFactorsDoNotShiftIndex) {
    const auto plain = fixtures::p0_problem({1.0});
    for (auto [d, g] : {std::pair{-1.0, 2.0}, {0.5, -4.0}, {-2.0, -3.0}}) {
        const auto p = with_scalars(plain, d, g);
        for (double l : {-3.0, 2.0, 30.0, 300.0}) {
            const long a = eigen_count(counting_angle(p, l, propagate_solution(p, l)));
            const long b = eigen_count(counting_angle(plain, l, propagate_solution(plain, l)));
            EXPECT_EQ(a, b) << d << " " << g << " " << l;
        }
    }
}

TEST(Factorization, GammaOmegaIsScalarFree) {
    const auto p = fixtures::p0_problem({0.0, 1.0});
    std::vector<double> grid;
    for (int i = 0; i < 40; ++i) grid.push_back(-20.0 + 10.0 * i);
    EXPECT_LE(factorization_check(p, grid), 1e-9);
    EXPECT_LE(factorization_check(with_scalars(p, -1.0, 2.0), grid), 1e-9);
}

TEST(ReverseIntegration, RecoversInitialData) {
    const auto p = fixtures::p0_problem({1.0});
    for (double l : {1.0, 100.0, 1e4}) EXPECT_LE(reverse_integration_error(p, l), 1e-8) << l;
}

// At lambda = -100 the round trip amplifies one rounding of the state at b by
// about exp(2 sqrt(101)); the error sits near 1e-7 whatever the tolerance.
TEST(ReverseIntegration, NegativeLambdaIsConditioningLimited) {
    const auto p = fixtures::p0_problem({1.0});
    ShootingOptions tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-14;
    const double e = reverse_integration_error(p, -100.0);
    const double et = reverse_integration_error(p, -100.0, tight);
    EXPECT_LT(e, 1e-6);
    EXPECT_GT(et, 0.5 * e);
}

// The step cap of 0.5 / sigma already resolves the oscillation, so a loose
// error tolerance does not degrade the round trip for lambda > 0.
TEST(ReverseIntegration, StepCapGovernsOscillatoryAccuracy) {
    const auto p = fixtures::p0_problem({1.0});
    ShootingOptions loose;
    loose.rel_tol = 1e-3;
    loose.abs_tol = 1e-3;
    for (double l : {1.0, 100.0, 1e4}) EXPECT_LE(reverse_integration_error(p, l, loose), 1e-8) << l;
    loose.max_step_phase = 8.0;
    EXPECT_GT(reverse_integration_error(p, 1e4, loose), 1e3 * reverse_integration_error(p, 1e4));
}
