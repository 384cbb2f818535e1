#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace drqr;
using namespace drqr::testing;

TEST(CAlphaP, Examples) {
    EXPECT_DOUBLE_EQ(c_alpha_p(0.5, P(1)), 0.5);
    EXPECT_NEAR(c_alpha_p(0.5, P(2)), 0.5, 1e-15);
    EXPECT_NEAR(c_alpha_p(0.7, Pinf()), 0.42, 1e-15);
    EXPECT_NEAR(c_alpha_p(0.7, P(2)), std::sqrt(0.21), 1e-15);
    EXPECT_THROW(c_alpha_p(1.0, P(2)), DomainError);
}

TEST(CAlphaP, NearOneMatchesHighPrecisionValues) {
    // 50-digit evaluations of the closed form at p = 1.01 (tests/oracles/frozen_values.py)
    const double ref[] = {0.879714032082, 0.787353009624, 0.691705171599, 0.594581305587, 0.5};
    for (int k = 1; k <= 5; ++k) {
        EXPECT_NEAR(c_alpha_p(0.1 * k, P(1.01)), ref[k - 1], 1e-11);
        EXPECT_NEAR(c_alpha_p(1 - 0.1 * k, P(1.01)), ref[k - 1], 1e-11);
    }
}

TEST(CAlphaP, LimitContinuity) {
    for (int k = 1; k <= 9; ++k) {
        const double a = 0.1 * k;
        // the gap to max(alpha, 1-alpha) is about max * (1 - min^{1/q}); at p = 1.01 that is 0.0203 for alpha = 0.1
        EXPECT_LE(std::abs(c_alpha_p(a, P(1.01)) - std::max(a, 1 - a)), 2.1e-2);
        EXPECT_LE(std::abs(c_alpha_p(a, P(1.001)) - std::max(a, 1 - a)), 2.1e-3);
        EXPECT_LE(std::abs(c_alpha_p(a, P(1000)) - 2 * a * (1 - a)), 1e-2);
        EXPECT_TRUE(std::isfinite(c_alpha_p(a, P(1.000001))));
    }
}

TEST(CAlphaP, SymmetryAndSandwich) {
    for (double a : {0.05, 0.2, 0.35, 0.5, 0.8, 0.99})
        for (double p : {1.0, 1.2, 2.0, 3.5, 10.0}) {
            const double c = c_alpha_p(a, P(p));
            EXPECT_NEAR(c, c_alpha_p(1 - a, P(p)), 1e-14);
            EXPECT_GE(c, std::min(a, 1 - a) - 1e-14);
            EXPECT_LE(c, std::max(a, 1 - a) + 1e-14);
        }
    for (double a : {0.1, 0.5, 0.9}) EXPECT_LE(c_alpha_p(a, Pinf()), 0.5);
}

TEST(KConstants, Examples) {
    auto k = k_constants(0.5, P(2));
    EXPECT_NEAR(k.k1, 0.0625, 1e-15);
    EXPECT_NEAR(k.k2, 0.0, 1e-15);
    k = k_constants(0.7, P(2));
    EXPECT_NEAR(k.k1, 0.0525, 1e-15);
    EXPECT_NEAR(k.k2, 0.10, 1e-15);
    EXPECT_THROW(k_constants(0.7, P(1)), DomainError);
    EXPECT_THROW(k_constants(0.7, Pinf()), DomainError);
}

TEST(KConstants, IdentitiesOnRandomInputs) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ua(0.01, 0.99), up(1.05, 8.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = ua(rng), pv = up(rng);
        const auto p = P(pv);
        const double q = p.conjugate(), c = c_alpha_p(a, p);
        const auto k = k_constants(a, p);
        EXPECT_NEAR(std::pow(k.k1, 1 / q) * q * std::pow(q - 1, -1 / pv), c, 1e-10 * std::max(1.0, c));
        const double lhs = k.k2 * std::pow((q - 1) * k.k1, (1 - q) / q);
        const double rhs = (std::pow(a, q) - std::pow(1 - a, q)) * std::pow(c, 1 - q) / q;
        EXPECT_NEAR(lhs, rhs, 1e-10);
        EXPECT_GE(k.k1, 0.0);
        if (a != 0.5) EXPECT_EQ(k.k2 > 0, a > 0.5);
        EXPECT_NEAR(k_constants(1 - a, p).k2, -k.k2, 1e-14);
    }
}

TEST(LambdaStar, ExampleMinimalityAndValue) {
    EXPECT_NEAR(lambda_star(0.5, P(2), 1.0), 0.25, 1e-15);
    EXPECT_THROW(lambda_star(0.5, P(2), 0.0), DomainError);
    for (double a : {0.2, 0.5, 0.9})
        for (double pv : {1.3, 2.0, 4.0})
            for (double r : {0.01, 0.5, 3.0}) {
                const auto p = P(pv);
                const double ls = lambda_star(a, p, r);
                const double best = dual_penalty(a, p, r, ls);
                EXPECT_GT(dual_penalty(a, p, r, ls * 1.01), best);
                EXPECT_GT(dual_penalty(a, p, r, ls * 0.99), best);
                EXPECT_NEAR(best, c_alpha_p(a, p) * r, 1e-10 * std::max(1.0, best));
            }
}

TEST(InterceptShift, Examples) {
    EXPECT_EQ(intercept_shift(0.9, P(1), 0.5, 3.0), 0.0);
    EXPECT_NEAR(intercept_shift(0.7, Pinf(), 0.5, 2.0), 0.4, 1e-15);
    EXPECT_NEAR(intercept_shift(0.7, P(2), 0.1, 1.0), 0.05 * 0.40 / std::sqrt(0.21), 1e-15);
    EXPECT_NEAR(intercept_shift(0.7, P(2), 0.1, 1.0), 0.043644, 1e-6);
}

TEST(InterceptShift, AntisymmetryAndUnderflowSafety) {
    for (double a : {0.1, 0.3, 0.45})
        for (double pv : {1.01, 1.5, 2.0, 7.0}) {
            EXPECT_NEAR(intercept_shift(a, P(pv), 0.3, 1.7), -intercept_shift(1 - a, P(pv), 0.3, 1.7), 1e-14);
        }
    EXPECT_TRUE(std::isfinite(intercept_shift(0.7, P(1.0005), 0.3, 1.0)));
    EXPECT_TRUE(std::isfinite(c_alpha_p(0.7, P(1.0005))));
}

TEST(RobustConstants, Bundles) {
    const auto rc = RobustConstants::compute(0.7, P(2));
    EXPECT_NEAR(rc.c_alpha_p, std::sqrt(0.21), 1e-15);
    EXPECT_NEAR(rc.k1, 0.0525, 1e-15);
    const auto r1 = RobustConstants::compute(0.7, P(1));
    EXPECT_EQ(r1.k1, 0.0);
}
