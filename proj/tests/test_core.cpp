#include <gtest/gtest.h>

#include <random>

#include "yieldsim/core.hpp"

using namespace yieldsim;

// Reference values from a 30-digit mpmath evaluation of (1 + r)^(1/365).
constexpr double kDaily10Pct = 1.00026115787606781216;
constexpr double kDaily100Pct = 1.00190083767723484579;

TEST(DailyFactor, ZeroRateIsIdentity) { EXPECT_EQ(daily_factor(Rate(0.0)), 1.0); }

TEST(DailyFactor, MatchesHighPrecisionReference) {
    EXPECT_NEAR(daily_factor(Rate(0.10)), kDaily10Pct, 1e-12);
    EXPECT_NEAR(daily_factor(Rate(1.00)), kDaily100Pct, 1e-12);
}

TEST(DailyFactor, ComposesToAnnualRate) {
    for (double r : {0.0, 0.03, 0.10, 0.5, 1.0}) {
        double f = 1.0;
        for (int d = 0; d < 365; ++d) f *= daily_factor(Rate(r));
        EXPECT_NEAR(f, 1.0 + r, 1e-12 * (1.0 + r)) << r;
    }
}

TEST(DailyFactor, MonotoneInRate) {
    double prev = daily_factor(Rate(0.0));
    for (int i = 1; i <= 200; ++i) {
        const double f = daily_factor(Rate(i * 0.01));
        EXPECT_GT(f, prev);
        prev = f;
    }
}

TEST(Accrue, Examples) {
    EXPECT_NEAR(accrue(dai(1.0), Rate(0.03), 365).value(), 1.03, 1e-12);
    EXPECT_EQ(accrue(dai(1.0), Rate(0.25), 0).value(), 1.0);
    EXPECT_NEAR(accrue(dai(1.0), Rate(0.10), 730).value(), 1.21, 1e-12);
    EXPECT_EQ(accrue(dai(2.0), Rate(0.1), 10).unit(), Unit::dai);
}

TEST(Accrue, SplitsAdditivelyOverTime) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> rate(0.0, 1.0);
    std::uniform_int_distribution<int> days(0, 2000);
    for (int i = 0; i < 500; ++i) {
        const Rate r(rate(rng));
        const int d1 = days(rng);
        const int d2 = days(rng);
        const Amount a = dai(1.0 + rate(rng) * 100.0);
        const double whole = accrue(a, r, d1 + d2).value();
        const double split = accrue(accrue(a, r, d1), r, d2).value();
        EXPECT_NEAR(whole, split, 1e-12 * whole);
    }
}

TEST(Accrue, RejectsNegativeDays) { EXPECT_THROW(accrue(dai(1.0), Rate(0.1), -1), std::invalid_argument); }

TEST(Amount, RejectsMixedUnits) {
    EXPECT_THROW(dai(1.0) + eth(1.0), UnitMismatch);
    EXPECT_THROW((void)(gov(1.0) < dai(2.0)), UnitMismatch);
    EXPECT_NO_THROW(dai(1.0) + dai(2.0));
}

TEST(Amount, RejectsNegativeAndNonFinite) {
    EXPECT_THROW(dai(-1e-9), std::invalid_argument);
    EXPECT_THROW(dai(std::nan("")), std::invalid_argument);
    EXPECT_THROW(dai(1.0) - dai(2.0), std::invalid_argument);
    EXPECT_DOUBLE_EQ((dai(3.0) - dai(1.0)).value(), 2.0);
}

TEST(Rate, RejectsNegative) {
    EXPECT_THROW((void)Rate(-0.01), std::invalid_argument);
    EXPECT_THROW((void)Rate(INFINITY), std::invalid_argument);
}

TEST(Clock, AdvancesToHorizonOnly) {
    Clock c(3);
    EXPECT_EQ(c.day(), 0);
    c.advance();
    c.advance();
    c.advance();
    EXPECT_TRUE(c.finished());
    EXPECT_THROW(c.advance(), std::out_of_range);
    EXPECT_THROW((void)Clock(0), std::invalid_argument);
}
