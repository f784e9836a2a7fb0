#include <gtest/gtest.h>

#include <cmath>

#include "tisim/dde.hpp"

using namespace tisim;

TEST(Dde, NoTumorMeansLinearDecay) {
    ModelParams p;
    p.c = 0.0;
    p.p_E = 0.0;
    const DdeSeries s = integrate_dde(p, {0.0, 100.0, 5.0}, 50.0, 0.01);
    ASSERT_EQ(s.size(), 5001u);
    for (std::size_t k = 0; k < s.size(); k += 250) {
        EXPECT_EQ(s.T[k], 0.0);
        EXPECT_NEAR(s.E[k], 100.0 * std::exp(-p.mu_E * s.t[k]), 1e-9 * 100.0);
        EXPECT_NEAR(s.I[k], 5.0 * std::exp(-p.mu_I * s.t[k]), 1e-9 * 5.0);
    }
}

TEST(Dde, FourthOrderConvergence) {
    ModelParams p;
    p.c = 0.02;
    const double h = 0.01;
    const double a = integrate_dde(p, {}, 200.0, 2.0 * h).T.back();
    const double b = integrate_dde(p, {}, 200.0, h).T.back();
    const double c = integrate_dde(p, {}, 200.0, 0.5 * h).T.back();
    const double ratio = (a - b) / (b - c);
    EXPECT_GT(ratio, 14.0);
    EXPECT_LT(ratio, 18.0);
}

TEST(Dde, RichardsonErrorAtDefaultStep) {
    for (double theta : {0.0, 1.5}) {
        ModelParams p;
        p.c = 0.02;
        p.theta = theta;
        const double b = integrate_dde(p, {}, 200.0, 0.01).T.back();
        const double c = integrate_dde(p, {}, 200.0, 0.005).T.back();
        EXPECT_LT(std::abs(b - c) / 15.0, 1e-6 * std::abs(c)) << "theta " << theta;
    }
}

TEST(Dde, WithoutRecruitmentTheDelayIsIrrelevant) {
    ModelParams p;
    p.c = 0.0;
    const DdeInitial init{1000.0, 50.0, 0.0};
    p.theta = 0.0;
    const DdeSeries s0 = integrate_dde(p, init, 100.0, 0.01);
    for (double theta : {1.0, 2.0}) {
        p.theta = theta;
        const DdeSeries s = integrate_dde(p, init, 100.0, 0.01);
        EXPECT_EQ(s.T, s0.T);
        EXPECT_EQ(s.E, s0.E);
        EXPECT_EQ(s.I, s0.I);
    }
}

TEST(Dde, LogisticCeiling) {
    ModelParams p;
    p.c = 0.0;
    p.p_T = 0.0;
    const DdeSeries s = integrate_dde(p, {1e6, 0.0, 0.0}, 400.0, 0.01);
    const double plateau = p.V / p.b;
    for (std::size_t k = 1; k < s.size(); ++k) {
        ASSERT_GE(s.T[k], s.T[k - 1]);
        ASSERT_LE(s.T[k], plateau * (1.0 + 1e-12));
    }
    EXPECT_NEAR(s.T.back(), plateau, 1e-6 * plateau);
}

TEST(Dde, HistoryFeedsTheDelayedTerm) {
    ModelParams p;
    p.r = 0.0;
    p.c = 0.1;
    p.theta = 1.0;
    const DdeSeries s = integrate_dde(p, {5.0, 0.0, 0.0}, 1.0, 0.01, [](double) { return 5.0; });
    // for t <= theta the lagged tumor is the constant history: E' = 5c - mu E
    const double want = 5.0 * p.c / p.mu_E * (1.0 - std::exp(-p.mu_E * 1.0));
    EXPECT_NEAR(s.E.back(), want, 1e-10 * want);
}

TEST(Dde, ZeroHistoryDelaysTheFirstRecruitment) {
    ModelParams p;
    p.c = 0.035;
    p.theta = 2.0;
    const DdeSeries s = integrate_dde(p, {1.0, 0.0, 0.0}, 3.0, 0.01);
    for (std::size_t k = 0; k < 200; ++k) EXPECT_EQ(s.E[k], 0.0) << s.t[k];
    EXPECT_GT(s.E.back(), 0.0);
}

TEST(Dde, RejectsOffGridDelay) {
    ModelParams p;
    p.theta = 0.015;
    EXPECT_THROW(integrate_dde(p, {}, 10.0, 0.01), std::invalid_argument);
    p.theta = 1.5;
    EXPECT_NO_THROW(integrate_dde(p, {}, 1.0, 0.01));
    EXPECT_THROW(integrate_dde(p, {}, 10.0, 0.0), std::invalid_argument);
}

TEST(Dde, NegativeExcursionAborts) {
    ModelParams p;
    EXPECT_THROW(integrate_dde(p, {100.0, 1e7, 0.0}, 10.0, 1.0), DdeError);
}

TEST(Dde, MinOverWindow) {
    DdeSeries s;
    s.t = {0, 1, 2, 3, 4};
    s.T = {5, 4, 1, 2, 0};
    s.E = s.I = std::vector<double>(5, 0.0);
    EXPECT_EQ(min_T_over(s, 1.0, 3.0), 1.0);
    EXPECT_EQ(min_T_over(s, 3.0, 4.0), 0.0);
}
