#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tisim/sensitivity.hpp"

using namespace tisim;

TEST(Lagrange, TwoNodesGiveTheLine) {
    const LagrangePolynomial L({0.0, 1.0}, {0.0, 1.0});
    for (double x : {-1.0, 0.0, 0.3, 1.0, 2.5}) {
        EXPECT_NEAR(L(x), x, 1e-15);
        EXPECT_NEAR(L.derivative(x), 1.0, 1e-14);
    }
    EXPECT_EQ(L.degree(), 1u);
}

TEST(Lagrange, ConstantDataGivesConstant) {
    const LagrangePolynomial L({0.0, 0.5, 1.0, 1.5, 3.0}, {0.25, 0.25, 0.25, 0.25, 0.25});
    for (double x : {0.0, 0.2, 1.5, 2.7}) {
        EXPECT_NEAR(L(x), 0.25, 1e-15);
        EXPECT_NEAR(L.derivative(x), 0.0, 1e-14);
    }
    for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(L.derivative_at_node(k), 0.0);
}

TEST(Lagrange, ExactAtRandomNodes) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(5), y(5);
        for (int k = 0; k < 5; ++k) {
            x[k] = k + 0.9 * U(gen);
            y[k] = U(gen);
        }
        const LagrangePolynomial L(x, y);
        for (int k = 0; k < 5; ++k) EXPECT_NEAR(L(x[k]), y[k], 1e-12);
    }
}

TEST(Lagrange, DerivativeOfCubic) {
    auto f = [](double x) { return 2.0 * x * x * x - x + 0.5; };
    auto df = [](double x) { return 6.0 * x * x - 1.0; };
    const std::vector<double> x{0.0, 0.5, 1.0, 2.0};
    std::vector<double> y;
    for (double v : x) y.push_back(f(v));
    const LagrangePolynomial L(x, y);
    for (double v : {0.0, 0.5, 0.7, 2.0}) EXPECT_NEAR(L.derivative(v), df(v), 1e-12);
}

TEST(Lagrange, RejectsBadNodes) {
    EXPECT_THROW(LagrangePolynomial({1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(LagrangePolynomial({1.0}, {0.0}), std::invalid_argument);
    EXPECT_THROW(LagrangePolynomial({1.0, 2.0}, {0.0}), std::invalid_argument);
}

// Degree 30 through a smoothed step on 31 equispaced nodes overshoots
// badly between the outer nodes.
TEST(Lagrange, RungeOscillationAtDegreeThirty) {
    std::vector<double> x, y;
    for (int k = 0; k <= 30; ++k) {
        x.push_back(0.1 * k);
        y.push_back(0.5 * (1.0 + std::tanh(20.0 * (0.1 * k - 1.5))));
    }
    const LagrangePolynomial L(x, y);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double v = 0.01 * i + 0.005;
        worst = std::max(worst, std::abs(L(v) - 0.5 * (1.0 + std::tanh(20.0 * (v - 1.5)))));
    }
    EXPECT_GT(worst, 1.0);
    for (int k = 0; k <= 30; ++k) EXPECT_NEAR(L(x[k]), y[k], 1e-12);
}

namespace {

DelaySamples samples(double theta, std::vector<std::vector<double>> rows) {
    std::vector<double> time;
    for (std::size_t k = 0; k < rows.front().size(); ++k) time.push_back(static_cast<double>(k));
    return DelaySamples{theta, time, std::move(rows)};
}

}  // namespace

TEST(DensityGrid, SingleRunIsPointMass) {
    const DensityGrid g = build_density_grid({samples(0.0, {{1.0, 4.0, 10.0}})}, 5);
    EXPECT_EQ(g.max_T(), 10.0);
    EXPECT_EQ(g.bin_width(), 2.0);
    EXPECT_EQ(g.at(0, 0, 0), 1.0);
    EXPECT_EQ(g.at(0, 1, 2), 1.0);
    EXPECT_EQ(g.at(0, 2, 4), 1.0);
}

TEST(DensityGrid, HistogramsSumToOne) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> U(0.0, 1e6);
    std::vector<DelaySamples> per;
    for (double th : {0.0, 1.0, 2.0}) {
        std::vector<std::vector<double>> rows(37, std::vector<double>(11));
        for (auto& r : rows) {
            for (double& v : r) v = std::floor(U(gen));
        }
        per.push_back(samples(th, rows));
    }
    const DensityGrid g = build_density_grid(per, 200);
    for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t t = 0; t < 11; ++t) {
            double sum = 0.0;
            for (std::size_t b = 0; b < 200; ++b) sum += g.at(k, t, b);
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(DensityGrid, IdenticalEnsemblesGiveIdenticalHistograms) {
    const std::vector<std::vector<double>> rows{{0, 3, 9}, {1, 5, 2}, {0, 0, 0}};
    const DensityGrid g = build_density_grid({samples(0.0, rows), samples(0.5, rows)}, 10);
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t b = 0; b < 10; ++b) EXPECT_EQ(g.at(0, t, b), g.at(1, t, b));
    }
}

TEST(DensityGrid, RejectsEmptyOrMismatched) {
    EXPECT_THROW(build_density_grid({}), std::invalid_argument);
    DelaySamples empty{1.0, {0.0, 1.0}, {}};
    EXPECT_THROW(build_density_grid({samples(0.0, {{1, 2}}), empty}), std::invalid_argument);
    EXPECT_THROW(build_density_grid({samples(0.0, {{1, 2}}), samples(1.0, {{1, 2, 3}})}),
                 std::invalid_argument);
}

TEST(Sensitivity, SameEnsembleEverywhereIsExactlyZero) {
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<int> U(0, 1000);
    std::vector<std::vector<double>> rows(50, std::vector<double>(20));
    for (auto& r : rows) {
        for (double& v : r) v = U(gen);
    }
    std::vector<DelaySamples> per;
    for (double th : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) per.push_back(samples(th, rows));
    const SensitivitySurface s = sensitivity_surface(build_density_grid(per, 200));
    for (std::size_t t = 0; t < s.time.size(); ++t) {
        EXPECT_EQ(s.curve[t], 0.0);
        for (double v : s.S[t]) EXPECT_EQ(v, 0.0);
    }
}

// Two delay nodes, one time point, three bins:
//   theta = 0: P = (0.5, 0.5, 0)    theta = 1: P = (0.25, 0.25, 0.5)
// slopes per bin (-0.25, -0.25, 0.5);
//   S(0) = 0.25*0.5 + 0.25*0.5 + 0          = 0.25
//   S(1) = 0.25*0.25 + 0.25*0.25 + 0.5*0.5  = 0.375
//   curve = (0.25 + 0.375) / 2              = 0.3125
TEST(Sensitivity, HandComputedThreeBinToy) {
    DensityGrid g({0.0, 1.0}, {0.0}, 3, 3.0);
    g.at(0, 0, 0) = 0.5;
    g.at(0, 0, 1) = 0.5;
    g.at(1, 0, 0) = 0.25;
    g.at(1, 0, 1) = 0.25;
    g.at(1, 0, 2) = 0.5;
    const SensitivitySurface s = sensitivity_surface(g);
    EXPECT_DOUBLE_EQ(s.S[0][0], 0.25);
    EXPECT_DOUBLE_EQ(s.S[0][1], 0.375);
    EXPECT_DOUBLE_EQ(s.curve[0], 0.3125);
}

TEST(Sensitivity, MatchesPolynomialDerivativeOnRandomGrid) {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const std::vector<double> th{0.0, 0.5, 1.0, 1.5, 2.0};
    DensityGrid g(th, {0.0, 1.0}, 4, 4.0);
    for (std::size_t k = 0; k < th.size(); ++k) {
        for (std::size_t t = 0; t < 2; ++t) {
            double sum = 0.0;
            for (std::size_t b = 0; b < 4; ++b) sum += g.at(k, t, b) = U(gen);
            for (std::size_t b = 0; b < 4; ++b) g.at(k, t, b) /= sum;
        }
    }
    const SensitivitySurface s = sensitivity_surface(g);
    for (std::size_t t = 0; t < 2; ++t) {
        std::vector<double> want(th.size(), 0.0);
        for (std::size_t b = 0; b < 4; ++b) {
            const LagrangePolynomial L = interpolate_in_theta(g, t, b);
            for (std::size_t k = 0; k < th.size(); ++k) {
                want[k] += std::abs(L.derivative(th[k])) * g.at(k, t, b);
            }
        }
        for (std::size_t k = 0; k < th.size(); ++k) {
            EXPECT_NEAR(s.S[t][k], want[k], 1e-12);
            EXPECT_GE(s.S[t][k], 0.0);
        }
        EXPECT_NEAR(s.curve[t], trapezoid(th, want), 1e-12);
    }
}

TEST(Sensitivity, NeedsTwoDelays) {
    DensityGrid g({0.0}, {0.0}, 2, 1.0);
    EXPECT_THROW(sensitivity_surface(g), std::invalid_argument);
}

TEST(Trapezoid, UnsortedNodes) {
    EXPECT_DOUBLE_EQ(trapezoid({2.0, 0.0, 1.0}, {4.0, 0.0, 2.0}), 4.0);
}
