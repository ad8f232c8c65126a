// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "geo/schedule.hpp"
#include "test_util.hpp"

using namespace geo;
using geo::testing::gaussian_vector;

TEST(Schedule, SingleStep) {
    const auto s = make_linear_schedule(1, 0.1, 0.1);
    ASSERT_EQ(s.betas().size(), 1u);
    EXPECT_DOUBLE_EQ(s.betas()[0], 0.1);
    ASSERT_EQ(s.alpha_bars().size(), 2u);
    EXPECT_EQ(s.alpha_bars()[0], 1.0);
    EXPECT_DOUBLE_EQ(s.alpha_bars()[1], 0.9);
}

TEST(Schedule, TwoSteps) {
    const auto s = make_linear_schedule(2, 0.1, 0.3);
    EXPECT_DOUBLE_EQ(s.betas()[1], 0.3);
    EXPECT_NEAR(s.alpha_bars()[2], 0.63, 1e-15);
}

TEST(Schedule, LogSpaceProductOracle) {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    // Independent: betas from the closed form, product accumulated as a
    // long-double sum of log1p terms.
    long double log_sum = 0.0L;
    for (int i = 0; i < 1000; ++i) {
        const long double beta = 1e-4L + (0.02L - 1e-4L) * static_cast<long double>(i) / 999.0L;
        log_sum += std::log1p(-beta);
        const double expect = static_cast<double>(std::exp(log_sum));
        ASSERT_NEAR(s.alpha_bars()[static_cast<std::size_t>(i + 1)], expect, 1e-13 * expect) << "t=" << i + 1;
    }
}

TEST(Schedule, Invariants) {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    ASSERT_EQ(s.alpha_bars().size(), 1001u);
    EXPECT_EQ(s.alpha_bars()[0], 1.0);
    for (int t = 1; t <= 1000; ++t) {
        const double a = s.alpha_bars()[static_cast<std::size_t>(t)];
        EXPECT_LT(a, s.alpha_bars()[static_cast<std::size_t>(t - 1)]);
        EXPECT_GT(a, 0.0);
        EXPECT_EQ(a, s.alpha_bars()[static_cast<std::size_t>(t - 1)] * (1.0 - s.betas()[static_cast<std::size_t>(t - 1)]));
    }
    EXPECT_EQ(s.inference_steps().size(), 1001u);
    EXPECT_EQ(s.inference_steps().front(), 0);
    EXPECT_EQ(s.inference_steps().back(), 1000);
}

TEST(Schedule, RejectsBadInputs) {
    EXPECT_THROW(make_linear_schedule(0, 0.1, 0.2), ConfigError);
    EXPECT_THROW(make_linear_schedule(10, 0.0, 0.2), ConfigError);
    EXPECT_THROW(make_linear_schedule(10, 0.3, 0.2), ConfigError);
    EXPECT_THROW(make_linear_schedule(10, 0.1, 1.0), ConfigError);
    const auto s = make_linear_schedule(10, 0.01, 0.02);
    EXPECT_THROW(subsample_schedule(s, 0), ConfigError);
    EXPECT_THROW(subsample_schedule(s, 11), ConfigError);
    EXPECT_THROW(DiffusionSchedule({0.1, 0.1}, {0, 2, 1}), ConfigError);
    EXPECT_THROW(DiffusionSchedule({0.1, 0.1}, {0, 3}), ConfigError);
}

TEST(Subsample, FiftyOfThousand) {
    const auto s = subsample_schedule(make_linear_schedule(1000, 1e-4, 0.02), 50);
    ASSERT_EQ(s.inference_steps().size(), 51u);
    for (int i = 0; i <= 50; ++i) {
        EXPECT_EQ(s.inference_steps()[static_cast<std::size_t>(i)], 20 * i);
    }
    EXPECT_EQ(s.midpoint_step(), 500);
    EXPECT_EQ(s.num_intervals(), 50);
}

TEST(Subsample, IdentityAtT) {
    const auto full = make_linear_schedule(37, 0.001, 0.05);
    const auto s = subsample_schedule(full, 37);
    EXPECT_EQ(s.inference_steps(), full.inference_steps());
    EXPECT_EQ(s.alpha_bars(), full.alpha_bars());
}

TEST(Subsample, FloorRounding) {
    const auto s = subsample_schedule(make_linear_schedule(10, 0.01, 0.02), 3);
    EXPECT_EQ(s.inference_steps(), (std::vector<Timestep>{0, 3, 6, 10}));
}

TEST(Subsample, FloorRuleEnumerated) {
    const auto full = make_linear_schedule(97, 0.001, 0.02);
    for (int S = 1; S <= 97; ++S) {
        const auto s = subsample_schedule(full, S);
        ASSERT_EQ(s.inference_steps().size(), static_cast<std::size_t>(S + 1));
        for (int i = 0; i <= S; ++i) {
            EXPECT_EQ(s.inference_steps()[static_cast<std::size_t>(i)], (i * 97) / S);
        }
        EXPECT_EQ(s.betas(), full.betas());
    }
}

TEST(ForwardDiffuse, Examples) {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(1);
    const Latent z0 = gaussian_vector(5, rng);
    const Latent eps = gaussian_vector(5, rng);
    EXPECT_EQ(forward_diffuse(z0, 0, eps, s), z0);

    // alpha_bar = 0.25 and 0.36 via hand-built schedules.
    const DiffusionSchedule q({0.75}, {0, 1});
    EXPECT_NEAR(forward_diffuse(Latent::Constant(1, 1.0), 1, Latent::Zero(1), q)(0), 0.5, 1e-15);
    const DiffusionSchedule r({0.64}, {0, 1});
    EXPECT_NEAR(forward_diffuse(Latent::Zero(1), 1, Latent::Constant(1, 1.0), r)(0), 0.8, 1e-15);

    EXPECT_THROW(forward_diffuse(z0, 3, Latent::Zero(4), s), ConfigError);
}

TEST(ForwardDiffuse, ZeroNoiseIsScaling) {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(2);
    for (int t = 0; t <= 1000; t += 37) {
        const Latent z0 = gaussian_vector(8, rng);
        const Latent out = forward_diffuse(z0, t, Latent::Zero(8), s);
        EXPECT_LE((out - std::sqrt(s.alpha_bar(t)) * z0).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(ForwardDiffuse, AffineInInputs) {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int t = static_cast<int>(rng() % 1001);
        const Latent a = gaussian_vector(6, rng), b = gaussian_vector(6, rng), e = gaussian_vector(6, rng);
        const double x = coef(rng), y = coef(rng);
        const Latent lhs = forward_diffuse(x * a + y * b, t, e, s);
        const Latent rhs = forward_diffuse(a, t, Latent::Zero(6), s) * x + forward_diffuse(b, t, Latent::Zero(6), s) * y +
                           forward_diffuse(Latent::Zero(6), t, e, s);
        EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1.0 + lhs.norm()));
    }
}
