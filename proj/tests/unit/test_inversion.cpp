// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "geo/inversion.hpp"
#include "geo/worlds.hpp"
#include "test_util.hpp"

using namespace geo;
using namespace geo::testing;

namespace {

// Closed-form clean prediction for a single N(mu, sigma2 I) component.
Latent gaussian_pred_z0(const Latent& z, Timestep t, double mu, double sigma2, const DiffusionSchedule& s) {
    if (t == 0) {
        return z;
    }
    const double a = s.alpha_bar(t);
    const double v = a * sigma2 + 1.0 - a;
    const Latent eps = std::sqrt(1.0 - a) * (z.array() - std::sqrt(a) * mu).matrix() / v;
    return (z - std::sqrt(1.0 - a) * eps) / std::sqrt(a);
}

}  // namespace

TEST(InvertStep, Examples) {
    const auto s = default_schedule();
    std::mt19937_64 rng(1);
    const Latent z = gaussian_vector(3, rng), e = gaussian_vector(3, rng);
    EXPECT_EQ(ddim_invert_step(z, 300, 300, e, s), z);
    const Latent pure = ddim_invert_step(z, 300, 500, Latent::Zero(3), s);
    EXPECT_LE(rel_err(pure, (s.sqrt_alpha_bar(500) / s.sqrt_alpha_bar(300)) * z), 1e-15);
    EXPECT_THROW(ddim_invert_step(z, 500, 300, e, s), ConfigError);
}

TEST(InvertStep, InverseOfDdimStepOnEveryInterval) {
    const auto s = default_schedule();
    std::mt19937_64 rng(2);
    const auto& steps = s.inference_steps();
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        const Latent z = gaussian_vector(5, rng), e = gaussian_vector(5, rng);
        const Latent up = ddim_invert_step(z, steps[i], steps[i + 1], e, s);
        EXPECT_LE(rel_err(ddim_step(up, steps[i + 1], steps[i], e, s), z), 1e-10);
        EXPECT_LE(rel_err(ddim_invert_step(ddim_step(z, steps[i + 1], steps[i], e, s), steps[i], steps[i + 1], e, s), z),
                  1e-10);
    }
}

TEST(DdimInvert, StopAtZeroAndOrdering) {
    const auto s = default_schedule();
    const GmmDenoiser d(random_gmm(2, 2, 1, 9), s);
    const Latent z0 = Latent::Constant(2, 0.2);
    const Trajectory t0 = ddim_invert(d, z0, Condition::label(0), s, 0);
    ASSERT_EQ(t0.size(), 1u);
    EXPECT_EQ(t0.front().z, z0);
    const Trajectory tr = ddim_invert(d, z0, Condition::label(0), s, 500);
    ASSERT_EQ(tr.size(), 26u);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr.frames[i].t, 20 * static_cast<int>(i));
    }
    EXPECT_THROW(ddim_invert(d, z0, Condition::label(0), s, 510), ConfigError);
}

TEST(DdimInvert, StandardNormalScalarRecursion) {
    const auto s = default_schedule();
    const GmmDenoiser d(single_gaussian(3), s);
    std::mt19937_64 rng(3);
    const Latent z0 = gaussian_vector(3, rng);
    const Trajectory tr = ddim_invert(d, z0, Condition::label(0), s, 1000);
    long double factor = 1.0L;
    const auto& steps = s.inference_steps();
    for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
        const long double af = s.alpha_bar(steps[i]), at = s.alpha_bar(steps[i + 1]);
        const long double nf = std::sqrt((1 - af) / af), nt = std::sqrt((1 - at) / at);
        factor *= std::sqrt(at) * (1 / std::sqrt(af) + (nt - nf) * std::sqrt(1 - af));
        EXPECT_LE(rel_err(tr.frames[i + 1].z, static_cast<double>(factor) * z0), 1e-12);
    }
}

TEST(DdimInvert, RoundTripShrinksWithSteps) {
    const World w = make_row_world(0);
    const auto full = make_linear_schedule(1000, 1e-4, 0.02);
    const LabeledLatent x = sample_world(w, Condition::label(1), 17);
    double prev = 1e300;
    for (int S : {25, 50, 100, 200}) {
        const auto s = subsample_schedule(full, S);
        const GmmDenoiser d(w.model, s);
        const Condition c = Condition::label(x.label);
        const Latent zT = ddim_invert(d, x.latent, c, s, 1000).back().z;
        const Latent back = ddim_sample(d, zT, 1000, 0, {1.0, c, Condition::null()}, s).back().z;
        const double err = rel_err(back, x.latent);
        if (S == 50) {
            EXPECT_LE(err, 1e-2);
        }
        EXPECT_LT(err, prev) << "S=" << S;
        prev = err;
    }
}

TEST(CfgPredZ0, Examples) {
    const auto s = default_schedule();
    const GmmModel m = random_gmm(3, 2, 2, 4);
    const GmmDenoiser d(m, s);
    std::mt19937_64 rng(4);
    const Latent z = gaussian_vector(3, rng), target = gaussian_vector(3, rng);
    EXPECT_EQ(cfg_pred_z0(d, z, 0, {7.5, Condition::label(0), Condition::null()}, target, s), target);
    for (int t : {20, 400, 1000}) {
        EXPECT_EQ(cfg_pred_z0(d, z, t, {1.0, Condition::label(1), Condition::null()}, target, s),
                  predict_z0(z, t, d.predict_eps(z, t, Condition::label(1)), s));
    }
    const GmmDenoiser g(single_gaussian(3, 0.4, 2.0), s);
    for (double wv : {0.0, 1.0, 7.5}) {
        for (int t : {20, 260, 980}) {
            EXPECT_LE(rel_err(cfg_pred_z0(g, z, t, {wv, Condition::label(0), Condition::null()}, target, s),
                              gaussian_pred_z0(z, t, 0.4, 2.0, s)),
                      1e-12);
        }
    }
}

TEST(GeoLoss, GradientMatchesFiniteDifferences) {
    const auto s = default_schedule();
    std::mt19937_64 rng(6);
    const auto& steps = s.inference_steps();
    for (int trial = 0; trial < 30; ++trial) {
        const GmmDenoiser d(random_gmm(3, 2, 2, 100 + trial), s);
        const GuidanceConfig g{trial % 3 == 0 ? 1.0 : 7.5, Condition::label(trial % 2), Condition::null()};
        const std::size_t i = static_cast<std::size_t>(rng() % (steps.size() - 1));
        const Latent v = gaussian_vector(3, rng), zt = gaussian_vector(3, rng), prev = gaussian_vector(3, rng);
        const GeoLoss l = geo_accum_loss(v, zt, steps[i], steps[i + 1], d, g, prev, s);
        EXPECT_EQ(l.loss, geo_accum_loss_value(v, zt, steps[i], steps[i + 1], d, g, prev, s));
        EXPECT_GE(l.loss, 0.0);
        const Latent fd = fd_gradient(
            [&](const Latent& x) { return geo_accum_loss_value(x, zt, steps[i], steps[i + 1], d, g, prev, s); }, v);
        EXPECT_LE(rel_err(l.grad, fd), 1e-6) << "trial " << trial;
    }
}

TEST(GeoLoss, ZeroAtLinearSolveAndQuadraticOnGaussian) {
    const auto s = default_schedule();
    const double mu = -0.3, var = 0.5;
    const GmmDenoiser d(single_gaussian(4, mu, var), s);
    const GuidanceConfig g{7.5, Condition::label(0), Condition::null()};
    std::mt19937_64 rng(7);
    for (int t_from : {0, 200, 480}) {
        const int t_to = t_from + 20;
        const Latent zt = gaussian_vector(4, rng), prev = gaussian_vector(4, rng);
        // f(z'(v)) is affine in v: f = A (base + c v) + b, solved exactly.
        const Latent base = geo_step_point(Latent::Zero(4), zt, t_from, t_to, s);
        const double c = s.sqrt_alpha_bar(t_to) * (s.noise_to_signal(t_to) - s.noise_to_signal(t_from));
        const Latent b = gaussian_pred_z0(Latent::Zero(4), t_to, mu, var, s);
        const double A = gaussian_pred_z0(Latent::Ones(4), t_to, mu, var, s)(0) - b(0);
        const Latent vstar = ((prev - b) / A - base) / c;
        EXPECT_LE(geo_accum_loss_value(vstar, zt, t_from, t_to, d, g, prev, s), 1e-20 * (1.0 + prev.squaredNorm()));
        const Latent dir = gaussian_vector(4, rng);
        auto second_diff = [&](const Latent& v) {
            auto L = [&](const Latent& x) { return geo_accum_loss_value(x, zt, t_from, t_to, d, g, prev, s); };
            return L(v + dir) + L(v - dir) - 2.0 * L(v);
        };
        const double h1 = second_diff(gaussian_vector(4, rng)), h2 = second_diff(gaussian_vector(4, rng));
        EXPECT_NEAR(h1, h2, 1e-9 * std::abs(h1));
        EXPECT_NEAR(h1, 2.0 * A * A * c * c * dir.squaredNorm(), 1e-9 * std::abs(h1));
    }
}

TEST(GeoLoss, RejectsBadInterval) {
    const auto s = default_schedule();
    const GmmDenoiser d(single_gaussian(2), s);
    const Latent z = Latent::Zero(2);
    EXPECT_THROW(geo_accum_loss(z, z, 40, 40, d, {}, z, s), ConfigError);
    EXPECT_THROW(geo_accum_loss(z, z, 40, 20, d, {}, z, s), ConfigError);
}

TEST(GeoInvert, ZeroInnerStepsIsPlainInversion) {
    const auto s = default_schedule();
    const GmmDenoiser d(random_gmm(4, 3, 2, 11), s);
    std::mt19937_64 rng(11);
    const Latent z0 = gaussian_vector(4, rng);
    GeoInversionConfig cfg;
    cfg.t_stop = 600;
    cfg.inner_steps = 0;
    cfg.guidance = {7.5, Condition::label(2), Condition::null()};
    const GeoInversionResult r = geo_invert(d, z0, cfg, s);
    const Trajectory ref = ddim_invert(d, z0, Condition::label(2), s, 600);
    ASSERT_EQ(r.trajectory.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(r.trajectory.frames[i].t, ref.frames[i].t);
        EXPECT_EQ(r.trajectory.frames[i].z, ref.frames[i].z);
    }
    EXPECT_TRUE(r.log.empty());
}

TEST(GeoInvert, InnerLossNeverIncreasesWithBacktracking) {
    const auto s = default_schedule();
    const World w = make_image_world(0);
    const GmmDenoiser d(w.model, s);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const LabeledLatent x = sample_world(w, Condition::label(0), seed);
        GeoInversionConfig cfg;
        cfg.t_stop = s.midpoint_step();
        cfg.guidance = {7.5, Condition::label(1), Condition::null()};
        for (InnerStepScale sc : {InnerStepScale::Raw, InnerStepScale::Normalized}) {
            cfg.step_scale = sc;
            const GeoInversionResult r = geo_invert(d, x.latent, cfg, s);
            ASSERT_EQ(r.log.size(), static_cast<std::size_t>(25 * 11));
            for (std::size_t i = 1; i < r.log.size(); ++i) {
                ASSERT_TRUE(std::isfinite(r.log[i].loss));
                if (r.log[i].t == r.log[i - 1].t) {
                    EXPECT_EQ(r.log[i].iteration, r.log[i - 1].iteration + 1);
                    EXPECT_LE(r.log[i].loss, r.log[i - 1].loss);
                }
            }
        }
    }
}

TEST(GeoInvert, ConvergedTrajectoryKeepsCleanPredictionFixed) {
    // Single Gaussian: every inner problem has an exact zero, so the converged
    // chain predicts the original clean latent at every step. The normalized
    // step ignores the alpha_bar factor of the Hessian, so late steps contract
    // slowly and need many iterations.
    const auto s = default_schedule();
    const double mu = 0.2, var = 4.0;
    const GmmDenoiser d(single_gaussian(3, mu, var), s);
    std::mt19937_64 rng(12);
    const Latent z0 = gaussian_vector(3, rng);
    GeoInversionConfig cfg;
    cfg.t_stop = 500;
    cfg.inner_steps = 1000;
    cfg.eta = 0.5;
    cfg.step_scale = InnerStepScale::Normalized;
    cfg.guidance = {7.5, Condition::label(0), Condition::null()};
    const GeoInversionResult r = geo_invert(d, z0, cfg, s);
    for (const auto& f : r.trajectory.frames) {
        EXPECT_LE(rel_err(gaussian_pred_z0(f.z, f.t, mu, var, s), z0), 1e-10) << "t=" << f.t;
    }
}

TEST(GeoInvert, UneditedReconstructionBeatsPlainInversion) {
    const auto s = default_schedule();
    const World w = make_image_world(0);
    const GmmDenoiser d(w.model, s);
    const LatentCodec codec = LatentCodec::identity(w.width, w.height, 1);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const EditTask task = make_recolor_task(w, seed);
        const Latent z0 = codec.encode(task.original);
        const GuidanceConfig g{7.5, task.source_cond, Condition::null()};
        GeoInversionConfig cfg;
        cfg.t_stop = s.midpoint_step();
        cfg.guidance = g;
        const Latent zg = geo_invert(d, z0, cfg, s).trajectory.back().z;
        const Latent zd = ddim_invert(d, z0, task.source_cond, s, cfg.t_stop).back().z;
        const double eg = (ddim_sample(d, zg, cfg.t_stop, 0, g, s).back().z - z0).norm();
        const double ed = (ddim_sample(d, zd, cfg.t_stop, 0, g, s).back().z - z0).norm();
        wins += eg < ed ? 1 : 0;
    }
    EXPECT_GE(wins, 16);
}

TEST(GeoInvert, ConfigValidation) {
    const auto s = default_schedule();
    const GmmDenoiser d(single_gaussian(2), s);
    GeoInversionConfig cfg;
    cfg.t_stop = 500;
    cfg.eta = 0.0;
    EXPECT_THROW(geo_invert(d, Latent::Zero(2), cfg, s), ConfigError);
    cfg.eta = 0.1;
    cfg.inner_steps = -1;
    EXPECT_THROW(geo_invert(d, Latent::Zero(2), cfg, s), ConfigError);
    cfg.inner_steps = 1;
    cfg.t_stop = 510;
    EXPECT_THROW(geo_invert(d, Latent::Zero(2), cfg, s), ConfigError);
    cfg.t_stop = 500;
    EXPECT_THROW(geo_invert(d, Latent::Zero(3), cfg, s), ConfigError);
}
