// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "geo/guidance.hpp"

namespace geo {

/// Inverse DDIM update, t_to >= t_from, with the same rescaled form as
/// ddim_step. With a matched eps the two are exact mutual inverses.
Latent ddim_invert_step(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps,
                        const DiffusionSchedule& s);

/// Text-only DDIM inversion from z0 up to t_stop; eps is evaluated at the
/// current point of each step. Frames ascend in t.
Trajectory ddim_invert(const Denoiser& d, const Latent& z0, const Condition& cond, const DiffusionSchedule& s,
                       Timestep t_stop);

/// Guided prediction of z0 at (z, t):
/// (z - sqrt(1 - a_t) * cfg_eps(z, t)) / sqrt(a_t), and target0 at t = 0.
Latent cfg_pred_z0(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g, const Latent& target0,
                   const DiffusionSchedule& s);

struct GeoLoss {
    double loss = 0.0;
    Latent grad;
};

/// z_{t_to}(v) for the inversion step driven by direction v.
Latent geo_step_point(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to,
                      const DiffusionSchedule& s);

/// || f(z_{t_to}(v), t_to) - prev_pred ||^2 where f is the guided z0
/// prediction at its own argument and timestep.
double geo_accum_loss_value(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to, const Denoiser& d,
                            const GuidanceConfig& g, const Latent& prev_pred, const DiffusionSchedule& s);

/// Loss value and exact gradient w.r.t. v, through the affine step map and
/// the guided vector-Jacobian product. Throws NumericError on a non-finite loss.
GeoLoss geo_accum_loss(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to, const Denoiser& d,
                       const GuidanceConfig& g, const Latent& prev_pred, const DiffusionSchedule& s);

/// How the inner-loop step length relates to eta.
enum class InnerStepScale {
    /// v <- v - eta * grad.
    Raw,
    /// v <- v - (eta / c^2) * grad, c = nsr(t_to) - nsr(t_from); eta is then
    /// a step length for the predicted-z0 residual itself, independent of the
    /// step's position in the schedule.
    Normalized,
};

struct GeoInversionConfig {
    Timestep t_stop = 0;
    int inner_steps = 10;
    double eta = 0.1;
    GuidanceConfig guidance;
    bool backtracking = true;
    int max_halvings = 8;
    InnerStepScale step_scale = InnerStepScale::Raw;

    void validate(const DiffusionSchedule& s) const;
};

struct InnerLoopEntry {
    Timestep t = 0;
    int iteration = 0;
    double loss = 0.0;
    /// Step size that produced this iterate; 0 for the initial direction and
    /// for rejected steps.
    double step_size = 0.0;
};

using InnerLoopLog = std::vector<InnerLoopEntry>;

struct GeoInversionResult {
    Trajectory trajectory;
    InnerLoopLog log;
};

/// Geometric accumulative inversion of target0 up to cfg.t_stop.
///
/// Every ascending step t -> t' starts from the text-only direction
/// eps(z_t, t, C), refines it by inner gradient steps on geo_accum_loss
/// against the cached guided prediction at (z_t, t) (target0 at t = 0), and
/// then moves with ddim_invert_step. inner_steps = 0 reproduces ddim_invert.
GeoInversionResult geo_invert(const Denoiser& d, const Latent& target0, const GeoInversionConfig& cfg,
                              const DiffusionSchedule& s);

}  // namespace geo
