// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "geo/denoiser.hpp"
#include "geo/schedule.hpp"

namespace geo {

inline constexpr double kDefaultGuidanceScale = 7.5;

struct GuidanceConfig {
    double w = kDefaultGuidanceScale;
    Condition cond = Condition::null();
    Condition null_cond = Condition::null();

    void validate() const;
};

struct TrajectoryFrame {
    Timestep t = 0;
    Latent z;
    Latent z0_pred;
};

/// Ordered (t, z_t, predicted z0) frames. Timesteps decrease for sampling and
/// increase for inversion.
struct Trajectory {
    std::vector<TrajectoryFrame> frames;

    const TrajectoryFrame& front() const { return frames.front(); }
    const TrajectoryFrame& back() const { return frames.back(); }
    std::size_t size() const { return frames.size(); }
};

/// w * eps(z, t, C) + (1 - w) * eps(z, t, null).
Latent cfg_eps(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g);

/// w * vjp(C) + (1 - w) * vjp(null).
Latent cfg_vjp(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g, const Latent& cotangent);

/// (z - sqrt(1 - a_t) eps) / sqrt(a_t).
Latent predict_z0(const Latent& z, Timestep t, const Latent& eps, const DiffusionSchedule& s);

/// Deterministic DDIM update between any two timesteps, t_to <= t_from:
/// z_to / sqrt(a_to) = z / sqrt(a_from) + (nsr(t_to) - nsr(t_from)) * eps.
Latent ddim_step(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps, const DiffusionSchedule& s);

/// Walks the inference steps from t_start down to t_end with guided DDIM
/// steps, recording predicted z0 at every visited step.
Trajectory ddim_sample(const Denoiser& d, const Latent& z_start, Timestep t_start, Timestep t_end,
                       const GuidanceConfig& g, const DiffusionSchedule& s);

}  // namespace geo
