// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/guidance.hpp"

#include <cmath>
#include <string>

namespace geo {

void GuidanceConfig::validate() const {
    require(std::isfinite(w), "GuidanceConfig: guidance scale must be finite");
    require(null_cond.is_null(), "GuidanceConfig: null_cond must be the Null condition");
}

Latent cfg_eps(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g) {
    g.validate();
    const Latent cond = d.predict_eps(z, t, g.cond);
    const Latent uncond = d.predict_eps(z, t, g.null_cond);
    return g.w * cond + (1.0 - g.w) * uncond;
}

Latent cfg_vjp(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g, const Latent& cotangent) {
    g.validate();
    const Latent cond = d.vjp(z, t, g.cond, cotangent);
    const Latent uncond = d.vjp(z, t, g.null_cond, cotangent);
    return g.w * cond + (1.0 - g.w) * uncond;
}

Latent predict_z0(const Latent& z, Timestep t, const Latent& eps, const DiffusionSchedule& s) {
    require_same_dim(z, eps, "predict_z0");
    if (t == 0) {
        return z;
    }
    return (z - s.sqrt_one_minus_alpha_bar(t) * eps) / s.sqrt_alpha_bar(t);
}

namespace detail {

// Shared by ddim_step and ddim_invert_step; direction checks live in callers.
Latent ddim_move(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps, const DiffusionSchedule& s) {
    require_same_dim(z, eps, "ddim update");
    if (t_from == t_to) {
        return z;
    }
    const double coef = s.noise_to_signal(t_to) - s.noise_to_signal(t_from);
    return s.sqrt_alpha_bar(t_to) * (z / s.sqrt_alpha_bar(t_from) + coef * eps);
}

}  // namespace detail

Latent ddim_step(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps, const DiffusionSchedule& s) {
    require(t_to <= t_from, "ddim_step: t_to (" + std::to_string(t_to) + ") must not exceed t_from (" +
                                std::to_string(t_from) + ")");
    return detail::ddim_move(z, t_from, t_to, eps, s);
}

Trajectory ddim_sample(const Denoiser& d, const Latent& z_start, Timestep t_start, Timestep t_end,
                       const GuidanceConfig& g, const DiffusionSchedule& s) {
    require(t_end <= t_start, "ddim_sample: t_end must not exceed t_start");
    require(s.is_inference_step(t_start) && s.is_inference_step(t_end),
            "ddim_sample: t_start and t_end must be inference steps");
    require(z_start.size() == d.dim(), "ddim_sample: latent dimension mismatch");
    const std::vector<Timestep> steps = s.steps_between(t_end, t_start);

    Trajectory traj;
    traj.frames.reserve(steps.size());
    Latent z = z_start;
    for (std::size_t i = steps.size(); i-- > 0;) {
        const Timestep t = steps[i];
        const Latent eps = t == 0 ? Latent::Zero(z.size()) : cfg_eps(d, z, t, g);
        if (!all_finite(eps)) {
            throw NumericError("ddim_sample: non-finite noise prediction at t=" + std::to_string(t));
        }
        traj.frames.push_back({t, z, predict_z0(z, t, eps, s)});
        if (i > 0) {
            z = ddim_step(z, t, steps[i - 1], eps, s);
        }
    }
    return traj;
}

}  // namespace geo
