// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/inversion.hpp"

#include <cmath>
#include <string>

namespace geo {

namespace detail {
Latent ddim_move(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps, const DiffusionSchedule& s);
}

Latent ddim_invert_step(const Latent& z, Timestep t_from, Timestep t_to, const Latent& eps,
                        const DiffusionSchedule& s) {
    require(t_to >= t_from, "ddim_invert_step: t_to (" + std::to_string(t_to) + ") must not be below t_from (" +
                                std::to_string(t_from) + ")");
    return detail::ddim_move(z, t_from, t_to, eps, s);
}

namespace {

Latent text_eps(const Denoiser& d, const Latent& z, Timestep t, const Condition& cond) {
    Latent eps = d.predict_eps(z, t, cond);
    if (!all_finite(eps)) {
        throw NumericError("inversion: non-finite noise prediction at t=" + std::to_string(t));
    }
    return eps;
}

std::vector<Timestep> ascending_steps(const DiffusionSchedule& s, Timestep t_stop) {
    require(s.is_inference_step(t_stop), "inversion: t_stop " + std::to_string(t_stop) +
                                             " is not an inference step");
    return s.steps_between(0, t_stop);
}

}  // namespace

Trajectory ddim_invert(const Denoiser& d, const Latent& z0, const Condition& cond, const DiffusionSchedule& s,
                       Timestep t_stop) {
    require(z0.size() == d.dim(), "ddim_invert: latent dimension mismatch");
    const std::vector<Timestep> steps = ascending_steps(s, t_stop);
    Trajectory traj;
    traj.frames.reserve(steps.size());
    Latent z = z0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const Timestep t = steps[i];
        const Latent eps = text_eps(d, z, t, cond);
        traj.frames.push_back({t, z, predict_z0(z, t, eps, s)});
        if (i + 1 < steps.size()) {
            z = ddim_invert_step(z, t, steps[i + 1], eps, s);
        }
    }
    return traj;
}

Latent cfg_pred_z0(const Denoiser& d, const Latent& z, Timestep t, const GuidanceConfig& g, const Latent& target0,
                   const DiffusionSchedule& s) {
    if (t == 0) {
        require_same_dim(z, target0, "cfg_pred_z0");
        return target0;
    }
    return predict_z0(z, t, cfg_eps(d, z, t, g), s);
}

Latent geo_step_point(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to,
                      const DiffusionSchedule& s) {
    return ddim_invert_step(z_t, t_from, t_to, v, s);
}

double geo_accum_loss_value(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to, const Denoiser& d,
                            const GuidanceConfig& g, const Latent& prev_pred, const DiffusionSchedule& s) {
    require(t_to > t_from, "geo_accum_loss: t_to must exceed t_from");
    require_same_dim(v, z_t, "geo_accum_loss");
    require_same_dim(prev_pred, z_t, "geo_accum_loss");
    const Latent z_next = geo_step_point(v, z_t, t_from, t_to, s);
    const Latent pred = predict_z0(z_next, t_to, cfg_eps(d, z_next, t_to, g), s);
    return (pred - prev_pred).squaredNorm();
}

GeoLoss geo_accum_loss(const Latent& v, const Latent& z_t, Timestep t_from, Timestep t_to, const Denoiser& d,
                       const GuidanceConfig& g, const Latent& prev_pred, const DiffusionSchedule& s) {
    require(t_to > t_from, "geo_accum_loss: t_to must exceed t_from");
    require_same_dim(v, z_t, "geo_accum_loss");
    require_same_dim(prev_pred, z_t, "geo_accum_loss");
    const Latent z_next = geo_step_point(v, z_t, t_from, t_to, s);
    const Latent resid = predict_z0(z_next, t_to, cfg_eps(d, z_next, t_to, g), s) - prev_pred;
    const double loss = resid.squaredNorm();
    if (!std::isfinite(loss)) {
        throw NumericError("geo_accum_loss: non-finite loss at t=" + std::to_string(t_from) + "->" +
                           std::to_string(t_to));
    }
    // z_next = sqrt(a_to) * (z_t / sqrt(a_from) + c * v), so dz_next/dv = sqrt(a_to) * c.
    // f(z) = (z - sqrt(1 - a_to) * eps~(z)) / sqrt(a_to).
    const double c = s.noise_to_signal(t_to) - s.noise_to_signal(t_from);
    const Latent cot = 2.0 * resid;
    const Latent df_dz = (cot - s.sqrt_one_minus_alpha_bar(t_to) * cfg_vjp(d, z_next, t_to, g, cot)) /
                         s.sqrt_alpha_bar(t_to);
    return GeoLoss{loss, s.sqrt_alpha_bar(t_to) * c * df_dz};
}

void GeoInversionConfig::validate(const DiffusionSchedule& s) const {
    require(inner_steps >= 0, "GeoInversionConfig: inner_steps must be nonnegative");
    require(std::isfinite(eta) && eta > 0.0, "GeoInversionConfig: eta must be positive");
    require(max_halvings >= 0, "GeoInversionConfig: max_halvings must be nonnegative");
    require(s.is_inference_step(t_stop), "GeoInversionConfig: t_stop " + std::to_string(t_stop) +
                                             " is not an inference step");
    guidance.validate();
}

GeoInversionResult geo_invert(const Denoiser& d, const Latent& target0, const GeoInversionConfig& cfg,
                              const DiffusionSchedule& s) {
    cfg.validate(s);
    require(target0.size() == d.dim(), "geo_invert: target0 dimension mismatch");
    const std::vector<Timestep> steps = ascending_steps(s, cfg.t_stop);
    const Condition& text = cfg.guidance.cond;

    GeoInversionResult out;
    out.trajectory.frames.reserve(steps.size());
    Latent z = target0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const Timestep t = steps[i];
        Latent v = text_eps(d, z, t, text);
        out.trajectory.frames.push_back({t, z, predict_z0(z, t, v, s)});
        if (i + 1 == steps.size()) {
            break;
        }
        const Timestep t_next = steps[i + 1];

        if (cfg.inner_steps > 0) {
            const Latent prev_pred = cfg_pred_z0(d, z, t, cfg.guidance, target0, s);
            double scale = 1.0;
            if (cfg.step_scale == InnerStepScale::Normalized) {
                const double c = s.noise_to_signal(t_next) - s.noise_to_signal(t);
                scale = 1.0 / (c * c);
            }
            GeoLoss cur = geo_accum_loss(v, z, t, t_next, d, cfg.guidance, prev_pred, s);
            out.log.push_back({t, 0, cur.loss, 0.0});
            for (int it = 1; it <= cfg.inner_steps; ++it) {
                double step = cfg.eta;
                Latent trial = v - (step * scale) * cur.grad;
                double trial_loss = geo_accum_loss_value(trial, z, t, t_next, d, cfg.guidance, prev_pred, s);
                if (cfg.backtracking) {
                    int halvings = 0;
                    while (!(trial_loss <= cur.loss) && halvings < cfg.max_halvings) {
                        step *= 0.5;
                        ++halvings;
                        trial = v - (step * scale) * cur.grad;
                        trial_loss = geo_accum_loss_value(trial, z, t, t_next, d, cfg.guidance, prev_pred, s);
                    }
                    if (!(trial_loss <= cur.loss)) {
                        // No acceptable step along the gradient; hold the iterate.
                        out.log.push_back({t, it, cur.loss, 0.0});
                        continue;
                    }
                }
                if (!std::isfinite(trial_loss)) {
                    throw NumericError("geo_invert: non-finite inner loss at t=" + std::to_string(t));
                }
                v = std::move(trial);
                cur = geo_accum_loss(v, z, t, t_next, d, cfg.guidance, prev_pred, s);
                out.log.push_back({t, it, cur.loss, step});
            }
        }
        z = ddim_invert_step(z, t, t_next, v, s);
    }
    return out;
}

}  // namespace geo
