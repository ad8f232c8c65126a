// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geo {

namespace {

void check_steps(const std::vector<Timestep>& steps, int T) {
    require(!steps.empty(), "schedule: inference_steps must be nonempty");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        require(steps[i] >= 0 && steps[i] <= T, "schedule: inference step " + std::to_string(steps[i]) +
                                                    " outside [0, " + std::to_string(T) + "]");
        if (i > 0) {
            require(steps[i] > steps[i - 1], "schedule: inference_steps must be strictly increasing");
        }
    }
}

}  // namespace

DiffusionSchedule::DiffusionSchedule(std::vector<double> betas, std::vector<Timestep> inference_steps)
    : betas_(std::move(betas)), inference_steps_(std::move(inference_steps)) {
    require(!betas_.empty(), "schedule: T must be positive");
    alpha_bars_.resize(betas_.size() + 1);
    alpha_bars_[0] = 1.0;
    for (std::size_t i = 0; i < betas_.size(); ++i) {
        const double b = betas_[i];
        require(b > 0.0 && b < 1.0, "schedule: beta[" + std::to_string(i) + "] = " + std::to_string(b) +
                                        " outside (0, 1)");
        alpha_bars_[i + 1] = alpha_bars_[i] * (1.0 - b);
    }
    check_steps(inference_steps_, T());
}

double DiffusionSchedule::alpha_bar(Timestep t) const {
    require(t >= 0 && t <= T(), "schedule: timestep " + std::to_string(t) + " out of range");
    return alpha_bars_[static_cast<std::size_t>(t)];
}

double DiffusionSchedule::sqrt_alpha_bar(Timestep t) const { return std::sqrt(alpha_bar(t)); }

double DiffusionSchedule::sqrt_one_minus_alpha_bar(Timestep t) const { return std::sqrt(1.0 - alpha_bar(t)); }

double DiffusionSchedule::noise_to_signal(Timestep t) const {
    return sqrt_one_minus_alpha_bar(t) / sqrt_alpha_bar(t);
}

bool DiffusionSchedule::is_inference_step(Timestep t) const {
    return std::binary_search(inference_steps_.begin(), inference_steps_.end(), t);
}

std::size_t DiffusionSchedule::step_position(Timestep t) const {
    auto it = std::lower_bound(inference_steps_.begin(), inference_steps_.end(), t);
    require(it != inference_steps_.end() && *it == t,
            "schedule: timestep " + std::to_string(t) + " is not an inference step");
    return static_cast<std::size_t>(it - inference_steps_.begin());
}

Timestep DiffusionSchedule::midpoint_step() const {
    return inference_steps_[static_cast<std::size_t>(num_intervals() / 2)];
}

std::vector<Timestep> DiffusionSchedule::steps_between(Timestep lo, Timestep hi) const {
    std::vector<Timestep> out;
    for (Timestep t : inference_steps_) {
        if (t >= lo && t <= hi) {
            out.push_back(t);
        }
    }
    return out;
}

DiffusionSchedule DiffusionSchedule::with_inference_steps(std::vector<Timestep> steps) const {
    return DiffusionSchedule(betas_, std::move(steps));
}

DiffusionSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
    require(T >= 1, "make_linear_schedule: T must be positive");
    require(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
            "make_linear_schedule: need 0 < beta_start <= beta_end < 1");
    std::vector<double> betas(static_cast<std::size_t>(T));
    for (int i = 0; i < T; ++i) {
        const double frac = T == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(T - 1);
        betas[static_cast<std::size_t>(i)] = beta_start + (beta_end - beta_start) * frac;
    }
    std::vector<Timestep> steps(static_cast<std::size_t>(T) + 1);
    for (int i = 0; i <= T; ++i) {
        steps[static_cast<std::size_t>(i)] = i;
    }
    return DiffusionSchedule(std::move(betas), std::move(steps));
}

DiffusionSchedule subsample_schedule(const DiffusionSchedule& s, int S) {
    const int T = s.T();
    require(S >= 1 && S <= T, "subsample_schedule: need 1 <= S <= T (S=" + std::to_string(S) +
                                  ", T=" + std::to_string(T) + ")");
    std::vector<Timestep> steps(static_cast<std::size_t>(S) + 1);
    for (int i = 0; i <= S; ++i) {
        // i*T fits comfortably in 64 bits for any realistic T.
        steps[static_cast<std::size_t>(i)] =
            static_cast<Timestep>(static_cast<long long>(i) * T / S);
    }
    return s.with_inference_steps(std::move(steps));
}

Latent forward_diffuse(const Latent& z0, Timestep t, const Latent& eps, const DiffusionSchedule& s) {
    require_same_dim(z0, eps, "forward_diffuse");
    return s.sqrt_alpha_bar(t) * z0 + s.sqrt_one_minus_alpha_bar(t) * eps;
}

}  // namespace geo
