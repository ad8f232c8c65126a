// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "geo/common.hpp"

namespace geo {

/// Noise schedule over T training steps.
///
/// alpha_bars has T+1 entries with alpha_bars[0] == 1, so timestep 0 is the
/// clean sample and alpha_bars[t] = alpha_bars[t-1] * (1 - betas[t-1]).
/// inference_steps is the strictly increasing subset of {0..T} the DDIM
/// sampler and the inversions walk over.
class DiffusionSchedule {
public:
    DiffusionSchedule(std::vector<double> betas, std::vector<Timestep> inference_steps);

    int T() const { return static_cast<int>(betas_.size()); }
    const std::vector<double>& betas() const { return betas_; }
    const std::vector<double>& alpha_bars() const { return alpha_bars_; }
    const std::vector<Timestep>& inference_steps() const { return inference_steps_; }

    double alpha_bar(Timestep t) const;
    double sqrt_alpha_bar(Timestep t) const;
    double sqrt_one_minus_alpha_bar(Timestep t) const;
    /// sqrt((1 - a) / a), the noise-to-signal ratio DDIM steps are linear in.
    double noise_to_signal(Timestep t) const;

    bool is_inference_step(Timestep t) const;
    /// Position of t in inference_steps; throws if t is not an inference step.
    std::size_t step_position(Timestep t) const;
    /// inference_steps[S/2], the default stop time of the editing pipeline.
    Timestep midpoint_step() const;
    /// Number of inference intervals S (inference_steps().size() - 1).
    int num_intervals() const { return static_cast<int>(inference_steps_.size()) - 1; }

    /// Inference steps in [lo, hi], ascending.
    std::vector<Timestep> steps_between(Timestep lo, Timestep hi) const;

    DiffusionSchedule with_inference_steps(std::vector<Timestep> steps) const;

private:
    std::vector<double> betas_;
    std::vector<double> alpha_bars_;
    std::vector<Timestep> inference_steps_;
};

/// betas[i] interpolated linearly from beta_start to beta_end over T steps;
/// every timestep 0..T is an inference step.
DiffusionSchedule make_linear_schedule(int T, double beta_start, double beta_end);

/// Keeps S+1 evenly spaced timesteps floor(i*T/S), i = 0..S.
DiffusionSchedule subsample_schedule(const DiffusionSchedule& s, int S);

/// sqrt(a_t) z0 + sqrt(1 - a_t) eps.
Latent forward_diffuse(const Latent& z0, Timestep t, const Latent& eps, const DiffusionSchedule& s);

}  // namespace geo
