// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "geo/denoiser.hpp"
#include "geo/schedule.hpp"

namespace geo {

struct GmmComponent {
    double weight = 0.0;
    Latent mean;
    Latent variance;  // diagonal
    int label = 0;
};

/// Diagonal-covariance Gaussian mixture over clean latents. Each component
/// carries a category label used to restrict the mixture under Label
/// conditions.
struct GmmModel {
    int dim = 0;
    std::vector<GmmComponent> components;

    /// Throws ConfigError unless weights sum to 1 (1e-12), variances are
    /// positive and every mean/variance has length dim.
    void validate() const;
    int num_categories() const;
    bool has_label(int k) const;
};

/// Mixture weights after conditioning. Null keeps the prior weights, Label(k)
/// restricts and renormalizes, Weighted mixes the per-label conditionals.
std::vector<double> conditioned_weights(const GmmModel& model, const Condition& cond);

/// Exact E[eps | z_t = z] for data drawn from the (conditioned) mixture:
/// -sqrt(1 - a_t) * grad log p_t(z | cond).
Latent gmm_predict_eps(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond,
                       const DiffusionSchedule& s);

/// J^T * cotangent for J = d gmm_predict_eps / dz, in closed form.
Latent gmm_vjp(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond,
               const Latent& cotangent, const DiffusionSchedule& s);

/// Posterior component responsibilities of the noised mixture at (z, t).
std::vector<double> gmm_responsibilities(const GmmModel& model, const Latent& z, Timestep t,
                                         const Condition& cond, const DiffusionSchedule& s);

class GmmDenoiser final : public Denoiser {
public:
    GmmDenoiser(GmmModel model, DiffusionSchedule schedule);

    int dim() const override { return model_.dim; }
    int num_categories() const override { return model_.num_categories(); }
    Latent predict_eps(const Latent& z, Timestep t, const Condition& cond) const override;
    Latent vjp(const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent) const override;

    const GmmModel& model() const { return model_; }
    const DiffusionSchedule& schedule() const { return schedule_; }

private:
    GmmModel model_;
    DiffusionSchedule schedule_;
};

}  // namespace geo
