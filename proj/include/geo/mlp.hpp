// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "geo/denoiser.hpp"
#include "geo/schedule.hpp"

namespace geo {

enum class Activation { Tanh, Sigmoid };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct MlpLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
};

/// Parameters of a small perceptron epsilon-predictor.
///
/// Input is [z, t/T, embedding(cond)]; hidden layers use `activation`, the
/// output layer is linear. Embedding row `num_categories` is the Null
/// condition; Weighted conditions use the weight-mixed rows.
struct MlpParams {
    int dim = 0;
    int num_categories = 0;
    int embed_dim = 0;
    int T = 0;
    Activation activation = Activation::Tanh;
    Eigen::MatrixXd embeddings;  // (num_categories + 1) x embed_dim
    std::vector<MlpLayer> layers;

    int input_width() const { return dim + 1 + embed_dim; }
    void validate() const;
};

class MlpDenoiser final : public Denoiser {
public:
    explicit MlpDenoiser(MlpParams params);

    int dim() const override { return params_.dim; }
    int num_categories() const override { return params_.num_categories; }
    Latent predict_eps(const Latent& z, Timestep t, const Condition& cond) const override;
    /// Reverse-mode accumulation through the layers, w.r.t. z only.
    Latent vjp(const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent) const override;

    const MlpParams& params() const { return params_; }

private:
    Eigen::VectorXd input(const Latent& z, Timestep t, const Condition& cond) const;

    MlpParams params_;
};

struct MlpTrainConfig {
    std::vector<int> hidden = {64, 64};
    int embed_dim = 4;
    Activation activation = Activation::Tanh;
    int iterations = 3000;
    int batch_size = 128;
    double learning_rate = 2e-3;
    /// Probability of replacing a sample's label by Null, so one network
    /// serves both branches of classifier-free guidance.
    double null_prob = 0.15;
    std::uint64_t seed = 0;
};

struct LabeledLatent {
    Latent latent;
    int label = 0;
};

struct MlpTrainResult {
    MlpDenoiser denoiser;
    /// Minibatch loss per iteration.
    std::vector<double> losses;
};

/// Seeded Xavier-style initialization.
MlpParams init_mlp(int dim, int num_categories, int T, const MlpTrainConfig& cfg);

/// Minimizes E || eps - eps_theta(z_t, t, c) ||^2 over t ~ U{1..T},
/// eps ~ N(0, I) with Adam. Throws NumericError on a non-finite loss.
MlpTrainResult train_mlp_denoiser(const std::vector<LabeledLatent>& data, const DiffusionSchedule& s,
                                  const MlpTrainConfig& cfg);

}  // namespace geo
