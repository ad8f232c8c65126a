// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geo/common.hpp"

namespace geo {

/// Conditioning signal: the empty prompt, one category, or a convex mix of
/// categories. Categories stand in for prompt embeddings.
class Condition {
public:
    enum class Kind { Null, Label, Weighted };

    static Condition null() { return Condition(Kind::Null, {}); }
    static Condition label(int k);
    /// Weights must be nonnegative and sum to 1 within 1e-12.
    static Condition weighted(std::vector<std::pair<int, double>> weights);

    Kind kind() const { return kind_; }
    bool is_null() const { return kind_ == Kind::Null; }
    /// Category index of a Label condition.
    int label_index() const;
    /// (category, weight) pairs; a Label is reported as {(k, 1)}.
    const std::vector<std::pair<int, double>>& weights() const { return weights_; }

    std::string to_string() const;

    friend bool operator==(const Condition& a, const Condition& b) {
        return a.kind_ == b.kind_ && a.weights_ == b.weights_;
    }

private:
    Condition(Kind kind, std::vector<std::pair<int, double>> weights)
        : kind_(kind), weights_(std::move(weights)) {}

    Kind kind_;
    std::vector<std::pair<int, double>> weights_;
};

/// epsilon-prediction contract shared by every sampler and inversion.
///
/// predict_eps(z, 0, c) is identically zero. vjp returns J^T * cotangent with
/// J = d predict_eps / dz at (z, t, c).
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual int dim() const = 0;
    /// Number of categories a Label condition may reference.
    virtual int num_categories() const = 0;
    virtual Latent predict_eps(const Latent& z, Timestep t, const Condition& cond) const = 0;
    virtual Latent vjp(const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent) const = 0;
};

}  // namespace geo
