// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

namespace geo {

void GmmModel::validate() const {
    require(dim > 0, "GmmModel: dim must be positive");
    require(!components.empty(), "GmmModel: needs at least one component");
    double total = 0.0;
    for (std::size_t k = 0; k < components.size(); ++k) {
        const auto& c = components[k];
        const std::string where = "GmmModel: component " + std::to_string(k);
        require(std::isfinite(c.weight) && c.weight >= 0.0, where + " has invalid weight");
        require(c.mean.size() == dim && c.variance.size() == dim, where + " has wrong dimension");
        require(c.mean.allFinite(), where + " has non-finite mean");
        require((c.variance.array() > 0.0).all() && c.variance.allFinite(), where + " has non-positive variance");
        require(c.label >= 0, where + " has negative label");
        total += c.weight;
    }
    require(std::abs(total - 1.0) <= 1e-12, "GmmModel: weights must sum to 1");
}

int GmmModel::num_categories() const {
    int n = 0;
    for (const auto& c : components) {
        n = std::max(n, c.label + 1);
    }
    return n;
}

bool GmmModel::has_label(int k) const {
    return std::any_of(components.begin(), components.end(), [k](const GmmComponent& c) { return c.label == k; });
}

std::vector<double> conditioned_weights(const GmmModel& model, const Condition& cond) {
    std::vector<double> w(model.components.size(), 0.0);
    if (cond.is_null()) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            w[k] = model.components[k].weight;
        }
        return w;
    }
    std::map<int, double> label_mass;
    for (const auto& c : model.components) {
        label_mass[c.label] += c.weight;
    }
    for (const auto& [label, lw] : cond.weights()) {
        if (lw == 0.0) {
            continue;
        }
        auto it = label_mass.find(label);
        require(it != label_mass.end(), "gmm: label " + std::to_string(label) + " absent from model");
        require(it->second > 0.0, "gmm: label " + std::to_string(label) + " has zero prior mass");
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (model.components[k].label == label) {
                w[k] += lw * model.components[k].weight / it->second;
            }
        }
    }
    return w;
}

namespace {

// Per-component quantities of the noised mixture at (z, t).
struct NoisedMixture {
    std::vector<double> resp;
    std::vector<Eigen::ArrayXd> whitened;  // (z - m_k) / v_k
    std::vector<Eigen::ArrayXd> var;       // v_k
};

NoisedMixture noised_mixture(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond,
                             const DiffusionSchedule& s) {
    require(z.size() == model.dim, "gmm: latent dimension " + std::to_string(z.size()) + " != model dim " +
                                       std::to_string(model.dim));
    const double ab = s.alpha_bar(t);
    const double sab = std::sqrt(ab);
    const std::vector<double> w = conditioned_weights(model, cond);

    NoisedMixture out;
    const std::size_t K = model.components.size();
    out.resp.assign(K, 0.0);
    out.whitened.resize(K);
    out.var.resize(K);
    std::vector<double> logp(K, -std::numeric_limits<double>::infinity());
    double max_logp = -std::numeric_limits<double>::infinity();
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < K; ++k) {
        if (w[k] <= 0.0) {
            continue;
        }
        const auto& c = model.components[k];
        Eigen::ArrayXd v = ab * c.variance.array() + (1.0 - ab);
        Eigen::ArrayXd diff = z.array() - sab * c.mean.array();
        logp[k] = std::log(w[k]) - 0.5 * ((diff.square() / v).sum() + v.log().sum() + log_2pi * model.dim);
        out.whitened[k] = diff / v;
        out.var[k] = std::move(v);
        max_logp = std::max(max_logp, logp[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        if (w[k] > 0.0) {
            out.resp[k] = std::exp(logp[k] - max_logp);
            total += out.resp[k];
        }
    }
    for (double& r : out.resp) {
        r /= total;
    }
    return out;
}

}  // namespace

std::vector<double> gmm_responsibilities(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond,
                                         const DiffusionSchedule& s) {
    return noised_mixture(model, z, t, cond, s).resp;
}

Latent gmm_predict_eps(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond,
                       const DiffusionSchedule& s) {
    const NoisedMixture mix = noised_mixture(model, z, t, cond, s);
    if (t == 0) {
        return Latent::Zero(z.size());
    }
    Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(z.size());
    for (std::size_t k = 0; k < mix.resp.size(); ++k) {
        if (mix.resp[k] > 0.0) {
            acc += mix.resp[k] * mix.whitened[k];
        }
    }
    return s.sqrt_one_minus_alpha_bar(t) * acc.matrix();
}

Latent gmm_vjp(const GmmModel& model, const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent,
               const DiffusionSchedule& s) {
    require_same_dim(z, cotangent, "gmm_vjp");
    const NoisedMixture mix = noised_mixture(model, z, t, cond, s);
    if (t == 0) {
        return Latent::Zero(z.size());
    }
    // J = sqrt(1-a) [diag(sum r_k / v_k) - sum r_k a_k a_k^T + abar abar^T], symmetric.
    const Eigen::ArrayXd c = cotangent.array();
    Eigen::ArrayXd inv_var = Eigen::ArrayXd::Zero(z.size());
    Eigen::ArrayXd abar = Eigen::ArrayXd::Zero(z.size());
    Eigen::ArrayXd outer = Eigen::ArrayXd::Zero(z.size());
    for (std::size_t k = 0; k < mix.resp.size(); ++k) {
        const double r = mix.resp[k];
        if (r <= 0.0) {
            continue;
        }
        inv_var += r / mix.var[k];
        abar += r * mix.whitened[k];
        outer += (r * (mix.whitened[k] * c).sum()) * mix.whitened[k];
    }
    const Eigen::ArrayXd out = inv_var * c - outer + (abar * c).sum() * abar;
    return s.sqrt_one_minus_alpha_bar(t) * out.matrix();
}

GmmDenoiser::GmmDenoiser(GmmModel model, DiffusionSchedule schedule)
    : model_(std::move(model)), schedule_(std::move(schedule)) {
    model_.validate();
}

Latent GmmDenoiser::predict_eps(const Latent& z, Timestep t, const Condition& cond) const {
    return gmm_predict_eps(model_, z, t, cond, schedule_);
}

Latent GmmDenoiser::vjp(const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent) const {
    return gmm_vjp(model_, z, t, cond, cotangent, schedule_);
}

}  // namespace geo
