// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace geo {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Tanh:
            return "tanh";
        case Activation::Sigmoid:
            return "sigmoid";
    }
    return "?";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") {
        return Activation::Tanh;
    }
    if (name == "sigmoid") {
        return Activation::Sigmoid;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

namespace {

Eigen::ArrayXXd activate(Activation a, const Eigen::ArrayXXd& x) {
    if (a == Activation::Tanh) {
        return x.tanh();
    }
    return 1.0 / (1.0 + (-x).exp());
}

// Derivative expressed through the activation output y.
Eigen::ArrayXXd activate_grad(Activation a, const Eigen::ArrayXXd& y) {
    if (a == Activation::Tanh) {
        return 1.0 - y.square();
    }
    return y * (1.0 - y);
}

Eigen::VectorXd embedding_for(const MlpParams& p, const Condition& cond) {
    if (cond.is_null()) {
        return p.embeddings.row(p.num_categories).transpose();
    }
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p.embed_dim);
    for (const auto& [k, w] : cond.weights()) {
        require(k < p.num_categories, "mlp: label " + std::to_string(k) + " outside model categories");
        e += w * p.embeddings.row(k).transpose();
    }
    return e;
}

}  // namespace

void MlpParams::validate() const {
    require(dim > 0 && T > 0 && embed_dim >= 0 && num_categories >= 0, "MlpParams: bad sizes");
    require(embeddings.rows() == num_categories + 1 && embeddings.cols() == embed_dim,
            "MlpParams: embedding table shape mismatch");
    require(!layers.empty(), "MlpParams: needs at least one layer");
    long width = input_width();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        require(L.weight.cols() == width && L.bias.size() == L.weight.rows(),
                "MlpParams: layer " + std::to_string(l) + " does not compose");
        require(L.weight.allFinite() && L.bias.allFinite(), "MlpParams: non-finite parameters");
        width = L.weight.rows();
    }
    require(width == dim, "MlpParams: output width must equal dim");
    require(embeddings.allFinite(), "MlpParams: non-finite embeddings");
}

MlpDenoiser::MlpDenoiser(MlpParams params) : params_(std::move(params)) { params_.validate(); }

Eigen::VectorXd MlpDenoiser::input(const Latent& z, Timestep t, const Condition& cond) const {
    require(z.size() == params_.dim, "mlp: latent dimension mismatch");
    require(t >= 0 && t <= params_.T, "mlp: timestep out of range");
    Eigen::VectorXd x(params_.input_width());
    x.head(params_.dim) = z;
    x(params_.dim) = static_cast<double>(t) / params_.T;
    x.tail(params_.embed_dim) = embedding_for(params_, cond);
    return x;
}

Latent MlpDenoiser::predict_eps(const Latent& z, Timestep t, const Condition& cond) const {
    Eigen::VectorXd h = input(z, t, cond);
    if (t == 0) {
        return Latent::Zero(z.size());
    }
    const std::size_t n = params_.layers.size();
    for (std::size_t l = 0; l < n; ++l) {
        Eigen::VectorXd pre = params_.layers[l].weight * h + params_.layers[l].bias;
        h = l + 1 < n ? activate(params_.activation, pre.array()).matrix() : pre;
    }
    return h;
}

Latent MlpDenoiser::vjp(const Latent& z, Timestep t, const Condition& cond, const Latent& cotangent) const {
    require_same_dim(z, cotangent, "mlp_vjp");
    Eigen::VectorXd h = input(z, t, cond);
    if (t == 0) {
        return Latent::Zero(z.size());
    }
    const std::size_t n = params_.layers.size();
    std::vector<Eigen::VectorXd> hidden;  // post-activation outputs of hidden layers
    hidden.reserve(n);
    for (std::size_t l = 0; l + 1 < n; ++l) {
        h = activate(params_.activation, (params_.layers[l].weight * h + params_.layers[l].bias).array()).matrix();
        hidden.push_back(h);
    }
    Eigen::VectorXd g = params_.layers[n - 1].weight.transpose() * cotangent;
    for (std::size_t l = n - 1; l-- > 0;) {
        g = (g.array() * activate_grad(params_.activation, hidden[l].array())).matrix();
        g = params_.layers[l].weight.transpose() * g;
    }
    return g.head(params_.dim);
}

MlpParams init_mlp(int dim, int num_categories, int T, const MlpTrainConfig& cfg) {
    require(dim > 0 && T > 0 && num_categories >= 0 && cfg.embed_dim >= 0, "init_mlp: bad sizes");
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    MlpParams p;
    p.dim = dim;
    p.num_categories = num_categories;
    p.embed_dim = cfg.embed_dim;
    p.T = T;
    p.activation = cfg.activation;
    p.embeddings = Eigen::MatrixXd::NullaryExpr(num_categories + 1, cfg.embed_dim, [&] { return normal(rng); });

    std::vector<int> widths{p.input_width()};
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(dim);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        require(widths[l + 1] > 0, "init_mlp: layer widths must be positive");
        const double scale = std::sqrt(1.0 / widths[l]);
        MlpLayer layer;
        layer.weight = Eigen::MatrixXd::NullaryExpr(widths[l + 1], widths[l], [&] { return scale * normal(rng); });
        layer.bias = Eigen::VectorXd::Zero(widths[l + 1]);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

namespace {

struct AdamSlot {
    Eigen::ArrayXXd m;
    Eigen::ArrayXXd v;

    explicit AdamSlot(const Eigen::MatrixXd& like)
        : m(Eigen::ArrayXXd::Zero(like.rows(), like.cols())), v(Eigen::ArrayXXd::Zero(like.rows(), like.cols())) {}

    template <typename Param>
    void step(Param& param, const Eigen::MatrixXd& grad, double lr, int iter) {
        constexpr double b1 = 0.9;
        constexpr double b2 = 0.999;
        constexpr double eps = 1e-8;
        m = b1 * m + (1.0 - b1) * grad.array();
        v = b2 * v + (1.0 - b2) * grad.array().square();
        const double c1 = 1.0 - std::pow(b1, iter);
        const double c2 = 1.0 - std::pow(b2, iter);
        param.array() -= lr * (m / c1) / ((v / c2).sqrt() + eps);
    }
};

}  // namespace

MlpTrainResult train_mlp_denoiser(const std::vector<LabeledLatent>& data, const DiffusionSchedule& s,
                                  const MlpTrainConfig& cfg) {
    require(!data.empty(), "train_mlp_denoiser: empty dataset");
    require(cfg.iterations >= 0 && cfg.batch_size > 0 && cfg.learning_rate > 0.0,
            "train_mlp_denoiser: bad training settings");
    require(cfg.null_prob >= 0.0 && cfg.null_prob <= 1.0, "train_mlp_denoiser: null_prob outside [0, 1]");
    const int dim = static_cast<int>(data.front().latent.size());
    int num_categories = 0;
    for (const auto& d : data) {
        require(d.latent.size() == dim, "train_mlp_denoiser: latents must share one dimension");
        require(d.label >= 0, "train_mlp_denoiser: negative label");
        num_categories = std::max(num_categories, d.label + 1);
    }

    MlpParams p = init_mlp(dim, num_categories, s.T(), cfg);
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(cfg.iterations));

    // Separate stream from the initializer so iterations=0 is exactly init_mlp.
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::uniform_int_distribution<int> pick_t(1, s.T());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<AdamSlot> w_slots;
    std::vector<AdamSlot> b_slots;
    for (const auto& L : p.layers) {
        w_slots.emplace_back(L.weight);
        b_slots.emplace_back(L.bias);
    }
    AdamSlot e_slot(p.embeddings);

    const int B = cfg.batch_size;
    const std::size_t n = p.layers.size();
    const int in_w = p.input_width();
    Eigen::MatrixXd X(in_w, B);
    Eigen::MatrixXd target(dim, B);
    std::vector<int> cond_row(static_cast<std::size_t>(B));

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        for (int b = 0; b < B; ++b) {
            const auto& sample = data[pick(rng)];
            const int t = pick_t(rng);
            Eigen::VectorXd eps = Eigen::VectorXd::NullaryExpr(dim, [&] { return normal(rng); });
            const bool drop = unit(rng) < cfg.null_prob;
            const int row = drop ? num_categories : sample.label;
            X.col(b).head(dim) = forward_diffuse(sample.latent, t, eps, s);
            X(dim, b) = static_cast<double>(t) / s.T();
            X.col(b).tail(p.embed_dim) = p.embeddings.row(row).transpose();
            target.col(b) = eps;
            cond_row[static_cast<std::size_t>(b)] = row;
        }

        std::vector<Eigen::MatrixXd> acts{X};
        for (std::size_t l = 0; l < n; ++l) {
            Eigen::MatrixXd pre = (p.layers[l].weight * acts.back()).colwise() + p.layers[l].bias;
            acts.push_back(l + 1 < n ? activate(p.activation, pre.array()).matrix() : pre);
        }
        const Eigen::MatrixXd resid = acts.back() - target;
        const double loss = resid.squaredNorm() / B;
        if (!std::isfinite(loss)) {
            throw NumericError("train_mlp_denoiser: non-finite loss at iteration " + std::to_string(iter));
        }
        losses.push_back(loss);

        Eigen::MatrixXd g = (2.0 / B) * resid;
        std::vector<Eigen::MatrixXd> gw(n);
        std::vector<Eigen::VectorXd> gb(n);
        for (std::size_t l = n; l-- > 0;) {
            if (l + 1 < n) {
                g = (g.array() * activate_grad(p.activation, acts[l + 1].array())).matrix();
            }
            gw[l] = g * acts[l].transpose();
            gb[l] = g.rowwise().sum();
            g = p.layers[l].weight.transpose() * g;
        }
        Eigen::MatrixXd ge = Eigen::MatrixXd::Zero(p.embeddings.rows(), p.embeddings.cols());
        for (int b = 0; b < B; ++b) {
            ge.row(cond_row[static_cast<std::size_t>(b)]) += g.col(b).tail(p.embed_dim).transpose();
        }

        // Cosine decay; a constant rate leaves Adam rattling around the optimum.
        const double lr = 0.5 * cfg.learning_rate *
                          (1.0 + std::cos(std::numbers::pi * static_cast<double>(iter - 1) / cfg.iterations));
        for (std::size_t l = 0; l < n; ++l) {
            w_slots[l].step(p.layers[l].weight, gw[l], lr, iter);
            b_slots[l].step(p.layers[l].bias, gb[l], lr, iter);
        }
        e_slot.step(p.embeddings, ge, lr, iter);
    }
    return MlpTrainResult{MlpDenoiser(std::move(p)), std::move(losses)};
}

}  // namespace geo
