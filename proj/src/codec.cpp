// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/codec.hpp"

#include <algorithm>
#include <random>
#include <string>

namespace geo {

PixelImage::PixelImage(int w, int h, int c, double fill)
    : width(w), height(h), channels(c), samples(static_cast<std::size_t>(w) * h * c, fill) {}

void PixelImage::validate() const {
    require(width > 0 && height > 0, "PixelImage: width and height must be positive");
    require(channels == 1 || channels == 3, "PixelImage: channels must be 1 or 3");
    require(samples.size() == sample_count(), "PixelImage: sample count does not match shape");
    for (double v : samples) {
        require(v >= 0.0 && v <= 1.0, "PixelImage: sample outside [0, 1]");
    }
}

LatentCodec LatentCodec::identity(int width, int height, int channels) {
    require(width > 0 && height > 0 && (channels == 1 || channels == 3), "LatentCodec: bad image shape");
    LatentCodec c;
    c.kind_ = Kind::Identity;
    c.width_ = width;
    c.height_ = height;
    c.channels_ = channels;
    c.latent_dim_ = width * height * channels;
    return c;
}

LatentCodec LatentCodec::ortho_linear(int width, int height, int channels, Eigen::MatrixXd q,
                                      Eigen::VectorXd offset) {
    LatentCodec c = identity(width, height, channels);
    const long n = c.latent_dim_;
    require(q.cols() == n && q.rows() >= 1 && q.rows() <= n, "LatentCodec: projection shape mismatch");
    require(offset.size() == n, "LatentCodec: offset length mismatch");
    const Eigen::MatrixXd gram = q * q.transpose();
    require((gram - Eigen::MatrixXd::Identity(q.rows(), q.rows())).cwiseAbs().maxCoeff() <= 1e-10,
            "LatentCodec: projection rows are not orthonormal");
    c.kind_ = Kind::OrthoLinear;
    c.latent_dim_ = static_cast<int>(q.rows());
    c.q_ = std::move(q);
    c.offset_ = std::move(offset);
    return c;
}

LatentCodec LatentCodec::random_ortho(int width, int height, int channels, int latent_dim, std::uint64_t seed) {
    const int n = width * height * channels;
    require(latent_dim >= 1 && latent_dim <= n, "LatentCodec: latent_dim must lie in [1, sample count]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::MatrixXd g = Eigen::MatrixXd::NullaryExpr(n, latent_dim, [&] { return normal(rng); });
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(n, latent_dim);
    return ortho_linear(width, height, channels, basis.transpose(), Eigen::VectorXd::Zero(n));
}

Latent LatentCodec::encode(const PixelImage& img) const {
    require(img.width == width_ && img.height == height_ && img.channels == channels_,
            "encode: image shape " + std::to_string(img.width) + "x" + std::to_string(img.height) + "x" +
                std::to_string(img.channels) + " does not match codec");
    require(img.samples.size() == img.sample_count(), "encode: sample count does not match shape");
    const Eigen::Map<const Eigen::VectorXd> px(img.samples.data(), static_cast<long>(img.samples.size()));
    Eigen::VectorXd mapped = 2.0 * px.array() - 1.0;
    if (kind_ == Kind::Identity) {
        return mapped;
    }
    return q_ * (mapped - offset_);
}

Eigen::VectorXd LatentCodec::decode_unclamped(const Latent& z) const {
    require(z.size() == latent_dim_, "decode: latent dimension " + std::to_string(z.size()) +
                                         " does not match codec (" + std::to_string(latent_dim_) + ")");
    Eigen::VectorXd mapped = kind_ == Kind::Identity ? Eigen::VectorXd(z) : Eigen::VectorXd(q_.transpose() * z + offset_);
    return (mapped.array() + 1.0) * 0.5;
}

PixelImage LatentCodec::decode(const Latent& z) const {
    const Eigen::VectorXd px = decode_unclamped(z);
    PixelImage img(width_, height_, channels_);
    for (long i = 0; i < px.size(); ++i) {
        img.samples[static_cast<std::size_t>(i)] = std::clamp(px(i), 0.0, 1.0);
    }
    return img;
}

Latent encode(const LatentCodec& c, const PixelImage& img) { return c.encode(img); }
PixelImage decode(const LatentCodec& c, const Latent& z) { return c.decode(z); }

}  // namespace geo
