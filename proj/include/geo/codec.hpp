// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "geo/common.hpp"

namespace geo {

/// Row-major image with interleaved channels, samples in [0, 1].
struct PixelImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> samples;

    PixelImage() = default;
    PixelImage(int w, int h, int c, double fill = 0.0);

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
    std::size_t sample_count() const { return pixel_count() * static_cast<std::size_t>(channels); }
    double& at(int x, int y, int c) { return samples[index(x, y, c)]; }
    double at(int x, int y, int c) const { return samples[index(x, y, c)]; }
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }

    bool same_shape(const PixelImage& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
    /// Throws unless channels is 1 or 3, sizes agree and samples lie in [0, 1].
    void validate() const;
};

/// Stand-in for the autoencoder: identity range map or an orthonormal linear
/// projection of the range-mapped samples.
class LatentCodec {
public:
    enum class Kind { Identity, OrthoLinear };

    static LatentCodec identity(int width, int height, int channels);
    /// q must have orthonormal rows (QQ^T = I within 1e-10); offset has one
    /// entry per sample.
    static LatentCodec ortho_linear(int width, int height, int channels, Eigen::MatrixXd q, Eigen::VectorXd offset);
    /// Orthonormal rows from a seeded Gaussian matrix; zero offset.
    static LatentCodec random_ortho(int width, int height, int channels, int latent_dim, std::uint64_t seed);

    Kind kind() const { return kind_; }
    int latent_dim() const { return latent_dim_; }
    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    const Eigen::MatrixXd& q() const { return q_; }
    const Eigen::VectorXd& offset() const { return offset_; }

    Latent encode(const PixelImage& img) const;
    /// Inverse of encode on the codec's range, clamped to [0, 1].
    PixelImage decode(const Latent& z) const;
    /// Same as decode without the clamp (used by affine-map checks).
    Eigen::VectorXd decode_unclamped(const Latent& z) const;

private:
    LatentCodec() = default;

    Kind kind_ = Kind::Identity;
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    int latent_dim_ = 0;
    Eigen::MatrixXd q_;
    Eigen::VectorXd offset_;
};

Latent encode(const LatentCodec& c, const PixelImage& img);
PixelImage decode(const LatentCodec& c, const Latent& z);

}  // namespace geo
