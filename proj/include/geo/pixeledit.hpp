// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "geo/codec.hpp"
#include "geo/guidance.hpp"

namespace geo {

/// Soft per-pixel weights in [0, 1], shared by all channels.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<double> weights;

    Mask() = default;
    Mask(int w, int h, double fill = 0.0) : width(w), height(h), weights(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int x, int y) { return weights[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return weights[static_cast<std::size_t>(y) * width + x]; }
    void validate() const;
};

/// 8-bit grayscale PGM; 0 -> 0.0, 255 -> 1.0.
Mask read_mask(const std::filesystem::path& path);
Mask mask_from_image(const PixelImage& img);

struct StrokeOp {
    Mask mask;
    std::vector<double> color;  // one value per channel
};

struct PasteOp {
    PixelImage patch;
    Mask mask;  // patch-sized
    int dx = 0;
    int dy = 0;
};

struct SdeditOp {
    Timestep t0 = 0;
    Condition cond = Condition::null();
    double opacity = 1.0;
    std::uint64_t seed = 0;
};

using EditOp = std::variant<StrokeOp, PasteOp, SdeditOp>;

struct EditSpec {
    std::vector<EditOp> ops;
};

/// (1 - mask) * img + mask * color.
PixelImage brush_stroke(const PixelImage& img, const Mask& mask, const std::vector<double>& color);

/// Composites the masked patch onto base with its top-left corner at (dx, dy).
PixelImage image_paste(const PixelImage& base, const PixelImage& patch, const Mask& mask, int dx, int dy);

/// Everything sdedit_proposal needs from the surrounding pipeline.
struct SdeditContext {
    const Denoiser* denoiser = nullptr;
    const LatentCodec* codec = nullptr;
    const DiffusionSchedule* schedule = nullptr;
    double w = kDefaultGuidanceScale;
};

/// Encode, noise to t0 with seeded eps, guided DDIM back to 0, decode, and
/// alpha-blend the result onto img with `opacity`.
PixelImage sdedit_proposal(const PixelImage& img, Timestep t0, const Condition& cond, double opacity,
                           std::uint64_t seed, const SdeditContext& ctx);

struct EditResult {
    PixelImage edited;
    Mask union_mask;
};

/// Applies ops in order. union_mask is the pointwise max of the op masks; an
/// SDEdit overlay contributes a full-frame mask equal to its opacity.
/// Failures are rethrown as ConfigError naming the op index.
EditResult apply_edit_spec(const PixelImage& img, const EditSpec& spec, const SdeditContext& ctx);

/// Parses {"ops": [...]} with stroke / paste / sdedit entries; relative
/// image paths resolve against `base_dir`.
EditSpec parse_edit_spec(const std::string& json_text, const std::filesystem::path& base_dir);
EditSpec load_edit_spec(const std::filesystem::path& path);

}  // namespace geo
