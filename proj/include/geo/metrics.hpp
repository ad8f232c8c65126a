// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "geo/codec.hpp"
#include "geo/pixeledit.hpp"

namespace geo {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kBackgroundThreshold = 0.01;

struct MaskedMetrics {
    double mse = 0.0;
    double psnr = 0.0;
};

/// MSE over background samples (mask weight < 0.01, all channels) and
/// PSNR = 10 log10(1 / MSE), capped at 99 dB when MSE < 1e-10. Throws
/// ConfigError if the mask leaves no background.
MaskedMetrics masked_metrics(const PixelImage& original, const PixelImage& edited, const Mask& edit_mask);

double psnr_from_mse(double mse);

/// Fraction of the proposed pixel edit kept by the output over the edited
/// region (mask >= 0.5): <out - orig, proposal - orig> / ||proposal - orig||^2.
/// 0 when the region is empty or the proposal equals the original there.
double edit_shift(const PixelImage& original, const PixelImage& proposal, const PixelImage& output,
                  const Mask& edit_mask);

}  // namespace geo
