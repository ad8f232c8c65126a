// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/metrics.hpp"

#include <cmath>

namespace geo {

namespace {

void check_shapes(const PixelImage& a, const PixelImage& b, const Mask& m) {
    require(a.same_shape(b), "metrics: image shapes differ");
    require(a.samples.size() == a.sample_count() && b.samples.size() == b.sample_count(),
            "metrics: sample count does not match shape");
    require(m.width == a.width && m.height == a.height, "metrics: mask shape differs from image");
    require(m.weights.size() == a.pixel_count(), "metrics: mask weight count does not match shape");
}

}  // namespace

double psnr_from_mse(double mse) {
    if (mse < 1e-10) {
        return kPsnrCap;
    }
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

MaskedMetrics masked_metrics(const PixelImage& original, const PixelImage& edited, const Mask& edit_mask) {
    check_shapes(original, edited, edit_mask);
    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t C = static_cast<std::size_t>(original.channels);
    for (std::size_t p = 0; p < edit_mask.weights.size(); ++p) {
        if (edit_mask.weights[p] >= kBackgroundThreshold) {
            continue;
        }
        for (std::size_t c = 0; c < C; ++c) {
            const double d = edited.samples[p * C + c] - original.samples[p * C + c];
            sum += d * d;
        }
        count += C;
    }
    require(count > 0, "masked_metrics: mask covers the whole image, no background to measure");
    const double mse = sum / static_cast<double>(count);
    return {mse, psnr_from_mse(mse)};
}

double edit_shift(const PixelImage& original, const PixelImage& proposal, const PixelImage& output,
                  const Mask& edit_mask) {
    check_shapes(original, proposal, edit_mask);
    check_shapes(original, output, edit_mask);
    const std::size_t C = static_cast<std::size_t>(original.channels);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t p = 0; p < edit_mask.weights.size(); ++p) {
        if (edit_mask.weights[p] < 0.5) {
            continue;
        }
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t i = p * C + c;
            const double want = proposal.samples[i] - original.samples[i];
            num += (output.samples[i] - original.samples[i]) * want;
            den += want * want;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace geo
