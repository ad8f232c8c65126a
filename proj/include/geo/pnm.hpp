// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geo/codec.hpp"

namespace geo {

/// Binary PGM (P5) / PPM (P6), 8-bit only. Samples are quantized to
/// round(v * 255) on write and mapped to k / 255 on read.
PixelImage read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const PixelImage& img);

PixelImage decode_pnm(const std::string& bytes);
std::string encode_pnm(const PixelImage& img);

std::uint8_t quantize_sample(double v);

}  // namespace geo
