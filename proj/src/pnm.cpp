// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/pnm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace geo {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long number(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) {
                throw IoError(std::string("pnm: ") + what + " too large");
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw IoError(std::string("pnm: missing ") + what);
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void single_whitespace() {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw IoError("pnm: expected whitespace after maxval");
        }
        ++pos_;
    }

    std::size_t pos() const { return pos_; }

private:
    const std::string& bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

std::uint8_t quantize_sample(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

PixelImage decode_pnm(const std::string& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw IoError("pnm: not a binary PGM/PPM (expected P5 or P6 magic)");
    }
    const int channels = bytes[1] == '5' ? 1 : 3;
    HeaderReader h(bytes);
    const long width = h.number("width");
    const long height = h.number("height");
    const long maxval = h.number("maxval");
    if (width <= 0 || height <= 0) {
        throw IoError("pnm: width and height must be positive");
    }
    if (maxval != 255) {
        throw IoError("pnm: only 8-bit (maxval 255) files are supported, got maxval " + std::to_string(maxval));
    }
    h.single_whitespace();
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    if (bytes.size() - h.pos() < count) {
        throw IoError("pnm: truncated raster");
    }
    PixelImage img(static_cast<int>(width), static_cast<int>(height), channels);
    for (std::size_t i = 0; i < count; ++i) {
        img.samples[i] = static_cast<unsigned char>(bytes[h.pos() + i]) / 255.0;
    }
    return img;
}

std::string encode_pnm(const PixelImage& img) {
    require(img.channels == 1 || img.channels == 3, "pnm: only 1- or 3-channel images can be written");
    require(img.samples.size() == img.sample_count(), "pnm: sample count does not match shape");
    std::ostringstream os;
    os << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
    std::string out = os.str();
    out.reserve(out.size() + img.samples.size());
    for (double v : img.samples) {
        out.push_back(static_cast<char>(quantize_sample(v)));
    }
    return out;
}

PixelImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image " + path.string());
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pnm(bytes);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_pnm(const std::filesystem::path& path, const PixelImage& img) {
    const std::string bytes = encode_pnm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write image " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

}  // namespace geo
