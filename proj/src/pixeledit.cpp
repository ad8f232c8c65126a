// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/pixeledit.hpp"

#include <algorithm>
#include <random>
#include <string>

#include <json.hpp>

#include "geo/pnm.hpp"
#include "geo/tensor_io.hpp"

namespace geo {

namespace fs = std::filesystem;
using nlohmann::json;

void Mask::validate() const {
    require(width > 0 && height > 0, "Mask: width and height must be positive");
    require(weights.size() == static_cast<std::size_t>(width) * height, "Mask: weight count does not match shape");
    for (double v : weights) {
        require(v >= 0.0 && v <= 1.0, "Mask: weight outside [0, 1]");
    }
}

Mask mask_from_image(const PixelImage& img) {
    require(img.channels == 1, "mask image must be single-channel (PGM)");
    Mask m(img.width, img.height);
    m.weights = img.samples;
    return m;
}

Mask read_mask(const fs::path& path) { return mask_from_image(read_pnm(path)); }

namespace {

void check_mask_shape(const Mask& mask, int width, int height, const char* what) {
    mask.validate();
    require(mask.width == width && mask.height == height,
            std::string(what) + ": mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                ", expected " + std::to_string(width) + "x" + std::to_string(height));
}

double blend(double under, double over, double m) {
    if (m == 0.0) {
        return under;
    }
    return (1.0 - m) * under + m * over;
}

}  // namespace

PixelImage brush_stroke(const PixelImage& img, const Mask& mask, const std::vector<double>& color) {
    img.validate();
    check_mask_shape(mask, img.width, img.height, "brush_stroke");
    require(static_cast<int>(color.size()) == img.channels, "brush_stroke: color needs one value per channel");
    for (double c : color) {
        require(c >= 0.0 && c <= 1.0, "brush_stroke: color component outside [0, 1]");
    }
    PixelImage out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double m = mask.at(x, y);
            for (int c = 0; c < img.channels; ++c) {
                out.at(x, y, c) = blend(img.at(x, y, c), color[static_cast<std::size_t>(c)], m);
            }
        }
    }
    return out;
}

PixelImage image_paste(const PixelImage& base, const PixelImage& patch, const Mask& mask, int dx, int dy) {
    base.validate();
    patch.validate();
    require(patch.channels == base.channels, "image_paste: patch channel count differs from base");
    check_mask_shape(mask, patch.width, patch.height, "image_paste");
    require(dx >= 0 && dy >= 0 && dx + patch.width <= base.width && dy + patch.height <= base.height,
            "image_paste: patch at offset (" + std::to_string(dx) + ", " + std::to_string(dy) +
                ") leaves the base image");
    PixelImage out = base;
    for (int y = 0; y < patch.height; ++y) {
        for (int x = 0; x < patch.width; ++x) {
            const double m = mask.at(x, y);
            for (int c = 0; c < base.channels; ++c) {
                out.at(dx + x, dy + y, c) = blend(base.at(dx + x, dy + y, c), patch.at(x, y, c), m);
            }
        }
    }
    return out;
}

PixelImage sdedit_proposal(const PixelImage& img, Timestep t0, const Condition& cond, double opacity,
                           std::uint64_t seed, const SdeditContext& ctx) {
    require(ctx.denoiser && ctx.codec && ctx.schedule, "sdedit_proposal: incomplete context");
    require(opacity >= 0.0 && opacity <= 1.0, "sdedit_proposal: opacity outside [0, 1]");
    require(ctx.schedule->is_inference_step(t0), "sdedit_proposal: t0 " + std::to_string(t0) +
                                                      " is not an inference step");
    img.validate();
    const Latent z = ctx.codec->encode(img);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Latent eps = Latent::NullaryExpr(z.size(), [&] { return normal(rng); });
    const Latent zt = forward_diffuse(z, t0, eps, *ctx.schedule);

    GuidanceConfig g{ctx.w, cond, Condition::null()};
    const Trajectory traj = ddim_sample(*ctx.denoiser, zt, t0, 0, g, *ctx.schedule);
    const PixelImage proposal = ctx.codec->decode(traj.back().z);

    PixelImage out = img;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        out.samples[i] = blend(img.samples[i], proposal.samples[i], opacity);
    }
    return out;
}

EditResult apply_edit_spec(const PixelImage& img, const EditSpec& spec, const SdeditContext& ctx) {
    img.validate();
    EditResult res{img, Mask(img.width, img.height, 0.0)};
    for (std::size_t i = 0; i < spec.ops.size(); ++i) {
        try {
            std::visit(
                [&](const auto& op) {
                    using Op = std::decay_t<decltype(op)>;
                    if constexpr (std::is_same_v<Op, StrokeOp>) {
                        res.edited = brush_stroke(res.edited, op.mask, op.color);
                        for (std::size_t p = 0; p < res.union_mask.weights.size(); ++p) {
                            res.union_mask.weights[p] = std::max(res.union_mask.weights[p], op.mask.weights[p]);
                        }
                    } else if constexpr (std::is_same_v<Op, PasteOp>) {
                        res.edited = image_paste(res.edited, op.patch, op.mask, op.dx, op.dy);
                        for (int y = 0; y < op.mask.height; ++y) {
                            for (int x = 0; x < op.mask.width; ++x) {
                                double& u = res.union_mask.at(op.dx + x, op.dy + y);
                                u = std::max(u, op.mask.at(x, y));
                            }
                        }
                    } else {
                        res.edited = sdedit_proposal(res.edited, op.t0, op.cond, op.opacity, op.seed, ctx);
                        for (double& u : res.union_mask.weights) {
                            u = std::max(u, op.opacity);
                        }
                    }
                },
                spec.ops[i]);
        } catch (const ConfigError& e) {
            throw ConfigError("edit op #" + std::to_string(i) + ": " + e.what());
        } catch (const NumericError& e) {
            throw NumericError("edit op #" + std::to_string(i) + ": " + e.what());
        }
    }
    return res;
}

namespace {

template <typename T>
T get_field(const json& j, const char* key, std::size_t index) {
    if (!j.contains(key)) {
        throw ConfigError("edit op #" + std::to_string(index) + ": missing '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("edit op #" + std::to_string(index) + ": bad '" + key + "': " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, std::size_t index) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError("edit op #" + std::to_string(index) + ": unknown key '" + key + "'");
        }
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

EditSpec parse_edit_spec(const std::string& json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("edit spec: invalid JSON: ") + e.what());
    }
    require(doc.is_object() && doc.contains("ops") && doc.at("ops").is_array(),
            "edit spec: expected an object with an 'ops' array");
    for (const auto& [key, _] : doc.items()) {
        require(key == "ops", "edit spec: unknown key '" + key + "'");
    }
    EditSpec spec;
    std::size_t index = 0;
    for (const auto& op : doc.at("ops")) {
        require(op.is_object(), "edit op #" + std::to_string(index) + ": must be an object");
        const auto type = get_field<std::string>(op, "type", index);
        if (type == "stroke") {
            reject_unknown(op, {"type", "mask", "color"}, index);
            StrokeOp s;
            s.mask = read_mask(resolve(base_dir, get_field<std::string>(op, "mask", index)));
            s.color = get_field<std::vector<double>>(op, "color", index);
            spec.ops.emplace_back(std::move(s));
        } else if (type == "paste") {
            reject_unknown(op, {"type", "patch", "mask", "offset"}, index);
            PasteOp p;
            p.patch = read_pnm(resolve(base_dir, get_field<std::string>(op, "patch", index)));
            p.mask = read_mask(resolve(base_dir, get_field<std::string>(op, "mask", index)));
            const auto off = get_field<std::vector<int>>(op, "offset", index);
            require(off.size() == 2, "edit op #" + std::to_string(index) + ": offset must be [dx, dy]");
            p.dx = off[0];
            p.dy = off[1];
            spec.ops.emplace_back(std::move(p));
        } else if (type == "sdedit") {
            reject_unknown(op, {"type", "t0", "label", "opacity", "seed"}, index);
            SdeditOp s;
            s.t0 = get_field<int>(op, "t0", index);
            s.cond = Condition::label(get_field<int>(op, "label", index));
            s.opacity = get_field<double>(op, "opacity", index);
            s.seed = get_field<std::uint64_t>(op, "seed", index);
            require(s.opacity >= 0.0 && s.opacity <= 1.0,
                    "edit op #" + std::to_string(index) + ": opacity outside [0, 1]");
            spec.ops.emplace_back(s);
        } else {
            throw ConfigError("edit op #" + std::to_string(index) + ": unknown type '" + type + "'");
        }
        ++index;
    }
    return spec;
}

EditSpec load_edit_spec(const fs::path& path) {
    return parse_edit_spec(read_file(path), path.parent_path());
}

}  // namespace geo
