// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/worlds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace geo {

namespace {

constexpr int kSide = 16;
constexpr int kPixels = kSide * kSide;
constexpr double kDarkFill = -0.6;
constexpr double kBrightFill = 0.6;
constexpr double kStripeAmp = 0.5;

Mask rect_mask(int x0, int y0, int x1, int y1) {
    Mask m(kSide, kSide, 0.0);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            m.at(x, y) = 1.0;
        }
    }
    return m;
}

void normalize_weights(GmmModel& m) {
    double total = 0.0;
    for (const auto& c : m.components) {
        total += c.weight;
    }
    for (auto& c : m.components) {
        c.weight /= total;
    }
}

Latent sine_row(double offset, double amp, double freq, double phase, int n) {
    Latent r(n);
    for (int i = 0; i < n; ++i) {
        r(i) = offset + amp * std::sin(2.0 * std::numbers::pi * freq * i / n + phase);
    }
    return r;
}

// Background texture: 16 rows, each a draw from a small row mixture.
Latent texture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 1);
    const Latent row_means[2] = {sine_row(0.0, 0.25, 1.0, phase(rng), kSide),
                                 sine_row(0.0, 0.25, 2.0, phase(rng), kSide)};
    Latent img(kPixels);
    for (int y = 0; y < kSide; ++y) {
        const Latent& base = row_means[pick(rng)];
        for (int x = 0; x < kSide; ++x) {
            img(y * kSide + x) = base(x) + 0.1 * normal(rng);
        }
    }
    return img;
}

Latent concept_template(int which) {
    Latent t(kPixels);
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            double v = 0.0;
            switch (which) {
                case 0:
                    v = kDarkFill;
                    break;
                case 1:
                    v = kBrightFill;
                    break;
                default:
                    v = (x % 2 == 0) ? kStripeAmp : -kStripeAmp;
                    break;
            }
            t(y * kSide + x) = v;
        }
    }
    return t;
}

void paint(Latent& img, const Mask& region, const Latent& tmpl) {
    for (int p = 0; p < kPixels; ++p) {
        if (region.weights[static_cast<std::size_t>(p)] > 0.0) {
            img(p) = tmpl(p);
        }
    }
}

Latent region_variance(const std::vector<Mask>& regions, double bg_var, double region_var) {
    Latent v = Latent::Constant(kPixels, bg_var);
    for (const auto& r : regions) {
        for (int p = 0; p < kPixels; ++p) {
            if (r.weights[static_cast<std::size_t>(p)] > 0.0) {
                v(p) = region_var;
            }
        }
    }
    return v;
}

PixelImage template_patch(const Latent& tmpl, const Mask& region, int& dx, int& dy, Mask& patch_mask) {
    int x0 = kSide, y0 = kSide, x1 = -1, y1 = -1;
    for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
            if (region.at(x, y) > 0.0) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
        }
    }
    dx = x0;
    dy = y0;
    PixelImage patch(x1 - x0 + 1, y1 - y0 + 1, 1);
    patch_mask = Mask(patch.width, patch.height, 0.0);
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            patch.at(x - x0, y - y0, 0) = std::clamp((tmpl(y * kSide + x) + 1.0) * 0.5, 0.0, 1.0);
            patch_mask.at(x - x0, y - y0) = region.at(x, y);
        }
    }
    return patch;
}

}  // namespace

World make_point_world() {
    World w;
    w.name = "point";
    w.model.dim = 2;
    auto add = [&](double mx, double my, double vx, double vy, int label) {
        Latent mean(2), var(2);
        mean << mx, my;
        var << vx, vy;
        w.model.components.push_back({0.25, mean, var, label});
    };
    add(-2.0, 0.5, 0.25, 0.09, 0);
    add(-1.0, -1.5, 0.16, 0.16, 0);
    add(2.0, -0.5, 0.25, 0.09, 1);
    add(1.0, 1.5, 0.16, 0.16, 1);
    w.model.validate();
    return w;
}

World make_row_world(std::uint64_t seed) {
    World w;
    w.name = "row16";
    w.model.dim = 16;
    w.background_label = 2;
    std::mt19937_64 rng(seed + 101);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    // Means sit far outside the unit noise scale; DDIM reversal error is roughly
    // absolute, so relative reconstruction error shrinks with the data norm.
    std::uniform_real_distribution<double> sd(0.4, 0.6);
    const double offsets[3] = {-12.0, 12.0, 0.0};
    for (int label = 0; label < 3; ++label) {
        for (int j = 0; j < 2; ++j) {
            Latent mean = sine_row(offsets[label], 12.0, 1.0 + j, phase(rng), 16);
            Latent var = Latent::NullaryExpr(16, [&] { const double s = sd(rng); return s * s; });
            w.model.components.push_back({1.0, mean, var, label});
        }
    }
    normalize_weights(w.model);
    w.model.validate();
    return w;
}

World make_image_world(std::uint64_t seed) {
    World w;
    w.name = "image16";
    w.width = kSide;
    w.height = kSide;
    w.model.dim = kPixels;
    w.background_label = 2;
    w.regions = {rect_mask(4, 5, 11, 10)};
    w.concept_templates = {concept_template(0), concept_template(1)};
    std::mt19937_64 rng(seed + 202);
    const Latent var = region_variance(w.regions, 0.04, 0.01);
    // Backgrounds are shared by every label, so only the region tells them apart.
    const Latent textures[2] = {texture(rng), texture(rng)};
    for (int label = 0; label < 3; ++label) {
        for (int j = 0; j < 2; ++j) {
            Latent mean = textures[j];
            if (label < 2) {
                paint(mean, w.regions[0], w.concept_templates[static_cast<std::size_t>(label)]);
            }
            w.model.components.push_back({1.0, mean, var, label});
        }
    }
    normalize_weights(w.model);
    w.model.validate();
    return w;
}

World make_two_region_world(std::uint64_t seed) {
    World w;
    w.name = "two_region";
    w.width = kSide;
    w.height = kSide;
    w.model.dim = kPixels;
    w.background_label = 3;
    w.regions = {rect_mask(3, 2, 12, 6), rect_mask(3, 9, 12, 13)};
    w.concept_templates = {concept_template(0), concept_template(1), concept_template(2)};
    std::mt19937_64 rng(seed + 303);
    const Latent var = region_variance(w.regions, 0.04, 0.01);
    std::vector<Latent> textures;
    for (int j = 0; j < 2; ++j) {
        textures.push_back(texture(rng));
    }
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (const auto& tex : textures) {
                Latent mean = tex;
                paint(mean, w.regions[0], w.concept_templates[static_cast<std::size_t>(a)]);
                paint(mean, w.regions[1], w.concept_templates[static_cast<std::size_t>(b)]);
                if (a == b) {
                    w.model.components.push_back({1.0, mean, var, a});
                } else {
                    w.model.components.push_back({0.5, mean, var, a});
                    w.model.components.push_back({0.5, mean, var, b});
                }
            }
        }
    }
    for (const auto& tex : textures) {
        w.model.components.push_back({1.0, tex, var, w.background_label});
    }
    normalize_weights(w.model);
    w.model.validate();
    return w;
}

World make_world(const std::string& name, std::uint64_t seed) {
    if (name == "point") {
        return make_point_world();
    }
    if (name == "row16") {
        return make_row_world(seed);
    }
    if (name == "image16") {
        return make_image_world(seed);
    }
    if (name == "two_region") {
        return make_two_region_world(seed);
    }
    throw ConfigError("unknown world '" + name + "'");
}

std::vector<std::string> world_names() { return {"point", "row16", "image16", "two_region"}; }

LabeledLatent sample_world(const World& world, const Condition& cond, std::uint64_t seed) {
    const std::vector<double> weights = conditioned_weights(world.model, cond);
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& c = world.model.components[pick(rng)];
    Latent z = c.mean + (c.variance.array().sqrt() * Eigen::ArrayXd::NullaryExpr(world.model.dim, [&] {
                                                        return normal(rng);
                                                    })).matrix();
    return {std::move(z), c.label};
}

PixelImage latent_to_image(const World& world, const Latent& z) {
    require(world.is_image(), "latent_to_image: world '" + world.name + "' is not an image world");
    require(z.size() == world.width * world.height, "latent_to_image: latent size mismatch");
    PixelImage img(world.width, world.height, 1);
    for (long i = 0; i < z.size(); ++i) {
        img.samples[static_cast<std::size_t>(i)] = std::clamp((z(i) + 1.0) * 0.5, 0.0, 1.0);
    }
    return img;
}

EditTask make_recolor_task(const World& world, std::uint64_t seed) {
    require(world.is_image() && world.regions.size() == 1 && world.num_concepts() >= 2,
            "make_recolor_task: needs a single-region image world");
    std::mt19937_64 rng(seed);
    const int source = static_cast<int>(rng() % 2);
    const int target = 1 - source;
    EditTask task;
    task.source_cond = Condition::label(source);
    task.edit_cond = Condition::label(target);
    task.original = latent_to_image(world, sample_world(world, task.source_cond, rng()).latent);
    const double fill = world.concept_templates[static_cast<std::size_t>(target)](0);
    task.spec.ops.emplace_back(StrokeOp{world.regions[0], {std::clamp((fill + 1.0) * 0.5, 0.0, 1.0)}});
    task.intended_labels = {target};
    return task;
}

EditTask make_two_region_task(const World& world, std::uint64_t seed) {
    require(world.is_image() && world.regions.size() == 2 && world.num_concepts() >= 3,
            "make_two_region_task: needs a two-region image world");
    std::mt19937_64 rng(seed);
    const int n = world.num_concepts();
    const int a = static_cast<int>(rng() % static_cast<unsigned>(n));
    const int b = (a + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1))) % n;
    // Source concepts differ from the targets in both regions.
    const int x = (a + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1))) % n;
    const int y = (b + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1))) % n;

    EditTask task;
    task.source_cond = x == y ? Condition::label(x) : Condition::weighted({{x, 0.5}, {y, 0.5}});
    task.edit_cond = Condition::weighted({{a, 0.5}, {b, 0.5}});

    // Pick a source sample whose regions show (x, y).
    Latent z = sample_world(world, task.source_cond, rng()).latent;
    for (int tries = 0; tries < 64 && assign_region_labels(world, z) != std::vector<int>{x, y}; ++tries) {
        z = sample_world(world, task.source_cond, rng()).latent;
    }
    task.original = latent_to_image(world, z);

    const int targets[2] = {a, b};
    for (std::size_t r = 0; r < 2; ++r) {
        PasteOp op;
        op.patch = template_patch(world.concept_templates[static_cast<std::size_t>(targets[r])], world.regions[r],
                                  op.dx, op.dy, op.mask);
        task.spec.ops.emplace_back(std::move(op));
    }
    task.intended_labels = {a, b};
    return task;
}

std::vector<int> assign_region_labels(const World& world, const Latent& z) {
    require(z.size() == world.model.dim, "assign_region_labels: latent size mismatch");
    std::vector<int> out;
    for (const auto& region : world.regions) {
        int best = -1;
        double best_d = 0.0;
        for (int k = 0; k < world.num_concepts(); ++k) {
            double d = 0.0;
            for (long p = 0; p < z.size(); ++p) {
                if (region.weights[static_cast<std::size_t>(p)] > 0.0) {
                    const double diff = z(p) - world.concept_templates[static_cast<std::size_t>(k)](p);
                    d += diff * diff;
                }
            }
            if (best < 0 || d < best_d) {
                best = k;
                best_d = d;
            }
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace geo
