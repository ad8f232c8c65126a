// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geo/gmm.hpp"
#include "geo/mlp.hpp"
#include "geo/pixeledit.hpp"

namespace geo {

/// A toy data distribution with labeled categories. Image worlds also carry
/// the pixel regions their concepts occupy and one latent template per
/// concept, used to read labels back out of a latent.
struct World {
    std::string name;
    GmmModel model;
    int width = 0;   // 0 for non-image worlds
    int height = 0;
    std::vector<Mask> regions;
    /// concept_templates[k] holds concept k's latent value on every pixel
    /// (only region pixels are meaningful).
    std::vector<Latent> concept_templates;
    /// Label of the category whose samples carry no concept; -1 if none.
    int background_label = -1;

    bool is_image() const { return width > 0; }
    int num_concepts() const { return static_cast<int>(concept_templates.size()); }
};

/// 2-D mixture, two labels with two components each.
World make_point_world();

/// 16-dim mixture of smooth row patterns: labels 0 and 1 plus a background
/// label 2, two components per label.
World make_row_world(std::uint64_t seed = 0);

/// 16x16 grayscale world with one object region. Labels 0 (dark object) and
/// 1 (bright object) plus background label 2 (no object). Backgrounds are
/// stacks of rows drawn from per-label row mixtures, so the label shapes
/// the whole frame.
World make_image_world(std::uint64_t seed = 0);

/// 16x16 grayscale world with two object regions and three concepts (dark,
/// bright, striped). A component showing concepts (a, b) is listed under
/// label a and under label b, so Label(k) means "k appears somewhere".
World make_two_region_world(std::uint64_t seed = 0);

/// Looks up a world by name: "point", "row16", "image16", "two_region".
World make_world(const std::string& name, std::uint64_t seed = 0);
std::vector<std::string> world_names();

/// Draws one latent from the mixture restricted to `cond` (clean data).
LabeledLatent sample_world(const World& world, const Condition& cond, std::uint64_t seed);

/// Clamps an image-world latent into the codec's [-1, 1] range and returns
/// the pixel image.
PixelImage latent_to_image(const World& world, const Latent& z);

/// A generated editing task: original image, pixel edit, prompts, and the
/// labels each region should end up with.
struct EditTask {
    PixelImage original;
    EditSpec spec;
    Condition source_cond = Condition::null();
    Condition edit_cond = Condition::null();
    std::vector<int> intended_labels;  // one per world region
};

/// Recolor the object region to the other object label and swap the prompt.
EditTask make_recolor_task(const World& world, std::uint64_t seed);

/// Paint each region with a distinct target concept; the prompt weights the
/// two targets equally.
EditTask make_two_region_task(const World& world, std::uint64_t seed);

/// Nearest concept template per region (squared distance over region pixels).
std::vector<int> assign_region_labels(const World& world, const Latent& z);

}  // namespace geo
