// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geo/codec.hpp"
#include "geo/inversion.hpp"
#include "geo/mlp.hpp"
#include "geo/pixeledit.hpp"
#include "geo/worlds.hpp"

namespace geo {

struct ScheduleParams {
    int T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int S = 50;
};

struct DenoiserSource {
    enum class Kind { World, File, Train };
    Kind kind = Kind::World;
    std::filesystem::path path;  // File
    MlpTrainConfig train;        // Train
    int train_samples = 4096;    // Train: clean samples drawn from the world
};

struct CodecParams {
    LatentCodec::Kind kind = LatentCodec::Kind::Identity;
    int latent_dim = 0;  // OrthoLinear; 0 means the full sample count
    std::uint64_t seed = 0;
};

struct TaskParams {
    enum class Kind { Files, Recolor, TwoRegion };
    Kind kind = Kind::Recolor;
    std::filesystem::path image;
    std::optional<std::filesystem::path> edit_spec;
    Condition source_cond = Condition::null();
    Condition edit_cond = Condition::null();
};

/// Everything one editing run needs. Loaded from JSON with unknown keys
/// rejected; relative paths resolve against the config file's directory.
struct RunConfig {
    std::optional<std::string> world;
    std::uint64_t world_seed = 0;
    ScheduleParams schedule;
    DenoiserSource denoiser;
    CodecParams codec;
    TaskParams task;
    double w = kDefaultGuidanceScale;
    std::optional<Timestep> t_stop;  // default: midpoint inference step
    int inner_steps = 10;
    double eta = 0.1;
    bool backtracking = true;
    int max_halvings = 8;
    InnerStepScale step_scale = InnerStepScale::Raw;
    std::uint64_t seed = 0;
    int n_seeds = 20;
    std::filesystem::path out = "out";
};

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Schedule, denoiser, codec and world built from a RunConfig.
struct RunContext {
    DiffusionSchedule schedule;
    std::optional<World> world;
    std::unique_ptr<Denoiser> denoiser;
    LatentCodec codec;

    Timestep t_stop(const RunConfig& cfg) const;
    SdeditContext sdedit(double w) const { return {denoiser.get(), &codec, &schedule, w}; }
};

RunContext build_context(const RunConfig& cfg);

/// The task for a given seed (world-generated tasks depend on the seed).
EditTask materialize_task(const RunConfig& cfg, const RunContext& ctx, std::uint64_t seed);

enum class Method { Geo, DdimBaseline };
const char* to_string(Method m);

/// Pipeline stages in execution order.
enum class Stage { Edit, Encode, Invert, Sample, Decode };
const char* to_string(Stage s);
Stage stage_from_string(const std::string& name);

struct EditReport {
    Method method = Method::Geo;
    bool has_background = false;
    double background_mse = 0.0;
    double background_psnr = 0.0;
    double edit_shift = 0.0;
    std::vector<int> region_labels;    // image worlds with regions only
    std::vector<int> intended_labels;
    double seconds = 0.0;

    bool labels_match() const { return !region_labels.empty() && region_labels == intended_labels; }
};

struct EditOutcome {
    PixelImage original;
    PixelImage proposal;  // after the pixel edit
    PixelImage output;
    Mask union_mask;
    Latent z0;
    Latent z_stop;
    Latent z_final;
    Trajectory inversion;
    Trajectory sampling;
    InnerLoopLog inner_log;
    EditReport report;
};

struct RunOptions {
    /// Write artifacts under cfg.out; otherwise everything stays in memory.
    bool write_artifacts = true;
    /// Load persisted outputs of all earlier stages and start here.
    Stage resume_from = Stage::Edit;
};

/// Pixel edit, encode, inversion (GEO or plain DDIM) to t_stop, guided
/// sampling under the edit prompt, decode.
EditOutcome run_edit(const RunConfig& cfg, const RunContext& ctx, Method method, std::uint64_t seed,
                     const RunOptions& opts = {});

EditOutcome geo_edit(const RunConfig& cfg, const RunOptions& opts = {});
EditOutcome ddim_baseline_edit(const RunConfig& cfg, const RunOptions& opts = {});

std::string report_csv(const EditReport& r);

/// Decodes every predicted z0 of `traj` to `<outdir>/<tag>_<t>.pgm|ppm` and
/// writes `<tag>_frames.json`. Returns the frame paths in trajectory order.
std::vector<std::filesystem::path> dump_pred_z0_frames(const Trajectory& traj, const LatentCodec& codec,
                                                       const std::filesystem::path& outdir,
                                                       const std::string& tag = "z0hat");

struct AblationRow {
    std::uint64_t seed = 0;
    Method method = Method::Geo;
    bool ok = false;
    std::string error;
    EditReport report;
};

struct AblationSummary {
    std::vector<AblationRow> rows;  // ordered by (seed, method)
    int paired = 0;                 // seeds where both methods succeeded
    double geo_win_rate = 0.0;      // fraction of paired seeds with lower GEO background MSE
    double mean_psnr_gap = 0.0;     // mean(GEO PSNR - baseline PSNR) over paired seeds
    double geo_label_rate = 0.0;    // fraction of successful GEO runs whose region labels match
    double baseline_label_rate = 0.0;
};

/// Paired GEO / baseline runs for seeds cfg.seed .. cfg.seed + n_seeds - 1.
AblationSummary ablation_suite(const RunConfig& cfg, int n_seeds);
std::string ablation_csv(const AblationSummary& s);

}  // namespace geo
