// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geo/gmm.hpp"
#include "geo/metrics.hpp"
#include "geo/model_io.hpp"
#include "geo/pnm.hpp"
#include "geo/tensor_io.hpp"

namespace geo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config parsing -------------------------------------------------------

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <class T>
T get_or(const json& j, const char* key, const std::string& where, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

std::uint64_t get_seed(const json& j, const char* key, const std::string& where, std::uint64_t fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    const json& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(where + "." + key + ": expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

Condition parse_condition(const json& j, const std::string& where) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "null")) {
        return Condition::null();
    }
    if (j.is_number_integer()) {
        return Condition::label(j.get<int>());
    }
    if (j.is_array()) {
        std::vector<std::pair<int, double>> weights;
        for (const auto& e : j) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number()) {
                throw ConfigError(where + ": weighted condition entries must be [label, weight]");
            }
            weights.emplace_back(e[0].get<int>(), e[1].get<double>());
        }
        return Condition::weighted(std::move(weights));
    }
    throw ConfigError(where + ": expected null, a label index, or a list of [label, weight] pairs");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void parse_schedule(const json& j, ScheduleParams& s) {
    check_keys(j, "schedule", {"T", "beta_start", "beta_end", "S"});
    s.T = get_or(j, "T", "schedule", s.T);
    s.beta_start = get_or(j, "beta_start", "schedule", s.beta_start);
    s.beta_end = get_or(j, "beta_end", "schedule", s.beta_end);
    s.S = get_or(j, "S", "schedule", s.S);
}

void parse_denoiser(const json& j, DenoiserSource& d, const fs::path& base) {
    check_keys(j, "denoiser", {"kind", "path", "samples", "hidden", "embed_dim", "activation", "iterations",
                               "batch_size", "learning_rate", "null_prob", "seed"});
    const std::string kind = get_or<std::string>(j, "kind", "denoiser", "world");
    if (kind == "world") {
        d.kind = DenoiserSource::Kind::World;
    } else if (kind == "file") {
        d.kind = DenoiserSource::Kind::File;
        require(j.contains("path"), "denoiser: kind 'file' needs a path");
        d.path = resolve(base, get_or<std::string>(j, "path", "denoiser", ""));
        fs::path sidecar = d.path;
        sidecar.replace_extension(".json");
        require(fs::exists(sidecar), "denoiser: model file not found: " + sidecar.string());
    } else if (kind == "train") {
        d.kind = DenoiserSource::Kind::Train;
    } else {
        throw ConfigError("denoiser.kind: expected world, file or train, got '" + kind + "'");
    }
    if (kind != "train") {
        for (const char* k : {"samples", "hidden", "embed_dim", "activation", "iterations", "batch_size",
                              "learning_rate", "null_prob", "seed"}) {
            require(!j.contains(k), std::string("denoiser.") + k + " only applies to kind 'train'");
        }
    }
    if (kind != "file") {
        require(!j.contains("path"), "denoiser.path only applies to kind 'file'");
    }
    auto& t = d.train;
    d.train_samples = get_or(j, "samples", "denoiser", d.train_samples);
    t.hidden = get_or(j, "hidden", "denoiser", t.hidden);
    t.embed_dim = get_or(j, "embed_dim", "denoiser", t.embed_dim);
    if (j.contains("activation")) {
        t.activation = activation_from_string(get_or<std::string>(j, "activation", "denoiser", ""));
    }
    t.iterations = get_or(j, "iterations", "denoiser", t.iterations);
    t.batch_size = get_or(j, "batch_size", "denoiser", t.batch_size);
    t.learning_rate = get_or(j, "learning_rate", "denoiser", t.learning_rate);
    t.null_prob = get_or(j, "null_prob", "denoiser", t.null_prob);
    t.seed = get_seed(j, "seed", "denoiser", t.seed);
    require(d.train_samples >= 1, "denoiser.samples must be positive");
}

void parse_codec(const json& j, CodecParams& c) {
    check_keys(j, "codec", {"kind", "latent_dim", "seed"});
    const std::string kind = get_or<std::string>(j, "kind", "codec", "identity");
    if (kind == "identity") {
        c.kind = LatentCodec::Kind::Identity;
        require(!j.contains("latent_dim") && !j.contains("seed"), "codec: identity takes no parameters");
    } else if (kind == "ortho") {
        c.kind = LatentCodec::Kind::OrthoLinear;
        c.latent_dim = get_or(j, "latent_dim", "codec", 0);
        c.seed = get_seed(j, "seed", "codec", 0);
        require(c.latent_dim >= 0, "codec.latent_dim must be non-negative");
    } else {
        throw ConfigError("codec.kind: expected identity or ortho, got '" + kind + "'");
    }
}

void parse_task(const json& j, TaskParams& t, const fs::path& base) {
    check_keys(j, "task", {"kind", "image", "edit_spec", "source_label", "edit_label"});
    const std::string kind = get_or<std::string>(j, "kind", "task", "recolor");
    if (kind == "recolor" || kind == "two_region") {
        t.kind = kind == "recolor" ? TaskParams::Kind::Recolor : TaskParams::Kind::TwoRegion;
        for (const char* k : {"image", "edit_spec", "source_label", "edit_label"}) {
            require(!j.contains(k), std::string("task.") + k + " only applies to kind 'files'");
        }
        return;
    }
    require(kind == "files", "task.kind: expected recolor, two_region or files, got '" + kind + "'");
    t.kind = TaskParams::Kind::Files;
    require(j.contains("image"), "task: kind 'files' needs an image");
    t.image = resolve(base, get_or<std::string>(j, "image", "task", ""));
    require(fs::exists(t.image), "task.image not found: " + t.image.string());
    if (j.contains("edit_spec") && !j.at("edit_spec").is_null()) {
        t.edit_spec = resolve(base, get_or<std::string>(j, "edit_spec", "task", ""));
        require(fs::exists(*t.edit_spec), "task.edit_spec not found: " + t.edit_spec->string());
    }
    require(j.contains("source_label") && j.contains("edit_label"),
            "task: kind 'files' needs source_label and edit_label");
    t.source_cond = parse_condition(j.at("source_label"), "task.source_label");
    t.edit_cond = parse_condition(j.at("edit_label"), "task.edit_label");
}

// ---- persistence ----------------------------------------------------------

Tensor image_tensor(const PixelImage& img) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(img.height), static_cast<std::uint64_t>(img.width),
              static_cast<std::uint64_t>(img.channels)};
    t.data = img.samples;
    return t;
}

PixelImage tensor_image(const Tensor& t, const std::string& what) {
    if (t.dims.size() != 3) {
        throw IoError(what + ": expected a rank-3 image tensor");
    }
    PixelImage img(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]), static_cast<int>(t.dims[2]));
    img.samples = t.data;
    return img;
}

Tensor mask_tensor(const Mask& m) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(m.height), static_cast<std::uint64_t>(m.width)};
    t.data = m.weights;
    return t;
}

Mask tensor_mask(const Tensor& t, const std::string& what) {
    if (t.dims.size() != 2) {
        throw IoError(what + ": expected a rank-2 mask tensor");
    }
    Mask m(static_cast<int>(t.dims[1]), static_cast<int>(t.dims[0]));
    m.weights = t.data;
    return m;
}

Latent read_latent(const fs::path& path) {
    const Tensor t = read_tensor(path);
    if (t.dims.size() != 1) {
        throw IoError(path.string() + ": expected a rank-1 latent tensor");
    }
    return t.as_vector();
}

fs::path image_path(const fs::path& dir, const std::string& stem, const PixelImage& img) {
    return dir / (stem + (img.channels == 3 ? ".ppm" : ".pgm"));
}

PixelImage mask_image(const Mask& m) {
    PixelImage img(m.width, m.height, 1);
    img.samples = m.weights;
    return img;
}

fs::path stage_file(const fs::path& out, Stage s) {
    return out / "stages" / (std::string(to_string(s)) + ".geot");
}

void check_finite(const Latent& z, const char* what) {
    if (!all_finite(z)) {
        throw NumericError(std::string(what) + " produced non-finite values");
    }
}

std::string labels_string(const std::vector<int>& labels) {
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        s += (i ? ";" : "") + std::to_string(labels[i]);
    }
    return s;
}

/// Runs `fn`, prefixing any failure with the stage name while keeping its kind.
template <class Fn>
void run_stage(Stage stage, Fn&& fn) {
    const std::string tag = std::string("stage '") + to_string(stage) + "': ";
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ConfigError(tag + e.what());
    } catch (const NumericError& e) {
        throw NumericError(tag + e.what());
    } catch (const IoError& e) {
        throw IoError(tag + e.what());
    } catch (const fs::filesystem_error& e) {
        throw IoError(tag + e.what());
    }
}

}  // namespace

// ---- RunConfig --------------------------------------------------------------

RunConfig parse_run_config(const std::string& json_text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j, "config", {"world", "world_seed", "schedule", "denoiser", "codec", "task", "w", "t_stop",
                             "inner_steps", "eta", "backtracking", "max_halvings", "inner_step_scale", "seed",
                             "n_seeds", "out"});
    RunConfig cfg;
    if (j.contains("world") && !j.at("world").is_null()) {
        cfg.world = get_or<std::string>(j, "world", "config", "");
    }
    cfg.world_seed = get_seed(j, "world_seed", "config", 0);
    if (j.contains("schedule")) {
        parse_schedule(j.at("schedule"), cfg.schedule);
    }
    if (j.contains("denoiser")) {
        parse_denoiser(j.at("denoiser"), cfg.denoiser, base_dir);
    }
    if (j.contains("codec")) {
        parse_codec(j.at("codec"), cfg.codec);
    }
    if (j.contains("task")) {
        parse_task(j.at("task"), cfg.task, base_dir);
    }
    cfg.w = get_or(j, "w", "config", cfg.w);
    if (j.contains("t_stop") && !j.at("t_stop").is_null()) {
        cfg.t_stop = get_or<int>(j, "t_stop", "config", 0);
    }
    cfg.inner_steps = get_or(j, "inner_steps", "config", cfg.inner_steps);
    cfg.eta = get_or(j, "eta", "config", cfg.eta);
    cfg.backtracking = get_or(j, "backtracking", "config", cfg.backtracking);
    cfg.max_halvings = get_or(j, "max_halvings", "config", cfg.max_halvings);
    const std::string scale = get_or<std::string>(j, "inner_step_scale", "config", "raw");
    if (scale == "normalized") {
        cfg.step_scale = InnerStepScale::Normalized;
    } else if (scale == "raw") {
        cfg.step_scale = InnerStepScale::Raw;
    } else {
        throw ConfigError("inner_step_scale: expected normalized or raw, got '" + scale + "'");
    }
    cfg.seed = get_seed(j, "seed", "config", cfg.seed);
    cfg.n_seeds = get_or(j, "n_seeds", "config", cfg.n_seeds);
    cfg.out = resolve(base_dir, get_or<std::string>(j, "out", "config", cfg.out.string()));

    const bool needs_world = cfg.denoiser.kind != DenoiserSource::Kind::File ||
                             cfg.task.kind != TaskParams::Kind::Files;
    require(!needs_world || cfg.world.has_value(), "config: a world is required for this denoiser/task");
    require(cfg.n_seeds >= 1, "config: n_seeds must be at least 1");
    require(std::isfinite(cfg.w), "config: w must be finite");
    require(cfg.inner_steps >= 0, "config: inner_steps must be non-negative");
    require(std::isfinite(cfg.eta) && cfg.eta > 0.0, "config: eta must be positive");
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    return parse_run_config(read_file(path), path.parent_path());
}

// ---- context ----------------------------------------------------------------

Timestep RunContext::t_stop(const RunConfig& cfg) const {
    const Timestep t = cfg.t_stop.value_or(schedule.midpoint_step());
    require(schedule.is_inference_step(t), "t_stop " + std::to_string(t) + " is not an inference step");
    require(t > 0, "t_stop must be positive");
    return t;
}

RunContext build_context(const RunConfig& cfg) {
    const auto& sp = cfg.schedule;
    require(sp.S >= 1 && sp.S <= sp.T, "schedule: S must lie in [1, T]");
    std::optional<World> world;
    if (cfg.world) {
        world = make_world(*cfg.world, cfg.world_seed);
    }

    // Pixel geometry comes from the world, or from the task image when there is none.
    int width = 0;
    int height = 0;
    int channels = 1;
    if (world && world->is_image()) {
        width = world->width;
        height = world->height;
    } else if (cfg.task.kind == TaskParams::Kind::Files) {
        const PixelImage img = read_pnm(cfg.task.image);
        width = img.width;
        height = img.height;
        channels = img.channels;
    } else {
        throw ConfigError("world '" + *cfg.world + "' is not an image world; editing needs one");
    }

    LatentCodec codec = LatentCodec::identity(width, height, channels);
    if (cfg.codec.kind == LatentCodec::Kind::OrthoLinear) {
        const int full = width * height * channels;
        codec = LatentCodec::random_ortho(width, height, channels,
                                          cfg.codec.latent_dim > 0 ? cfg.codec.latent_dim : full, cfg.codec.seed);
    }

    DiffusionSchedule schedule = subsample_schedule(make_linear_schedule(sp.T, sp.beta_start, sp.beta_end), sp.S);
    std::unique_ptr<Denoiser> denoiser;
    switch (cfg.denoiser.kind) {
        case DenoiserSource::Kind::World:
            require(codec.kind() == LatentCodec::Kind::Identity,
                    "denoiser kind 'world' models pixel space directly; use the identity codec or train one");
            denoiser = std::make_unique<GmmDenoiser>(world->model, schedule);
            break;
        case DenoiserSource::Kind::File:
            denoiser = load_denoiser(cfg.denoiser.path, schedule);
            break;
        case DenoiserSource::Kind::Train: {
            require(world->is_image(), "denoiser training needs an image world");
            std::vector<LabeledLatent> data;
            data.reserve(static_cast<std::size_t>(cfg.denoiser.train_samples));
            std::mt19937_64 rng(cfg.denoiser.train.seed ^ 0x5eedULL);
            for (int i = 0; i < cfg.denoiser.train_samples; ++i) {
                LabeledLatent s = sample_world(*world, Condition::null(), rng());
                s.latent = codec.encode(latent_to_image(*world, s.latent));
                data.push_back(std::move(s));
            }
            denoiser = std::make_unique<MlpDenoiser>(train_mlp_denoiser(data, schedule, cfg.denoiser.train).denoiser);
            break;
        }
    }
    require(denoiser->dim() == codec.latent_dim(), "denoiser dimension " + std::to_string(denoiser->dim()) +
                                                       " does not match codec latent size " +
                                                       std::to_string(codec.latent_dim()));
    return RunContext{std::move(schedule), std::move(world), std::move(denoiser), std::move(codec)};
}

EditTask materialize_task(const RunConfig& cfg, const RunContext& ctx, std::uint64_t seed) {
    switch (cfg.task.kind) {
        case TaskParams::Kind::Recolor:
            return make_recolor_task(*ctx.world, seed);
        case TaskParams::Kind::TwoRegion:
            return make_two_region_task(*ctx.world, seed);
        case TaskParams::Kind::Files:
            break;
    }
    EditTask task;
    task.original = read_pnm(cfg.task.image);
    if (cfg.task.edit_spec) {
        task.spec = load_edit_spec(*cfg.task.edit_spec);
    }
    task.source_cond = cfg.task.source_cond;
    task.edit_cond = cfg.task.edit_cond;
    return task;
}

// ---- names ------------------------------------------------------------------

const char* to_string(Method m) { return m == Method::Geo ? "GEO" : "DDIM-baseline"; }

const char* to_string(Stage s) {
    switch (s) {
        case Stage::Edit: return "edit";
        case Stage::Encode: return "encode";
        case Stage::Invert: return "invert";
        case Stage::Sample: return "sample";
        case Stage::Decode: return "decode";
    }
    return "?";
}

Stage stage_from_string(const std::string& name) {
    for (Stage s : {Stage::Edit, Stage::Encode, Stage::Invert, Stage::Sample, Stage::Decode}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw ConfigError("unknown stage '" + name + "' (edit, encode, invert, sample, decode)");
}

// ---- editing ----------------------------------------------------------------

EditOutcome run_edit(const RunConfig& cfg, const RunContext& ctx, Method method, std::uint64_t seed,
                     const RunOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const DiffusionSchedule& s = ctx.schedule;
    const Timestep t_stop = ctx.t_stop(cfg);
    const EditTask task = materialize_task(cfg, ctx, seed);
    const fs::path& out = cfg.out;
    const bool write = opts.write_artifacts;
    const auto runs = [&](Stage st) { return st >= opts.resume_from; };
    if (write) {
        fs::create_directories(out / "stages");
    }

    EditOutcome r;
    r.report.method = method;

    run_stage(Stage::Edit, [&] {
        if (runs(Stage::Edit)) {
            r.original = task.original;
            EditResult e = apply_edit_spec(task.original, task.spec, ctx.sdedit(cfg.w));
            r.proposal = std::move(e.edited);
            r.union_mask = std::move(e.union_mask);
            if (write) {
                write_tensors(stage_file(out, Stage::Edit),
                              {image_tensor(r.original), image_tensor(r.proposal), mask_tensor(r.union_mask)});
                write_pnm(image_path(out, "original", r.original), r.original);
                write_pnm(image_path(out, "proposal", r.proposal), r.proposal);
                write_pnm(out / "union_mask.pgm", mask_image(r.union_mask));
            }
        } else {
            const auto ts = read_tensors(stage_file(out, Stage::Edit));
            if (ts.size() != 3) {
                throw IoError("edit stage file holds " + std::to_string(ts.size()) + " tensors, expected 3");
            }
            r.original = tensor_image(ts[0], "original");
            r.proposal = tensor_image(ts[1], "proposal");
            r.union_mask = tensor_mask(ts[2], "union mask");
        }
    });

    run_stage(Stage::Encode, [&] {
        if (runs(Stage::Encode)) {
            r.z0 = ctx.codec.encode(r.proposal);
            check_finite(r.z0, "encode");
            if (write) {
                write_tensor(stage_file(out, Stage::Encode), Tensor::vector(r.z0));
            }
        } else {
            r.z0 = read_latent(stage_file(out, Stage::Encode));
        }
    });

    run_stage(Stage::Invert, [&] {
        if (!runs(Stage::Invert)) {
            r.z_stop = read_latent(stage_file(out, Stage::Invert));
            return;
        }
        if (method == Method::Geo) {
            GeoInversionConfig g;
            g.t_stop = t_stop;
            g.inner_steps = cfg.inner_steps;
            g.eta = cfg.eta;
            g.guidance = {cfg.w, task.edit_cond, Condition::null()};
            g.backtracking = cfg.backtracking;
            g.max_halvings = cfg.max_halvings;
            g.step_scale = cfg.step_scale;
            GeoInversionResult res = geo_invert(*ctx.denoiser, r.z0, g, s);
            r.inversion = std::move(res.trajectory);
            r.inner_log = std::move(res.log);
        } else {
            r.inversion = ddim_invert(*ctx.denoiser, r.z0, task.edit_cond, s, t_stop);
        }
        r.z_stop = r.inversion.back().z;
        check_finite(r.z_stop, "inversion");
        if (write) {
            write_tensor(stage_file(out, Stage::Invert), Tensor::vector(r.z_stop));
            write_trajectory(out / "trajectories", "inversion", r.inversion);
            if (method == Method::Geo) {
                write_file(out / "inner_loop.csv", inner_log_csv(r.inner_log));
            }
            dump_pred_z0_frames(r.inversion, ctx.codec, out / "frames", "inversion");
        }
    });

    run_stage(Stage::Sample, [&] {
        if (!runs(Stage::Sample)) {
            r.z_final = read_latent(stage_file(out, Stage::Sample));
            return;
        }
        r.sampling = ddim_sample(*ctx.denoiser, r.z_stop, t_stop, 0, {cfg.w, task.edit_cond, Condition::null()}, s);
        r.z_final = r.sampling.back().z;
        check_finite(r.z_final, "sampling");
        if (write) {
            write_tensor(stage_file(out, Stage::Sample), Tensor::vector(r.z_final));
            write_trajectory(out / "trajectories", "sampling", r.sampling);
            dump_pred_z0_frames(r.sampling, ctx.codec, out / "frames", "sampling");
        }
    });

    run_stage(Stage::Decode, [&] {
        r.output = ctx.codec.decode(r.z_final);
        EditReport& rep = r.report;
        rep.has_background = std::any_of(r.union_mask.weights.begin(), r.union_mask.weights.end(),
                                         [](double m) { return m < kBackgroundThreshold; });
        if (rep.has_background) {
            const MaskedMetrics m = masked_metrics(r.original, r.output, r.union_mask);
            rep.background_mse = m.mse;
            rep.background_psnr = m.psnr;
        }
        rep.edit_shift = edit_shift(r.original, r.proposal, r.output, r.union_mask);
        if (ctx.world && ctx.world->is_image() && !ctx.world->regions.empty() &&
            r.output.channels == 1 && r.output.width == ctx.world->width && r.output.height == ctx.world->height) {
            const Eigen::Map<const Eigen::VectorXd> px(r.output.samples.data(),
                                                       static_cast<long>(r.output.samples.size()));
            rep.region_labels = assign_region_labels(*ctx.world, (2.0 * px.array() - 1.0).matrix());
            rep.intended_labels = task.intended_labels;
        }
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (write) {
            write_pnm(image_path(out, "output", r.output), r.output);
            write_file(out / "report.csv", report_csv(rep));
        }
    });
    return r;
}

EditOutcome geo_edit(const RunConfig& cfg, const RunOptions& opts) {
    const RunContext ctx = build_context(cfg);
    return run_edit(cfg, ctx, Method::Geo, cfg.seed, opts);
}

EditOutcome ddim_baseline_edit(const RunConfig& cfg, const RunOptions& opts) {
    const RunContext ctx = build_context(cfg);
    return run_edit(cfg, ctx, Method::DdimBaseline, cfg.seed, opts);
}

namespace {

const char* kReportHeader = "method,background_mse,background_psnr,edit_shift,region_labels,intended_labels\n";

std::string report_fields(const EditReport& r) {
    std::string line = to_string(r.method);
    line += ',' + (r.has_background ? format_real(r.background_mse) : std::string());
    line += ',' + (r.has_background ? format_real(r.background_psnr) : std::string());
    line += ',' + format_real(r.edit_shift);
    line += ',' + labels_string(r.region_labels);
    line += ',' + labels_string(r.intended_labels);
    return line;
}

}  // namespace

std::string report_csv(const EditReport& r) { return kReportHeader + report_fields(r) + "\n"; }

// ---- frame dumps ------------------------------------------------------------

std::vector<fs::path> dump_pred_z0_frames(const Trajectory& traj, const LatentCodec& codec, const fs::path& outdir,
                                          const std::string& tag) {
    require(traj.size() > 0, "dump_pred_z0_frames: empty trajectory");
    fs::create_directories(outdir);
    std::vector<fs::path> paths;
    json index = json::array();
    for (const auto& f : traj.frames) {
        const PixelImage img = codec.decode(f.z0_pred);
        char name[64];
        std::snprintf(name, sizeof name, "%s_%04d.%s", tag.c_str(), f.t, img.channels == 3 ? "ppm" : "pgm");
        write_pnm(outdir / name, img);
        paths.push_back(outdir / name);
        index.push_back({{"t", f.t}, {"file", name}});
    }
    write_file(outdir / (tag + "_frames.json"), json{{"tag", tag}, {"frames", index}}.dump(2) + "\n");
    return paths;
}

// ---- ablation ---------------------------------------------------------------

AblationSummary ablation_suite(const RunConfig& cfg, int n_seeds) {
    require(n_seeds >= 1, "ablation_suite: n_seeds must be at least 1");
    const RunContext ctx = build_context(cfg);
    AblationSummary sum;
    int geo_ok = 0;
    int base_ok = 0;
    int geo_match = 0;
    int base_match = 0;
    int wins = 0;
    double gap = 0.0;
    for (int i = 0; i < n_seeds; ++i) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
        AblationRow pair[2];
        for (int m = 0; m < 2; ++m) {
            AblationRow& row = pair[m];
            row.seed = seed;
            row.method = m == 0 ? Method::Geo : Method::DdimBaseline;
            try {
                row.report = run_edit(cfg, ctx, row.method, seed, {false, Stage::Edit}).report;
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
        const AblationRow& g = pair[0];
        const AblationRow& b = pair[1];
        if (g.ok) {
            ++geo_ok;
            geo_match += g.report.labels_match() ? 1 : 0;
        }
        if (b.ok) {
            ++base_ok;
            base_match += b.report.labels_match() ? 1 : 0;
        }
        if (g.ok && b.ok && g.report.has_background && b.report.has_background) {
            ++sum.paired;
            wins += g.report.background_mse < b.report.background_mse ? 1 : 0;
            gap += g.report.background_psnr - b.report.background_psnr;
        }
        sum.rows.push_back(g);
        sum.rows.push_back(b);
    }
    if (sum.paired > 0) {
        sum.geo_win_rate = static_cast<double>(wins) / sum.paired;
        sum.mean_psnr_gap = gap / sum.paired;
    }
    sum.geo_label_rate = geo_ok ? static_cast<double>(geo_match) / geo_ok : 0.0;
    sum.baseline_label_rate = base_ok ? static_cast<double>(base_match) / base_ok : 0.0;
    return sum;
}

std::string ablation_csv(const AblationSummary& s) {
    std::string csv = "seed,method,status,background_mse,background_psnr,edit_shift,region_labels,intended_labels,"
                      "labels_match,geo_win_rate,mean_psnr_gap,geo_label_rate,baseline_label_rate\n";
    for (const auto& row : s.rows) {
        csv += std::to_string(row.seed) + ',';
        if (row.ok) {
            csv += std::string(to_string(row.method)) + ",ok";
            csv += report_fields(row.report).substr(std::string(to_string(row.method)).size());
            csv += row.report.region_labels.empty() ? "," : (row.report.labels_match() ? ",1" : ",0");
        } else {
            std::string msg = row.error;
            std::replace_if(msg.begin(), msg.end(), [](char c) { return c == ',' || c == '\n' || c == '"'; }, ' ');
            csv += std::string(to_string(row.method)) + ",error: " + msg + ",,,,,,";
        }
        csv += ",,,,\n";
    }
    csv += "summary,paired=" + std::to_string(s.paired) + ",,,,,,,," + format_real(s.geo_win_rate) + ',' +
           format_real(s.mean_psnr_gap) + ',' + format_real(s.geo_label_rate) + ',' +
           format_real(s.baseline_label_rate) + "\n";
    return csv;
}

}  // namespace geo
