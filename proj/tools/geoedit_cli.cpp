// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Exit codes: 0 ok, 2 config, 3 numeric, 4 I/O.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "geo/model_io.hpp"
#include "geo/pipeline.hpp"
#include "geo/pnm.hpp"
#include "geo/tensor_io.hpp"

namespace fs = std::filesystem;
using namespace geo;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

struct Overrides {
    fs::path config;
    std::optional<std::uint64_t> seed;
    std::optional<double> w;
    std::optional<int> t_stop;
    std::optional<int> inner_steps;
    std::optional<double> eta;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "run configuration (JSON)")->required();
    cmd->add_option("--seed", o.seed, "run seed");
    cmd->add_option("--w", o.w, "guidance scale");
    cmd->add_option("--t-stop", o.t_stop, "stop timestep (an inference step)");
    cmd->add_option("--inner-steps", o.inner_steps, "inner iterations per timestep");
    cmd->add_option("--eta", o.eta, "inner-loop step size");
    cmd->add_option("--out", o.out, "output directory");
}

RunConfig load(const Overrides& o) {
    RunConfig cfg = load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.w) cfg.w = *o.w;
    if (o.t_stop) cfg.t_stop = *o.t_stop;
    if (o.inner_steps) {
        require(*o.inner_steps >= 0, "--inner-steps must be non-negative");
        cfg.inner_steps = *o.inner_steps;
    }
    if (o.eta) {
        require(*o.eta > 0.0, "--eta must be positive");
        cfg.eta = *o.eta;
    }
    if (o.out) cfg.out = *o.out;
    return cfg;
}

void print_report(const EditReport& r, const fs::path& out) {
    std::printf("method=%s", to_string(r.method));
    if (r.has_background) {
        std::printf(" background_mse=%s background_psnr=%s", format_real(r.background_mse).c_str(),
                    format_real(r.background_psnr).c_str());
    }
    std::printf(" edit_shift=%s seconds=%.3f out=%s\n", format_real(r.edit_shift).c_str(), r.seconds,
                out.string().c_str());
}

int cmd_sample(const RunConfig& cfg) {
    const RunContext ctx = build_context(cfg);
    const EditTask task = materialize_task(cfg, ctx, cfg.seed);
    const Timestep t_top = ctx.schedule.inference_steps().back();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Latent z(ctx.denoiser->dim());
    for (long i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Trajectory traj = ddim_sample(*ctx.denoiser, z, t_top, 0, {cfg.w, task.edit_cond, Condition::null()},
                                        ctx.schedule);
    fs::create_directories(cfg.out);
    const PixelImage img = ctx.codec.decode(traj.back().z);
    write_pnm(cfg.out / (img.channels == 3 ? "sample.ppm" : "sample.pgm"), img);
    write_tensor(cfg.out / "sample.geot", Tensor::vector(traj.back().z));
    write_trajectory(cfg.out / "trajectories", "sampling", traj);
    dump_pred_z0_frames(traj, ctx.codec, cfg.out / "frames", "sampling");
    std::printf("sampled %s from t=%d under %s\n", cfg.out.string().c_str(), t_top,
                task.edit_cond.to_string().c_str());
    return kOk;
}

int cmd_invert(const RunConfig& cfg, bool geo) {
    const RunContext ctx = build_context(cfg);
    const EditTask task = materialize_task(cfg, ctx, cfg.seed);
    const Latent z0 = ctx.codec.encode(task.original);
    const Timestep t_stop = ctx.t_stop(cfg);
    fs::create_directories(cfg.out);
    Trajectory traj;
    if (geo) {
        GeoInversionConfig g;
        g.t_stop = t_stop;
        g.inner_steps = cfg.inner_steps;
        g.eta = cfg.eta;
        g.guidance = {cfg.w, task.source_cond, Condition::null()};
        g.backtracking = cfg.backtracking;
        g.max_halvings = cfg.max_halvings;
        g.step_scale = cfg.step_scale;
        GeoInversionResult res = geo_invert(*ctx.denoiser, z0, g, ctx.schedule);
        write_file(cfg.out / "inner_loop.csv", inner_log_csv(res.log));
        traj = std::move(res.trajectory);
    } else {
        traj = ddim_invert(*ctx.denoiser, z0, task.source_cond, ctx.schedule, t_stop);
    }
    write_tensor(cfg.out / "inverted.geot", Tensor::vector(traj.back().z));
    write_trajectory(cfg.out / "trajectories", "inversion", traj);
    std::printf("inverted to t=%d (%zu frames) in %s\n", t_stop, traj.size(), cfg.out.string().c_str());
    return kOk;
}

int cmd_edit(const RunConfig& cfg, Method method, const std::string& resume) {
    RunOptions opts;
    if (!resume.empty()) opts.resume_from = stage_from_string(resume);
    const EditOutcome r = method == Method::Geo ? geo_edit(cfg, opts) : ddim_baseline_edit(cfg, opts);
    print_report(r.report, cfg.out);
    return kOk;
}

int cmd_ablate(const RunConfig& cfg, std::optional<int> n_seeds) {
    const AblationSummary s = ablation_suite(cfg, n_seeds.value_or(cfg.n_seeds));
    fs::create_directories(cfg.out);
    write_file(cfg.out / "ablation.csv", ablation_csv(s));
    std::printf("paired=%d geo_win_rate=%s mean_psnr_gap=%s geo_label_rate=%s baseline_label_rate=%s\n", s.paired,
                format_real(s.geo_win_rate).c_str(), format_real(s.mean_psnr_gap).c_str(),
                format_real(s.geo_label_rate).c_str(), format_real(s.baseline_label_rate).c_str());
    return kOk;
}

int cmd_train(const RunConfig& cfg, bool export_gmm) {
    require(cfg.world.has_value(), "train-denoiser needs a world");
    fs::create_directories(cfg.out);
    if (export_gmm) {
        const World world = make_world(*cfg.world, cfg.world_seed);
        save_gmm(cfg.out / "gmm.geot", world.model);
        std::printf("wrote %s\n", (cfg.out / "gmm.geot").string().c_str());
        return kOk;
    }
    RunConfig train_cfg = cfg;
    train_cfg.denoiser.kind = DenoiserSource::Kind::Train;
    const RunContext ctx = build_context(train_cfg);
    const auto& mlp = dynamic_cast<const MlpDenoiser&>(*ctx.denoiser);
    save_mlp(cfg.out / "mlp.geot", mlp.params());
    std::printf("wrote %s\n", (cfg.out / "mlp.geot").string().c_str());
    return kOk;
}

int cmd_dump(const RunConfig& cfg, const fs::path& index, const std::string& tag) {
    const RunContext ctx = build_context(cfg);
    const Trajectory traj = read_trajectory(index);
    const auto paths = dump_pred_z0_frames(traj, ctx.codec, cfg.out, tag);
    std::printf("wrote %zu frames to %s\n", paths.size(), cfg.out.string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geoedit: diffusion inversion and editing on toy worlds"};
    app.require_subcommand(1);
    Overrides o;
    std::string resume;
    std::optional<int> n_seeds;
    bool export_gmm = false;
    fs::path index;
    std::string tag = "z0hat";

    auto* sample = app.add_subcommand("sample", "guided DDIM sampling from pure noise");
    auto* invert = app.add_subcommand("invert", "plain DDIM inversion of the task image");
    auto* geo_inv = app.add_subcommand("geo-invert", "geometric accumulative inversion of the task image");
    auto* edit = app.add_subcommand("edit", "geometric accumulative editing");
    auto* base = app.add_subcommand("baseline-edit", "editing with plain DDIM inversion");
    auto* ablate = app.add_subcommand("ablate", "paired GEO / baseline runs over seeds");
    auto* train = app.add_subcommand("train-denoiser", "fit an MLP denoiser to the world, or export its GMM");
    auto* dump = app.add_subcommand("dump-frames", "decode predicted-z0 frames of a saved trajectory");
    for (auto* c : {sample, invert, geo_inv, edit, base, ablate, train, dump}) add_common(c, o);
    for (auto* c : {edit, base}) c->add_option("--resume-from", resume, "first stage to recompute");
    ablate->add_option("--n-seeds", n_seeds, "number of seeds")->check(CLI::PositiveNumber);
    train->add_flag("--gmm", export_gmm, "export the world's analytic GMM instead of training");
    dump->add_option("--trajectory", index, "trajectory index JSON")->required();
    dump->add_option("--tag", tag, "frame file prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        const RunConfig cfg = load(o);
        if (*sample) return cmd_sample(cfg);
        if (*invert) return cmd_invert(cfg, false);
        if (*geo_inv) return cmd_invert(cfg, true);
        if (*edit) return cmd_edit(cfg, Method::Geo, resume);
        if (*base) return cmd_edit(cfg, Method::DdimBaseline, resume);
        if (*ablate) return cmd_ablate(cfg, n_seeds);
        if (*train) return cmd_train(cfg, export_gmm);
        if (*dump) return cmd_dump(cfg, index, tag);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
