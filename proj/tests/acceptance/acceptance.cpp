// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>

#include "geo/inversion.hpp"
#include "geo/mlp.hpp"
#include "geo/pipeline.hpp"
#include "geo/tensor_io.hpp"
#include "geo/worlds.hpp"
#include "test_util.hpp"

using namespace geo;
using namespace geo::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

const fs::path kConfigs = fs::path(GEO_SOURCE_DIR) / "configs";

// 1. DDIM step composed with its inversion over random timestep pairs.
Outcome algebraic_inverse() {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> pick(0, 1000);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        int a = pick(rng), b = pick(rng);
        while (a == b) b = pick(rng);
        const int lo = std::min(a, b), hi = std::max(a, b);
        const int dim = 1 + static_cast<int>(rng() % 16);
        const Latent z = gaussian_vector(dim, rng), e = gaussian_vector(dim, rng);
        worst = std::max(worst, rel_err(ddim_step(ddim_invert_step(z, lo, hi, e, s), hi, lo, e, s), z));
        worst = std::max(worst, rel_err(ddim_invert_step(ddim_step(z, hi, lo, e, s), lo, hi, e, s), z));
    }
    return {worst <= 1e-10, fmt("worst relative error %.2e over 1000 draws (limit 1e-10)", worst)};
}

// 2. Analytic denoiser vs a posterior-mean oracle and a Monte-Carlo estimate.
Outcome denoiser_oracle() {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const GmmModel m = random_gmm(4, 3, 2, 200 + i);
        const int t = 1 + static_cast<int>(rng() % 1000);
        const Condition c = i % 2 ? Condition::label(i % 3) : Condition::null();
        const Latent z = gaussian_vector(4, rng, 2.0);
        worst = std::max(worst, rel_err(gmm_predict_eps(m, z, t, c, s),
                                        oracle_eps(m, z, s.alpha_bar(t), conditioned_weights(m, c))));
    }
    // Self-normalised importance sampling of E[eps | z] from prior draws.
    const World w = make_point_world();
    std::vector<double> prior;
    for (const auto& c : w.model.components) prior.push_back(c.weight);
    std::discrete_distribution<std::size_t> pick(prior.begin(), prior.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::pair<int, Eigen::Vector2d> spots[5] = {{200, {1.5, 0.8}},  {400, {-1.0, 1.2}}, {600, {0.6, -0.9}},
                                                      {800, {-0.7, -0.4}}, {950, {0.5, 0.5}}};
    double mc_worst = 0.0;
    for (const auto& [t, zv] : spots) {
        const double a = s.alpha_bar(t);
        const Latent z = zv;
        long double wsum = 0.0L;
        Eigen::Vector2d acc = Eigen::Vector2d::Zero();
        for (int n = 0; n < 1000000; ++n) {
            const auto& c = w.model.components[pick(rng)];
            Eigen::Vector2d x0;
            for (int d = 0; d < 2; ++d) x0(d) = c.mean(d) + std::sqrt(c.variance(d)) * normal(rng);
            const Eigen::Vector2d e = (zv - std::sqrt(a) * x0) / std::sqrt(1.0 - a);
            const double wt = std::exp(-0.5 * e.squaredNorm());
            wsum += wt;
            acc += wt * e;
        }
        const Latent mc = acc / static_cast<double>(wsum);
        mc_worst = std::max(mc_worst, rel_err(gmm_predict_eps(w.model, z, t, Condition::null(), s), mc));
    }
    return {worst <= 1e-8 && mc_worst <= 0.02,
            fmt("oracle worst %.2e at 100 points (limit 1e-8); Monte-Carlo worst %.2f%% at 5 points (limit 2%%)",
                worst, 100.0 * mc_worst)};
}

// 3. Inner-loss gradient vs central differences with step 1e-5.
double worst_gradient_error(const Denoiser& d, int dim, std::uint64_t seed, int labels) {
    const auto s = default_schedule();
    const auto& steps = s.inference_steps();
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = static_cast<std::size_t>(rng() % (steps.size() - 1));
        const double wv = i % 4 == 0 ? 1.0 : 7.5;
        const GuidanceConfig g{wv, Condition::label(static_cast<int>(rng() % labels)), Condition::null()};
        const Latent v = gaussian_vector(dim, rng), zt = gaussian_vector(dim, rng), prev = gaussian_vector(dim, rng);
        const Latent grad = geo_accum_loss(v, zt, steps[k], steps[k + 1], d, g, prev, s).grad;
        const Latent fd = fd_gradient(
            [&](const Latent& x) { return geo_accum_loss_value(x, zt, steps[k], steps[k + 1], d, g, prev, s); }, v,
            1e-5);
        worst = std::max(worst, rel_err(grad, fd));
    }
    return worst;
}

Outcome gradient_correctness() {
    const auto s = default_schedule();
    const GmmDenoiser gmm(random_gmm(4, 2, 3, 33), s);
    const double g_err = worst_gradient_error(gmm, 4, 3, 2);
    const World w = make_point_world();
    std::vector<LabeledLatent> data;
    for (std::uint64_t i = 0; i < 2048; ++i) data.push_back(sample_world(w, Condition::null(), i));
    MlpTrainConfig cfg;
    cfg.iterations = 1500;
    cfg.seed = 3;
    const MlpDenoiser mlp = train_mlp_denoiser(data, s, cfg).denoiser;
    const double m_err = worst_gradient_error(mlp, 2, 4, w.model.num_categories());
    return {g_err <= 1e-5 && m_err <= 1e-4,
            fmt("worst relative error GMM %.2e (limit 1e-5), trained MLP %.2e (limit 1e-4), 100 configs each", g_err,
                m_err)};
}

// 4. geo_invert with N = 0 reproduces ddim_invert bit for bit.
Outcome reduction_identity() {
    const auto s = default_schedule();
    const World w = make_image_world(0);
    const GmmDenoiser d(w.model, s);
    int identical = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const EditTask task = make_recolor_task(w, seed);
        const Latent z0 = LatentCodec::identity(w.width, w.height, 1).encode(task.original);
        GeoInversionConfig cfg;
        cfg.t_stop = s.midpoint_step();
        cfg.inner_steps = 0;
        cfg.guidance = {7.5, task.edit_cond, Condition::null()};
        const Trajectory a = geo_invert(d, z0, cfg, s).trajectory;
        const Trajectory b = ddim_invert(d, z0, task.edit_cond, s, cfg.t_stop);
        bool same = a.size() == b.size();
        for (std::size_t i = 0; same && i < a.size(); ++i) {
            same = a.frames[i].t == b.frames[i].t && a.frames[i].z == b.frames[i].z &&
                   a.frames[i].z0_pred == b.frames[i].z0_pred;
        }
        identical += same ? 1 : 0;
    }
    return {identical == 10, fmt("%d/10 trajectories bit-identical", identical)};
}

// 5. Backtracking keeps every logged inner loss non-increasing.
Outcome inner_monotonicity() {
    const RunConfig cfg = load_run_config(kConfigs / "default.json");
    const RunContext ctx = build_context(cfg);
    long violations = 0, checked = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const EditOutcome r = run_edit(cfg, ctx, Method::Geo, seed, {false});
        for (std::size_t i = 1; i < r.inner_log.size(); ++i) {
            if (r.inner_log[i].t != r.inner_log[i - 1].t) continue;
            ++checked;
            violations += r.inner_log[i].loss > r.inner_log[i - 1].loss ? 1 : 0;
        }
    }
    return {violations == 0 && checked > 0, fmt("%ld violations in %ld inner iterations over 20 runs", violations,
                                                 checked)};
}

// 6. Invert to mid-schedule and sample back on the 16-dim world.
Outcome reconstruction_round_trip() {
    const World w = make_row_world(0);
    const auto full = make_linear_schedule(1000, 1e-4, 0.02);
    const int Ss[4] = {25, 50, 100, 200};
    double mean[4] = {0, 0, 0, 0}, worst[4] = {0, 0, 0, 0};
    int monotone = 0;
    const int n = 20;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const LabeledLatent x = sample_world(w, Condition::label(static_cast<int>(seed % 3)), seed);
        const Condition c = Condition::label(x.label);
        double prev = 1e300;
        bool mono = true;
        for (int k = 0; k < 4; ++k) {
            const auto s = subsample_schedule(full, Ss[k]);
            const GmmDenoiser d(w.model, s);
            const Timestep mid = s.midpoint_step();
            const Latent zs = ddim_invert(d, x.latent, c, s, mid).back().z;
            const double err = rel_err(ddim_sample(d, zs, mid, 0, {1.0, c, Condition::null()}, s).back().z, x.latent);
            mean[k] += err / n;
            worst[k] = std::max(worst[k], err);
            mono = mono && err < prev;
            prev = err;
        }
        monotone += mono ? 1 : 0;
    }
    const bool mean_mono = mean[0] > mean[1] && mean[1] > mean[2] && mean[2] > mean[3];
    return {worst[1] <= 0.01 && mean_mono && monotone == n,
            fmt("S=50 worst %.3f%% (limit 1%%); mean by S=25/50/100/200: %.4f/%.4f/%.4f/%.4f; "
                "%d/%d instances shrink monotonically",
                100.0 * worst[1], mean[0], mean[1], mean[2], mean[3], monotone, n)};
}

// 7. Paired background-preservation ablation on the recolor task.
Outcome background_ablation() {
    RunConfig cfg = load_run_config(kConfigs / "default.json");
    const AblationSummary s = ablation_suite(cfg, 20);
    return {s.paired == 20 && s.geo_win_rate >= 0.8 && s.mean_psnr_gap > 0.0,
            fmt("GEO wins %.0f%% of %d paired runs (limit 80%%), mean PSNR gap %+.3f dB (limit > 0)",
                100.0 * s.geo_win_rate, s.paired, s.mean_psnr_gap)};
}

// 8. Per-region label assignment on the two-region world.
Outcome multi_region() {
    const RunConfig cfg = load_run_config(kConfigs / "two_region.json");
    const AblationSummary s = ablation_suite(cfg, 20);
    return {s.geo_label_rate >= 0.8,
            fmt("GEO label match %.0f%% of 20 (limit 80%%); baseline %.0f%% (recorded)", 100.0 * s.geo_label_rate,
                100.0 * s.baseline_label_rate)};
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::map<std::string, std::uint64_t> hash_tree(const fs::path& dir) {
    std::map<std::string, std::uint64_t> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = fnv1a(read_file(e.path()));
    }
    return out;
}

int run_edit_cli(const fs::path& out) {
    const std::string cmd = std::string(GEO_CLI_PATH) + " edit --config " + (kConfigs / "default.json").string() +
                            " --out " + out.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 9. Two CLI edits with the same config and seed give identical files.
Outcome determinism() {
    const fs::path root = scratch_dir("acceptance_determinism");
    const int a = run_edit_cli(root / "a");
    const int b = run_edit_cli(root / "b");
    if (a != 0 || b != 0) return {false, fmt("edit exited with %d and %d", a, b)};
    const auto ha = hash_tree(root / "a"), hb = hash_tree(root / "b");
    std::uint64_t combined = 0;
    for (const auto& [name, h] : ha) combined = combined * 31 + h;
    return {ha == hb && !ha.empty(),
            fmt("%zu files per run, all hashes %s (combined %016llx)", ha.size(), ha == hb ? "equal" : "DIFFER",
                static_cast<unsigned long long>(combined))};
}

// 10. Default edit through the CLI, wall clock.
Outcome budget() {
    const fs::path root = scratch_dir("acceptance_budget");
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_edit_cli(root / "run");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {code == 0 && secs < 60.0, fmt("default edit took %.2f s (limit 60 s), exit %d", secs, code)};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double limit;  // seconds; 0 means none stated
    };
    const Criterion criteria[] = {
        {"algebraic inverse", algebraic_inverse, 1.0},
        {"denoiser oracle", denoiser_oracle, 60.0},
        {"gradient correctness", gradient_correctness, 60.0},
        {"reduction identity", reduction_identity, 0.0},
        {"inner-loop monotonicity", inner_monotonicity, 0.0},
        {"reconstruction round trip", reconstruction_round_trip, 0.0},
        {"background-preservation ablation", background_ablation, 600.0},
        {"multi-region labels", multi_region, 0.0},
        {"determinism", determinism, 0.0},
        {"budget", budget, 0.0},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.limit > 0.0 && secs >= c.limit) {
            o.pass = false;
            o.detail += fmt("; runtime over %.0f s", c.limit);
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s  %2d %-34s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
