// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>

#include "geo/gmm.hpp"
#include "geo/inversion.hpp"
#include "geo/mlp.hpp"

namespace geo {

// Models persist as a tensor container `<stem>.geot` plus a JSON sidecar
// `<stem>.json` that names the tensors in order and carries shapes, labels
// and hyperparameters. `path` below is either file; the other is derived.

void save_gmm(const std::filesystem::path& path, const GmmModel& model);
GmmModel load_gmm(const std::filesystem::path& path);

void save_mlp(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_mlp(const std::filesystem::path& path);

/// Dispatches on the sidecar's "kind" ("gmm" or "mlp").
std::unique_ptr<Denoiser> load_denoiser(const std::filesystem::path& path, const DiffusionSchedule& s);

/// One `<tag>_<t>.geot` per frame holding [z, z0_pred] as a 2 x dim tensor,
/// plus `<tag>_index.json` listing timestep and file per frame.
void write_trajectory(const std::filesystem::path& dir, const std::string& tag, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& index_path);

/// CSV: timestep,iteration,loss,step_size
std::string inner_log_csv(const InnerLoopLog& log);

/// Shortest round-trip decimal form, '.' separator.
std::string format_real(double v);

}  // namespace geo
