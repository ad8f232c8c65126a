// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace geo {

/// Flat real-valued latent. Timestep tags live in the trajectory frames.
using Latent = Eigen::VectorXd;

/// Training timestep index in [0, T]. 0 is clean data.
using Timestep = int;

/// Bad input: malformed config, precondition violation, shape mismatch.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf encountered during a numeric stage.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system or format failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

inline void require_same_dim(const Latent& a, const Latent& b, const char* what) {
    if (a.size() != b.size()) {
        throw ConfigError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
    }
}

inline bool all_finite(const Latent& v) {
    return v.allFinite();
}

}  // namespace geo
