// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "geo/common.hpp"

namespace geo {

/// One record of the tensor container:
///   "GEOT" | u32 rank | rank x u64 dims | prod(dims) x f64 payload
/// All integers and reals little-endian. A file may hold several records
/// back to back.
struct Tensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;

    std::size_t element_count() const;
    static Tensor vector(const Eigen::VectorXd& v);
    static Tensor matrix(const Eigen::MatrixXd& m);  // row-major payload
    Eigen::VectorXd as_vector() const;
    Eigen::MatrixXd as_matrix() const;
};

std::string encode_tensor(const Tensor& t);
/// Decodes the record starting at `offset` and advances it.
Tensor decode_tensor(const std::string& bytes, std::size_t& offset);

void write_tensors(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_tensors(const std::filesystem::path& path);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace geo
