// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace geo {

namespace {

constexpr char kMagic[4] = {'G', 'E', 'O', 'T'};

template <typename U>
void put_le(std::string& out, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
    }
}

template <typename U>
U get_le(const std::string& bytes, std::size_t& offset) {
    if (bytes.size() - offset < sizeof(U) || offset > bytes.size()) {
        throw IoError("tensor: truncated record");
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        value |= static_cast<U>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
    }
    offset += sizeof(U);
    return value;
}

}  // namespace

std::size_t Tensor::element_count() const {
    std::size_t n = 1;
    for (auto d : dims) {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

Tensor Tensor::vector(const Eigen::VectorXd& v) {
    return Tensor{{static_cast<std::uint64_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

Tensor Tensor::matrix(const Eigen::MatrixXd& m) {
    Tensor t;
    t.dims = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    t.data.reserve(static_cast<std::size_t>(m.size()));
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            t.data.push_back(m(r, c));
        }
    }
    return t;
}

Eigen::VectorXd Tensor::as_vector() const {
    if (dims.size() != 1) {
        throw IoError("tensor: expected rank 1, got rank " + std::to_string(dims.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<long>(data.size()));
}

Eigen::MatrixXd Tensor::as_matrix() const {
    if (dims.size() != 2) {
        throw IoError("tensor: expected rank 2, got rank " + std::to_string(dims.size()));
    }
    Eigen::MatrixXd m(static_cast<long>(dims[0]), static_cast<long>(dims[1]));
    std::size_t i = 0;
    for (long r = 0; r < m.rows(); ++r) {
        for (long c = 0; c < m.cols(); ++c) {
            m(r, c) = data[i++];
        }
    }
    return m;
}

std::string encode_tensor(const Tensor& t) {
    if (t.data.size() != t.element_count()) {
        throw IoError("tensor: payload size does not match dims");
    }
    std::string out(kMagic, 4);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) {
        put_le<std::uint64_t>(out, d);
    }
    for (double v : t.data) {
        put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

Tensor decode_tensor(const std::string& bytes, std::size_t& offset) {
    if (bytes.size() < offset + 4 || std::memcmp(bytes.data() + offset, kMagic, 4) != 0) {
        throw IoError("tensor: bad magic (expected GEOT)");
    }
    offset += 4;
    Tensor t;
    const auto rank = get_le<std::uint32_t>(bytes, offset);
    if (rank > 8) {
        throw IoError("tensor: unsupported rank " + std::to_string(rank));
    }
    for (std::uint32_t i = 0; i < rank; ++i) {
        t.dims.push_back(get_le<std::uint64_t>(bytes, offset));
    }
    const std::size_t n = t.element_count();
    if ((bytes.size() - offset) / 8 < n) {
        throw IoError("tensor: truncated payload");
    }
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
    }
    return t;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to " + path.string());
    }
}

void write_tensors(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
    std::string bytes;
    for (const auto& t : tensors) {
        bytes += encode_tensor(t);
    }
    write_file(path, bytes);
}

std::vector<Tensor> read_tensors(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::vector<Tensor> out;
    std::size_t offset = 0;
    try {
        while (offset < bytes.size()) {
            out.push_back(decode_tensor(bytes, offset));
        }
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return out;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) { write_tensors(path, {t}); }

Tensor read_tensor(const std::filesystem::path& path) {
    auto all = read_tensors(path);
    if (all.size() != 1) {
        throw IoError(path.string() + ": expected exactly one tensor, found " + std::to_string(all.size()));
    }
    return std::move(all.front());
}

}  // namespace geo
