// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/model_io.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "geo/tensor_io.hpp"

namespace geo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_ext(const fs::path& p, const char* ext) {
    fs::path out = p;
    out.replace_extension(ext);
    return out;
}

json read_json(const fs::path& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(path.string() + ": invalid JSON: " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

template <typename T>
T field(const json& j, const char* key, const fs::path& where) {
    if (!j.contains(key)) {
        throw IoError(where.string() + ": missing field '" + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw IoError(where.string() + ": bad field '" + key + "': " + e.what());
    }
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void save_gmm(const fs::path& path, const GmmModel& model) {
    model.validate();
    const long K = static_cast<long>(model.components.size());
    Eigen::VectorXd weights(K);
    Eigen::MatrixXd means(K, model.dim);
    Eigen::MatrixXd vars(K, model.dim);
    json labels = json::array();
    for (long k = 0; k < K; ++k) {
        const auto& c = model.components[static_cast<std::size_t>(k)];
        weights(k) = c.weight;
        means.row(k) = c.mean.transpose();
        vars.row(k) = c.variance.transpose();
        labels.push_back(c.label);
    }
    write_tensors(with_ext(path, ".geot"), {Tensor::vector(weights), Tensor::matrix(means), Tensor::matrix(vars)});
    json side = {{"kind", "gmm"},
                 {"dim", model.dim},
                 {"components", K},
                 {"labels", labels},
                 {"tensors", {"weights", "means", "variances"}}};
    write_json(with_ext(path, ".json"), side);
}

GmmModel load_gmm(const fs::path& path) {
    const fs::path side_path = with_ext(path, ".json");
    const json side = read_json(side_path);
    if (field<std::string>(side, "kind", side_path) != "gmm") {
        throw IoError(side_path.string() + ": not a gmm sidecar");
    }
    const auto tensors = read_tensors(with_ext(path, ".geot"));
    if (tensors.size() != 3) {
        throw IoError(path.string() + ": gmm container must hold 3 tensors");
    }
    GmmModel m;
    m.dim = field<int>(side, "dim", side_path);
    const auto labels = field<std::vector<int>>(side, "labels", side_path);
    const Eigen::VectorXd weights = tensors[0].as_vector();
    const Eigen::MatrixXd means = tensors[1].as_matrix();
    const Eigen::MatrixXd vars = tensors[2].as_matrix();
    const long K = weights.size();
    if (static_cast<long>(labels.size()) != K || means.rows() != K || vars.rows() != K || means.cols() != m.dim ||
        vars.cols() != m.dim) {
        throw IoError(path.string() + ": gmm tensor shapes disagree with sidecar");
    }
    for (long k = 0; k < K; ++k) {
        m.components.push_back({weights(k), means.row(k).transpose(), vars.row(k).transpose(),
                                labels[static_cast<std::size_t>(k)]});
    }
    m.validate();
    return m;
}

void save_mlp(const fs::path& path, const MlpParams& p) {
    p.validate();
    std::vector<Tensor> tensors{Tensor::matrix(p.embeddings)};
    json names = json::array({"embeddings"});
    json widths = json::array({p.input_width()});
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        tensors.push_back(Tensor::matrix(p.layers[l].weight));
        tensors.push_back(Tensor::vector(p.layers[l].bias));
        names.push_back("layer" + std::to_string(l) + ".weight");
        names.push_back("layer" + std::to_string(l) + ".bias");
        widths.push_back(p.layers[l].weight.rows());
    }
    write_tensors(with_ext(path, ".geot"), tensors);
    json side = {{"kind", "mlp"},
                 {"dim", p.dim},
                 {"num_categories", p.num_categories},
                 {"embed_dim", p.embed_dim},
                 {"T", p.T},
                 {"activation", to_string(p.activation)},
                 {"layer_widths", widths},
                 {"tensors", names}};
    write_json(with_ext(path, ".json"), side);
}

MlpParams load_mlp(const fs::path& path) {
    const fs::path side_path = with_ext(path, ".json");
    const json side = read_json(side_path);
    if (field<std::string>(side, "kind", side_path) != "mlp") {
        throw IoError(side_path.string() + ": not an mlp sidecar");
    }
    const auto tensors = read_tensors(with_ext(path, ".geot"));
    if (tensors.empty() || tensors.size() % 2 != 1) {
        throw IoError(path.string() + ": mlp container must hold embeddings plus weight/bias pairs");
    }
    MlpParams p;
    p.dim = field<int>(side, "dim", side_path);
    p.num_categories = field<int>(side, "num_categories", side_path);
    p.embed_dim = field<int>(side, "embed_dim", side_path);
    p.T = field<int>(side, "T", side_path);
    try {
        p.activation = activation_from_string(field<std::string>(side, "activation", side_path));
    } catch (const ConfigError& e) {
        throw IoError(side_path.string() + ": " + e.what());
    }
    p.embeddings = tensors[0].as_matrix();
    for (std::size_t i = 1; i < tensors.size(); i += 2) {
        p.layers.push_back({tensors[i].as_matrix(), tensors[i + 1].as_vector()});
    }
    try {
        p.validate();
    } catch (const ConfigError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return p;
}

std::unique_ptr<Denoiser> load_denoiser(const fs::path& path, const DiffusionSchedule& s) {
    const fs::path side_path = with_ext(path, ".json");
    const std::string kind = field<std::string>(read_json(side_path), "kind", side_path);
    if (kind == "gmm") {
        return std::make_unique<GmmDenoiser>(load_gmm(path), s);
    }
    if (kind == "mlp") {
        MlpParams p = load_mlp(path);
        require(p.T == s.T(), "mlp denoiser was trained for T=" + std::to_string(p.T) + " but schedule has T=" +
                                  std::to_string(s.T()));
        return std::make_unique<MlpDenoiser>(std::move(p));
    }
    throw IoError(side_path.string() + ": unknown model kind '" + kind + "'");
}

void write_trajectory(const fs::path& dir, const std::string& tag, const Trajectory& traj) {
    fs::create_directories(dir);
    json frames = json::array();
    for (const auto& f : traj.frames) {
        const std::string name = tag + "_" + std::to_string(f.t) + ".geot";
        Eigen::MatrixXd both(2, f.z.size());
        both.row(0) = f.z.transpose();
        both.row(1) = f.z0_pred.transpose();
        write_tensor(dir / name, Tensor::matrix(both));
        frames.push_back({{"t", f.t}, {"file", name}});
    }
    write_json(dir / (tag + "_index.json"), {{"tag", tag}, {"frames", frames}});
}

Trajectory read_trajectory(const fs::path& index_path) {
    const json index = read_json(index_path);
    const fs::path dir = index_path.parent_path();
    Trajectory traj;
    for (const auto& f : field<json>(index, "frames", index_path)) {
        const Eigen::MatrixXd both = read_tensor(dir / field<std::string>(f, "file", index_path)).as_matrix();
        if (both.rows() != 2) {
            throw IoError(index_path.string() + ": frame tensor must have 2 rows");
        }
        traj.frames.push_back({field<int>(f, "t", index_path), both.row(0).transpose(), both.row(1).transpose()});
    }
    return traj;
}

std::string inner_log_csv(const InnerLoopLog& log) {
    std::string out = "timestep,iteration,loss,step_size\n";
    for (const auto& e : log) {
        out += std::to_string(e.t) + "," + std::to_string(e.iteration) + "," + format_real(e.loss) + "," +
               format_real(e.step_size) + "\n";
    }
    return out;
}

}  // namespace geo
