#pragma once

#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmrp/nn.hpp"

namespace cmrp::nn {

inline constexpr const char* kModelFormat = "cmrp-model-v1";
inline constexpr const char* kFeatureLayout = "xy-t-roles-v1";

// Self-describing weight container: config, normalization constants, feature
// layout version, and named tensors with explicit shapes. Values are written
// with enough digits to round-trip bit-exactly.
template <class T>
void save_model(const ModelParams<T>& params, const std::string& path) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["feature_layout"] = kFeatureLayout;
    j["encoder_norm"] = "layer";
    j["config"] = {{"hidden_dim", params.config.hidden_dim},
                   {"heads", params.config.heads},
                   {"encoder_layers", params.config.encoder_layers},
                   {"feedforward_dim", params.config.feedforward_dim},
                   {"logit_clip", params.config.logit_clip},
                   {"forced_start", params.config.forced_start}};
    j["normalization"] = {{"coord_scale", params.norm.coord_scale},
                          {"time_cost_scale", params.norm.time_cost_scale}};
    nlohmann::json tensors = nlohmann::json::object();
    for_each_tensor(params, [&](const std::string& name, const auto& tensor) {
        nlohmann::json entry;
        entry["shape"] = {tensor.rows(), tensor.cols()};
        std::vector<double> data(tensor.size());
        for (Eigen::Index i = 0; i < tensor.size(); ++i) {
            data[i] = static_cast<double>(tensor.data()[i]);
        }
        entry["data"] = std::move(data);
        tensors[name] = std::move(entry);
    });
    j["tensors"] = std::move(tensors);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump();
    if (!out) throw std::runtime_error("write failed: " + path);
}

template <class T>
ModelParams<T> load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;

    if (j.value("format", "") != kModelFormat) {
        throw std::runtime_error("unsupported model format in " + path);
    }
    if (j.value("feature_layout", "") != kFeatureLayout) {
        throw std::runtime_error("unsupported feature layout in " + path);
    }
    ModelConfig config;
    const auto& jc = j.at("config");
    config.hidden_dim = jc.at("hidden_dim").get<int>();
    config.heads = jc.at("heads").get<int>();
    config.encoder_layers = jc.at("encoder_layers").get<int>();
    config.feedforward_dim = jc.at("feedforward_dim").get<int>();
    config.logit_clip = jc.at("logit_clip").get<double>();
    config.forced_start = jc.at("forced_start").get<bool>();
    Normalization norm;
    norm.coord_scale = j.at("normalization").at("coord_scale").get<double>();
    norm.time_cost_scale = j.at("normalization").at("time_cost_scale").get<double>();

    ModelParams<T> params = init_params<T>(config, norm, 0);
    const auto& tensors = j.at("tensors");
    std::size_t consumed = 0;
    for_each_tensor(params, [&](const std::string& name, auto& tensor) {
        if (!tensors.contains(name)) {
            throw std::runtime_error("model file missing tensor '" + name + "'");
        }
        const auto& entry = tensors.at(name);
        const auto shape = entry.at("shape").get<std::vector<long>>();
        if (shape.size() != 2 || shape[0] != tensor.rows() || shape[1] != tensor.cols()) {
            throw std::runtime_error(
                "tensor '" + name + "' has shape [" +
                (shape.size() == 2 ? std::to_string(shape[0]) + "," + std::to_string(shape[1])
                                   : std::string("?")) +
                "], expected [" + std::to_string(tensor.rows()) + "," +
                std::to_string(tensor.cols()) + "]");
        }
        const auto& data = entry.at("data");
        if (static_cast<Eigen::Index>(data.size()) != tensor.size()) {
            throw std::runtime_error("tensor '" + name + "' has wrong element count");
        }
        for (Eigen::Index i = 0; i < tensor.size(); ++i) {
            tensor.data()[i] = static_cast<T>(data[i].template get<double>());
        }
        ++consumed;
    });
    if (consumed != tensors.size()) {
        for (const auto& [name, value] : tensors.items()) {
            (void)value;
            bool known = false;
            for_each_tensor(params, [&](const std::string& expected, const auto&) {
                known = known || expected == name;
            });
            if (!known) throw std::runtime_error("model file has unknown tensor '" + name + "'");
        }
    }
    return params;
}

}  // namespace cmrp::nn
