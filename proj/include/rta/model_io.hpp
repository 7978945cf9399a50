#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "rta/errors.hpp"
#include "rta/model.hpp"

namespace rta {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

// 17 significant digits round-trips any finite double exactly.
inline void append_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

inline void append_vector(std::string& out, const Vector& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        append_double(out, v[i]);
    }
    out += ']';
}

inline void append_matrix(std::string& out, const DenseMatrix& m) {
    out += "{\"rows\":" + std::to_string(m.rows()) + ",\"cols\":" + std::to_string(m.cols()) +
           ",\"values\":";
    append_vector(out, m.values());
    out += '}';
}

inline DenseMatrix matrix_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("values"))
        throw parse_error(where + ": matrix needs rows, cols, values");
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    Vector values = j.at("values").get<Vector>();
    if (values.size() != rows * cols)
        throw parse_error(where + ": expected " + std::to_string(rows * cols) + " values, got " +
                          std::to_string(values.size()));
    if (!all_finite(values)) throw parse_error(where + ": non-finite value");
    return DenseMatrix(rows, cols, std::move(values));
}

inline Vector vector_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array()) throw parse_error(where + ": expected array");
    Vector v = j.get<Vector>();
    if (!all_finite(v)) throw parse_error(where + ": non-finite value");
    return v;
}

}  // namespace detail

inline std::string model_to_json(const ComposedModel& model) {
    model.validate();
    for (const Layer& layer : model.rep.layers)
        if (!all_finite(layer.weight.values()) || !all_finite(layer.bias))
            throw numeric_error("model_to_json: non-finite layer parameter");
    if (!all_finite(model.head.weight.values()) ||
        (model.head.bias && !all_finite(*model.head.bias)))
        throw numeric_error("model_to_json: non-finite head parameter");

    std::string out;
    out.reserve(1024);
    out += "{\"format_version\":" + std::to_string(kModelFormatVersion) +
           ",\"representation\":{\"layers\":[";
    for (std::size_t k = 0; k < model.rep.layers.size(); ++k) {
        const Layer& layer = model.rep.layers[k];
        if (k) out += ',';
        out += "{\"activation\":\"";
        out += to_string(layer.activation);
        out += "\",\"weight\":";
        detail::append_matrix(out, layer.weight);
        out += ",\"bias\":";
        detail::append_vector(out, layer.bias);
        out += '}';
    }
    out += "]},\"head\":{\"weight\":";
    detail::append_matrix(out, model.head.weight);
    out += ",\"bias\":";
    if (model.head.bias)
        detail::append_vector(out, *model.head.bias);
    else
        out += "null";
    out += "},\"freeze_rep\":";
    out += model.freeze_rep ? "true" : "false";
    out += "}\n";
    return out;
}

inline ComposedModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("model: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw parse_error("model: expected object");
    if (!j.contains("format_version") || !j.at("format_version").is_number_integer())
        throw parse_error("model: missing format_version");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw parse_error("model: unsupported format_version " + std::to_string(version));
    if (!j.contains("representation") || !j.contains("head"))
        throw parse_error("model: missing representation or head");

    ComposedModel model;
    try {
        const auto& layers = j.at("representation").at("layers");
        if (!layers.is_array() || layers.empty())
            throw parse_error("model: layers must be non-empty");
        for (std::size_t k = 0; k < layers.size(); ++k) {
            const auto& lj = layers.at(k);
            const std::string where = "model layer " + std::to_string(k);
            Layer layer;
            layer.activation = activation_from_string(lj.at("activation").get<std::string>());
            layer.weight = detail::matrix_from_json(lj.at("weight"), where);
            layer.bias = detail::vector_from_json(lj.at("bias"), where);
            model.rep.layers.push_back(std::move(layer));
        }
        const auto& hj = j.at("head");
        model.head.weight = detail::matrix_from_json(hj.at("weight"), "model head");
        if (hj.contains("bias") && !hj.at("bias").is_null())
            model.head.bias = detail::vector_from_json(hj.at("bias"), "model head");
        if (j.contains("freeze_rep")) model.freeze_rep = j.at("freeze_rep").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("model: malformed document: ") + e.what());
    }

    try {
        model.validate();
    } catch (const input_error& e) {
        throw parse_error(std::string("model: ") + e.what());
    }
    return model;
}

inline void save_model(const ComposedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << model_to_json(model);
    if (!out) throw io_error("write failed: " + path.string());
}

inline ComposedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace rta
