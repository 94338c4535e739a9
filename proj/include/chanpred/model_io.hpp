// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Model files
// -----------
// JSON document, one per model:
//
//   {
//     "format": "chanpred-model", "version": 1,
//     "type": "filter_bank" | "structured" | "nn_weights",
//     "header": { "obs_len", "step", "noise_var", "grid_samples", "q_kind",
//                 "velocity_mps" (optional) },
//     "arrays": { name: { "rows", "cols", "complex", "data" } }
//   }
//
// "data" is row-major; complex arrays store interleaved (re, im) pairs. Doubles are written
// with round-trip precision, so load(save(x)) reproduces x bit for bit.
//
// Observation batches (test fixtures)
// -----------------------------------
// Little-endian binary: u64 B, u64 M, f64 noise_var, then per realization M (re, im) f64 pairs
// of y (newest first) followed by one (re, im) pair for the target.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "chanpred/channel.hpp"
#include "chanpred/errors.hpp"
#include "chanpred/gridded.hpp"
#include "chanpred/nn.hpp"
#include "chanpred/structured.hpp"

namespace chanpred {

inline constexpr int kModelFormatVersion = 1;

struct ModelHeader {
    std::size_t obs_len = 0;
    std::size_t step = 0;
    double noise_var = 0.0;
    std::size_t grid_samples = 0;
    std::optional<QKind> q_kind;
    std::optional<double> velocity_mps;
};

namespace detail {

using json = nlohmann::json;

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    constexpr bool is_complex = !std::is_same_v<Scalar, double>;
    json data = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if constexpr (is_complex) {
                data.push_back(a(r, c).real());
                data.push_back(a(r, c).imag());
            } else {
                data.push_back(a(r, c));
            }
        }
    }
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"complex", is_complex}, {"data", data}};
}

inline const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(std::string("model file: missing field '") + key + "'");
    return j.at(key);
}

template <typename Matrix>
Matrix matrix_from_json(const json& j) {
    using Scalar = typename Matrix::Scalar;
    constexpr bool is_complex = !std::is_same_v<Scalar, double>;
    const auto rows = require(j, "rows").get<Eigen::Index>();
    const auto cols = require(j, "cols").get<Eigen::Index>();
    if (require(j, "complex").get<bool>() != is_complex)
        throw Error("model file: array has the wrong element type");
    const auto& data = require(j, "data");
    const auto per = is_complex ? 2 : 1;
    if (static_cast<Eigen::Index>(data.size()) != rows * cols * per)
        throw Error("model file: array size does not match its shape");
    Matrix a(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if constexpr (is_complex) {
                a(r, c) = Scalar(data[i].get<double>(), data[i + 1].get<double>());
                i += 2;
            } else {
                a(r, c) = data[i++].get<double>();
            }
        }
    }
    return a;
}

inline json header_to_json(const ModelHeader& h) {
    json j = {{"obs_len", h.obs_len},
              {"step", h.step},
              {"noise_var", h.noise_var},
              {"grid_samples", h.grid_samples}};
    if (h.q_kind) j["q_kind"] = std::string(to_string(*h.q_kind));
    if (h.velocity_mps) j["velocity_mps"] = *h.velocity_mps;
    return j;
}

inline ModelHeader header_from_json(const json& j) {
    ModelHeader h;
    h.obs_len = require(j, "obs_len").get<std::size_t>();
    h.step = require(j, "step").get<std::size_t>();
    h.noise_var = require(j, "noise_var").get<double>();
    h.grid_samples = require(j, "grid_samples").get<std::size_t>();
    if (j.contains("q_kind")) {
        const auto k = parse_q_kind(j.at("q_kind").get<std::string>());
        if (!k) throw Error("model file: unknown q_kind");
        h.q_kind = *k;
    }
    if (j.contains("velocity_mps")) h.velocity_mps = j.at("velocity_mps").get<double>();
    return h;
}

inline json envelope(const char* type, const ModelHeader& h) {
    return {{"format", "chanpred-model"},
            {"version", kModelFormatVersion},
            {"type", type},
            {"header", header_to_json(h)},
            {"arrays", json::object()}};
}

inline const json& open_envelope(const json& doc, const char* type) {
    if (!doc.is_object() || doc.value("format", "") != "chanpred-model")
        throw Error("model file: not a chanpred model");
    if (doc.value("version", 0) != kModelFormatVersion)
        throw Error("model file: unsupported format version");
    if (doc.value("type", "") != type)
        throw Error(std::string("model file: expected type '") + type + "'");
    return require(doc, "arrays");
}

inline json parse_document(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(std::string("model file: ") + e.what());
    }
}

}  // namespace detail

// ---- filter bank -------------------------------------------------------------------------

inline void save_bank(std::ostream& out, const FilterBank& bank) {
    auto doc = detail::envelope(
        "filter_bank", {bank.obs_len, bank.step, bank.noise_var, bank.size(), std::nullopt, {}});
    auto& arrays = doc["arrays"];
    RVector biases = Eigen::Map<const RVector>(bank.biases.data(),
                                               static_cast<Eigen::Index>(bank.biases.size()));
    arrays["biases"] = detail::matrix_to_json(biases);
    for (std::size_t i = 0; i < bank.size(); ++i)
        arrays["W" + std::to_string(i)] = detail::matrix_to_json(bank.filters[i]);
    out << doc.dump() << '\n';
}

/// Restores the filters and biases; sample covariance specs are not stored.
inline FilterBank load_bank(std::istream& in) {
    const auto doc = detail::parse_document(in);
    const auto& arrays = detail::open_envelope(doc, "filter_bank");
    const ModelHeader h = detail::header_from_json(detail::require(doc, "header"));
    FilterBank bank = empty_bank(h.obs_len, h.step, h.noise_var);
    const RVector biases = detail::matrix_from_json<RVector>(detail::require(arrays, "biases"));
    if (static_cast<std::size_t>(biases.size()) != h.grid_samples)
        throw Error("model file: bias count does not match grid_samples");
    for (std::size_t i = 0; i < h.grid_samples; ++i) {
        const std::string key = "W" + std::to_string(i);
        CMatrix w = detail::matrix_from_json<CMatrix>(detail::require(arrays, key.c_str()));
        const auto m = static_cast<Eigen::Index>(h.obs_len);
        if (w.rows() != m + static_cast<Eigen::Index>(h.step) || w.cols() != m)
            throw Error("model file: filter " + key + " has the wrong shape");
        bank.out_rows.push_back(w.row(0).transpose());
        bank.obs_blocks.push_back(hermitian_part(w.bottomRows(m)));
        bank.biases.push_back(biases[static_cast<Eigen::Index>(i)]);
        bank.filters.push_back(std::move(w));
        bank.doas.emplace_back();
    }
    return bank;
}

// ---- structured model --------------------------------------------------------------------

inline void save_structured(std::ostream& out, const StructuredModel& model) {
    auto doc = detail::envelope("structured", {model.obs_len, model.step, model.noise_var,
                                               model.num_samples(), model.q_kind, {}});
    auto& arrays = doc["arrays"];
    arrays["A1"] = detail::matrix_to_json(model.a1);
    arrays["A2"] = detail::matrix_to_json(model.a2);
    arrays["b"] = detail::matrix_to_json(model.b);
    out << doc.dump() << '\n';
}

inline StructuredModel load_structured(std::istream& in) {
    const auto doc = detail::parse_document(in);
    const auto& arrays = detail::open_envelope(doc, "structured");
    const ModelHeader h = detail::header_from_json(detail::require(doc, "header"));
    if (!h.q_kind) throw Error("model file: structured model without q_kind");
    StructuredModel m;
    m.q_kind = *h.q_kind;
    m.q = q_matrix(m.q_kind, h.obs_len);
    m.obs_len = h.obs_len;
    m.step = h.step;
    m.noise_var = h.noise_var;
    m.a1 = detail::matrix_from_json<RMatrix>(detail::require(arrays, "A1"));
    m.a2 = detail::matrix_from_json<CMatrix>(detail::require(arrays, "A2"));
    m.b = detail::matrix_from_json<RVector>(detail::require(arrays, "b"));
    const auto n = static_cast<Eigen::Index>(h.grid_samples);
    if (m.a1.rows() != n || m.a1.cols() != m.q.rows() || m.a2.rows() != m.q.cols() ||
        m.a2.cols() != n || m.b.size() != n)
        throw Error("model file: structured model arrays have inconsistent shapes");
    return m;
}

/// Structured model from a serialized filter bank.
inline StructuredModel structured_from_bank(std::istream& bank_file, QKind kind) {
    return assemble_structured(load_bank(bank_file), kind, FitMethod::least_squares);
}

// ---- network weights ---------------------------------------------------------------------

struct NNModel {
    ModelHeader header;
    NNWeights weights;
};

inline void save_nn(std::ostream& out, const NNModel& model) {
    ModelHeader h = model.header;
    h.grid_samples = model.weights.hidden();
    h.obs_len = model.weights.obs_len();
    auto doc = detail::envelope("nn_weights", h);
    auto& arrays = doc["arrays"];
    arrays["A1"] = detail::matrix_to_json(model.weights.a1);
    arrays["b1"] = detail::matrix_to_json(model.weights.b1);
    arrays["A2"] = detail::matrix_to_json(model.weights.a2);
    arrays["b2"] = detail::matrix_to_json(model.weights.b2);
    out << doc.dump() << '\n';
}

inline NNModel load_nn(std::istream& in) {
    const auto doc = detail::parse_document(in);
    const auto& arrays = detail::open_envelope(doc, "nn_weights");
    NNModel model;
    model.header = detail::header_from_json(detail::require(doc, "header"));
    auto& w = model.weights;
    w.a1 = detail::matrix_from_json<RMatrix>(detail::require(arrays, "A1"));
    w.b1 = detail::matrix_from_json<RVector>(detail::require(arrays, "b1"));
    w.a2 = detail::matrix_from_json<RMatrix>(detail::require(arrays, "A2"));
    w.b2 = detail::matrix_from_json<RVector>(detail::require(arrays, "b2"));
    const auto n = static_cast<Eigen::Index>(model.header.grid_samples);
    const auto m2 = static_cast<Eigen::Index>(2 * model.header.obs_len);
    if (w.a1.rows() != n || w.b1.size() != n || w.a2.rows() != m2 || w.a2.cols() != n ||
        w.b2.size() != m2)
        throw Error("model file: network arrays have inconsistent shapes");
    if (model.header.q_kind &&
        static_cast<std::size_t>(w.a1.cols()) != feature_dim(*model.header.q_kind, model.header.obs_len))
        throw Error("model file: input width does not match q_kind");
    return model;
}

// ---- file helpers ------------------------------------------------------------------------

template <typename Fn>
void write_file(const std::string& path, Fn&& fn) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    fn(out);
    if (!out) throw Error("write to '" + path + "' failed");
}

template <typename Fn>
auto read_file(const std::string& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return fn(in);
}

// ---- observation batches -----------------------------------------------------------------

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "batch serialization assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw Error("batch file: truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace detail

inline void write_batch(std::ostream& out, const ObservationBatch& batch) {
    const std::uint64_t m = batch.size() ? static_cast<std::uint64_t>(batch.observations[0].size()) : 0;
    detail::put<std::uint64_t>(out, batch.size());
    detail::put<std::uint64_t>(out, m);
    detail::put<double>(out, batch.noise_var);
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (static_cast<std::uint64_t>(batch.observations[b].size()) != m)
            throw DimensionError("write_batch: ragged observations");
        for (const cplx& v : batch.observations[b]) {
            detail::put(out, v.real());
            detail::put(out, v.imag());
        }
        detail::put(out, batch.targets[b].real());
        detail::put(out, batch.targets[b].imag());
    }
}

/// Scenarios are not part of the format; the returned batch has none.
inline ObservationBatch read_batch(std::istream& in) {
    ObservationBatch batch;
    const auto count = detail::get<std::uint64_t>(in);
    const auto m = static_cast<Eigen::Index>(detail::get<std::uint64_t>(in));
    batch.noise_var = detail::get<double>(in);
    for (std::uint64_t b = 0; b < count; ++b) {
        CVector y(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const double re = detail::get<double>(in);
            y[k] = cplx(re, detail::get<double>(in));
        }
        const double re = detail::get<double>(in);
        batch.targets.emplace_back(re, detail::get<double>(in));
        batch.observations.push_back(std::move(y));
    }
    return batch;
}

}  // namespace chanpred
