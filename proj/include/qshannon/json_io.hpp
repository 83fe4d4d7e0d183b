// Copyright 2026 The qshannon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "json.hpp"
#include "qshannon/capacity.hpp"
#include "qshannon/channel_coding.hpp"

namespace qshannon {

using Json = nlohmann::json;

namespace detail {

inline cdouble complex_from_json(const Json &j) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw Error(ErrorKind::ConfigError, "expected a number or an [re, im] pair");
}

inline bool is_scalar_entry(const Json &j) {
    return j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number());
}

}  // namespace detail

inline Json complex_to_json(cdouble z) {
    return Json::array({z.real(), z.imag()});
}

/// Row-major nested rows of [re, im] pairs.
inline Json matrix_to_json(const Matrix &m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_to_json(m(i, j)));
        }
        rows.push_back(row);
    }
    return rows;
}

/// Accepts nested rows, or a flat row-major list of a square matrix; entries are numbers or [re, im].
inline Matrix matrix_from_json(const Json &j) {
    if (!j.is_array() || j.empty()) {
        throw Error(ErrorKind::ConfigError, "matrix must be a nonempty array");
    }
    if (detail::is_scalar_entry(j[0]) && !(j[0].is_array() && j.size() == 2 && detail::is_scalar_entry(j[1]) && j[1].is_array())) {
        // flat list of entries
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(j.size()))));
        if (static_cast<std::size_t>(n * n) != j.size()) {
            throw Error(ErrorKind::BadShape, "flat matrix must have a square number of entries");
        }
        Matrix m(n, n);
        for (Eigen::Index k = 0; k < n * n; ++k) {
            m(k / n, k % n) = detail::complex_from_json(j[static_cast<std::size_t>(k)]);
        }
        return m;
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Json &row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorKind::BadShape, "matrix rows differ in length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = detail::complex_from_json(row[static_cast<std::size_t>(c)]);
        }
    }
    return m;
}

inline Vector vector_from_json(const Json &j) {
    if (!j.is_array() || j.empty()) {
        throw Error(ErrorKind::ConfigError, "vector must be a nonempty array");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
        v(static_cast<Eigen::Index>(k)) = detail::complex_from_json(j[k]);
    }
    return v;
}

/// A state is a density matrix, or {"vector": [...]} for a pure state.
inline DensityOperator state_from_json(const Json &j) {
    if (j.is_object() && j.contains("vector")) {
        Vector v = vector_from_json(j.at("vector"));
        return DensityOperator::pure(v / v.norm());
    }
    return DensityOperator(matrix_from_json(j));
}

inline Json load_json_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::ConfigError, "cannot open '" + path + "'");
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception &e) {
        throw Error(ErrorKind::ConfigError, "invalid JSON in '" + path + "': " + e.what());
    }
}

template <class T>
T json_field(const Json &j, const char *key) {
    if (!j.contains(key)) {
        throw Error(ErrorKind::ConfigError, std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception &e) {
        throw Error(ErrorKind::ConfigError, std::string("bad field '") + key + "': " + e.what());
    }
}

/// {"dims": [...], "probs": [...], "states": [...]}
inline Ensemble ensemble_from_json(const Json &j) {
    std::vector<DensityOperator> states;
    for (const auto &s : j.at("states")) {
        states.push_back(state_from_json(s));
    }
    auto probs = json_field<std::vector<double>>(j, "probs");
    if (j.contains("dims")) {
        auto dims = json_field<std::vector<std::size_t>>(j, "dims");
        for (auto &s : states) {
            s = DensityOperator::trusted(s.matrix(), dims);
        }
    }
    return Ensemble(std::move(states), std::move(probs));
}

inline Json ensemble_to_json(const Ensemble &e) {
    Json j;
    j["dims"] = e.states.at(0).factor_dims().empty() ? std::vector<std::size_t>{e.dim()} : e.states.at(0).factor_dims();
    j["probs"] = e.probs;
    j["states"] = Json::array();
    for (const auto &s : e.states) {
        j["states"].push_back(matrix_to_json(s.matrix()));
    }
    return j;
}

/// {"kraus": [...]}
inline KrausChannel kraus_from_json(const Json &j) {
    std::vector<Matrix> ops;
    for (const auto &k : j.at("kraus")) {
        ops.push_back(matrix_from_json(k));
    }
    return KrausChannel(std::move(ops));
}

inline Json kraus_to_json(const KrausChannel &ch) {
    Json j;
    j["kraus"] = Json::array();
    for (const auto &k : ch.ops()) {
        j["kraus"].push_back(matrix_to_json(k));
    }
    return j;
}

/// Ensemble schema read as a cq channel: one state per input letter; "probs" is an optional
/// default input distribution and "alphabet" optional letter labels.
inline CqChannel cq_channel_from_json(const Json &j) {
    std::vector<DensityOperator> states;
    for (const auto &s : j.at("states")) {
        states.push_back(state_from_json(s));
    }
    std::vector<std::string> labels;
    if (j.contains("alphabet")) {
        labels = json_field<std::vector<std::string>>(j, "alphabet");
    }
    return CqChannel(std::move(states), std::move(labels));
}

inline Distribution default_input(const Json &j, std::size_t size) {
    if (j.contains("probs")) {
        auto p = json_field<Distribution>(j, "probs");
        require_distribution(p, size, "probs");
        return p;
    }
    return Distribution(size, 1.0 / static_cast<double>(size));
}

inline Json cq_channel_to_json(const CqChannel &w, const Distribution &p = {}) {
    Json j;
    j["dims"] = {w.dim()};
    j["alphabet"] = w.alphabet();
    if (!p.empty()) {
        j["probs"] = p;
    }
    j["states"] = Json::array();
    for (const auto &s : w.outputs()) {
        j["states"].push_back(matrix_to_json(s.matrix()));
    }
    return j;
}

/// {"alphabets": [a_1, ...], "states": [...row-major over input tuples...], "inputs": [[...], ...]}
inline MultiwayCqChannel mac_from_json(const Json &j) {
    std::vector<DensityOperator> states;
    for (const auto &s : j.at("states")) {
        states.push_back(state_from_json(s));
    }
    return MultiwayCqChannel(json_field<std::vector<std::size_t>>(j, "alphabets"), std::move(states));
}

inline std::vector<Distribution> mac_inputs_from_json(const Json &j, const MultiwayCqChannel &w) {
    if (j.contains("inputs")) {
        return json_field<std::vector<Distribution>>(j, "inputs");
    }
    std::vector<Distribution> out;
    for (std::size_t a : w.alphabets()) {
        out.emplace_back(a, 1.0 / static_cast<double>(a));
    }
    return out;
}

inline Json polytope_to_json(const RatePolytope &poly) {
    Json j;
    j["parties"] = poly.s;
    j["constraints"] = Json::array();
    for (const auto &c : poly.constraints) {
        Json jc;
        std::vector<std::size_t> one_based;
        for (std::size_t i : c.subset) {
            one_based.push_back(i + 1);
        }
        jc["subset"] = one_based;
        jc["sense"] = c.sense == Sense::AtMost ? "<=" : ">=";
        jc["bound"] = c.bound;
        j["constraints"].push_back(jc);
    }
    return j;
}

inline Json code_to_json(const BlockCode &code) {
    Json j;
    j["n"] = code.n;
    j["messages"] = code.size();
    j["rate"] = code.rate();
    j["lambda"] = code.lambda;
    j["eta"] = code.eta;
    j["delta"] = code.delta;
    j["projector_decoders"] = code.projector_decoders;
    j["codebook"] = code.codebook;
    Json traces = Json::array();
    for (std::size_t m = 0; m < code.size(); ++m) {
        traces.push_back(code.decoder_trace(m));
    }
    j["decoder_traces"] = traces;
    return j;
}

/// Basis matrix per position class plus the list of joint types.
inline Json projector_to_json(const TypicalProjector &pi) {
    Json j;
    j["n"] = pi.n();
    j["d"] = pi.d();
    j["classes"] = Json::array();
    for (const auto &c : pi.classes()) {
        Json jc;
        jc["basis"] = matrix_to_json(c.basis);
        jc["positions"] = c.positions;
        j["classes"].push_back(jc);
    }
    j["types"] = pi.types();
    if (pi.partial()) {
        const double count = pi.partial()->count;
        if (count < 9007199254740992.0) {
            j["partial"] = {{"type", pi.partial()->type}, {"count", static_cast<std::uint64_t>(count)}};
        } else {
            j["partial"] = {{"type", pi.partial()->type}, {"count", count}};
        }
    }
    return j;
}

}  // namespace qshannon
