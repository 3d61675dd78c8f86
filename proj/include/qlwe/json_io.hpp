// Copyright 2026 The qlwe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "json.hpp"
#include "qlwe/instance.hpp"
#include "qlwe/params.hpp"
#include "qlwe/trapdoor.hpp"

namespace qlwe {

using Json = nlohmann::json;

// Vectors and matrices share one encoding: {"q", "dims", "entries"}, with
// dims = [length] for vectors and [rows, cols] for matrices.

inline Json to_json(const ZqVector &v) {
    return Json{{"q", v.modulus()},
                {"dims", Json::array({v.size()})},
                {"entries", std::vector<Int>(v.coords().begin(), v.coords().end())}};
}

inline Json to_json(const ZqMatrix &a) {
    return Json{{"q", a.modulus()},
                {"dims", Json::array({a.rows(), a.cols()})},
                {"entries", std::vector<Int>(a.entries().begin(), a.entries().end())}};
}

inline void require_field(const Json &j, const char *field, const char *what) {
    if (!j.is_object() || !j.contains(field)) {
        throw ParameterError(std::string(what) + ": missing field \"" + field + "\"");
    }
}

inline const Json &get_field(const Json &j, const char *field, const char *what) {
    require_field(j, field, what);
    return j.at(field);
}

inline std::vector<Int> canonical_entries(const Json &j, Int q, const char *what) {
    auto entries = j.at("entries").get<std::vector<Int>>();
    for (Int e : entries) {
        if (e < 0 || e >= q) {
            throw ParameterError(std::string(what) + ": entry " + std::to_string(e) + " outside [0, q)");
        }
    }
    return entries;
}

inline ZqVector vector_from_json(const Json &j) {
    for (const char *f : {"q", "dims", "entries"}) {
        require_field(j, f, "vector");
    }
    const Int q = j.at("q").get<Int>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    auto entries = canonical_entries(j, q, "vector");
    if (dims.size() != 1 || dims[0] != entries.size()) {
        throw ShapeMismatch("vector: dims do not match entry count");
    }
    return ZqVector(q, std::move(entries));
}

inline ZqMatrix matrix_from_json(const Json &j) {
    for (const char *f : {"q", "dims", "entries"}) {
        require_field(j, f, "matrix");
    }
    const Int q = j.at("q").get<Int>();
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    if (dims.size() != 2) {
        throw ShapeMismatch("matrix: dims must be [rows, cols]");
    }
    return ZqMatrix(q, dims[0], dims[1], canonical_entries(j, q, "matrix"));
}

inline Json bits_to_json(const Bits &b) {
    Json out = Json::array();
    for (auto v : b) {
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline Bits bits_from_json(const Json &j) {
    Bits out;
    for (const auto &v : j) {
        const int b = v.get<int>();
        if (b != 0 && b != 1) {
            throw ParameterError("bit array entries must be 0 or 1");
        }
        out.push_back(static_cast<std::uint8_t>(b));
    }
    return out;
}

inline Json to_json(const GadgetTrapdoor &t) {
    return Json{{"q", t.q}, {"k", t.k}, {"n", t.n}, {"m_bar", t.m_bar}, {"R", to_json(t.R)}};
}

inline GadgetTrapdoor trapdoor_from_json(const Json &j) {
    for (const char *f : {"q", "k", "n", "m_bar", "R"}) {
        require_field(j, f, "trapdoor");
    }
    GadgetTrapdoor t{j.at("q").get<Int>(), j.at("k").get<int>(), j.at("n").get<int>(), j.at("m_bar").get<int>(),
                     matrix_from_json(j.at("R"))};
    if (t.R.rows() != static_cast<std::size_t>(t.n * t.k) || t.R.cols() != static_cast<std::size_t>(t.m_bar)) {
        throw ShapeMismatch("trapdoor: R must be (n k) x m_bar");
    }
    return t;
}

inline Json to_json(const TrapdoorKeypair &kp) {
    return Json{{"A", to_json(kp.A)}, {"trapdoor", to_json(kp.trapdoor)}};
}

inline TrapdoorKeypair keypair_from_json(const Json &j) {
    require_field(j, "A", "keypair");
    require_field(j, "trapdoor", "keypair");
    TrapdoorKeypair kp{matrix_from_json(j.at("A")), trapdoor_from_json(j.at("trapdoor"))};
    if (!trapdoor_matches(kp.A, kp.trapdoor)) {
        throw ParameterError("keypair: trapdoor does not match A");
    }
    return kp;
}

inline Json to_json(const ProtocolParams &p) {
    return Json{{"lambda", p.lambda},
                {"ell", p.ell},
                {"n", p.n},
                {"m", p.m},
                {"q", p.q},
                {"B_L", p.B_L},
                {"B_V", p.B_V},
                {"epsilon", p.epsilon},
                {"C", p.C},
                {"mode", mode_name(p.mode)},
                {"derived",
                 {{"B_P", p.boundedness_radius()},
                  {"r", p.interval_exponent()},
                  {"lattice_radius", p.lattice_radius()},
                  {"accept_radius", p.accept_radius()},
                  {"condition_i", p.condition_i()},
                  {"generation_threshold", p.generation_threshold()},
                  {"meets_generation_precondition", p.meets_generation_precondition()}}}};
}

inline ProtocolParams params_from_json(const Json &j) {
    ProtocolParams p;
    for (const char *f : {"n", "m", "q", "B_V", "epsilon", "C"}) {
        require_field(j, f, "params");
    }
    p.lambda = j.value("lambda", 0);
    p.ell = j.value("ell", 0);
    p.n = j.at("n").get<int>();
    p.m = j.at("m").get<int>();
    p.q = j.at("q").get<Int>();
    p.B_L = j.value("B_L", 0.0);
    p.B_V = j.at("B_V").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.C = j.at("C").get<double>();
    p.mode = j.value("mode", std::string("desk")) == "desk" ? Mode::Desk : Mode::StrictSymbolic;
    return p;
}

inline Json to_json(const ValidationReport &r) {
    Json out{{"condition_i", status_name(r.condition_i)},
             {"condition_ii", status_name(r.condition_ii)},
             {"distance", status_name(r.distance)},
             {"witness", status_name(r.witness)},
             {"distance_method", r.distance_method},
             {"required_distance", r.required_distance},
             {"valid", r.valid()}};
    out["distance_value"] = r.distance_value ? Json(*r.distance_value) : Json(nullptr);
    return out;
}

}  // namespace qlwe
