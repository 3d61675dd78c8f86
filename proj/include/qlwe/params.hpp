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

#include <cmath>
#include <string>
#include <vector>

#include "qlwe/zq.hpp"

namespace qlwe {

enum class Mode { Desk, StrictSymbolic };

inline const char *mode_name(Mode m) {
    return m == Mode::Desk ? "desk" : "strict-symbolic";
}

/// Protocol parameters and the radii derived from them.
///
/// Every radius below uses log2 q. The derived quantities are:
///   boundedness radius  B_P = q / (C sqrt(m n log q))
///   interval exponent   r   = floor(log2 B_P)
///   lattice radius      beta = q / (C sqrt(n log q))   (inversion ball, Lambda_k)
///   acceptance radius   2 beta                          (Step-5 checks, distance of A)
struct ProtocolParams {
    int lambda = 0;
    int ell = 0;
    int n = 1;
    int m = 1;
    Int q = 2;
    double B_L = 0;
    double B_V = 1;
    double epsilon = 0.5;
    double C = 1;
    Mode mode = Mode::Desk;

    double log_q() const { return std::log2(static_cast<double>(q)); }

    double boundedness_radius() const {
        return static_cast<double>(q) / (C * std::sqrt(static_cast<double>(m) * n * log_q()));
    }

    /// Largest r with 2^r <= B_P. A relative slack of 1e-12 keeps exact powers
    /// of two (e.g. B_P = 2 computed as 1.9999999999999998) on the right side.
    int interval_exponent() const {
        const double bp = boundedness_radius() * (1 + 1e-12);
        if (!(bp >= 1)) {
            return bp > 0 ? static_cast<int>(std::floor(std::log2(bp))) : -1;
        }
        int r = 0;
        while (r < 62 && std::ldexp(1.0, r + 1) <= bp) {
            ++r;
        }
        return r;
    }

    double lattice_radius() const {
        return static_cast<double>(q) / (C * std::sqrt(static_cast<double>(n) * log_q()));
    }

    double accept_radius() const { return 2 * lattice_radius(); }
    double required_distance() const { return 2 * lattice_radius(); }

    /// B_V C sqrt(m n log q): condition (i) asks q to be at least this.
    double condition_i_threshold() const {
        return B_V * C * std::sqrt(static_cast<double>(m) * n * log_q());
    }
    bool condition_i() const { return static_cast<double>(q) >= condition_i_threshold(); }

    /// 8 m B_V C sqrt(m n log q) / epsilon: the state-generation precondition.
    double generation_threshold() const {
        return 8.0 * m * B_V * C * std::sqrt(static_cast<double>(m) * n * log_q()) / epsilon;
    }
    bool meets_generation_precondition() const {
        return static_cast<double>(q) >= generation_threshold();
    }

    /// Number of bits in J(x) for x in Z_q^n.
    std::size_t encoding_bits() const {
        return static_cast<std::size_t>(n) * static_cast<std::size_t>(bit_length(q));
    }

    /// Human-readable list of violated invariants; empty when the parameters are usable.
    std::vector<std::string> violations() const {
        std::vector<std::string> out;
        if (q < 2) {
            out.emplace_back("q must be at least 2");
            return out;
        }
        if (n < 1 || m < 1) {
            out.emplace_back("n and m must be positive");
            return out;
        }
        if (!(C > 0)) {
            out.emplace_back("C must be positive");
            return out;
        }
        if (!(B_V > 0)) {
            out.emplace_back("B_V must be positive");
        }
        if (!(epsilon > 0)) {
            out.emplace_back("epsilon must be positive");
        }
        if (!condition_i()) {
            out.emplace_back("condition (i): q < B_V C sqrt(m n log q)");
        }
        if (interval_exponent() < 1) {
            out.emplace_back("r = floor(log2 B_P) is below 1");
        }
        if (mode == Mode::StrictSymbolic) {
            if (!(2 * std::sqrt(static_cast<double>(n)) <= B_L)) {
                out.emplace_back("strict: B_L below 2 sqrt(n)");
            }
            if (!(B_L < B_V)) {
                out.emplace_back("strict: B_L must be below B_V");
            }
            if (!(B_V <= static_cast<double>(q))) {
                out.emplace_back("strict: B_V exceeds q");
            }
        }
        return out;
    }

    void check() const {
        const auto v = violations();
        if (!v.empty()) {
            std::string msg = "invalid protocol parameters:";
            for (const auto &s : v) {
                msg += " " + s + ";";
            }
            throw ParameterError(msg);
        }
    }
};

}  // namespace qlwe
