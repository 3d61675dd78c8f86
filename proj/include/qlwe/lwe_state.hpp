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
#include <vector>

#include "qlwe/instance.hpp"
#include "qlwe/robust_state.hpp"

namespace qlwe {

inline RegisterLayout lwe_layout(const LweInstance &k) {
    return RegisterLayout{k.q(), true, static_cast<std::size_t>(k.n()), static_cast<std::size_t>(k.m())};
}

/// f(b, x) = A x + b u.
inline ZqVector lwe_image(const LweInstance &k, int b, const ZqVector &x) {
    ZqVector y = k.A * x;
    return b ? y + k.u : y;
}

/// |b, x, z> -> |b, x, z + A x + b u>.
inline SparseState apply_lwe_map(const SparseState &state, const LweInstance &k) {
    if (!(state.layout() == lwe_layout(k))) {
        throw ShapeMismatch("apply_lwe_map: state must be shaped (1 bit, n q-ary, m q-ary) for this instance");
    }
    const auto n = static_cast<std::size_t>(k.n());
    const auto m = static_cast<std::size_t>(k.m());
    std::vector<SparseState::Term> terms;
    terms.reserve(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto t = state.basis(i);
        std::vector<Int> key(t.begin(), t.end());
        const ZqVector x(k.q(), std::vector<Int>(t.begin() + 1, t.begin() + 1 + static_cast<std::ptrdiff_t>(n)));
        const ZqVector f = lwe_image(k, static_cast<int>(t[0]), x);
        for (std::size_t j = 0; j < m; ++j) {
            key[1 + n + j] = mod_reduce(key[1 + n + j] + f[j], k.q());
        }
        terms.emplace_back(std::move(key), state.amp(i));
    }
    return SparseState(state.layout(), std::move(terms));
}

struct PrepareOptions {
    /// Build the state even when preconditions fail (exploratory runs).
    bool override_preconditions = false;
    /// Used to certify the instance's distance when q^n is too large to enumerate.
    const GadgetTrapdoor *trapdoor = nullptr;
};

struct PreparedState {
    SparseState state;
    /// n / q^2: the modeled error of the n uniform-superposition registers.
    double error_budget = 0;
    std::vector<std::string> precondition_failures;
};

inline std::vector<std::string> preparation_failures(const LweInstance &k, const ProtocolParams &params,
                                                     const GadgetTrapdoor *trapdoor) {
    std::vector<std::string> out = params.violations();
    if (k.n() != params.n || k.m() != params.m || k.q() != params.q) {
        out.emplace_back("instance shape differs from (n, m, q) of the parameters");
        return out;
    }
    const auto rep = validate_instance(k, params, trapdoor);
    if (!rep.valid()) {
        out.emplace_back(std::string("instance not validated (condition_i=") + status_name(rep.condition_i) +
                         ", condition_ii=" + status_name(rep.condition_ii) + ", distance=" + status_name(rep.distance) +
                         ")");
    }
    if (!params.meets_generation_precondition()) {
        out.emplace_back("q below 8 m B_V C sqrt(m n log q) / epsilon");
    }
    return out;
}

/// sum_{b,x,z} a_z / sqrt(2 q^n) |b, x, z + f(b, x)> with a the robust state of
/// exponent r = floor(log2 B_P).
inline PreparedState prepare_Phi(const LweInstance &k, const ProtocolParams &params, PrepareOptions opts = {}) {
    PreparedState out;
    out.precondition_failures = preparation_failures(k, params, opts.trapdoor);
    if (!out.precondition_failures.empty() && !opts.override_preconditions) {
        std::string msg = "prepare_Phi preconditions failed:";
        for (const auto &f : out.precondition_failures) {
            msg += " " + f + ";";
        }
        throw ParameterError(msg);
    }
    const int r = params.interval_exponent();
    const RobustStateSpec spec(k.m(), k.q(), r);
    const Int xs = checked_power(k.q(), static_cast<std::size_t>(k.n()));
    const double terms_needed = 2.0 * static_cast<double>(xs) * std::ldexp(1.0, k.m() * r);
    if (xs < 0 || terms_needed > static_cast<double>(kMaxSparseTerms)) {
        throw GuardViolation("sparse_terms", "|Phi> would need more than 2^24 basis terms");
    }

    const SparseState phi = create_robust_state(k.m(), k.q(), r);
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(xs));
    std::vector<SparseState::Term> terms;
    terms.reserve(static_cast<std::size_t>(terms_needed));
    for (int b = 0; b < 2; ++b) {
        for_each_vector(k.q(), static_cast<std::size_t>(k.n()), [&](const ZqVector &x) {
            for (std::size_t i = 0; i < phi.size(); ++i) {
                std::vector<Int> key{b};
                key.insert(key.end(), x.coords().begin(), x.coords().end());
                auto z = phi.basis(i);
                key.insert(key.end(), z.begin(), z.end());
                terms.emplace_back(std::move(key), phi.amp(i) * scale);
            }
        });
    }
    const SparseState before(lwe_layout(k), std::move(terms));
    out.state = apply_lwe_map(before, k);
    out.error_budget = static_cast<double>(k.n()) / (static_cast<double>(k.q()) * static_cast<double>(k.q()));
    return out;
}

/// |Phi'>: as |Phi> but the b = 1 branch uses A (x + s) in place of A x + u,
/// i.e. the LWE error is removed. Needs the secret s.
inline SparseState prepare_shift_corrected(const LweInstance &k, const ZqVector &s, int r) {
    const RobustStateSpec spec(k.m(), k.q(), r);
    const Int xs = checked_power(k.q(), static_cast<std::size_t>(k.n()));
    if (xs < 0 || 2.0 * static_cast<double>(xs) * std::ldexp(1.0, k.m() * r) > static_cast<double>(kMaxSparseTerms)) {
        throw GuardViolation("sparse_terms", "|Phi'> would need more than 2^24 basis terms");
    }
    const SparseState phi = create_robust_state(k.m(), k.q(), r);
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(xs));
    std::vector<SparseState::Term> terms;
    for (int b = 0; b < 2; ++b) {
        for_each_vector(k.q(), static_cast<std::size_t>(k.n()), [&](const ZqVector &x) {
            const ZqVector shift = k.A * (b ? x + s : x);
            for (std::size_t i = 0; i < phi.size(); ++i) {
                std::vector<Int> key{b};
                key.insert(key.end(), x.coords().begin(), x.coords().end());
                auto z = phi.basis(i);
                for (std::size_t j = 0; j < z.size(); ++j) {
                    key.push_back(z[j] + shift[j]);
                }
                terms.emplace_back(std::move(key), phi.amp(i) * scale);
            }
        });
    }
    return SparseState(lwe_layout(k), std::move(terms));
}

}  // namespace qlwe
