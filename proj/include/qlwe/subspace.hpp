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
#include <map>
#include <vector>

#include "qlwe/lwe_state.hpp"

namespace qlwe {

/// Brute-force description of the target subspace
///   span{ |Psi_{y,x}>|y> : ||A x - y|| <= beta },
///   |Psi_{y,x}> = (|0>|x> + |1>|x - s>) / sqrt(2),
/// where beta = q / (C sqrt(n log q)) and s is the preimage of u.
///
/// When the distance of A exceeds 2 beta every y has at most one x. At the
/// boundary (distance exactly 2 beta) a y halfway between two lattice points
/// has two; the corresponding basis vectors are orthogonal, so the span is
/// still well defined and `ambiguous` counts such y.
struct SubspaceOracle {
    Int q = 2;
    std::size_t n = 0;
    std::size_t m = 0;
    double radius = 0;
    ZqVector s;
    /// y (residues) -> every x within the radius.
    std::map<std::vector<Int>, std::vector<ZqVector>> lambda;
    std::size_t ambiguous = 0;

    const std::vector<ZqVector> *preimages(std::span<const Int> y) const {
        auto it = lambda.find(std::vector<Int>(y.begin(), y.end()));
        return it == lambda.end() ? nullptr : &it->second;
    }
};

/// Limit on q^m (the number of candidate y) for subspace enumeration.
inline constexpr Int kSubspaceLimit = Int{1} << 24;

inline SubspaceOracle build_subspace_oracle(const LweInstance &k, const ProtocolParams &params) {
    const Int q = k.q();
    const auto n = static_cast<std::size_t>(k.n());
    const auto m = static_cast<std::size_t>(k.m());
    const Int ys = checked_power(q, m);
    if (ys < 0 || ys > kSubspaceLimit) {
        throw GuardViolation("subspace_enumeration", "Lambda_k enumeration needs q^m <= 2^24");
    }
    require_enumerable(q, n, "build_subspace_oracle");

    SubspaceOracle o;
    o.q = q;
    o.n = n;
    o.m = m;
    o.radius = params.lattice_radius();
    const double limit = o.radius * o.radius * (1 + 1e-12);
    if (k.s_witness) {
        o.s = *k.s_witness;
    } else {
        auto s = invert_bruteforce(k.A, k.u, o.radius);
        if (!s) {
            throw ParameterError("build_subspace_oracle: u has no preimage within the radius and no witness");
        }
        o.s = *s;
    }

    // Offsets w with ||w|| <= radius, as centered integers per coordinate.
    const Int reach = std::min<Int>(static_cast<Int>(std::floor(o.radius)), q / 2);
    std::vector<std::vector<Int>> offsets;
    const Int wmin = std::max(-reach, -((q + 1) / 2) + 1);
    std::vector<Int> w(m, wmin);
    while (true) {
        double ss = 0;
        for (Int v : w) {
            ss += static_cast<double>(v * v);
        }
        if (ss <= limit) {
            offsets.push_back(w);
        }
        std::size_t i = m;
        while (i > 0 && w[i - 1] == reach) {
            w[i - 1] = wmin;
            --i;
        }
        if (i == 0) {
            break;
        }
        ++w[i - 1];
    }
    if (static_cast<double>(checked_power(q, n)) * static_cast<double>(offsets.size()) > 6.7e7) {
        throw GuardViolation("subspace_enumeration", "q^n times the ball size exceeds 2^26");
    }
    for_each_vector(q, n, [&](const ZqVector &x) {
        const ZqVector ax = k.A * x;
        for (const auto &off : offsets) {
            std::vector<Int> y(m);
            for (std::size_t i = 0; i < m; ++i) {
                y[i] = mod_reduce(ax[i] + off[i], q);
            }
            o.lambda[y].push_back(x);
        }
    });
    for (const auto &kv : o.lambda) {
        if (kv.second.size() > 1) {
            ++o.ambiguous;
        }
    }
    return o;
}

/// Squared norm of the projection of `state` onto the target subspace.
inline double projected_weight(const SparseState &state, const SubspaceOracle &o) {
    const auto &L = state.layout();
    if (!L.has_bit || L.n_regs != o.n || L.m_regs != o.m || L.q != o.q) {
        throw ShapeMismatch("projection: state layout does not match the instance");
    }
    std::map<std::vector<Int>, bool> seen;
    double weight = 0;
    std::vector<Int> key(L.width());
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto b = state.basis(i);
        std::vector<Int> y(b.begin() + static_cast<std::ptrdiff_t>(L.z_offset()), b.end());
        if (seen.count(y)) {
            continue;
        }
        seen[y] = true;
        const auto *xs = o.preimages(y);
        if (!xs) {
            continue;
        }
        for (const auto &x : *xs) {
            const ZqVector xs_shift = x - o.s;
            key[0] = 0;
            std::copy(x.coords().begin(), x.coords().end(), key.begin() + 1);
            std::copy(y.begin(), y.end(), key.begin() + static_cast<std::ptrdiff_t>(L.z_offset()));
            const double a0 = state.amplitude_of(key);
            key[0] = 1;
            std::copy(xs_shift.coords().begin(), xs_shift.coords().end(), key.begin() + 1);
            const double a1 = state.amplitude_of(key);
            const double c = (a0 + a1) / std::sqrt(2.0);
            weight += c * c;
        }
    }
    return weight;
}

/// || |Phi> - Pi |Phi> ||^2 with Pi the projector onto the target subspace.
inline double distance_to_Hk(const SparseState &state, const SubspaceOracle &o) {
    return std::max(0.0, state.norm_sq() - projected_weight(state, o));
}

inline double distance_to_Hk(const SparseState &state, const LweInstance &k, const ProtocolParams &params) {
    return distance_to_Hk(state, build_subspace_oracle(k, params));
}

}  // namespace qlwe
