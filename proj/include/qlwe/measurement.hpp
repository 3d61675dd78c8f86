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

#include <map>
#include <string>
#include <vector>

#include "qlwe/gf2.hpp"
#include "qlwe/sparse_state.hpp"

namespace qlwe {

struct MeasurementRecord {
    std::string register_name;
    std::vector<Int> outcome;
    /// Born probability of the recorded outcome before the measurement. At
    /// protocol scale this can underflow; log2_probability stays exact.
    double probability = 0;
    double log2_probability = 0;
    /// The uniform01 draw that selected the outcome (-1 for samplers that
    /// draw the outcome coordinate by coordinate).
    double draw = 0;
};

namespace detail {

/// Index of the first cumulative weight exceeding u * total; deterministic
/// given the weight order.
inline std::size_t pick(const std::vector<double> &weights, double u) {
    double total = 0;
    for (double w : weights) {
        total += w;
    }
    const double target = u * total;
    double acc = 0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0) {
            last_positive = i;
        }
        acc += weights[i];
        if (acc > target && weights[i] > 0) {
            return i;
        }
    }
    return last_positive;
}

}  // namespace detail

struct LastRegisterOutcome {
    ZqVector y;
    SparseState collapsed;
    MeasurementRecord record;
};

/// Born marginal of the m-register block, keyed by the residues of y.
inline std::map<std::vector<Int>, double> last_register_marginal(const SparseState &state) {
    const auto &L = state.layout();
    std::map<std::vector<Int>, double> out;
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto b = state.basis(i);
        std::vector<Int> y(b.begin() + static_cast<std::ptrdiff_t>(L.z_offset()), b.end());
        out[y] += state.amp(i) * state.amp(i);
    }
    return out;
}

/// Measures the m q-ary registers; the collapsed state keeps the bit and the
/// n registers, renormalized on the slice z = y.
inline LastRegisterOutcome measure_last_register(const SparseState &state, Rng &rng) {
    const auto &L = state.layout();
    if (L.m_regs == 0) {
        throw ShapeMismatch("measure_last_register: state has no m-register block");
    }
    const auto marginal = last_register_marginal(state);
    std::vector<std::vector<Int>> keys;
    std::vector<double> weights;
    for (const auto &[y, p] : marginal) {
        keys.push_back(y);
        weights.push_back(p);
    }
    const double u = uniform01(rng);
    const std::size_t chosen = detail::pick(weights, u);
    const auto &y = keys[chosen];

    std::vector<SparseState::Term> terms;
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto b = state.basis(i);
        if (std::equal(y.begin(), y.end(), b.begin() + static_cast<std::ptrdiff_t>(L.z_offset()))) {
            terms.emplace_back(std::vector<Int>(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(L.z_offset())),
                               state.amp(i));
        }
    }
    RegisterLayout collapsed_layout{L.q, L.has_bit, L.n_regs, 0};
    return {ZqVector(L.q, y), SparseState::normalized(collapsed_layout, std::move(terms)),
            MeasurementRecord{"last", y, weights[chosen], std::log2(weights[chosen]), u}};
}

struct CommittedOutcome {
    int b = 0;
    ZqVector x;
    MeasurementRecord record;
};

inline void require_committed_layout(const SparseState &s, const char *what) {
    const auto &L = s.layout();
    if (!L.has_bit || L.m_regs != 0) {
        throw ShapeMismatch(std::string(what) + ": expects a state on (bit, n q-ary registers)");
    }
}

/// Computational-basis measurement of (b, x).
inline CommittedOutcome measure_committed_basis(const SparseState &collapsed, Rng &rng) {
    require_committed_layout(collapsed, "measure_committed_basis");
    std::vector<double> weights(collapsed.size());
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        weights[i] = collapsed.amp(i) * collapsed.amp(i);
    }
    const double u = uniform01(rng);
    const std::size_t chosen = detail::pick(weights, u);
    auto t = collapsed.basis(chosen);
    std::vector<Int> outcome(t.begin(), t.end());
    return {static_cast<int>(t[0]), ZqVector(collapsed.modulus(), std::vector<Int>(t.begin() + 1, t.end())),
            MeasurementRecord{"committed", outcome, weights[chosen], std::log2(weights[chosen]), u}};
}

/// (b, J(x)): the qubit view of a (bit, n q-ary) basis tuple.
inline Bits committed_encoding(std::span<const Int> tuple, Int q) {
    Bits out{static_cast<std::uint8_t>(tuple[0] & 1)};
    const Bits j = binary_encode(ZqVector(q, std::vector<Int>(tuple.begin() + 1, tuple.end())));
    out.insert(out.end(), j.begin(), j.end());
    return out;
}

struct HadamardOutcome {
    int c = 0;
    Bits d;
    MeasurementRecord record;
};

/// Largest span dimension the syndrome sampler will enumerate.
inline constexpr std::size_t kMaxSyndromeRank = 24;

/// Hadamard on every qubit of (b, J(x)), then a computational measurement.
///
/// With v_j the encodings of the support and a_j the amplitudes,
///   P(w) = 2^-N |sum_j a_j (-1)^(w . v_j)|^2,   N = 1 + n ceil(log2 q).
/// P depends on w only through the syndrome sigma_i = w . g_i, where g_i is a
/// reduced basis of span{v_j xor v_1}. The sampler draws sigma from its exact
/// law (a Walsh-Hadamard transform of size 2^rank), then w uniformly from the
/// fiber by drawing the non-pivot bits and solving for the pivot bits.
/// Returns c = w_0 and d = (w_1, ..., w_{N-1}).
inline HadamardOutcome hadamard_measure(const SparseState &collapsed, Rng &rng) {
    require_committed_layout(collapsed, "hadamard_measure");
    const Int q = collapsed.modulus();
    const std::size_t N = 1 + collapsed.layout().n_regs * static_cast<std::size_t>(bit_length(q));

    std::vector<BitRow> enc;
    enc.reserve(collapsed.size());
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        enc.push_back(BitRow::from_bits(committed_encoding(collapsed.basis(i), q)));
    }
    Gf2Span span(N);
    std::vector<BitRow> deltas;
    for (const auto &v : enc) {
        BitRow dlt = v;
        dlt ^= enc[0];
        span.insert(dlt);
        deltas.push_back(std::move(dlt));
        if (span.rank() > kMaxSyndromeRank) {
            throw GuardViolation("syndrome_rank", "support spans more than 2^24 syndromes");
        }
    }
    const std::size_t rank = span.rank();
    std::vector<double> g(std::size_t{1} << rank, 0.0);
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        g[span.coordinates(deltas[j])] += collapsed.amp(j);
    }
    walsh_hadamard(g);
    const double scale = std::ldexp(1.0, -static_cast<int>(rank));
    for (double &v : g) {
        v = v * v * scale;
    }
    const double u = uniform01(rng);
    const std::size_t sigma = detail::pick(g, u);

    BitRow w(N);
    std::vector<bool> is_pivot(N, false);
    for (std::size_t i = 0; i < rank; ++i) {
        is_pivot[span.pivot(i)] = true;
    }
    for (std::size_t t = 0; t < N; ++t) {
        if (!is_pivot[t]) {
            w.set(t, random_bit(rng) != 0);
        }
    }
    for (std::size_t i = 0; i < rank; ++i) {
        // Row i vanishes on the other pivots, so only non-pivot bits and its own pivot contribute.
        const int rest = span.row(i).dot(w);
        w.set(span.pivot(i), (((sigma >> i) & 1) ^ static_cast<std::size_t>(rest)) != 0);
    }
    const Bits wb = w.to_bits();
    HadamardOutcome out;
    out.c = wb[0];
    out.d.assign(wb.begin() + 1, wb.end());
    const double p = g[sigma] * std::ldexp(1.0, -static_cast<int>(N - rank));
    out.record = MeasurementRecord{"hadamard", std::vector<Int>(wb.begin(), wb.end()), p,
                                   std::log2(g[sigma]) - static_cast<double>(N - rank), u};
    return out;
}

/// Largest qubit count for the dense Walsh-Hadamard oracle.
inline constexpr std::size_t kMaxDenseQubits = 22;

/// Full outcome distribution of hadamard_measure by explicit transform of the
/// 2^N amplitude vector; index bit t holds w_t.
inline std::vector<double> hadamard_distribution_dense(const SparseState &collapsed) {
    require_committed_layout(collapsed, "hadamard_distribution_dense");
    const Int q = collapsed.modulus();
    const std::size_t N = 1 + collapsed.layout().n_regs * static_cast<std::size_t>(bit_length(q));
    if (N > kMaxDenseQubits) {
        throw GuardViolation("dense_qubits", "dense Hadamard transform limited to 22 qubits");
    }
    std::vector<double> psi(std::size_t{1} << N, 0.0);
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        const Bits v = committed_encoding(collapsed.basis(i), q);
        std::size_t idx = 0;
        for (std::size_t t = 0; t < N; ++t) {
            idx |= static_cast<std::size_t>(v[t]) << t;
        }
        psi[idx] += collapsed.amp(i);
    }
    walsh_hadamard(psi);
    const double scale = std::ldexp(1.0, -static_cast<int>(N));
    for (double &a : psi) {
        a = a * a * scale;
    }
    return psi;
}

}  // namespace qlwe
