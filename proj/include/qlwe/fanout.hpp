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

#include <numeric>

#include "qlwe/circuit.hpp"

namespace qlwe {

/// Two-layer fanout |x1, ..., xm> -> |x1, x1 ^ x2, ..., x1 ^ xm>.
///
/// Qubits: chain a_2..a_m at 0..m-2, parity checks p_1..p_{m-1} at
/// m-1..2m-3, data x_1..x_m at 2m-2.. (r1 = 2(m-1), r2 = m).
///
/// Layer 1 puts each a_j in |+>, copies it onto x_j, measures p_1 = x1 ^ a_2
/// and p_j = a_j ^ a_{j+1}, and reads the chain out in the X basis. The
/// parities force a_j = x1 ^ P_j with P_j = p_1 ^ ... ^ p_{j-1}; the X-basis
/// outcomes t_j leave a phase (-1)^(x1 T) with T = xor of all t_j (and a
/// global sign). The correction writes P_j into a_j's slot and T into p_1's
/// slot; layer 2 applies CNOT(a_j -> x_j) and a Z on x1 controlled by p_1.
inline LayeredCircuit compile_fanout(std::size_t m) {
    if (m < 1) {
        throw ParameterError("fanout needs m >= 1");
    }
    LayeredCircuit c;
    c.basis = Basis::Br;
    c.r2 = m;
    if (m == 1) {
        return c;
    }
    c.r1 = 2 * (m - 1);
    const std::size_t nq = c.num_qubits();
    auto a = [](std::size_t j) { return j - 2; };                  // j = 2..m
    auto p = [m](std::size_t i) { return (m - 1) + (i - 1); };     // i = 1..m-1
    auto x = [r1 = c.r1](std::size_t j) { return r1 + (j - 1); };  // j = 1..m

    std::vector<std::vector<GateOp>> l1(5);
    for (std::size_t j = 2; j <= m; ++j) {
        l1[0].push_back(GateOp::one(GateKind::H, a(j)));
        l1[1].push_back(GateOp::cnot(a(j), x(j)));
        l1[4].push_back(GateOp::one(GateKind::H, a(j)));
    }
    l1[1].push_back(GateOp::cnot(x(1), p(1)));
    for (std::size_t j = 2; j + 1 <= m; ++j) {
        l1[2].push_back(GateOp::cnot(a(j), p(j)));
        l1[3].push_back(GateOp::cnot(a(j + 1), p(j)));
    }
    l1[3].push_back(GateOp::cnot(a(2), p(1)));

    ClassicalCorrection f = ClassicalCorrection::zero(c.r1);
    for (std::size_t j = 2; j <= m; ++j) {
        for (std::size_t i = 1; i < j; ++i) {
            f.rows[a(j)].set(p(i), true);
        }
        f.rows[p(1)].set(a(j), true);
    }
    f.declared_depth = f.computed_depth();

    std::vector<std::vector<GateOp>> l2(3);
    for (std::size_t j = 2; j <= m; ++j) {
        l2[0].push_back(GateOp::cnot(a(j), x(j)));
    }
    l2[0].push_back(GateOp::one(GateKind::H, x(1)));
    l2[1].push_back(GateOp::cnot(p(1), x(1)));
    l2[2].push_back(GateOp::one(GateKind::H, x(1)));

    c.stages.emplace_back(make_layer(std::move(l1), nq));
    c.stages.emplace_back(MeasureStage{});
    c.stages.emplace_back(std::move(f));
    c.stages.emplace_back(make_layer(std::move(l2), nq));
    return c;
}

/// The linear-depth CNOT ladder CNOT(1 -> j), j = 2..m, on an m-qubit state.
inline DenseState reference_fanout(std::size_t m, DenseState state) {
    if (state.qubits != m) {
        throw ShapeMismatch("reference_fanout: state must have m qubits");
    }
    for (std::size_t j = 1; j < m; ++j) {
        apply_gate(state, GateOp::cnot(0, j));
    }
    return state;
}

/// Declared depth of the modeled threshold-circuit realization of a Z_q
/// linear map (configuration metadata, not a verified claim).
inline constexpr int kModeledLinearMapDepth = 8;

/// One layer holding an opaque gate with action |b, x, z> -> |b, x, z + A'(b, x)>.
inline LayeredCircuit compile_linear_map_modeled(const ZqMatrix &A_prime, int declared_depth = kModeledLinearMapDepth) {
    if (A_prime.cols() < 1 || A_prime.rows() < 1) {
        throw ParameterError("linear map needs at least one row and the b column");
    }
    LinearMapAction action{A_prime};
    LayeredCircuit c;
    c.basis = Basis::Modeled;
    c.r2 = action.qubits();
    std::vector<std::size_t> qubits(c.r2);
    std::iota(qubits.begin(), qubits.end(), 0);
    OpaqueAction op{"linear_map_Zq", declared_depth, 0.0, {}, action, {}};
    c.stages.emplace_back(make_layer({{GateOp::opaque_gate(std::move(op), std::move(qubits))}}, c.num_qubits()));
    return c;
}

}  // namespace qlwe
