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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "qlwe/gf2.hpp"
#include "qlwe/json_io.hpp"
#include "qlwe/rng.hpp"

namespace qlwe {

// Layered circuits: constant-depth quantum layers on r1 + r2 qubits, each
// followed by a measurement of the first r1 qubits and a classical map whose
// output re-initializes them. Qubit t is bit t of a dense basis index.

using Complex = std::complex<double>;
using Matrix2 = std::array<Complex, 4>;  // row-major

enum class GateKind { H, T, S, X, Z, U, CNOT, Opaque };

inline const char *gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::H:
            return "H";
        case GateKind::T:
            return "T";
        case GateKind::S:
            return "S";
        case GateKind::X:
            return "X";
        case GateKind::Z:
            return "Z";
        case GateKind::U:
            return "U";
        case GateKind::CNOT:
            return "CNOT";
        case GateKind::Opaque:
            return "opaque";
    }
    return "?";
}

inline GateKind gate_kind_from_name(const std::string &s) {
    for (GateKind k : {GateKind::H, GateKind::T, GateKind::S, GateKind::X, GateKind::Z, GateKind::U, GateKind::CNOT,
                       GateKind::Opaque}) {
        if (s == gate_kind_name(k)) {
            return k;
        }
    }
    throw ParameterError("unknown gate kind '" + s + "'");
}

inline Matrix2 named_matrix(GateKind k) {
    const double h = 1 / std::numbers::sqrt2;
    switch (k) {
        case GateKind::H:
            return {h, h, h, -h};
        case GateKind::T:
            return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
        case GateKind::S:
            return {1, 0, 0, Complex(0, 1)};
        case GateKind::X:
            return {0, 1, 1, 0};
        case GateKind::Z:
            return {1, 0, 0, -1};
        default:
            throw ParameterError(std::string("gate ") + gate_kind_name(k) + " has no fixed 2x2 matrix");
    }
}

/// |b, x, z> -> |b, x, z + A' (b, x)> on (bit, n q-ary, m q-ary) registers of
/// ceil(log2 q) qubits each, little-endian. Codes >= q are left fixed.
struct LinearMapAction {
    ZqMatrix A_prime;  // m x (n + 1), column 0 multiplies b

    std::size_t n() const { return A_prime.cols() - 1; }
    std::size_t m() const { return A_prime.rows(); }
    Int q() const { return A_prime.modulus(); }
    std::size_t qubits() const { return 1 + (n() + m()) * static_cast<std::size_t>(bit_length(q())); }

    std::uint64_t apply(std::uint64_t local) const {
        const auto k = static_cast<std::size_t>(bit_length(q()));
        const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
        std::vector<Int> bx(n() + 1);
        bx[0] = static_cast<Int>(local & 1);
        for (std::size_t i = 0; i < n() + m(); ++i) {
            if (static_cast<Int>((local >> (1 + i * k)) & mask) >= q()) {
                return local;
            }
        }
        for (std::size_t i = 0; i < n(); ++i) {
            bx[1 + i] = static_cast<Int>((local >> (1 + i * k)) & mask);
        }
        const ZqVector shift = A_prime * ZqVector(q(), bx);
        std::uint64_t out = local;
        for (std::size_t j = 0; j < m(); ++j) {
            const std::size_t off = 1 + (n() + j) * k;
            const Int z = static_cast<Int>((local >> off) & mask);
            const auto nz = static_cast<std::uint64_t>(mod_reduce(z + shift[j], q()));
            out = (out & ~(mask << off)) | (nz << off);
        }
        return out;
    }
};

/// A layer-level gate whose internal construction is out of scope: only its
/// declared depth, declared error and exact action are carried.
struct OpaqueAction {
    std::string label;
    int declared_depth = 1;
    double declared_error = 0;
    /// Explicit local permutation (size 2^qubits), or empty if linear_map is set.
    std::vector<std::uint64_t> table;
    std::optional<LinearMapAction> linear_map;
    /// Optional phase applied after the permutation, indexed by image.
    std::vector<Complex> phases;

    std::uint64_t image(std::uint64_t local) const { return linear_map ? linear_map->apply(local) : table[local]; }
    Complex phase(std::uint64_t img) const { return phases.empty() ? Complex(1) : phases[img]; }
};

struct GateOp {
    GateKind kind = GateKind::H;
    std::vector<std::size_t> qubits;
    Matrix2 matrix{};  // for U
    std::shared_ptr<const OpaqueAction> opaque;

    static GateOp one(GateKind k, std::size_t q) { return GateOp{k, {q}, {}, nullptr}; }
    static GateOp unitary(const Matrix2 &u, std::size_t q) { return GateOp{GateKind::U, {q}, u, nullptr}; }
    static GateOp cnot(std::size_t control, std::size_t target) {
        return GateOp{GateKind::CNOT, {control, target}, {}, nullptr};
    }
    static GateOp opaque_gate(OpaqueAction a, std::vector<std::size_t> qubits) {
        return GateOp{GateKind::Opaque, std::move(qubits), {}, std::make_shared<const OpaqueAction>(std::move(a))};
    }

    int depth() const { return kind == GateKind::Opaque ? opaque->declared_depth : 1; }

    Matrix2 single_qubit_matrix() const { return kind == GateKind::U ? matrix : named_matrix(kind); }
};

/// Gates grouped into depth slices; gates in one slice act on disjoint qubits.
struct QuantumLayer {
    std::vector<std::vector<GateOp>> slices;
    int declared_depth = 0;

    /// Critical path of the gate sequence (as-soon-as-possible schedule).
    int critical_path(std::size_t num_qubits) const {
        std::vector<int> ready(num_qubits, 0);
        int depth = 0;
        for (const auto &slice : slices) {
            for (const auto &g : slice) {
                int start = 0;
                for (auto q : g.qubits) {
                    start = std::max(start, q < num_qubits ? ready[q] : 0);
                }
                const int end = start + g.depth();
                for (auto q : g.qubits) {
                    if (q < num_qubits) {
                        ready[q] = end;
                    }
                }
                depth = std::max(depth, end);
            }
        }
        return depth;
    }

    /// Sum over slices of the deepest gate in the slice.
    int slice_depth() const {
        int d = 0;
        for (const auto &slice : slices) {
            int s = 0;
            for (const auto &g : slice) {
                s = std::max(s, g.depth());
            }
            d += s;
        }
        return d;
    }
};

/// Measure the first r1 qubits in the computational basis.
struct MeasureStage {};

/// f(v) = M v xor offset over GF(2)^r1.
struct ClassicalCorrection {
    std::vector<BitRow> rows;
    BitRow offset;
    int declared_depth = 0;

    static ClassicalCorrection zero(std::size_t r1) {
        return ClassicalCorrection{std::vector<BitRow>(r1, BitRow(r1)), BitRow(r1), 0};
    }

    BitRow apply(const BitRow &v) const {
        BitRow out = offset;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].dot(v)) {
                out.set(i, !out.get(i));
            }
        }
        return out;
    }

    bool is_linear() const { return !offset.any(); }

    /// Depth of computing every output with its own fan-in-2 XOR tree.
    int computed_depth() const {
        int d = 0;
        for (const auto &row : rows) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                w += row.get(j);
            }
            int levels = 0;
            while ((std::size_t{1} << levels) < w) {
                ++levels;
            }
            d = std::max(d, levels);
        }
        return d;
    }
};

using Stage = std::variant<QuantumLayer, MeasureStage, ClassicalCorrection>;

enum class Basis { Br, B, Modeled };

inline const char *basis_name(Basis b) {
    switch (b) {
        case Basis::Br:
            return "B_r";
        case Basis::B:
            return "B";
        case Basis::Modeled:
            return "modeled";
    }
    return "?";
}

inline Basis basis_from_name(const std::string &s) {
    for (Basis b : {Basis::Br, Basis::B, Basis::Modeled}) {
        if (s == basis_name(b)) {
            return b;
        }
    }
    throw ParameterError("unknown gate basis '" + s + "'");
}

/// B_r = {H, T, CNOT}; B = every 1-qubit gate and CNOT; modeled = B plus
/// opaque layer gates.
inline bool basis_allows(Basis b, GateKind k) {
    switch (b) {
        case Basis::Br:
            return k == GateKind::H || k == GateKind::T || k == GateKind::CNOT;
        case Basis::B:
            return k != GateKind::Opaque;
        case Basis::Modeled:
            return true;
    }
    return false;
}

struct LayeredCircuit {
    std::size_t r1 = 0;
    std::size_t r2 = 0;
    Basis basis = Basis::Br;
    std::vector<Stage> stages;

    std::size_t num_qubits() const { return r1 + r2; }

    std::size_t num_quantum_layers() const {
        return static_cast<std::size_t>(std::count_if(stages.begin(), stages.end(), [](const Stage &s) {
            return std::holds_alternative<QuantumLayer>(s);
        }));
    }
};

/// Default c in "classical depth <= c ceil(log2 r1)".
inline constexpr double kClassicalDepthConstant = 1.0;

inline int ceil_log2(std::size_t v) {
    int l = 0;
    while ((std::size_t{1} << l) < v) {
        ++l;
    }
    return l;
}

/// Structural problems; empty iff the circuit is well formed.
inline std::vector<std::string> circuit_problems(const LayeredCircuit &c,
                                                 double classical_constant = kClassicalDepthConstant) {
    std::vector<std::string> out;
    const std::size_t nq = c.num_qubits();
    // Q (M F Q)* (M F)?
    enum { Start, AfterQ, AfterM, AfterF } st = Start;
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
        const std::string where = "stage " + std::to_string(i) + ": ";
        if (const auto *q = std::get_if<QuantumLayer>(&c.stages[i])) {
            if (st == AfterQ || st == AfterM) {
                out.push_back(where + "quantum layer must start the circuit or follow a correction");
            }
            st = AfterQ;
            for (std::size_t s = 0; s < q->slices.size(); ++s) {
                std::vector<bool> used(nq, false);
                for (const auto &g : q->slices[s]) {
                    const std::size_t arity = g.kind == GateKind::CNOT ? 2 : (g.kind == GateKind::Opaque ? 0 : 1);
                    if (arity && g.qubits.size() != arity) {
                        out.push_back(where + gate_kind_name(g.kind) + " has the wrong number of qubits");
                    }
                    if (!basis_allows(c.basis, g.kind)) {
                        out.push_back(where + gate_kind_name(g.kind) + " is outside the declared basis " +
                                      basis_name(c.basis));
                    }
                    for (auto qb : g.qubits) {
                        if (qb >= nq) {
                            out.push_back(where + "qubit index " + std::to_string(qb) + " out of range");
                        } else if (used[qb]) {
                            out.push_back(where + "slice " + std::to_string(s) + " uses qubit " + std::to_string(qb) +
                                          " twice");
                        } else {
                            used[qb] = true;
                        }
                    }
                    if (g.kind == GateKind::U) {
                        const auto &u = g.matrix;
                        const Complex a = std::conj(u[0]) * u[0] + std::conj(u[2]) * u[2];
                        const Complex b = std::conj(u[0]) * u[1] + std::conj(u[2]) * u[3];
                        const Complex d = std::conj(u[1]) * u[1] + std::conj(u[3]) * u[3];
                        if (std::abs(a - 1.0) > 1e-9 || std::abs(b) > 1e-9 || std::abs(d - 1.0) > 1e-9) {
                            out.push_back(where + "1-qubit matrix is not unitary");
                        }
                    }
                    if (g.kind == GateKind::Opaque) {
                        if (!g.opaque || g.opaque->declared_depth < 1) {
                            out.push_back(where + "opaque gate needs an action and a positive declared depth");
                            continue;
                        }
                        const auto &a = *g.opaque;
                        if (a.linear_map) {
                            if (a.linear_map->qubits() != g.qubits.size()) {
                                out.push_back(where + "linear-map gate qubit count differs from its registers");
                            }
                        } else {
                            const std::size_t size = g.qubits.size() < 63 ? std::size_t{1} << g.qubits.size() : 0;
                            std::vector<bool> hit(a.table.size(), false);
                            bool perm = a.table.size() == size;
                            for (std::size_t t = 0; perm && t < a.table.size(); ++t) {
                                perm = a.table[t] < size && !hit[a.table[t]];
                                if (perm) {
                                    hit[a.table[t]] = true;
                                }
                            }
                            if (!perm) {
                                out.push_back(where + "opaque gate table is not a permutation of its qubits");
                            }
                        }
                        if (!a.phases.empty()) {
                            for (const auto &ph : a.phases) {
                                if (std::abs(std::abs(ph) - 1.0) > 1e-9) {
                                    out.push_back(where + "opaque gate phase is not of unit modulus");
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            if (q->declared_depth != q->critical_path(nq)) {
                out.push_back(where + "declared depth " + std::to_string(q->declared_depth) +
                              " differs from the critical path " + std::to_string(q->critical_path(nq)));
            }
        } else if (std::holds_alternative<MeasureStage>(c.stages[i])) {
            if (st != AfterQ) {
                out.push_back(where + "measurement must follow a quantum layer");
            }
            st = AfterM;
        } else {
            const auto &f = std::get<ClassicalCorrection>(c.stages[i]);
            if (st != AfterM) {
                out.push_back(where + "correction must follow a measurement");
            }
            st = AfterF;
            bool shape = f.rows.size() == c.r1 && f.offset.size() == c.r1;
            for (const auto &row : f.rows) {
                shape = shape && row.size() == c.r1;
            }
            if (!shape) {
                out.push_back(where + "correction must be an r1 x r1 GF(2) map");
                continue;
            }
            if (f.declared_depth < f.computed_depth()) {
                out.push_back(where + "declared classical depth below the XOR-tree depth");
            }
            if (static_cast<double>(f.declared_depth) > classical_constant * ceil_log2(c.r1) + 1e-12) {
                out.push_back(where + "classical depth exceeds c * ceil(log2 r1)");
            }
        }
    }
    if (st == AfterM) {
        out.emplace_back("circuit ends between a measurement and its correction");
    }
    return out;
}

inline void check_circuit(const LayeredCircuit &c, double classical_constant = kClassicalDepthConstant) {
    const auto problems = circuit_problems(c, classical_constant);
    if (!problems.empty()) {
        throw ParameterError("malformed layered circuit: " + problems.front());
    }
}

/// Builds a layer from slices with the declared depth set to its critical path.
inline QuantumLayer make_layer(std::vector<std::vector<GateOp>> slices, std::size_t num_qubits) {
    std::erase_if(slices, [](const auto &s) { return s.empty(); });
    QuantumLayer l{std::move(slices), 0};
    l.declared_depth = l.critical_path(num_qubits);
    return l;
}

struct DepthReport {
    std::size_t num_layers = 0;
    std::vector<int> layer_depths;
    int max_quantum_depth = 0;
    int max_classical_depth = 0;
    std::size_t total_qubits = 0;
    std::map<std::string, std::size_t> gate_counts;
    double declared_error = 0;
};

inline DepthReport depth_report(const LayeredCircuit &c) {
    DepthReport r;
    r.total_qubits = c.num_qubits();
    for (const auto &stage : c.stages) {
        if (const auto *q = std::get_if<QuantumLayer>(&stage)) {
            ++r.num_layers;
            const int d = q->critical_path(c.num_qubits());
            r.layer_depths.push_back(d);
            r.max_quantum_depth = std::max(r.max_quantum_depth, d);
            for (const auto &slice : q->slices) {
                for (const auto &g : slice) {
                    ++r.gate_counts[gate_kind_name(g.kind)];
                    if (g.opaque) {
                        r.declared_error += g.opaque->declared_error;
                    }
                }
            }
        } else if (const auto *f = std::get_if<ClassicalCorrection>(&stage)) {
            r.max_classical_depth = std::max(r.max_classical_depth, std::max(f->declared_depth, f->computed_depth()));
        }
    }
    return r;
}

inline Json to_json(const DepthReport &r) {
    Json counts = Json::object();
    for (const auto &[k, v] : r.gate_counts) {
        counts[k] = v;
    }
    return Json{{"num_layers", r.num_layers},         {"layer_depths", r.layer_depths},
                {"max_quantum_depth", r.max_quantum_depth}, {"max_classical_depth", r.max_classical_depth},
                {"total_qubits", r.total_qubits},     {"gate_counts", counts},
                {"declared_error", r.declared_error}};
}

// ---- dense execution -------------------------------------------------------

inline constexpr std::size_t kMaxCircuitQubits = 22;

struct DenseState {
    std::size_t qubits = 0;
    std::vector<Complex> amps;

    static DenseState basis(std::size_t qubits, std::uint64_t index) {
        DenseState s{qubits, std::vector<Complex>(std::size_t{1} << qubits)};
        s.amps[index] = 1;
        return s;
    }

    /// Haar-like random state from normalized complex Gaussian amplitudes.
    static DenseState random(std::size_t qubits, Rng &rng) {
        std::normal_distribution<double> g;
        DenseState s{qubits, std::vector<Complex>(std::size_t{1} << qubits)};
        double norm = 0;
        for (auto &a : s.amps) {
            a = Complex(g(rng), g(rng));
            norm += std::norm(a);
        }
        for (auto &a : s.amps) {
            a /= std::sqrt(norm);
        }
        return s;
    }

    double norm_sq() const {
        double n = 0;
        for (const auto &a : amps) {
            n += std::norm(a);
        }
        return n;
    }
};

/// |<a|b>|^2.
inline double fidelity(const DenseState &a, const DenseState &b) {
    if (a.qubits != b.qubits) {
        throw ShapeMismatch("fidelity: qubit counts differ");
    }
    Complex s = 0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) {
        s += std::conj(a.amps[i]) * b.amps[i];
    }
    return std::norm(s);
}

inline void apply_gate(DenseState &s, const GateOp &g) {
    const std::size_t dim = s.amps.size();
    if (g.kind == GateKind::CNOT) {
        const std::size_t c = std::size_t{1} << g.qubits[0];
        const std::size_t t = std::size_t{1} << g.qubits[1];
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & c) && !(i & t)) {
                std::swap(s.amps[i], s.amps[i | t]);
            }
        }
        return;
    }
    if (g.kind == GateKind::Opaque) {
        std::vector<Complex> out(dim, 0);
        for (std::size_t i = 0; i < dim; ++i) {
            if (s.amps[i] == Complex(0)) {
                continue;
            }
            std::uint64_t local = 0;
            std::size_t rest = i;
            for (std::size_t t = 0; t < g.qubits.size(); ++t) {
                local |= static_cast<std::uint64_t>((i >> g.qubits[t]) & 1) << t;
                rest &= ~(std::size_t{1} << g.qubits[t]);
            }
            const std::uint64_t img = g.opaque->image(local);
            std::size_t j = rest;
            for (std::size_t t = 0; t < g.qubits.size(); ++t) {
                j |= static_cast<std::size_t>((img >> t) & 1) << g.qubits[t];
            }
            out[j] += g.opaque->phase(img) * s.amps[i];
        }
        s.amps = std::move(out);
        return;
    }
    const Matrix2 u = g.single_qubit_matrix();
    const std::size_t t = std::size_t{1} << g.qubits[0];
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & t)) {
            const Complex a0 = s.amps[i];
            const Complex a1 = s.amps[i | t];
            s.amps[i] = u[0] * a0 + u[1] * a1;
            s.amps[i | t] = u[2] * a0 + u[3] * a1;
        }
    }
}

struct MeasurementLogEntry {
    std::size_t stage = 0;
    Bits outcome;      // the r1 measured bits
    Bits reinit;       // f(outcome), empty for the final readout
    double probability = 0;
};

struct LayeredRun {
    DenseState output;  // on the r2 persistent qubits
    std::vector<MeasurementLogEntry> log;
};

/// Picks an r1-bit outcome index from its probabilities.
using OutcomeChooser = std::function<std::size_t(const std::vector<double> &)>;

namespace detail {

inline std::size_t measure_first(DenseState &s, std::size_t r1, const OutcomeChooser &choose, double &prob) {
    const std::size_t mask = (std::size_t{1} << r1) - 1;
    std::vector<double> p(std::size_t{1} << r1, 0.0);
    for (std::size_t i = 0; i < s.amps.size(); ++i) {
        p[i & mask] += std::norm(s.amps[i]);
    }
    const std::size_t o = choose(p);
    if (o >= p.size() || p[o] <= 0) {
        throw Error("measurement outcome has zero probability");
    }
    prob = p[o];
    const double scale = 1 / std::sqrt(p[o]);
    for (std::size_t i = 0; i < s.amps.size(); ++i) {
        s.amps[i] = (i & mask) == o ? s.amps[i] * scale : Complex(0);
    }
    return o;
}

inline Bits index_bits(std::size_t v, std::size_t n) {
    Bits b(n);
    for (std::size_t t = 0; t < n; ++t) {
        b[t] = (v >> t) & 1;
    }
    return b;
}

}  // namespace detail

/// Executes the circuit on `input` (r2 qubits; ancillas start in |0>). After
/// the last stage any unmeasured ancillas are read out and discarded.
inline LayeredRun run_layered(const LayeredCircuit &c, const DenseState &input, const OutcomeChooser &choose) {
    check_circuit(c);
    if (c.num_qubits() > kMaxCircuitQubits) {
        throw GuardViolation("dense_qubits", "dense circuit execution limited to 22 qubits");
    }
    if (input.qubits != c.r2 || input.amps.size() != (std::size_t{1} << c.r2)) {
        throw ShapeMismatch("run_layered: input must be a state on the r2 persistent qubits");
    }
    DenseState s{c.num_qubits(), std::vector<Complex>(std::size_t{1} << c.num_qubits())};
    for (std::size_t d = 0; d < input.amps.size(); ++d) {
        s.amps[d << c.r1] = input.amps[d];
    }
    LayeredRun run;
    bool dirty = false;  // ancillas touched since the last reinitialization
    std::size_t last_outcome = 0;
    for (std::size_t i = 0; i < c.stages.size(); ++i) {
        if (const auto *q = std::get_if<QuantumLayer>(&c.stages[i])) {
            for (const auto &slice : q->slices) {
                for (const auto &g : slice) {
                    apply_gate(s, g);
                }
            }
            dirty = true;
        } else if (std::holds_alternative<MeasureStage>(c.stages[i])) {
            double p = 1;
            last_outcome = c.r1 ? detail::measure_first(s, c.r1, choose, p) : 0;
            run.log.push_back({i, detail::index_bits(last_outcome, c.r1), {}, p});
            dirty = false;
        } else {
            const auto &f = std::get<ClassicalCorrection>(c.stages[i]);
            const BitRow v = f.apply(BitRow::from_bits(detail::index_bits(last_outcome, c.r1)));
            std::size_t reinit = 0;
            for (std::size_t t = 0; t < c.r1; ++t) {
                reinit |= static_cast<std::size_t>(v.get(t)) << t;
            }
            run.log.back().reinit = v.to_bits();
            const std::size_t mask = (std::size_t{1} << c.r1) - 1;
            std::vector<Complex> out(s.amps.size(), 0);
            for (std::size_t idx = 0; idx < s.amps.size(); ++idx) {
                if ((idx & mask) == last_outcome) {
                    out[(idx & ~mask) | reinit] = s.amps[idx];
                }
            }
            s.amps = std::move(out);
            last_outcome = reinit;
        }
    }
    if (dirty && c.r1) {
        double p = 1;
        last_outcome = detail::measure_first(s, c.r1, choose, p);
        run.log.push_back({c.stages.size(), detail::index_bits(last_outcome, c.r1), {}, p});
    }
    run.output = DenseState{c.r2, std::vector<Complex>(std::size_t{1} << c.r2)};
    const std::size_t mask = (std::size_t{1} << c.r1) - 1;
    for (std::size_t idx = 0; idx < s.amps.size(); ++idx) {
        if ((idx & mask) == last_outcome) {
            run.output.amps[idx >> c.r1] = s.amps[idx];
        }
    }
    return run;
}

/// Born-rule sampling of every measurement.
inline LayeredRun run_layered(const LayeredCircuit &c, const DenseState &input, Rng &rng) {
    return run_layered(c, input, [&rng](const std::vector<double> &p) {
        double total = 0;
        for (double v : p) {
            total += v;
        }
        const double target = uniform01(rng) * total;
        double acc = 0;
        std::size_t last = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] > 0) {
                last = i;
                acc += p[i];
                if (acc > target) {
                    return i;
                }
            }
        }
        return last;
    });
}

// ---- JSON -------------------------------------------------------------------

inline Json gate_to_json(const GateOp &g) {
    Json j{{"kind", gate_kind_name(g.kind)}, {"qubits", g.qubits}};
    if (g.kind == GateKind::U) {
        Json m = Json::array();
        for (const auto &c : g.matrix) {
            m.push_back(Json::array({c.real(), c.imag()}));
        }
        j["matrix"] = m;
    }
    if (g.kind == GateKind::Opaque) {
        const auto &a = *g.opaque;
        j["label"] = a.label;
        j["declared_depth"] = a.declared_depth;
        j["declared_error"] = a.declared_error;
        if (a.linear_map) {
            j["linear_map"] = to_json(a.linear_map->A_prime);
        } else {
            j["permutation"] = a.table;
        }
        if (!a.phases.empty()) {
            Json ph = Json::array();
            for (const auto &c : a.phases) {
                ph.push_back(Json::array({c.real(), c.imag()}));
            }
            j["phases"] = ph;
        }
    }
    return j;
}

inline GateOp gate_from_json(const Json &j) {
    GateOp g;
    g.kind = gate_kind_from_name(get_field(j, "kind", "circuit").get<std::string>());
    g.qubits = get_field(j, "qubits", "circuit").get<std::vector<std::size_t>>();
    if (g.kind == GateKind::U) {
        const auto &m = get_field(j, "matrix", "circuit");
        if (!m.is_array() || m.size() != 4) {
            throw ParameterError("U gate matrix must have 4 complex entries");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            g.matrix[i] = Complex(m[i].at(0).get<double>(), m[i].at(1).get<double>());
        }
    }
    if (g.kind == GateKind::Opaque) {
        OpaqueAction a;
        a.label = get_field(j, "label", "circuit").get<std::string>();
        a.declared_depth = get_field(j, "declared_depth", "circuit").get<int>();
        a.declared_error = j.value("declared_error", 0.0);
        if (j.contains("linear_map")) {
            a.linear_map = LinearMapAction{matrix_from_json(j["linear_map"])};
        } else {
            a.table = get_field(j, "permutation", "circuit").get<std::vector<std::uint64_t>>();
        }
        if (j.contains("phases")) {
            for (const auto &c : j["phases"]) {
                a.phases.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
            }
        }
        g.opaque = std::make_shared<const OpaqueAction>(std::move(a));
    }
    return g;
}

inline Json to_json(const LayeredCircuit &c) {
    Json stages = Json::array();
    for (const auto &stage : c.stages) {
        if (const auto *q = std::get_if<QuantumLayer>(&stage)) {
            Json slices = Json::array();
            for (const auto &slice : q->slices) {
                Json gs = Json::array();
                for (const auto &g : slice) {
                    gs.push_back(gate_to_json(g));
                }
                slices.push_back(gs);
            }
            stages.push_back(Json{{"gates", slices}, {"depth", q->declared_depth}});
        } else if (std::holds_alternative<MeasureStage>(stage)) {
            stages.push_back(Json{{"measure", true}});
        } else {
            const auto &f = std::get<ClassicalCorrection>(stage);
            Json rows = Json::array();
            for (const auto &r : f.rows) {
                rows.push_back(r.to_bits());
            }
            stages.push_back(
                Json{{"correction", {{"matrix_gf2", rows}, {"offset", f.offset.to_bits()}, {"depth", f.declared_depth}}}});
        }
    }
    return Json{{"r1", c.r1}, {"r2", c.r2}, {"basis", basis_name(c.basis)}, {"layers", stages}};
}

inline LayeredCircuit circuit_from_json(const Json &j) {
    LayeredCircuit c;
    c.r1 = get_field(j, "r1", "circuit").get<std::size_t>();
    c.r2 = get_field(j, "r2", "circuit").get<std::size_t>();
    c.basis = basis_from_name(j.value("basis", std::string("B")));
    for (const auto &s : get_field(j, "layers", "circuit")) {
        if (s.contains("gates")) {
            QuantumLayer q;
            for (const auto &slice : s["gates"]) {
                std::vector<GateOp> gs;
                if (slice.is_object()) {
                    gs.push_back(gate_from_json(slice));
                } else {
                    for (const auto &g : slice) {
                        gs.push_back(gate_from_json(g));
                    }
                }
                q.slices.push_back(std::move(gs));
            }
            q.declared_depth = s.contains("depth") ? s["depth"].get<int>() : q.critical_path(c.num_qubits());
            c.stages.emplace_back(std::move(q));
        } else if (s.contains("measure")) {
            c.stages.emplace_back(MeasureStage{});
        } else if (s.contains("correction")) {
            const auto &f = s["correction"];
            ClassicalCorrection cc;
            for (const auto &row : get_field(f, "matrix_gf2", "circuit")) {
                cc.rows.push_back(BitRow::from_bits(row.get<Bits>()));
            }
            cc.offset = f.contains("offset") ? BitRow::from_bits(f["offset"].get<Bits>()) : BitRow(c.r1);
            cc.declared_depth = f.contains("depth") ? f["depth"].get<int>() : cc.computed_depth();
            c.stages.emplace_back(std::move(cc));
        } else {
            throw ParameterError("circuit layer must hold 'gates', 'measure' or 'correction'");
        }
    }
    return c;
}

}  // namespace qlwe
