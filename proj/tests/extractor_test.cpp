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

#include "gtest/gtest.h"
#include "qlwe/protocol.hpp"

using namespace qlwe;

namespace {

ProtocolParams large_params() {
    ProtocolParams p;
    p.n = 10;
    p.m = 270;
    p.q = Int{1} << 26;
    p.B_V = 1;
    p.epsilon = 0.04;
    p.C = 3.5;
    return p;
}

// A prover that cannot be rewound.
class OneShotProver : public Prover {
   public:
    std::string name() const override { return "one_shot"; }
    ZqVector commit(const LweInstance &pub, Rng &) override { return ZqVector(pub.q(), static_cast<std::size_t>(pub.m())); }
    Response respond(int, Rng &) override { return PreimageResponse{}; }
};

}  // namespace

TEST(extractor, oracle_tuples_are_always_in_H) {
    const auto p = large_params();
    for (std::uint64_t t = 0; t < 50; ++t) {
        Rng vrng = make_stream(51, "v", t);
        const auto keys = generate_keys(p, vrng);
        OracleProver prover(keys);
        Rng prng = make_stream(51, "p", t);
        const auto ex = extract_hardcore_tuple(prover, keys, prng);
        ASSERT_EQ(ex.label, TupleClass::InH);
        ASSERT_FALSE(ex.simulation_only);
    }
}

TEST(extractor, honest_prover_mostly_in_H) {
    const auto st = run_extraction(large_params(), ProverKind::Quantum, 300, 52);
    ASSERT_EQ(st.trials, 300u);
    ASSERT_EQ(st.in_h + st.in_hbar + st.neither, st.trials);
    ASSERT_TRUE(st.simulation_only);
    // Misses come only from d outside G (about 2 * 2^-6 per tuple).
    ASSERT_GE(st.in_h_rate(), 0.92);
    // InHbar needs a one-preimage commitment (overlap deficit ~ 1e-3).
    ASSERT_LE(st.in_hbar, 3u);
}

TEST(extractor, honest_tuple_is_a_claw_preimage) {
    const auto p = large_params();
    Rng vrng(53);
    const auto keys = generate_keys(p, vrng);
    QuantumProver prover(p, &*keys.trapdoor);
    Rng prng(54);
    const auto ex = extract_hardcore_tuple(prover, keys, prng);
    // (b, x) lies within the box around y.
    ZqVector diff = ex.y - keys.instance.A * ex.tuple.x;
    if (ex.tuple.b) {
        diff = diff - keys.instance.u;
    }
    ASSERT_LT(static_cast<double>(diff.inf_norm()), std::ldexp(1.0, p.interval_exponent() - 1) + 1);
}

TEST(extractor, pass_r0_tuples_split_between_classes) {
    const auto st = run_extraction(large_params(), ProverKind::PassR0, 400, 55);
    // c is a fair coin independent of the good-set test.
    ASSERT_GT(st.in_h, 120u);
    ASSERT_GT(st.in_hbar, 120u);
    ASSERT_FALSE(st.simulation_only);
}

TEST(extractor, requires_snapshot_support) {
    Rng vrng(56);
    ProtocolParams p;
    p.n = 2;
    p.m = 6;
    p.q = 64;
    p.C = 2;
    const auto keys = generate_keys(p, vrng);
    OneShotProver prover;
    Rng prng(57);
    ASSERT_THROW(extract_hardcore_tuple(prover, keys, prng), UnsupportedOperation);
}

TEST(extractor, deterministic_for_fixed_seed) {
    const auto a = run_extraction(large_params(), ProverKind::Quantum, 40, 58);
    const auto b = run_extraction(large_params(), ProverKind::Quantum, 40, 58);
    ASSERT_EQ(to_json(a), to_json(b));
}
