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

#include "qlwe/instance.hpp"

#include "gtest/gtest.h"
#include "qlwe/json_io.hpp"

using namespace qlwe;

namespace {

ProtocolParams tiny() {
    ProtocolParams p;
    p.n = 2;
    p.m = 6;
    p.q = 64;
    p.B_V = 1;
    p.C = 1;
    p.epsilon = 0.5;
    return p;
}

}  // namespace

TEST(params, tiny_derived_values) {
    const auto p = tiny();
    ASSERT_NEAR(p.boundedness_radius(), 64.0 / std::sqrt(72.0), 1e-12);
    ASSERT_EQ(p.interval_exponent(), 2);
    ASSERT_NEAR(p.lattice_radius(), 64.0 / std::sqrt(12.0), 1e-12);
    ASSERT_TRUE(p.condition_i());
    ASSERT_TRUE(p.violations().empty());
}

TEST(params, exact_power_of_two_radius) {
    // B_P = 32 / (C sqrt(10)) with C = 32 / (2 sqrt(10)) is exactly 2.
    ProtocolParams p;
    p.n = 1;
    p.m = 2;
    p.q = 32;
    p.C = 32.0 / (2.0 * std::sqrt(10.0));
    ASSERT_EQ(p.interval_exponent(), 1);
}

TEST(params, violations_are_reported) {
    auto p = tiny();
    p.C = 20;
    ASSERT_FALSE(p.violations().empty());
    ASSERT_THROW(p.check(), ParameterError);
    auto s = tiny();
    s.mode = Mode::StrictSymbolic;
    s.B_L = 1;
    ASSERT_EQ(s.violations().size(), 2u);
}

TEST(params, large_preset_numbers) {
    ProtocolParams p;
    p.n = 10;
    p.m = 270;
    p.q = Int{1} << 26;
    p.B_V = 1;
    p.epsilon = 0.04;
    p.C = 3.5;
    ASSERT_EQ(p.interval_exponent(), 16);
    ASSERT_TRUE(p.meets_generation_precondition());
    ASSERT_TRUE(p.violations().empty());
}

TEST(instance, witnessed_zero_error_passes_condition_ii) {
    Rng rng(1);
    auto A = ZqMatrix::uniform(64, 6, 2, rng);
    auto k = make_instance(A, ZqVector(64, {5, 9}), ZqVector(64, 6));
    auto rep = validate_instance(k, tiny());
    ASSERT_EQ(rep.condition_ii, CheckStatus::Pass);
    ASSERT_EQ(rep.witness, CheckStatus::Pass);
    ASSERT_EQ(rep.condition_i, CheckStatus::Pass);
}

TEST(instance, large_error_fails_condition_ii) {
    Rng rng(2);
    auto A = ZqMatrix::uniform(64, 6, 2, rng);
    auto k = make_instance(A, ZqVector(64, {5, 9}), ZqVector(64, {0, 0, 2, 0, 0, 0}));
    ASSERT_EQ(validate_instance(k, tiny()).condition_ii, CheckStatus::Fail);
    k.e_witness.reset();
    ASSERT_EQ(validate_instance(k, tiny()).condition_ii, CheckStatus::Unchecked);
}

TEST(instance, inconsistent_witness_flagged) {
    Rng rng(3);
    auto k = make_instance(ZqMatrix::uniform(64, 6, 2, rng), ZqVector(64, {1, 2}), ZqVector(64, 6));
    k.u = k.u.with(0, k.u[0] + 1);
    auto rep = validate_instance(k, tiny());
    ASSERT_EQ(rep.witness, CheckStatus::Fail);
    ASSERT_FALSE(rep.valid());
}

TEST(instance, condition_i_threshold) {
    auto p = tiny();
    p.q = 8;
    // B_V C sqrt(m n log q) = sqrt(36) = 6 <= 8 passes; B_V = 2 gives 12 > 8.
    ASSERT_TRUE(p.condition_i());
    p.B_V = 2;
    ASSERT_FALSE(p.condition_i());
    Rng rng(4);
    auto k = make_instance(ZqMatrix::uniform(8, 6, 2, rng), ZqVector(8, 2), ZqVector(8, 6));
    ASSERT_EQ(validate_instance(k, p).condition_i, CheckStatus::Fail);
}

TEST(instance, desk_tiny_distance_matches_independent_enumeration) {
    const auto p = tiny();
    Rng rng(5);
    int passed = 0;
    for (int t = 0; t < 60; ++t) {
        auto k = make_instance(ZqMatrix::uniform(64, 6, 2, rng), ZqVector(64, 2), ZqVector(64, 6));
        auto rep = validate_instance(k, p);
        ASSERT_EQ(rep.distance_method, "bruteforce");
        // Reference: smallest centered squared norm over nonzero x, enumerated directly.
        Int best = -1;
        for (Int a = 0; a < 64; ++a) {
            for (Int b = 0; b < 64; ++b) {
                if (a == 0 && b == 0) {
                    continue;
                }
                Int s = 0;
                for (std::size_t i = 0; i < 6; ++i) {
                    Int v = (k.A.at(i, 0) * a + k.A.at(i, 1) * b) % 64;
                    v = v > 32 ? v - 64 : v;
                    s += v * v;
                }
                best = best < 0 ? s : std::min(best, s);
            }
        }
        const bool want = static_cast<double>(best) >= p.required_distance() * p.required_distance();
        ASSERT_EQ(rep.distance == CheckStatus::Pass, want);
        ASSERT_NEAR(*rep.distance_value, std::sqrt(static_cast<double>(best)), 1e-12);
        passed += want;
    }
    // Required distance 2*64/sqrt(12) = 36.95 is out of reach for six rows.
    ASSERT_EQ(passed, 0);
}

TEST(instance, trapdoor_certificate_path) {
    ProtocolParams p;
    p.n = 10;
    p.m = 270;
    p.q = Int{1} << 26;
    p.B_V = 1;
    p.epsilon = 0.04;
    p.C = 3.5;
    Rng rng(6);
    auto kp = gentrap(p.n, p.m, p.q, rng);
    auto k = make_instance(kp.A, ZqVector::uniform(p.q, 10, rng), ZqVector(p.q, 270));
    auto unchecked = validate_instance(k, p);
    ASSERT_EQ(unchecked.distance, CheckStatus::Unchecked);
    ASSERT_EQ(unchecked.distance_method, "unchecked");
    auto rep = validate_instance(k, p, &kp.trapdoor);
    ASSERT_EQ(rep.distance_method, "trapdoor_certificate");
    ASSERT_EQ(rep.distance, CheckStatus::Pass);
    ASSERT_TRUE(rep.valid());
}

TEST(json_io, roundtrips) {
    Rng rng(7);
    auto kp = gentrap(2, 10, 8, rng);
    auto j = to_json(kp);
    auto back = keypair_from_json(Json::parse(j.dump()));
    ASSERT_EQ(back.A, kp.A);
    ASSERT_EQ(back.trapdoor.R, kp.trapdoor.R);
    ASSERT_EQ(j["A"]["dims"], Json::array({10, 2}));

    auto v = ZqVector(8, {1, 7});
    ASSERT_EQ(vector_from_json(to_json(v)), v);
    ASSERT_EQ(bits_from_json(bits_to_json(Bits{1, 0, 1})), (Bits{1, 0, 1}));

    auto p = tiny();
    auto pj = params_from_json(to_json(p));
    ASSERT_EQ(pj.q, p.q);
    ASSERT_EQ(to_json(p)["derived"]["r"], 2);
}

TEST(json_io, rejects_bad_input) {
    ASSERT_THROW(matrix_from_json(Json{{"q", 8}, {"dims", {2, 2}}}), ParameterError);
    ASSERT_THROW(matrix_from_json(Json{{"q", 8}, {"dims", {2, 2}}, {"entries", {1, 2, 3, 9}}}), ParameterError);
    ASSERT_THROW(vector_from_json(Json{{"q", 8}, {"dims", {3}}, {"entries", {1, 2}}}), ShapeMismatch);
    ASSERT_THROW(bits_from_json(Json::array({0, 2})), ParameterError);
}
