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

#include "qlwe/robust_state.hpp"

#include <set>

#include "gtest/gtest.h"
#include "qlwe/lwe_state.hpp"

using namespace qlwe;

namespace {

// |{t in I^m : t - e in I^m}| / 2^(m r), with I^m listed as residue tuples.
double overlap_by_counting(int m, Int q, int r, const ZqVector &e) {
    const Int half = Int{1} << (r - 1);
    std::set<Int> interval;
    for (Int t = -half; t < half; ++t) {
        interval.insert(mod_reduce(t, q));
    }
    Int count = 0;
    Int total = 0;
    std::vector<Int> t(static_cast<std::size_t>(m), -half);
    while (true) {
        ++total;
        bool inside = true;
        for (int i = 0; i < m; ++i) {
            inside = inside && interval.count(mod_reduce(t[static_cast<std::size_t>(i)] - e[static_cast<std::size_t>(i)], q));
        }
        count += inside;
        int i = m - 1;
        while (i >= 0 && t[static_cast<std::size_t>(i)] == half - 1) {
            t[static_cast<std::size_t>(i)] = -half;
            --i;
        }
        if (i < 0) {
            break;
        }
        ++t[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(count) / static_cast<double>(total);
}

LweInstance small_instance(Int q, int n, int m, Rng &rng) {
    return make_instance(ZqMatrix::uniform(q, static_cast<std::size_t>(m), static_cast<std::size_t>(n), rng),
                         ZqVector::uniform(q, static_cast<std::size_t>(n), rng),
                         ZqVector(q, std::vector<Int>(static_cast<std::size_t>(m), 1)));
}

}  // namespace

TEST(robust_state, single_register_q8_r1) {
    auto s = create_robust_state(1, 8, 1);
    ASSERT_EQ(s.size(), 2u);
    const std::vector<Int> zero{0};
    const std::vector<Int> minus_one{7};
    ASSERT_NEAR(s.amplitude_of(zero), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_NEAR(s.amplitude_of(minus_one), 1 / std::sqrt(2.0), 1e-15);
}

TEST(robust_state, two_registers_q16_r2) {
    auto s = create_robust_state(2, 16, 2);
    ASSERT_EQ(s.size(), 16u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_NEAR(s.amp(i), 0.25, 1e-15);
        for (Int v : s.basis(i)) {
            ASSERT_LE(std::abs(centered_rep(v, 16)), 2);
        }
    }
}

TEST(robust_state, preconditions) {
    ASSERT_THROW(create_robust_state(2, 8, 0), ParameterError);
    ASSERT_THROW(create_robust_state(2, 8, 4), ParameterError);
    ASSERT_NO_THROW(create_robust_state(2, 8, 3));
    ASSERT_THROW(create_robust_state(5, 1 << 10, 6), GuardViolation);
}

TEST(robust_state, boundedness) {
    for (int r = 1; r <= 4; ++r) {
        auto s = create_robust_state(2, 64, r);
        const double half = std::ldexp(1.0, r - 1);
        ASSERT_TRUE(check_bounded(s, half + 1));
        if (r >= 2) {
            ASSERT_FALSE(check_bounded(s, half - 1));
        }
        // Tight: -2^(r-1) is in the support, so B = 2^(r-1) fails and anything above passes.
        ASSERT_FALSE(check_bounded(s, half));
        ASSERT_TRUE(check_bounded(s, half + 0.5));
    }
    SparseState zero(RegisterLayout{8, false, 0, 3}, {{{0, 0, 0}, 1.0}});
    ASSERT_TRUE(check_bounded(zero, 0.1));
}

TEST(robust_state, overlap_examples) {
    auto s = create_robust_state(2, 16, 2);
    ASSERT_NEAR(overlap_shifted(s, ZqVector(16, 2)), 1.0, 1e-15);
    ASSERT_NEAR(overlap_shifted(s, ZqVector(16, {1, -1})), 9.0 / 16.0, 1e-15);
    ASSERT_NEAR(overlap_by_counting(2, 16, 2, ZqVector(16, {1, -1})), 9.0 / 16.0, 1e-15);
}

TEST(robust_state, overlap_matches_counting_and_closed_form) {
    Rng rng(7);
    for (int t = 0; t < 300; ++t) {
        const int m = 1 + static_cast<int>(uniform_below(rng, 3));
        const Int q = Int{1} << (2 + uniform_below(rng, 3));
        const int r = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(bit_length(q))));
        const auto e = ZqVector::uniform(q, static_cast<std::size_t>(m), rng);
        const RobustStateSpec spec(m, q, r);
        const double explicit_overlap = overlap_shifted(create_robust_state(m, q, r), e);
        const double counted = overlap_by_counting(m, q, r, e);
        ASSERT_NEAR(explicit_overlap, counted, 1e-12);
        ASSERT_NEAR(spec.exact_overlap(e), counted, 1e-12);
        if (spec.closed_form_applies(e)) {
            ASSERT_NEAR(spec.closed_form_overlap(e), counted, 1e-12);
        }
    }
}

TEST(robust_state, wraparound_differs_from_closed_form) {
    // 2^r + |e| > q: the shifted box wraps onto itself.
    const RobustStateSpec spec(1, 8, 3);
    const ZqVector e(8, {3});
    ASSERT_FALSE(spec.closed_form_applies(e));
    ASSERT_NEAR(spec.exact_overlap(e), 1.0, 1e-15);
    ASSERT_NEAR(spec.closed_form_overlap(e), 5.0 / 8.0, 1e-15);
}

TEST(robust_state, union_bound_floor) {
    Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const int m = 1 + static_cast<int>(uniform_below(rng, 3));
        const int r = 2 + static_cast<int>(uniform_below(rng, 3));
        const Int q = 64;
        const Int bv = 1 + static_cast<Int>(uniform_below(rng, 2));
        std::vector<Int> e(static_cast<std::size_t>(m));
        for (Int &v : e) {
            v = static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(2 * bv + 1))) - bv;
        }
        const RobustStateSpec spec(m, q, r);
        const double ov = overlap_shifted(create_robust_state(m, q, r), ZqVector(q, e));
        ASSERT_GE(ov + 1e-12, std::pow(1.0 - static_cast<double>(bv) / std::ldexp(1.0, r - 1), m));
        ASSERT_GE(ov + 1e-12, spec.overlap_floor(static_cast<double>(bv)));
    }
}

TEST(robust_state, generation_bound_half_epsilon) {
    // q >= 8 m B_V C sqrt(m n log q) / eps implies overlap >= 1 - eps/2.
    ProtocolParams p;
    p.n = 1;
    p.m = 2;
    p.q = Int{1} << 12;
    p.B_V = 1;
    p.C = 1;
    p.epsilon = 0.05;
    ASSERT_TRUE(p.meets_generation_precondition());
    const int r = p.interval_exponent();
    ASSERT_EQ(r, 9);
    auto s = create_robust_state(p.m, p.q, r);
    for (Int a = -1; a <= 1; ++a) {
        for (Int b = -1; b <= 1; ++b) {
            ASSERT_GE(overlap_shifted(s, ZqVector(p.q, {a, b})), 1 - p.epsilon / 2);
        }
    }
}

TEST(uniform_superposition, examples) {
    auto two = uniform_q_superposition(2);
    ASSERT_EQ(two.state.size(), 2u);
    ASSERT_NEAR(two.state.amp(0), 1 / std::sqrt(2.0), 1e-15);
    ASSERT_DOUBLE_EQ(two.modeled_error, 0.25);
    auto five = uniform_q_superposition(5);
    for (std::size_t i = 0; i < 5; ++i) {
        ASSERT_NEAR(five.state.amp(i), 1 / std::sqrt(5.0), 1e-15);
    }
    ASSERT_DOUBLE_EQ(five.modeled_error, 1.0 / 25.0);
}

TEST(lwe_map, basis_examples) {
    Rng rng(9);
    auto k = small_instance(8, 2, 3, rng);
    const auto layout = lwe_layout(k);
    SparseState zero(layout, {{{0, 0, 0, 5, 6, 7}, 1.0}});
    ASSERT_EQ(apply_lwe_map(zero, k).inner(zero), 1.0);
    SparseState one(layout, {{{1, 0, 0, 0, 0, 0}, 1.0}});
    auto mapped = apply_lwe_map(one, k);
    std::vector<Int> want{1, 0, 0};
    want.insert(want.end(), k.u.coords().begin(), k.u.coords().end());
    ASSERT_EQ(mapped.amplitude_of(want), 1.0);
    ASSERT_THROW(apply_lwe_map(SparseState(RegisterLayout{8, false, 0, 3}, {{{0, 0, 0}, 1.0}}), k), ShapeMismatch);
}

TEST(lwe_map, permutation_on_full_basis) {
    Rng rng(10);
    auto k = small_instance(4, 1, 2, rng);
    std::vector<SparseState::Term> terms;
    for (Int b = 0; b < 2; ++b) {
        for (Int x = 0; x < 4; ++x) {
            for (Int z0 = 0; z0 < 4; ++z0) {
                for (Int z1 = 0; z1 < 4; ++z1) {
                    terms.push_back({{b, x, z0, z1}, static_cast<double>(1 + b + 2 * x + 3 * z0 + 5 * z1)});
                }
            }
        }
    }
    auto s = SparseState::normalized(lwe_layout(k), terms);
    auto t = apply_lwe_map(s, k);
    ASSERT_EQ(t.size(), s.size());
    ASSERT_NEAR(t.norm_sq(), 1.0, 1e-12);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto key = s.basis(i);
        std::vector<Int> image(key.begin(), key.end());
        for (std::size_t j = 0; j < 2; ++j) {
            image[2 + j] = mod_reduce(image[2 + j] + k.A.at(j, 0) * key[1] + key[0] * k.u[j], 4);
        }
        ASSERT_EQ(t.amplitude_of(image), s.amp(i));
    }
}

TEST(prepare_phi, structure_with_override) {
    Rng rng(11);
    ProtocolParams p;
    p.n = 1;
    p.m = 2;
    p.q = 16;
    p.C = 1;
    p.epsilon = 0.5;
    auto k = small_instance(16, 1, 2, rng);
    ASSERT_THROW(prepare_Phi(k, p), ParameterError);
    auto prep = prepare_Phi(k, p, {.override_preconditions = true});
    ASSERT_FALSE(prep.precondition_failures.empty());
    const int r = p.interval_exponent();
    ASSERT_EQ(r, 2);
    ASSERT_EQ(prep.state.size(), static_cast<std::size_t>(2 * 16 * (1 << (2 * r))));
    const double amp = std::pow(2.0, -0.5 * 2 * r) / std::sqrt(2.0 * 16);
    for (std::size_t i = 0; i < prep.state.size(); ++i) {
        ASSERT_NEAR(prep.state.amp(i), amp, 1e-15);
    }
    ASSERT_DOUBLE_EQ(prep.error_budget, 1.0 / 256.0);
}

TEST(prepare_phi, validated_instance_builds) {
    // n=1, m=2, q=32 at C = q / (2 sqrt(m n log q)): r = 1 and the required
    // distance is sqrt(32); pick the first column reaching it.
    ProtocolParams p;
    p.n = 1;
    p.m = 2;
    p.q = 32;
    p.B_V = 1;
    p.C = 32.0 / (2.0 * std::sqrt(10.0));
    p.epsilon = 8.5;
    std::optional<LweInstance> found;
    for (Int a = 0; a < 32 && !found; ++a) {
        for (Int b = 0; b < 32 && !found; ++b) {
            auto k = make_instance(ZqMatrix(32, 2, 1, {a, b}), ZqVector(32, {3}), ZqVector(32, {1, -1}));
            if (validate_instance(k, p).valid()) {
                found = k;
            }
        }
    }
    ASSERT_TRUE(found.has_value());
    auto prep = prepare_Phi(*found, p);
    ASSERT_TRUE(prep.precondition_failures.empty());
    ASSERT_EQ(prep.state.size(), 2u * 32u * 4u);
    ASSERT_DOUBLE_EQ(prep.error_budget, 1.0 / 1024.0);
}

TEST(prepare_phi, shift_corrected_overlap_identity) {
    // <Phi|Phi'> = 1/2 + 1/2 <phi|phi + e>.
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        auto k = small_instance(16, 1, 2, rng);
        ProtocolParams p;
        p.n = 1;
        p.m = 2;
        p.q = 16;
        p.C = 1;
        auto phi = prepare_Phi(k, p, {.override_preconditions = true}).state;
        auto phi_prime = prepare_shift_corrected(k, *k.s_witness, 2);
        const double expected = 0.5 + 0.5 * RobustStateSpec(2, 16, 2).exact_overlap(*k.e_witness);
        ASSERT_NEAR(phi.inner(phi_prime), expected, 1e-12);
    }
}
