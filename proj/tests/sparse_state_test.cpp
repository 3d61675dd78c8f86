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

#include "qlwe/sparse_state.hpp"

#include <sstream>

#include "gtest/gtest.h"

using namespace qlwe;

namespace {

const RegisterLayout kBitAndTwo{5, true, 1, 1};

}  // namespace

TEST(sparse_state, merges_and_sorts) {
    const double h = 1 / std::sqrt(2.0);
    SparseState s(kBitAndTwo, {{{1, 3, 4}, h / 2}, {{0, 0, 0}, h}, {{1, 3, 4}, h / 2}});
    ASSERT_EQ(s.size(), 2u);
    ASSERT_EQ(std::vector<Int>(s.basis(0).begin(), s.basis(0).end()), (std::vector<Int>{0, 0, 0}));
    ASSERT_NEAR(s.amp(1), h, 1e-15);
    ASSERT_NEAR(s.norm_sq(), 1.0, 1e-12);
}

TEST(sparse_state, reduces_residues) {
    SparseState s(kBitAndTwo, {{{3, -1, 7}, 1.0}});
    ASSERT_EQ(std::vector<Int>(s.basis(0).begin(), s.basis(0).end()), (std::vector<Int>{1, 4, 2}));
}

TEST(sparse_state, cancellation_drops_terms) {
    SparseState s(kBitAndTwo, {{{0, 1, 1}, 0.5}, {{0, 1, 1}, -0.5}, {{0, 2, 2}, 1.0}});
    ASSERT_EQ(s.size(), 1u);
}

TEST(sparse_state, rejects_bad_states) {
    ASSERT_THROW(SparseState(kBitAndTwo, {{{0, 0, 0}, 0.5}}), ParameterError);
    ASSERT_THROW(SparseState(kBitAndTwo, {{{0, 0}, 1.0}}), ShapeMismatch);
    ASSERT_THROW(SparseState::normalized(kBitAndTwo, {{{0, 0, 0}, 0.0}}), ParameterError);
    ASSERT_NO_THROW(SparseState(kBitAndTwo, {{{0, 0, 0}, 1.0 + 2e-10}}));
}

TEST(sparse_state, normalized_rescales) {
    auto s = SparseState::normalized(kBitAndTwo, {{{0, 0, 0}, 3.0}, {{0, 1, 0}, 4.0}});
    ASSERT_NEAR(s.amp(0), 0.6, 1e-15);
    ASSERT_NEAR(s.amp(1), 0.8, 1e-15);
}

TEST(sparse_state, amplitude_lookup_and_inner) {
    auto a = SparseState::normalized(kBitAndTwo, {{{0, 0, 0}, 1.0}, {{1, 2, 3}, 1.0}, {{0, 4, 4}, 1.0}});
    auto b = SparseState::normalized(kBitAndTwo, {{{1, 2, 3}, 1.0}, {{1, 1, 1}, 1.0}});
    const std::vector<Int> probe{1, 2, 3};
    ASSERT_NEAR(a.amplitude_of(probe), 1 / std::sqrt(3.0), 1e-15);
    const std::vector<Int> missing{1, 0, 3};
    ASSERT_EQ(a.amplitude_of(missing), 0.0);
    ASSERT_NEAR(a.inner(b), 1 / std::sqrt(6.0), 1e-15);
    ASSERT_NEAR(a.inner(a), 1.0, 1e-15);
    ASSERT_THROW(a.inner(SparseState(RegisterLayout{5, false, 0, 1}, {{{0}, 1.0}})), ShapeMismatch);
}

TEST(sparse_state, dump_is_sorted_jsonl) {
    auto s = SparseState::normalized(kBitAndTwo, {{{1, 0, 0}, 1.0}, {{0, 1, 2}, 1.0}});
    std::ostringstream out;
    s.dump_jsonl(out);
    std::istringstream in(out.str());
    std::string first;
    std::string second;
    std::getline(in, first);
    std::getline(in, second);
    auto j1 = nlohmann::json::parse(first);
    auto j2 = nlohmann::json::parse(second);
    ASSERT_EQ(j1["basis"], nlohmann::json::array({0, 1, 2}));
    ASSERT_EQ(j2["basis"], nlohmann::json::array({1, 0, 0}));
    ASSERT_NEAR(j1["amp"].get<double>(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(sparse_state, lookup_matches_linear_scan_random) {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        std::vector<SparseState::Term> terms;
        for (int i = 0; i < 40; ++i) {
            terms.push_back({{static_cast<Int>(uniform_below(rng, 2)), static_cast<Int>(uniform_below(rng, 5)),
                              static_cast<Int>(uniform_below(rng, 5))},
                             uniform01(rng) + 0.1});
        }
        auto s = SparseState::normalized(kBitAndTwo, terms);
        for (Int b = 0; b < 2; ++b) {
            for (Int x = 0; x < 5; ++x) {
                for (Int z = 0; z < 5; ++z) {
                    double want = 0;
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        auto k = s.basis(i);
                        if (k[0] == b && k[1] == x && k[2] == z) {
                            want = s.amp(i);
                        }
                    }
                    const std::vector<Int> key{b, x, z};
                    ASSERT_EQ(s.amplitude_of(key), want);
                }
            }
        }
    }
}
