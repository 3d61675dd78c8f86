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

#include "qlwe/subspace.hpp"

#include "gtest/gtest.h"

using namespace qlwe;

namespace {

// Dense oracle: lists every basis vector |Psi_{y,x}>|y> as a full-length
// amplitude vector over (b, x, y), Gram-Schmidt orthonormalizes them and
// returns the squared norm of the projection.
double dense_projected_weight(const SparseState &state, const LweInstance &k, const ZqVector &s, double beta) {
    const Int q = k.q();
    const auto n = static_cast<std::size_t>(k.n());
    const auto m = static_cast<std::size_t>(k.m());
    const Int xs = checked_power(q, n);
    const Int ys = checked_power(q, m);
    const auto dim = static_cast<std::size_t>(2 * xs * ys);
    auto index = [&](Int b, const ZqVector &x, const ZqVector &y) {
        Int xi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            xi = xi * q + x[i];
        }
        Int yi = 0;
        for (std::size_t i = 0; i < m; ++i) {
            yi = yi * q + y[i];
        }
        return static_cast<std::size_t>((b * xs + xi) * ys + yi);
    };
    std::vector<double> psi(dim, 0.0);
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto t = state.basis(i);
        const ZqVector x(q, std::vector<Int>(t.begin() + 1, t.begin() + 1 + static_cast<std::ptrdiff_t>(n)));
        const ZqVector y(q, std::vector<Int>(t.begin() + 1 + static_cast<std::ptrdiff_t>(n), t.end()));
        psi[index(t[0], x, y)] = state.amp(i);
    }
    std::vector<std::vector<double>> basis;
    for_each_vector(q, n, [&](const ZqVector &x) {
        for_each_vector(q, m, [&](const ZqVector &y) {
            if ((k.A * x - y).norm() > beta * (1 + 1e-12)) {
                return;
            }
            std::vector<double> v(dim, 0.0);
            v[index(0, x, y)] += 1 / std::sqrt(2.0);
            v[index(1, x - s, y)] += 1 / std::sqrt(2.0);
            for (const auto &u : basis) {
                double dot = 0;
                for (std::size_t i = 0; i < dim; ++i) {
                    dot += u[i] * v[i];
                }
                for (std::size_t i = 0; i < dim; ++i) {
                    v[i] -= dot * u[i];
                }
            }
            double norm = 0;
            for (double a : v) {
                norm += a * a;
            }
            if (norm > 1e-18) {
                for (double &a : v) {
                    a /= std::sqrt(norm);
                }
                basis.push_back(std::move(v));
            }
        });
    });
    double weight = 0;
    for (const auto &u : basis) {
        double dot = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            dot += u[i] * psi[i];
        }
        weight += dot * dot;
    }
    return weight;
}

ProtocolParams small_params(Int q, double C) {
    ProtocolParams p;
    p.n = 1;
    p.m = 2;
    p.q = q;
    p.C = C;
    p.B_V = 1;
    p.epsilon = 0.5;
    return p;
}

SparseState random_state(const RegisterLayout &L, std::size_t support, Rng &rng) {
    std::vector<SparseState::Term> terms;
    for (std::size_t i = 0; i < support; ++i) {
        std::vector<Int> key{random_bit(rng)};
        for (std::size_t j = 0; j < L.n_regs + L.m_regs; ++j) {
            key.push_back(static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(L.q))));
        }
        terms.emplace_back(std::move(key), uniform01(rng) - 0.4);
    }
    return SparseState::normalized(L, terms);
}

}  // namespace

TEST(subspace, oracle_lists_ball_around_lattice_points) {
    Rng rng(41);
    auto k = make_instance(ZqMatrix(8, 2, 1, {1, 3}), ZqVector(8, {2}), ZqVector(8, {0, 1}));
    const auto p = small_params(8, 1.2);
    auto o = build_subspace_oracle(k, p);
    const double beta = p.lattice_radius();
    std::size_t pairs = 0;
    for_each_vector(8, 2, [&](const ZqVector &y) {
        std::vector<ZqVector> want;
        for (Int x = 0; x < 8; ++x) {
            const ZqVector xv(8, {x});
            if ((k.A * xv - y).norm() <= beta * (1 + 1e-12)) {
                want.push_back(xv);
            }
        }
        const auto *got = o.preimages(y.coords());
        pairs += want.size();
        if (want.empty()) {
            ASSERT_EQ(got, nullptr);
            return;
        }
        ASSERT_NE(got, nullptr);
        ASSERT_EQ(got->size(), want.size());
    });
    std::size_t listed = 0;
    for (const auto &kv : o.lambda) {
        listed += kv.second.size();
    }
    ASSERT_EQ(listed, pairs);
    ASSERT_EQ(o.s, *k.s_witness);
}

TEST(subspace, recovers_secret_without_witness) {
    auto k = make_instance(ZqMatrix(16, 2, 1, {1, 4}), ZqVector(16, {3}), ZqVector(16, {1, 0}));
    LweInstance stripped{k.A, k.u, std::nullopt, std::nullopt, std::nullopt};
    auto o = build_subspace_oracle(stripped, small_params(16, 5.0));
    ASSERT_EQ(o.s, ZqVector(16, {3}));
}

TEST(subspace, projection_matches_dense_oracle) {
    Rng rng(42);
    for (int t = 0; t < 30; ++t) {
        const Int q = (t % 2) ? 8 : 4;
        auto k = make_instance(ZqMatrix::uniform(q, 2, 1, rng), ZqVector::uniform(q, 1, rng), ZqVector(q, {1, -1}));
        const auto p = small_params(q, 0.8 + uniform01(rng));
        auto o = build_subspace_oracle(k, p);
        auto state = random_state(RegisterLayout{q, true, 1, 2}, 1 + uniform_below(rng, 40), rng);
        ASSERT_NEAR(projected_weight(state, o), dense_projected_weight(state, k, o.s, p.lattice_radius()), 1e-10)
            << "q=" << q << " ambiguous=" << o.ambiguous;
    }
}

TEST(subspace, shift_corrected_state_lies_in_target) {
    // With r small enough that A x + z stays within beta of A x, |Phi'> is in the subspace.
    Rng rng(43);
    for (int t = 0; t < 10; ++t) {
        auto k = make_instance(ZqMatrix::uniform(16, 2, 1, rng), ZqVector::uniform(16, 1, rng), ZqVector(16, {1, 0}));
        const auto p = small_params(16, 1.0);
        ASSERT_GE(p.lattice_radius(), std::sqrt(8.0));
        auto phi_prime = prepare_shift_corrected(k, *k.s_witness, 2);
        ASSERT_NEAR(distance_to_Hk(phi_prime, k, p), 0.0, 1e-12);
    }
}

TEST(subspace, distance_bounded_by_overlap) {
    // ||Phi - Pi Phi||^2 <= ||Phi - Phi'||^2 = 2 - 2 <Phi|Phi'>.
    Rng rng(44);
    for (int t = 0; t < 20; ++t) {
        std::vector<Int> e{static_cast<Int>(uniform_below(rng, 3)) - 1, static_cast<Int>(uniform_below(rng, 3)) - 1};
        auto k = make_instance(ZqMatrix::uniform(16, 2, 1, rng), ZqVector::uniform(16, 1, rng), ZqVector(16, e));
        const auto p = small_params(16, 1.0);
        auto phi = prepare_Phi(k, p, {.override_preconditions = true}).state;
        auto phi_prime = prepare_shift_corrected(k, *k.s_witness, p.interval_exponent());
        const double d = distance_to_Hk(phi, k, p);
        ASSERT_LE(d, 2 - 2 * phi.inner(phi_prime) + 1e-12);
    }
}

TEST(subspace, orthogonal_state_has_unit_distance) {
    auto k = make_instance(ZqMatrix(8, 2, 1, {1, 3}), ZqVector(8, {2}), ZqVector(8, {0, 0}));
    const auto p = small_params(8, 1.2);
    // (|0,x,y> - |1,x-s,y>)/sqrt(2) is orthogonal to every Psi.
    auto minus = SparseState::normalized(RegisterLayout{8, true, 1, 2}, {{{0, 1, 1, 3}, 1.0}, {{1, 7, 1, 3}, -1.0}});
    ASSERT_NEAR(distance_to_Hk(minus, k, p), 1.0, 1e-12);
    auto plus = SparseState::normalized(RegisterLayout{8, true, 1, 2}, {{{0, 1, 1, 3}, 1.0}, {{1, 7, 1, 3}, 1.0}});
    ASSERT_NEAR(distance_to_Hk(plus, k, p), 0.0, 1e-12);
}

TEST(subspace, guards) {
    Rng rng(45);
    auto k = make_instance(ZqMatrix::uniform(1 << 10, 3, 1, rng), ZqVector::uniform(1 << 10, 1, rng),
                           ZqVector(1 << 10, 3));
    ProtocolParams p = small_params(1 << 10, 1.0);
    p.m = 3;
    ASSERT_THROW(build_subspace_oracle(k, p), GuardViolation);
    ASSERT_THROW(projected_weight(SparseState(RegisterLayout{8, true, 1, 1}, {{{0, 0, 0}, 1.0}}),
                                  build_subspace_oracle(make_instance(ZqMatrix(8, 2, 1, {1, 3}), ZqVector(8, {2}),
                                                                      ZqVector(8, 2)),
                                                        small_params(8, 1.2))),
                 ShapeMismatch);
}
