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
#include <string>
#include <vector>

#include "qlwe/sparse_state.hpp"

namespace qlwe {

/// The uniform superposition over I^m, I = {-2^(r-1), ..., 2^(r-1) - 1},
/// described without materializing it.
struct RobustStateSpec {
    int m = 1;
    Int q = 2;
    int r = 1;

    RobustStateSpec(int m_, Int q_, int r_) : m(m_), q(q_), r(r_) {
        check_modulus(q);
        if (m < 1) {
            throw ParameterError("robust state needs m >= 1");
        }
        if (r < 1 || r > 31 || (Int{1} << r) > q) {
            throw ParameterError("robust state needs 1 <= r and 2^r <= q, got r = " + std::to_string(r));
        }
    }

    Int side() const { return Int{1} << r; }
    Int lo() const { return -(Int{1} << (r - 1)); }
    Int hi() const { return (Int{1} << (r - 1)) - 1; }

    /// 2^(-m r / 2).
    double amplitude() const { return std::pow(2.0, -0.5 * m * r); }

    bool contains(Int centered) const { return centered >= lo() && centered <= hi(); }

    /// Uniform draw from I^m, returned as residues.
    ZqVector sample(Rng &rng) const {
        std::vector<Int> z(static_cast<std::size_t>(m));
        for (Int &v : z) {
            v = lo() + static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(side())));
        }
        return ZqVector(q, std::move(z));
    }

    /// |I intersect (I + c)| in Z_q, exact including wrap-around.
    Int shifted_count(Int c) const {
        const Int d = mod_reduce(c, q);
        const Int L = side();
        return std::max<Int>(0, L - d) + std::max<Int>(0, d + L - q);
    }

    /// <phi|phi+e> computed coordinate by coordinate; exact for any e.
    double exact_overlap(const ZqVector &e) const {
        require_length(e);
        double p = 1;
        for (std::size_t i = 0; i < e.size(); ++i) {
            p *= static_cast<double>(shifted_count(e[i])) / static_cast<double>(side());
        }
        return p;
    }

    /// prod_i max(0, 2^r - |e_i|) / 2^r, valid when 2^r + ||e||_inf <= q.
    double closed_form_overlap(const ZqVector &e) const {
        require_length(e);
        double p = 1;
        for (std::size_t i = 0; i < e.size(); ++i) {
            p *= static_cast<double>(std::max<Int>(0, side() - std::abs(e.centered(i)))) / static_cast<double>(side());
        }
        return p;
    }

    bool closed_form_applies(const ZqVector &e) const { return side() + e.inf_norm() <= q; }

    /// 1 - m B / 2^(r-1): the union-bound floor for shifts with ||e||_inf <= B.
    double overlap_floor(double B) const { return 1.0 - m * B / std::ldexp(1.0, r - 1); }

   private:
    void require_length(const ZqVector &e) const {
        if (e.size() != static_cast<std::size_t>(m) || e.modulus() != q) {
            throw ShapeMismatch("shift must have length m and modulus q");
        }
    }
};

/// The robust state as an explicit SparseState on m q-ary registers.
inline SparseState create_robust_state(int m, Int q, int r) {
    const RobustStateSpec spec(m, q, r);
    if (static_cast<double>(m) * r > 24) {
        throw GuardViolation("sparse_terms", "robust state has 2^(m r) > 2^24 terms");
    }
    const double a = spec.amplitude();
    std::vector<SparseState::Term> terms;
    std::vector<Int> c(static_cast<std::size_t>(m), spec.lo());
    while (true) {
        terms.emplace_back(c, a);
        std::size_t i = c.size();
        while (i > 0 && c[i - 1] == spec.hi()) {
            c[i - 1] = spec.lo();
            --i;
        }
        if (i == 0) {
            break;
        }
        ++c[i - 1];
    }
    return SparseState(RegisterLayout{q, false, 0, static_cast<std::size_t>(m)}, std::move(terms));
}

/// <phi|phi+e> = sum_x a_x a_{x-e} for a state on m q-ary registers.
inline double overlap_shifted(const SparseState &state, const ZqVector &e) {
    const auto &L = state.layout();
    if (L.has_bit || L.n_regs != 0 || L.m_regs != e.size() || e.modulus() != L.q) {
        throw ShapeMismatch("overlap_shifted expects a state on exactly m q-ary registers");
    }
    double s = 0;
    std::vector<Int> shifted(e.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto b = state.basis(i);
        for (std::size_t j = 0; j < e.size(); ++j) {
            shifted[j] = mod_reduce(b[j] - e[j], L.q);
        }
        s += state.amp(i) * state.amplitude_of(shifted);
    }
    return s;
}

/// True iff every q-ary register of every support element has centered
/// absolute value < B.
inline bool check_bounded(const SparseState &state, double B) {
    const std::size_t first = state.layout().x_offset();
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto b = state.basis(i);
        for (std::size_t j = first; j < b.size(); ++j) {
            if (!(static_cast<double>(std::abs(centered_rep(b[j], state.modulus()))) < B)) {
                return false;
            }
        }
    }
    return true;
}

/// An exact state together with the error its constant-depth preparation is
/// allowed to incur.
struct BudgetedState {
    SparseState state;
    double modeled_error = 0;
};

/// (1/sqrt(q)) sum_x |x> on one register, with the 1/q^2 preparation budget.
inline BudgetedState uniform_q_superposition(Int q) {
    check_modulus(q);
    if (q > static_cast<Int>(kMaxSparseTerms)) {
        throw GuardViolation("sparse_terms", "uniform superposition over more than 2^24 values");
    }
    std::vector<SparseState::Term> terms;
    const double a = 1.0 / std::sqrt(static_cast<double>(q));
    for (Int x = 0; x < q; ++x) {
        terms.push_back({{x}, a});
    }
    return {SparseState(RegisterLayout{q, false, 1, 0}, std::move(terms)),
            1.0 / (static_cast<double>(q) * static_cast<double>(q))};
}

}  // namespace qlwe
