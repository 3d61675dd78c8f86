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
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qlwe/lwe_state.hpp"
#include "qlwe/measurement.hpp"

namespace qlwe {

// Measuring the last register of |Phi> without building |Phi>.
//
// |Phi> has equal amplitude on the 2 q^n 2^(m r) distinct basis states
// (b, x, z + f(b, x)), z in I^m, so y is distributed as z + f(b, x) with
// (b, x, z) uniform, and the post-measurement state is the uniform
// superposition over every (b', x') with y - f(b', x') in I^m.

enum class PreimageMethod { Exhaustive, Trapdoor };

inline const char *preimage_method_name(PreimageMethod m) {
    return m == PreimageMethod::Exhaustive ? "exhaustive" : "trapdoor";
}

/// Largest q^n searched exhaustively per commitment.
inline constexpr Int kExhaustivePreimageLimit = Int{1} << 20;

/// Lists all (b', x') with y - f(b', x') in I^m.
///
/// The trapdoor route inverts y - b' u for each b' and keeps the result if it
/// lands in the box. It is exact when (a) every box offset decodes,
/// (rho + 1) 2^(r-1) < q/4, and (b) no two x' share a box, which holds when
/// the certified max-norm distance q / (2 (rho + 1)) exceeds 2^r - 1.
class PreimageFinder {
   public:
    PreimageFinder(const LweInstance &k, RobustStateSpec spec, const GadgetTrapdoor *trapdoor = nullptr)
        : k_(&k), spec_(spec), trapdoor_(trapdoor) {
        if (spec.m != k.m() || spec.q != k.q()) {
            throw ShapeMismatch("PreimageFinder: box shape differs from the instance");
        }
        if (trapdoor != nullptr && trapdoor_exact(k, spec, *trapdoor)) {
            method_ = PreimageMethod::Trapdoor;
            return;
        }
        const Int xs = checked_power(k.q(), static_cast<std::size_t>(k.n()));
        if (xs < 0 || xs > kExhaustivePreimageLimit) {
            throw GuardViolation("preimage_search",
                                 "q^n exceeds 2^20 and no trapdoor certifies exact preimage recovery");
        }
        method_ = PreimageMethod::Exhaustive;
    }

    static bool trapdoor_exact(const LweInstance &k, const RobustStateSpec &spec, const GadgetTrapdoor &t) {
        if (!trapdoor_matches(k.A, t)) {
            return false;
        }
        const double half = std::ldexp(1.0, spec.r - 1);
        const bool decodes = static_cast<double>(t.row_l1() + 1) * half * 4.0 < static_cast<double>(k.q());
        const bool unique = t.certified_distance() > static_cast<double>(spec.side() - 1);
        return decodes && unique;
    }

    PreimageMethod method() const { return method_; }

    bool in_box(const ZqVector &offset) const {
        for (std::size_t i = 0; i < offset.size(); ++i) {
            if (!spec_.contains(offset.centered(i))) {
                return false;
            }
        }
        return true;
    }

    /// Sorted by (b', x').
    std::vector<std::pair<int, ZqVector>> find(const ZqVector &y) const {
        std::vector<std::pair<int, ZqVector>> out;
        if (method_ == PreimageMethod::Trapdoor) {
            for (int b = 0; b < 2; ++b) {
                const ZqVector target = b ? y - k_->u : y;
                try {
                    ZqVector x = invert(k_->A, *trapdoor_, target);
                    if (in_box(target - k_->A * x)) {
                        out.emplace_back(b, std::move(x));
                    }
                } catch (const InversionFailed &) {
                }
            }
            return out;
        }
        for (int b = 0; b < 2; ++b) {
            for_each_vector(k_->q(), static_cast<std::size_t>(k_->n()), [&](const ZqVector &x) {
                if (in_box(y - lwe_image(*k_, b, x))) {
                    out.emplace_back(b, x);
                }
            });
        }
        return out;
    }

   private:
    const LweInstance *k_;
    RobustStateSpec spec_;
    const GadgetTrapdoor *trapdoor_;
    PreimageMethod method_ = PreimageMethod::Exhaustive;
};

struct Commitment {
    ZqVector y;
    SparseState collapsed;
    MeasurementRecord record;
};

/// Uniform superposition over the given (b, x) pairs.
inline SparseState uniform_over_preimages(Int q, std::size_t n, const std::vector<std::pair<int, ZqVector>> &pre) {
    if (pre.empty()) {
        throw ParameterError("collapsed state has no preimages");
    }
    const double a = 1.0 / std::sqrt(static_cast<double>(pre.size()));
    std::vector<SparseState::Term> terms;
    for (const auto &[b, x] : pre) {
        std::vector<Int> key{b};
        key.insert(key.end(), x.coords().begin(), x.coords().end());
        terms.emplace_back(std::move(key), a);
    }
    return SparseState(RegisterLayout{q, true, n, 0}, std::move(terms));
}

/// Samples the measurement of the last register of |Phi> and the state left
/// on (b, x), with the same law as prepare_Phi followed by
/// measure_last_register.
inline Commitment commit_structured(const LweInstance &k, const PreimageFinder &finder, const RobustStateSpec &spec,
                                    Rng &rng) {
    const int b = random_bit(rng);
    const ZqVector x = ZqVector::uniform(k.q(), static_cast<std::size_t>(k.n()), rng);
    const ZqVector z = spec.sample(rng);
    ZqVector y = z + lwe_image(k, b, x);
    const auto pre = finder.find(y);
    if (std::find_if(pre.begin(), pre.end(), [&](const auto &p) { return p.first == b && p.second == x; }) ==
        pre.end()) {
        throw Error("preimage search missed the sampled branch");
    }
    // P(y) = |preimages| / (2 q^n 2^(m r)).
    const double log2p = std::log2(static_cast<double>(pre.size())) - 1.0 -
                         static_cast<double>(k.n()) * std::log2(static_cast<double>(k.q())) -
                         static_cast<double>(spec.m) * spec.r;
    std::vector<Int> outcome(y.coords().begin(), y.coords().end());
    return {std::move(y), uniform_over_preimages(k.q(), static_cast<std::size_t>(k.n()), pre),
            MeasurementRecord{"last", std::move(outcome), std::exp2(log2p), log2p, -1.0}};
}

}  // namespace qlwe
