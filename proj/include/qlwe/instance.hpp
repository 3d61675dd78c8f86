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

#include <optional>
#include <string>

#include "qlwe/params.hpp"
#include "qlwe/trapdoor.hpp"

namespace qlwe {

/// k = (m, n, q, A, u) with optional witnesses u = A s + e.
struct LweInstance {
    ZqMatrix A;
    ZqVector u;
    std::optional<ZqVector> s_witness;
    std::optional<ZqVector> e_witness;
    std::optional<double> validated_distance;

    int m() const { return static_cast<int>(A.rows()); }
    int n() const { return static_cast<int>(A.cols()); }
    Int q() const { return A.modulus(); }

    /// True unless witnesses are present and disagree with u.
    bool witnesses_consistent() const {
        if (!s_witness || !e_witness) {
            return true;
        }
        return A * *s_witness + *e_witness == u;
    }
};

inline LweInstance make_instance(ZqMatrix A, const ZqVector &s, const ZqVector &e) {
    if (s.size() != A.cols() || e.size() != A.rows()) {
        throw ShapeMismatch("make_instance: witness lengths must be n and m");
    }
    ZqVector u = A * s + e;
    return LweInstance{std::move(A), std::move(u), s, e, std::nullopt};
}

enum class CheckStatus { Pass, Fail, Unchecked };

inline const char *status_name(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass:
            return "pass";
        case CheckStatus::Fail:
            return "fail";
        default:
            return "unchecked";
    }
}

struct ValidationReport {
    CheckStatus condition_i = CheckStatus::Unchecked;
    CheckStatus condition_ii = CheckStatus::Unchecked;
    CheckStatus distance = CheckStatus::Unchecked;
    CheckStatus witness = CheckStatus::Unchecked;
    /// "bruteforce", "trapdoor_certificate" or "unchecked".
    std::string distance_method = "unchecked";
    /// Exact distance (bruteforce) or certified lower bound (trapdoor).
    std::optional<double> distance_value;
    double required_distance = 0;

    /// Every condition passed; an unchecked distance does not count.
    bool valid() const {
        return condition_i == CheckStatus::Pass && condition_ii == CheckStatus::Pass &&
               distance == CheckStatus::Pass && witness != CheckStatus::Fail;
    }
};

/// Checks membership of k in the verifier's instance set for these parameters.
///
/// The distance is computed by exhaustive enumeration when q^n <= 2^24;
/// otherwise a matching trapdoor (if given) certifies the lower bound
/// q / (2 (rho + 1)) on the max-norm, hence on the Euclidean norm.
inline ValidationReport validate_instance(const LweInstance &k, const ProtocolParams &params,
                                          const GadgetTrapdoor *trapdoor = nullptr) {
    ValidationReport rep;
    rep.required_distance = params.required_distance();
    rep.condition_i = params.condition_i() ? CheckStatus::Pass : CheckStatus::Fail;

    if (k.s_witness && k.e_witness) {
        rep.witness = k.witnesses_consistent() ? CheckStatus::Pass : CheckStatus::Fail;
    }
    if (k.e_witness) {
        rep.condition_ii = static_cast<double>(k.e_witness->inf_norm()) <= params.B_V ? CheckStatus::Pass
                                                                                       : CheckStatus::Fail;
    }

    // Slack absorbs rounding when the required distance is an exact integer root.
    const double slack = 1e-9;
    const Int count = checked_power(k.q(), static_cast<std::size_t>(k.n()));
    if (count >= 0 && count <= kEnumerationLimit) {
        const double d = matrix_distance_bruteforce(k.A);
        rep.distance_method = "bruteforce";
        rep.distance_value = d;
        rep.distance = d + slack >= rep.required_distance ? CheckStatus::Pass : CheckStatus::Fail;
    } else if (trapdoor != nullptr && trapdoor_matches(k.A, *trapdoor)) {
        const double d = trapdoor->certified_distance();
        rep.distance_method = "trapdoor_certificate";
        rep.distance_value = d;
        // A certificate below the requirement proves nothing either way.
        rep.distance = d + slack >= rep.required_distance ? CheckStatus::Pass : CheckStatus::Unchecked;
    }
    return rep;
}

}  // namespace qlwe
