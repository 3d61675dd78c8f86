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
#include <limits>
#include <optional>
#include <string>

#include "qlwe/zq.hpp"

namespace qlwe {

/// Largest q^n the brute-force oracles will enumerate.
inline constexpr Int kEnumerationLimit = Int{1} << 24;

inline void require_enumerable(Int q, std::size_t n, const char *what) {
    const Int count = checked_power(q, n);
    if (count < 0 || count > kEnumerationLimit) {
        throw GuardViolation("enumeration_limit", std::string(what) + ": q^n exceeds 2^24");
    }
}

/// Inversion data for A = [Abar ; G - R*Abar].
///
/// Abar is m_bar x n uniform, G = I_n (x) (1, 2, ..., 2^(k-1))^T is the
/// power-of-two gadget (row i*k + j holds 2^j in column i) and R is a
/// (n*k) x m_bar matrix with entries in {-1, +1}. Then [R | I] * A = G, which
/// turns an LWE sample A*x + e into the gadget sample G*x + (R*e_top + e_bottom).
struct GadgetTrapdoor {
    Int q = 2;
    int k = 1;
    int n = 0;
    int m_bar = 0;
    ZqMatrix R;

    /// rho: the largest row L1 norm of R (centered).
    Int row_l1() const {
        Int best = 0;
        for (std::size_t i = 0; i < R.rows(); ++i) {
            Int s = 0;
            for (std::size_t j = 0; j < R.cols(); ++j) {
                s += std::abs(centered_rep(R.at(i, j), q));
            }
            best = std::max(best, s);
        }
        return best;
    }

    /// Every nonzero x has ||A x||_inf >= q / (2 (rho + 1)): some gadget row of
    /// G x equals q/2, and [R | I] grows max-norms by at most rho + 1.
    double certified_distance() const {
        return static_cast<double>(q) / (2.0 * static_cast<double>(row_l1() + 1));
    }

    /// Errors with ||e||_inf strictly below this always decode.
    double decoding_radius() const {
        return static_cast<double>(q) / (4.0 * static_cast<double>(row_l1() + 1));
    }

    /// Smallest constant C for which q/(C sqrt(n log q)) stays inside the
    /// decoding radius (and the certified distance covers 2q/(C sqrt(n log q))).
    double min_constant() const {
        return 4.0 * static_cast<double>(row_l1() + 1) / std::sqrt(static_cast<double>(n) * std::log2(static_cast<double>(q)));
    }

    /// [R | I] v.
    ZqVector transform(const ZqVector &v) const {
        const auto nk = static_cast<std::size_t>(n) * static_cast<std::size_t>(k);
        if (v.size() != static_cast<std::size_t>(m_bar) + nk) {
            throw ShapeMismatch("trapdoor transform: vector length " + std::to_string(v.size()));
        }
        std::vector<Int> w(nk);
        for (std::size_t i = 0; i < nk; ++i) {
            Int acc = v[static_cast<std::size_t>(m_bar) + i];
            for (std::size_t j = 0; j < static_cast<std::size_t>(m_bar); ++j) {
                acc = (acc + R.at(i, j) * v[j]) % q;
            }
            w[i] = acc;
        }
        return ZqVector(q, std::move(w));
    }

    /// G x.
    ZqVector gadget_image(const ZqVector &x) const {
        std::vector<Int> w;
        w.reserve(x.size() * static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int j = 0; j < k; ++j) {
                w.push_back((x[i] << j) % q);
            }
        }
        return ZqVector(q, std::move(w));
    }
};

struct TrapdoorKeypair {
    ZqMatrix A;
    GadgetTrapdoor trapdoor;
};

/// Smallest m accepted by gentrap for this (n, q).
inline int gentrap_min_rows(int n, Int q) {
    return n * bit_length(q) + n;
}

inline TrapdoorKeypair gentrap(int n, int m, Int q, Rng &rng) {
    check_modulus(q);
    if (!is_power_of_two(q)) {
        throw ParameterError("gentrap requires q to be a power of two, got " + std::to_string(q));
    }
    if (n < 1) {
        throw ParameterError("gentrap requires n >= 1");
    }
    const int k = bit_length(q);
    if (m < gentrap_min_rows(n, q)) {
        throw ParameterError("gentrap: m = " + std::to_string(m) + " is below n*ceil(log2 q) + n = " +
                             std::to_string(gentrap_min_rows(n, q)));
    }
    const int m_bar = m - n * k;
    const auto nk = static_cast<std::size_t>(n * k);

    ZqMatrix abar = ZqMatrix::uniform(q, static_cast<std::size_t>(m_bar), static_cast<std::size_t>(n), rng);
    std::vector<Int> r_entries(nk * static_cast<std::size_t>(m_bar));
    for (Int &v : r_entries) {
        v = random_bit(rng) ? 1 : -1;
    }
    GadgetTrapdoor t{q, k, n, m_bar, ZqMatrix(q, nk, static_cast<std::size_t>(m_bar), std::move(r_entries))};

    std::vector<Int> a;
    a.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
    for (Int e : abar.entries()) {
        a.push_back(e);
    }
    for (std::size_t i = 0; i < nk; ++i) {
        const std::size_t coord = i / static_cast<std::size_t>(k);
        const int power = static_cast<int>(i % static_cast<std::size_t>(k));
        for (std::size_t c = 0; c < static_cast<std::size_t>(n); ++c) {
            Int acc = c == coord ? (Int{1} << power) % q : 0;
            for (std::size_t j = 0; j < static_cast<std::size_t>(m_bar); ++j) {
                acc -= t.R.at(i, j) * abar.at(j, c) % q;
            }
            a.push_back(mod_reduce(acc, q));
        }
    }
    return {ZqMatrix(q, static_cast<std::size_t>(m), static_cast<std::size_t>(n), std::move(a)), std::move(t)};
}

/// True when [R | I] A = G, i.e. the trapdoor belongs to A.
inline bool trapdoor_matches(const ZqMatrix &A, const GadgetTrapdoor &t) {
    if (A.modulus() != t.q || A.cols() != static_cast<std::size_t>(t.n) ||
        A.rows() != static_cast<std::size_t>(t.m_bar + t.n * t.k)) {
        return false;
    }
    for (std::size_t c = 0; c < A.cols(); ++c) {
        ZqVector unit(t.q, A.cols());
        unit = unit.with(c, 1);
        if (!(t.transform(A.column(c)) == t.gadget_image(unit))) {
            return false;
        }
    }
    return true;
}

/// Recovers x from v = A x + e.
///
/// Decodes G x + e' bit by bit from the least significant bit of each
/// coordinate, where e' = R e_top + e_bottom. Succeeds whenever
/// ||e'||_inf < q/4, in particular whenever ||e||_inf < decoding_radius().
/// Throws InversionFailed if the decoded x leaves a gadget residual of max-norm
/// >= q/4, which signals an error too large for the trapdoor or a malformed v.
inline ZqVector invert(const ZqMatrix &A, const GadgetTrapdoor &t, const ZqVector &v) {
    if (v.size() != A.rows() || v.modulus() != A.modulus() || A.cols() != static_cast<std::size_t>(t.n)) {
        throw ShapeMismatch("invert: v must have length m = " + std::to_string(A.rows()));
    }
    const Int q = t.q;
    const ZqVector w = t.transform(v);
    std::vector<Int> x(static_cast<std::size_t>(t.n), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        Int known = 0;
        for (int bit = 0; bit < t.k; ++bit) {
            const int row = t.k - 1 - bit;
            const Int sample = w[i * static_cast<std::size_t>(t.k) + static_cast<std::size_t>(row)];
            const Int shifted = centered_rep(mod_reduce(sample - ((known << row) % q), q), q);
            if (4 * std::abs(shifted) > q) {
                known |= Int{1} << bit;
            }
        }
        x[i] = known;
    }
    ZqVector xhat(q, std::move(x));
    const ZqVector residual = w - t.gadget_image(xhat);
    if (4 * residual.inf_norm() >= q) {
        throw InversionFailed("gadget residual max-norm " + std::to_string(residual.inf_norm()) +
                              " reaches q/4; error too large for the trapdoor");
    }
    return xhat;
}

/// The unique x with ||A x - v|| <= bound, nullopt if none.
/// Throws AmbiguousPreimage when two candidates exist, which means A's distance
/// is below 2*bound.
inline std::optional<ZqVector> invert_bruteforce(const ZqMatrix &A, const ZqVector &v, double bound) {
    require_enumerable(A.modulus(), A.cols(), "invert_bruteforce");
    if (v.size() != A.rows()) {
        throw ShapeMismatch("invert_bruteforce: v must have length m");
    }
    std::optional<ZqVector> found;
    const double limit = bound * bound + 1e-9;
    for_each_vector(A.modulus(), A.cols(), [&](const ZqVector &x) {
        if (static_cast<double>((A * x - v).sq_norm()) <= limit) {
            if (found) {
                throw AmbiguousPreimage("two preimages within the bound; A's distance is below 2*bound");
            }
            found = x;
        }
    });
    return found;
}

/// min over nonzero x of ||A x||^2, computed exactly.
inline Int matrix_distance_sq_bruteforce(const ZqMatrix &A) {
    require_enumerable(A.modulus(), A.cols(), "matrix_distance_bruteforce");
    Int best = std::numeric_limits<Int>::max();
    for_each_vector(A.modulus(), A.cols(), [&](const ZqVector &x) {
        if (!x.is_zero()) {
            best = std::min(best, (A * x).sq_norm());
        }
    });
    return best;
}

/// Distance of A: min over nonzero x of ||A x|| (centered representatives).
inline double matrix_distance_bruteforce(const ZqMatrix &A) {
    return std::sqrt(static_cast<double>(matrix_distance_sq_bruteforce(A)));
}

}  // namespace qlwe
