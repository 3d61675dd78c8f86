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

#include <string>
#include <utility>

#include "qlwe/zq.hpp"

namespace qlwe {

// The "good d" sets behind the adaptive hardcore bit, and the tuple
// classification used by the rewinding extractor.

inline void require_d_length(const Bits &d, std::size_t n, Int q, const char *what) {
    if (d.size() != n * static_cast<std::size_t>(bit_length(q))) {
        throw ShapeMismatch(std::string(what) + ": d must have n * ceil(log2 q) bits");
    }
}

/// d . (J(x) xor J(x')) mod 2.
inline int equation_bit(const Bits &d, const ZqVector &x, const ZqVector &xp) {
    const Bits jx = binary_encode(x);
    const Bits jp = binary_encode(xp);
    if (d.size() != jx.size() || jp.size() != jx.size()) {
        throw ShapeMismatch("equation_bit: d, J(x) and J(x') must have equal length");
    }
    int acc = 0;
    for (std::size_t t = 0; t < d.size(); ++t) {
        acc ^= d[t] & (jx[t] ^ jp[t]);
    }
    return acc;
}

/// Coordinate i is <d_i, J(x_i) xor J(x_i - (-1)^b)> mod 2, d_i the i-th
/// ceil(log2 q)-bit block of d.
inline Bits i_map(const Bits &d, int b, const ZqVector &x) {
    const std::size_t n = x.size();
    const Int q = x.modulus();
    require_d_length(d, n, q, "i_map");
    const auto k = static_cast<std::size_t>(bit_length(q));
    const Int step = b ? -1 : 1;
    Bits out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const Bits a = binary_encode(ZqVector(q, {x[i]}));
        const Bits c = binary_encode(ZqVector(q, {x[i] - step}));
        int acc = 0;
        for (std::size_t t = 0; t < k; ++t) {
            acc ^= d[i * k + t] & (a[t] ^ c[t]);
        }
        out[i] = static_cast<std::uint8_t>(acc);
    }
    return out;
}

/// 1-based inclusive coordinate range inspected for G_{b,x}:
/// b = 0 -> [1, n/2 + 1], b = 1 -> [n/2, n], both clipped to [1, n].
inline std::pair<std::size_t, std::size_t> g_range(std::size_t n, int b) {
    if (n % 2 != 0) {
        throw ParameterError("G sets need even n, got n = " + std::to_string(n));
    }
    if (b == 0) {
        return {1, std::min(n, n / 2 + 1)};
    }
    return {std::max<std::size_t>(1, n / 2), n};
}

/// True iff some I_{b,x}(d) coordinate in g_range(n, b) is nonzero.
inline bool in_G_bx(const Bits &d, int b, const ZqVector &x) {
    const auto [lo, hi] = g_range(x.size(), b);
    const Bits I = i_map(d, b, x);
    for (std::size_t i = lo; i <= hi; ++i) {
        if (I[i - 1]) {
            return true;
        }
    }
    return false;
}

/// b = 0: G_{0,x} and G_{1,x-s}; b = 1: G_{0,x+s} and G_{1,x}.
inline bool in_G_sbx(const Bits &d, const ZqVector &s, int b, const ZqVector &x) {
    if (b == 0) {
        return in_G_bx(d, 0, x) && in_G_bx(d, 1, x - s);
    }
    return in_G_bx(d, 0, x + s) && in_G_bx(d, 1, x);
}

/// Exact Pr[d not in G_{b,x}] for uniform d: each I-coordinate is an
/// independent fair bit, since J(x_i) xor J(x_i -+ 1) is never zero.
inline double g_miss_probability(std::size_t n, int b) {
    const auto [lo, hi] = g_range(n, b);
    return std::ldexp(1.0, -static_cast<int>(hi - lo + 1));
}

struct HardcoreTuple {
    int b = 0;
    ZqVector x;
    Bits d;
    int c = 0;
};

enum class TupleClass { InH, InHbar, Neither };

inline const char *tuple_class_name(TupleClass t) {
    switch (t) {
        case TupleClass::InH:
            return "InH";
        case TupleClass::InHbar:
            return "InHbar";
        case TupleClass::Neither:
            return "Neither";
    }
    return "?";
}

/// InH iff d in G_{s,b,x} and c = d . (J(x) xor J(x - (-1)^b s)); InHbar iff
/// d in G_{s,b,x} and c is the other bit; Neither iff d not in G_{s,b,x}.
inline TupleClass classify_tuple(const HardcoreTuple &t, const ZqVector &s) {
    if (!in_G_sbx(t.d, s, t.b, t.x)) {
        return TupleClass::Neither;
    }
    const ZqVector partner = t.b ? t.x + s : t.x - s;
    return t.c == equation_bit(t.d, t.x, partner) ? TupleClass::InH : TupleClass::InHbar;
}

}  // namespace qlwe
