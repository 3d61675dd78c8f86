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

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "qlwe/zq.hpp"

namespace qlwe {

/// Packed GF(2) row vector.
class BitRow {
   public:
    BitRow() = default;
    explicit BitRow(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

    static BitRow from_bits(const Bits &b) {
        BitRow r(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b[i] & 1) {
                r.set(i, true);
            }
        }
        return r;
    }

    std::size_t size() const { return bits_; }
    bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i % 64);
        words_[i / 64] = v ? (words_[i / 64] | mask) : (words_[i / 64] & ~mask);
    }

    BitRow &operator^=(const BitRow &o) {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            words_[w] ^= o.words_[w];
        }
        return *this;
    }

    bool any() const {
        for (auto w : words_) {
            if (w) {
                return true;
            }
        }
        return false;
    }

    /// Index of the lowest set bit; nullopt for the zero row.
    std::optional<std::size_t> lowest() const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            if (words_[w]) {
                return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
            }
        }
        return std::nullopt;
    }

    int dot(const BitRow &o) const {
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            acc ^= words_[w] & o.words_[w];
        }
        return std::popcount(acc) & 1;
    }

    Bits to_bits() const {
        Bits out(bits_);
        for (std::size_t i = 0; i < bits_; ++i) {
            out[i] = get(i);
        }
        return out;
    }

    friend bool operator==(const BitRow &, const BitRow &) = default;

   private:
    std::size_t bits_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Reduced row-echelon basis of a GF(2) span: every basis row has a 1 at its
/// pivot and 0 at the pivots of all other rows.
class Gf2Span {
   public:
    explicit Gf2Span(std::size_t bits) : bits_(bits) {}

    /// Adds v to the span; returns false if it was already inside.
    bool insert(BitRow v) {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (v.get(pivots_[i])) {
                v ^= rows_[i];
            }
        }
        const auto p = v.lowest();
        if (!p) {
            return false;
        }
        for (auto &row : rows_) {
            if (row.get(*p)) {
                row ^= v;
            }
        }
        rows_.push_back(std::move(v));
        pivots_.push_back(*p);
        return true;
    }

    std::size_t rank() const { return rows_.size(); }
    std::size_t bits() const { return bits_; }
    const BitRow &row(std::size_t i) const { return rows_[i]; }
    std::size_t pivot(std::size_t i) const { return pivots_[i]; }

    /// Coordinates of v in the basis (v must lie in the span); bit i of the
    /// result is the coefficient of row i.
    std::uint64_t coordinates(const BitRow &v) const {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (v.get(pivots_[i])) {
                c |= std::uint64_t{1} << i;
            }
        }
        return c;
    }

   private:
    std::size_t bits_;
    std::vector<BitRow> rows_;
    std::vector<std::size_t> pivots_;
};

/// In-place unnormalized Walsh-Hadamard transform; size must be a power of two.
inline void walsh_hadamard(std::vector<double> &v) {
    for (std::size_t h = 1; h < v.size(); h <<= 1) {
        for (std::size_t i = 0; i < v.size(); i += h << 1) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

}  // namespace qlwe
