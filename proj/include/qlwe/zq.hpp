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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qlwe/errors.hpp"
#include "qlwe/rng.hpp"

namespace qlwe {

using Int = std::int64_t;

/// A bit string stored one bit per byte (0 or 1).
using Bits = std::vector<std::uint8_t>;

/// Moduli are capped so that products of two residues fit in 63 bits.
inline constexpr Int kMaxModulus = Int{1} << 31;

inline void check_modulus(Int q) {
    if (q < 2 || q > kMaxModulus) {
        throw ParameterError("modulus must lie in [2, 2^31], got " + std::to_string(q));
    }
}

constexpr Int mod_reduce(Int a, Int q) {
    Int r = a % q;
    return r < 0 ? r + q : r;
}

/// Representative of a (0 <= a < q) in {-ceil(q/2)+1, ..., floor(q/2)}.
constexpr Int centered_rep(Int a, Int q) {
    return a > q / 2 ? a - q : a;
}

/// ceil(log2 q): the number of bits of one coordinate of J(x).
constexpr int bit_length(Int q) {
    int k = 0;
    while ((Int{1} << k) < q) {
        ++k;
    }
    return k;
}

constexpr bool is_power_of_two(Int q) {
    return q > 0 && (q & (q - 1)) == 0;
}

class ZqVector {
   public:
    ZqVector() = default;

    /// Zero vector.
    ZqVector(Int q, std::size_t length) : q_(q), coords_(length, 0) {
        check_modulus(q);
    }

    /// Reduces every coordinate into [0, q); centered inputs are accepted.
    ZqVector(Int q, std::vector<Int> coords) : q_(q), coords_(std::move(coords)) {
        check_modulus(q);
        for (Int &c : coords_) {
            c = mod_reduce(c, q);
        }
    }

    /// Brace lists always mean coordinates, never a length.
    ZqVector(Int q, std::initializer_list<Int> coords) : ZqVector(q, std::vector<Int>(coords)) {}

    static ZqVector uniform(Int q, std::size_t length, Rng &rng) {
        std::vector<Int> c(length);
        for (Int &v : c) {
            v = static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(q)));
        }
        return ZqVector(q, std::move(c));
    }

    Int modulus() const { return q_; }
    std::size_t size() const { return coords_.size(); }
    Int operator[](std::size_t i) const { return coords_[i]; }
    Int centered(std::size_t i) const { return centered_rep(coords_[i], q_); }
    std::span<const Int> coords() const { return coords_; }

    std::vector<Int> centered_coords() const {
        std::vector<Int> out(coords_.size());
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            out[i] = centered(i);
        }
        return out;
    }

    bool is_zero() const {
        return std::all_of(coords_.begin(), coords_.end(), [](Int c) { return c == 0; });
    }

    /// Max-norm of the centered representative.
    Int inf_norm() const {
        Int best = 0;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            best = std::max(best, std::abs(centered(i)));
        }
        return best;
    }

    /// Squared Euclidean norm of the centered representative.
    Int sq_norm() const {
        Int s = 0;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            const Int c = centered(i);
            s += c * c;
        }
        return s;
    }

    double norm() const { return std::sqrt(static_cast<double>(sq_norm())); }

    ZqVector with(std::size_t i, Int value) const {
        ZqVector out = *this;
        out.coords_.at(i) = mod_reduce(value, q_);
        return out;
    }

    friend bool operator==(const ZqVector &a, const ZqVector &b) {
        return a.q_ == b.q_ && a.coords_ == b.coords_;
    }
    friend bool operator<(const ZqVector &a, const ZqVector &b) {
        return a.coords_ < b.coords_;
    }

    friend ZqVector operator+(const ZqVector &a, const ZqVector &b) {
        a.require_same_shape(b);
        ZqVector out = a;
        for (std::size_t i = 0; i < out.coords_.size(); ++i) {
            out.coords_[i] = mod_reduce(a.coords_[i] + b.coords_[i], a.q_);
        }
        return out;
    }
    friend ZqVector operator-(const ZqVector &a, const ZqVector &b) {
        a.require_same_shape(b);
        ZqVector out = a;
        for (std::size_t i = 0; i < out.coords_.size(); ++i) {
            out.coords_[i] = mod_reduce(a.coords_[i] - b.coords_[i], a.q_);
        }
        return out;
    }
    friend ZqVector operator-(const ZqVector &a) {
        ZqVector out = a;
        for (Int &c : out.coords_) {
            c = mod_reduce(-c, a.q_);
        }
        return out;
    }
    friend ZqVector operator*(Int scalar, const ZqVector &a) {
        ZqVector out = a;
        const Int s = mod_reduce(scalar, a.q_);
        for (Int &c : out.coords_) {
            c = (c * s) % a.q_;
        }
        return out;
    }

   private:
    void require_same_shape(const ZqVector &b) const {
        if (q_ != b.q_ || coords_.size() != b.coords_.size()) {
            throw ShapeMismatch("ZqVector operands differ in modulus or length");
        }
    }

    Int q_ = 2;
    std::vector<Int> coords_;
};

/// Dense m x n matrix over Z_q, row-major.
class ZqMatrix {
   public:
    ZqMatrix() = default;

    ZqMatrix(Int q, std::size_t rows, std::size_t cols)
        : q_(q), rows_(rows), cols_(cols), entries_(rows * cols, 0) {
        check_modulus(q);
    }

    ZqMatrix(Int q, std::size_t rows, std::size_t cols, std::vector<Int> entries)
        : q_(q), rows_(rows), cols_(cols), entries_(std::move(entries)) {
        check_modulus(q);
        if (entries_.size() != rows * cols) {
            throw ShapeMismatch("matrix entry count " + std::to_string(entries_.size()) +
                                " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
        }
        for (Int &e : entries_) {
            e = mod_reduce(e, q);
        }
    }

    static ZqMatrix uniform(Int q, std::size_t rows, std::size_t cols, Rng &rng) {
        std::vector<Int> e(rows * cols);
        for (Int &v : e) {
            v = static_cast<Int>(uniform_below(rng, static_cast<std::uint64_t>(q)));
        }
        return ZqMatrix(q, rows, cols, std::move(e));
    }

    /// The m x n matrix with ones on the leading diagonal.
    static ZqMatrix identity_embedding(Int q, std::size_t rows, std::size_t cols) {
        ZqMatrix out(q, rows, cols);
        for (std::size_t i = 0; i < std::min(rows, cols); ++i) {
            out.entries_[i * cols + i] = 1;
        }
        return out;
    }

    Int modulus() const { return q_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Int at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    std::span<const Int> entries() const { return entries_; }

    ZqVector column(std::size_t j) const {
        std::vector<Int> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            c[i] = at(i, j);
        }
        return ZqVector(q_, std::move(c));
    }

    ZqVector operator*(const ZqVector &x) const {
        if (x.size() != cols_ || x.modulus() != q_) {
            throw ShapeMismatch("matrix-vector product: expected length " + std::to_string(cols_) +
                                " mod " + std::to_string(q_));
        }
        std::vector<Int> out(rows_, 0);
        for (std::size_t i = 0; i < rows_; ++i) {
            Int acc = 0;
            const Int *row = entries_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                acc = (acc + row[j] * x[j]) % q_;
            }
            out[i] = acc;
        }
        return ZqVector(q_, std::move(out));
    }

    /// [column | this], i.e. the column is prepended on the left.
    ZqMatrix prepend_column(const ZqVector &column) const {
        if (column.size() != rows_ || column.modulus() != q_) {
            throw ShapeMismatch("prepend_column: length mismatch");
        }
        std::vector<Int> e;
        e.reserve(rows_ * (cols_ + 1));
        for (std::size_t i = 0; i < rows_; ++i) {
            e.push_back(column[i]);
            for (std::size_t j = 0; j < cols_; ++j) {
                e.push_back(at(i, j));
            }
        }
        return ZqMatrix(q_, rows_, cols_ + 1, std::move(e));
    }

    friend bool operator==(const ZqMatrix &a, const ZqMatrix &b) {
        return a.q_ == b.q_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

   private:
    Int q_ = 2;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Int> entries_;
};

/// J(x): each coordinate's canonical [0,q) representative in ceil(log2 q)
/// little-endian bits, coordinates concatenated in order.
inline Bits binary_encode(const ZqVector &x) {
    const int k = bit_length(x.modulus());
    Bits out;
    out.reserve(x.size() * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int j = 0; j < k; ++j) {
            out.push_back(static_cast<std::uint8_t>((x[i] >> j) & 1));
        }
    }
    return out;
}

/// Inverse of binary_encode on its image.
inline ZqVector binary_decode(const Bits &bits, Int q, std::size_t length) {
    const auto k = static_cast<std::size_t>(bit_length(q));
    if (bits.size() != k * length) {
        throw ShapeMismatch("binary_decode: expected " + std::to_string(k * length) + " bits");
    }
    std::vector<Int> c(length, 0);
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            c[i] |= static_cast<Int>(bits[i * k + j] & 1) << j;
        }
    }
    return ZqVector(q, std::move(c));
}

inline Bits xor_bits(const Bits &a, const Bits &b) {
    if (a.size() != b.size()) {
        throw ShapeMismatch("xor_bits: length mismatch");
    }
    Bits out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((a[i] ^ b[i]) & 1);
    }
    return out;
}

/// Inner product over GF(2).
inline int dot_gf2(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) {
        throw ShapeMismatch("dot_gf2: length mismatch");
    }
    int acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc ^= (a[i] & b[i]) & 1;
    }
    return acc;
}

inline Bits random_bits(std::size_t length, Rng &rng) {
    Bits out(length);
    for (auto &b : out) {
        b = static_cast<std::uint8_t>(random_bit(rng));
    }
    return out;
}

/// q^n as an exact count, or nullopt-like sentinel -1 on overflow past 2^62.
inline Int checked_power(Int q, std::size_t n) {
    Int out = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (out > (Int{1} << 62) / q) {
            return -1;
        }
        out *= q;
    }
    return out;
}

/// Calls f(x) for every x in Z_q^n in lexicographic order of the coordinates.
template <class F>
void for_each_vector(Int q, std::size_t n, F &&f) {
    std::vector<Int> c(n, 0);
    while (true) {
        f(ZqVector(q, c));
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++c[i] < q) {
                break;
            }
            c[i] = 0;
            if (i == 0) {
                return;
            }
        }
        if (n == 0) {
            return;
        }
    }
}

}  // namespace qlwe
