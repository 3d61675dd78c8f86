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
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qlwe/zq.hpp"

namespace qlwe {

inline constexpr double kNormTolerance = 1e-9;

/// Largest number of basis terms a SparseState may hold.
inline constexpr std::size_t kMaxSparseTerms = std::size_t{1} << 24;

/// Register shape of H_2 (x) H_q^n (x) H_q^m. Any block may be absent.
struct RegisterLayout {
    Int q = 2;
    bool has_bit = false;
    std::size_t n_regs = 0;
    std::size_t m_regs = 0;

    std::size_t width() const { return (has_bit ? 1 : 0) + n_regs + m_regs; }
    std::size_t x_offset() const { return has_bit ? 1 : 0; }
    std::size_t z_offset() const { return x_offset() + n_regs; }

    friend bool operator==(const RegisterLayout &, const RegisterLayout &) = default;
};

/// A normalized real-amplitude state stored as sorted basis tuples.
///
/// Basis tuples are (b, x_1..x_n, z_1..z_m) with canonical residues; they are
/// kept in lexicographic order, so iteration order (and therefore seeded
/// sampling) is fixed.
class SparseState {
   public:
    using Term = std::pair<std::vector<Int>, double>;

    SparseState() = default;

    /// Merges duplicate basis tuples by adding amplitudes and drops exact zeros.
    /// Throws ParameterError unless the squared norm is 1 within 1e-9.
    SparseState(RegisterLayout layout, std::vector<Term> terms) : layout_(layout) {
        build(std::move(terms));
        const double ns = norm_sq();
        if (std::abs(ns - 1.0) > kNormTolerance) {
            throw ParameterError("state is not normalized: squared norm " + std::to_string(ns));
        }
    }

    /// Same as the constructor but rescales to unit norm first.
    static SparseState normalized(RegisterLayout layout, std::vector<Term> terms) {
        SparseState s;
        s.layout_ = layout;
        s.build(std::move(terms));
        const double ns = s.norm_sq();
        if (!(ns > 0)) {
            throw ParameterError("cannot normalize a zero state");
        }
        const double f = 1.0 / std::sqrt(ns);
        for (double &a : s.amps_) {
            a *= f;
        }
        return s;
    }

    const RegisterLayout &layout() const { return layout_; }
    Int modulus() const { return layout_.q; }
    std::size_t size() const { return amps_.size(); }
    std::size_t width() const { return layout_.width(); }

    std::span<const Int> basis(std::size_t i) const {
        return {keys_.data() + i * width(), width()};
    }
    double amp(std::size_t i) const { return amps_[i]; }

    /// Amplitude of a basis tuple (0 when outside the support).
    double amplitude_of(std::span<const Int> tuple) const {
        const std::size_t w = width();
        std::size_t lo = 0;
        std::size_t hi = size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (std::lexicographical_compare(keys_.begin() + static_cast<std::ptrdiff_t>(mid * w),
                                             keys_.begin() + static_cast<std::ptrdiff_t>(mid * w + w), tuple.begin(),
                                             tuple.end())) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if (lo < size() && std::equal(tuple.begin(), tuple.end(), keys_.begin() + static_cast<std::ptrdiff_t>(lo * w))) {
            return amps_[lo];
        }
        return 0.0;
    }

    double norm_sq() const {
        double s = 0;
        for (double a : amps_) {
            s += a * a;
        }
        return s;
    }

    /// <this|other>; layouts must agree.
    double inner(const SparseState &other) const {
        if (!(layout_ == other.layout_)) {
            throw ShapeMismatch("inner product of states with different layouts");
        }
        double s = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            s += amps_[i] * other.amplitude_of(basis(i));
        }
        return s;
    }

    std::vector<Term> terms() const {
        std::vector<Term> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) {
            auto b = basis(i);
            out.emplace_back(std::vector<Int>(b.begin(), b.end()), amps_[i]);
        }
        return out;
    }

    /// Debug dump: one {"basis": [...], "amp": a} object per line, sorted.
    void dump_jsonl(std::ostream &out) const {
        for (std::size_t i = 0; i < size(); ++i) {
            auto b = basis(i);
            nlohmann::json j{{"basis", std::vector<Int>(b.begin(), b.end())}, {"amp", amps_[i]}};
            out << j.dump() << "\n";
        }
    }

   private:
    void build(std::vector<Term> terms) {
        const std::size_t w = layout_.width();
        check_modulus(layout_.q);
        if (terms.size() > kMaxSparseTerms) {
            throw GuardViolation("sparse_terms", "state exceeds 2^24 basis terms");
        }
        for (auto &[key, a] : terms) {
            if (key.size() != w) {
                throw ShapeMismatch("basis tuple has length " + std::to_string(key.size()) + ", layout needs " +
                                    std::to_string(w));
            }
            for (std::size_t i = 0; i < w; ++i) {
                const Int alphabet = (layout_.has_bit && i == 0) ? 2 : layout_.q;
                key[i] = mod_reduce(key[i], alphabet);
            }
        }
        std::sort(terms.begin(), terms.end(), [](const Term &a, const Term &b) { return a.first < b.first; });
        keys_.clear();
        amps_.clear();
        for (std::size_t i = 0; i < terms.size();) {
            double a = 0;
            std::size_t j = i;
            while (j < terms.size() && terms[j].first == terms[i].first) {
                a += terms[j].second;
                ++j;
            }
            if (a != 0.0) {
                keys_.insert(keys_.end(), terms[i].first.begin(), terms[i].first.end());
                amps_.push_back(a);
            }
            i = j;
        }
        if (amps_.empty()) {
            throw ParameterError("state has empty support");
        }
    }

    RegisterLayout layout_;
    std::vector<Int> keys_;
    std::vector<double> amps_;
};

}  // namespace qlwe
