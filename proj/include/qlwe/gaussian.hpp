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
#include <numbers>
#include <vector>

#include "qlwe/zq.hpp"

namespace qlwe {

struct GaussianParams {
    Int q = 2;
    double B = 1.0;
};

/// Truncated discrete Gaussian D_{q,B} over centered Z_q: weight
/// exp(-pi x^2 / B^2) on the integers |x| <= B, zero elsewhere.
///
/// Sampling inverts a cumulative table built once at construction, so every
/// draw consumes exactly one uniform01() value.
class TruncatedGaussian {
   public:
    explicit TruncatedGaussian(GaussianParams params) : params_(params) {
        check_modulus(params.q);
        if (!(params.B > 0)) {
            throw ParameterError("Gaussian width B must be positive");
        }
        const Int lo = -((params.q + 1) / 2) + 1;
        const Int hi = params.q / 2;
        const auto radius = static_cast<Int>(std::floor(params.B));
        for (Int x = std::max(lo, -radius); x <= std::min(hi, radius); ++x) {
            support_.push_back(x);
            weights_.push_back(std::exp(-std::numbers::pi * static_cast<double>(x * x) / (params.B * params.B)));
        }
        double acc = 0;
        for (double w : weights_) {
            acc += w;
            cdf_.push_back(acc);
        }
        gamma_ = acc;
    }

    const GaussianParams &params() const { return params_; }
    const std::vector<Int> &support() const { return support_; }
    double normalizer() const { return gamma_; }

    double pmf(Int x) const {
        auto it = std::lower_bound(support_.begin(), support_.end(), x);
        if (it == support_.end() || *it != x) {
            return 0.0;
        }
        return weights_[static_cast<std::size_t>(it - support_.begin())] / gamma_;
    }

    /// A centered integer x with |x| <= B.
    Int sample(Rng &rng) const {
        const double u = uniform01(rng) * gamma_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) {
            --it;
        }
        return support_[static_cast<std::size_t>(it - cdf_.begin())];
    }

    ZqVector sample_vector(std::size_t length, Rng &rng) const {
        std::vector<Int> c(length);
        for (Int &v : c) {
            v = sample(rng);
        }
        return ZqVector(params_.q, std::move(c));
    }

   private:
    GaussianParams params_;
    std::vector<Int> support_;
    std::vector<double> weights_;
    std::vector<double> cdf_;
    double gamma_ = 0;
};

inline Int sample_truncated_gaussian(const GaussianParams &params, Rng &rng) {
    return TruncatedGaussian(params).sample(rng);
}

}  // namespace qlwe
