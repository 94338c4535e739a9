// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace chanpred {

namespace detail {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Seedable, splittable random stream.
///
/// A child stream depends only on the parent's seed and the key passed to split(), never on
/// how many numbers the parent has already drawn. Experiments derive one child per work item
/// so serial and parallel execution produce identical numbers.
class RandomStream {
public:
    using engine_type = std::mt19937_64;

    explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(detail::mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    RandomStream split(std::uint64_t key) const {
        return RandomStream(detail::mix64(seed_ ^ detail::mix64(key + 0x632be59bd9b4e019ULL)));
    }

    RandomStream split(std::initializer_list<std::uint64_t> keys) const {
        RandomStream s = *this;
        for (auto k : keys) s = s.split(k);
        return s;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance) {
        std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
        const double re = n(engine_);
        const double im = n(engine_);
        return {re, im};
    }

    engine_type& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    engine_type engine_;
};

}  // namespace chanpred
