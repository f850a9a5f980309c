// Copyright 2026 The eqvfl Authors
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
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace eqvfl {

/// Source of uniform variates in [0, 1). Measurement code draws exactly one
/// variate per sampled outcome, so tests can force outcomes by scripting it.
class UniformSource {
   public:
    virtual ~UniformSource() = default;
    virtual double next_uniform() = 0;
};

/// SplitMix64 finalizer; used to derive independent stream seeds from keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream keyed by a seed and up to three counters, so
/// that (seed, epoch, batch, sample) style keys yield reproducible, mutually
/// independent streams regardless of evaluation order.
///
/// All conversions from raw 64-bit words are done here rather than through
/// <random> distributions, whose output is implementation-defined.
class RandomStream final : public UniformSource {
   public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t k1 = 0, std::uint64_t k2 = 0, std::uint64_t k3 = 0)
        : engine_(mix64(mix64(mix64(mix64(seed) ^ k1) ^ k2) ^ k3)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_uniform() override { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal variate (Box-Muller, one value per call).
    double normal() {
        const double u1 = 1.0 - next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }
    template <typename T>
    void shuffle(std::vector<T> &values) {
        shuffle(std::span<T>(values));
    }

   private:
    std::mt19937_64 engine_;
};

/// Replays a fixed list of variates, then repeats the last one.
class ScriptedUniform final : public UniformSource {
   public:
    explicit ScriptedUniform(std::vector<double> values) : values_(std::move(values)) {}
    double next_uniform() override {
        const double v = values_.at(pos_ < values_.size() ? pos_ : values_.size() - 1);
        ++pos_;
        return v;
    }

   private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

}  // namespace eqvfl
