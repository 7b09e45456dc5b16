// Copyright 2026 The qklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace qklab {

/// Mixes two 64-bit values into one with splitmix64 finalization steps.
/// Used to derive independent substreams from a (seed, stream) pair.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

/// Deterministic random stream.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// standard, and all derived draws (uniform, normal, binomial) are produced
/// by fixed in-house transforms rather than std::*_distribution, so a given
/// seed yields the same stream on every platform and standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Substream keyed by (seed, stream): streams with distinct keys are
    /// statistically independent and individually reproducible.
    static Rng keyed(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix64(seed, stream));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a logarithm argument.
    double uniform_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, bound) via rejection.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Standard normal draw (Box-Muller; pairs cached).
    double normal();

    /// Exact Binomial(n, p) draw as a sum of Bernoulli trials.
    long long binomial(long long n, double p);

    /// Seeded Fisher-Yates shuffle of [first, last).
    template <typename It> void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = uniform_below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

    template <typename Container> void shuffle(Container& values) {
        shuffle(values.begin(), values.end());
    }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qklab
