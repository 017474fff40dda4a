/*
   Copyright 2026 the nsf authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cmath>
#include <cstdint>

namespace nsf {

/// Counter-based random stream built on the splitmix64 finalizer. A draw at
/// position i is a pure function of (key, i), so sub-streams derived from a
/// master seed are reproducible and order-independent, and coupled coarse/fine
/// Brownian paths can address the same underlying increments by index.
/// Not re-entrant per stream; distinct streams may run in parallel.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : key_(key) {}

    /// Derive an independent sub-stream key from (key, words...).
    template <class... W>
    static std::uint64_t derive(std::uint64_t key, W... words) {
        std::uint64_t k = key;
        ((k = mix(k ^ mix(static_cast<std::uint64_t>(words) + 0x9E3779B97F4A7C15ULL))), ...);
        return k;
    }

    std::uint64_t uint_at(std::uint64_t i) const {
        return mix(key_ + (i + 1) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform in (0, 1], suitable for the log in Box-Muller.
    double uniform_at(std::uint64_t i) const {
        return (static_cast<double>(uint_at(i) >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal at position i (Box-Muller cosine branch; each normal
    /// consumes two underlying uniforms at fixed indices 2i, 2i+1).
    double normal_at(std::uint64_t i) const {
        double u1 = uniform_at(2 * i);
        double u2 = uniform_at(2 * i + 1);
        constexpr double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    std::uint64_t next_uint() { return uint_at(cursor_++); }
    double next_uniform() { return uniform_at(cursor_advance()); }
    double next_normal() { return normal_at(cursor_advance()); }

    std::uint64_t key() const { return key_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t cursor_advance() { return cursor_++; }

    std::uint64_t key_;
    std::uint64_t cursor_ = 0;
};

}  // namespace nsf
