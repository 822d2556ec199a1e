//
// Copyright 2026 The mialab Authors
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
//

#ifndef MIALAB_COMMON_RNG_HPP
#define MIALAB_COMMON_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace mialab {

// Every random draw in the project goes through this self-contained
// generator (xoshiro256** seeded via splitmix64). The standard library
// engines are portable but its distributions are not, and reproducibility
// across toolchains is part of the harness contract.
namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rng_detail

/// Stable seed derivation: seed(component) is a pure function of the master
/// seed and the component path string, so parallel cells can draw
/// independent streams in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view path) {
  std::uint64_t s = master ^ rng_detail::fnv1a64(path);
  return rng_detail::splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view path,
                                 std::uint64_t ordinal) {
  std::uint64_t s = derive_seed(master, path) ^ (ordinal * 0x9e3779b97f4a7c15ULL);
  return rng_detail::splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = rng_detail::splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rng_detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rng_detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound) {
    // rejection sampling over the largest multiple of bound
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Gumbel(0,1) noise, uniforms clamped away from {0,1} for stability.
  double gumbel() {
    double u = uniform01();
    if (u < 1e-300) u = 1e-300;
    if (u > 1.0 - 1e-16) u = 1.0 - 1e-16;
    return -std::log(-std::log(u));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    if (v.empty()) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mialab

#endif  // MIALAB_COMMON_RNG_HPP
