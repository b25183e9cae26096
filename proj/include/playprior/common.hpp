// Copyright 2026 The playprior Authors.
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

#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace playprior {

using Rng = std::mt19937_64;

/// Thrown when a caller passes arguments outside an operation's domain.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown for unusable configurations (unknown tags, impossible sampling, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown while parsing persisted files. The message names the offending line.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kNumPrimitives = 10;

/// A subset of the 10 primitives, stored as a bitmask (bit i = primitive i).
class ActionSet {
 public:
  constexpr ActionSet() = default;
  constexpr explicit ActionSet(std::uint16_t bits) : bits_(bits & kAll) {}

  static constexpr ActionSet full() { return ActionSet(kAll); }
  static constexpr ActionSet single(int a) { return ActionSet(static_cast<std::uint16_t>(1u << a)); }

  constexpr bool contains(int a) const { return (bits_ >> a) & 1u; }
  constexpr void insert(int a) { bits_ |= static_cast<std::uint16_t>(1u << a); }
  constexpr void erase(int a) { bits_ &= static_cast<std::uint16_t>(~(1u << a)); }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint16_t bits() const { return bits_; }

  constexpr bool subset_of(ActionSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr ActionSet operator&(ActionSet o) const { return ActionSet(bits_ & o.bits_); }
  constexpr ActionSet operator|(ActionSet o) const { return ActionSet(bits_ | o.bits_); }
  constexpr bool operator==(const ActionSet&) const = default;

  std::vector<int> to_vector() const {
    std::vector<int> out;
    for (int a = 0; a < kNumPrimitives; ++a)
      if (contains(a)) out.push_back(a);
    return out;
  }

  /// The i-th member in increasing index order; i < size().
  int nth(int i) const {
    for (int a = 0; a < kNumPrimitives; ++a)
      if (contains(a) && i-- == 0) return a;
    throw InvalidInput("ActionSet::nth out of range");
  }

 private:
  static constexpr std::uint16_t kAll = (1u << kNumPrimitives) - 1;
  std::uint16_t bits_ = 0;
};

/// Uniform integer in [0, n).
inline int uniform_index(Rng& rng, int n) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Derives an independent stream seed from a base seed and a tag (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace playprior
