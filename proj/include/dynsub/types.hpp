// Copyright 2026 The Authors.
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

// Shared vocabulary: element ids, canonical sets, numeric tolerance,
// error types and a portable deterministic RNG helper set.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynsub {

// Opaque id of one inserted element. Ids are never reused within a stream;
// re-inserting a logical element requires a fresh id.
struct ElementId {
  std::uint64_t value = 0;

  friend constexpr auto operator<=>(ElementId, ElementId) = default;
};

inline std::ostream& operator<<(std::ostream& os, ElementId id) {
  return os << id.value;
}

// A set of elements. Functions that say "canonical" expect or return the
// ids sorted ascending without duplicates.
using ElementSet = std::vector<ElementId>;

inline void Canonicalize(ElementSet& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

inline ElementSet Canonical(std::span<const ElementId> set) {
  ElementSet out(set.begin(), set.end());
  Canonicalize(out);
  return out;
}

// Relative tolerance used for every comparison against a threshold.
inline constexpr double kRelTol = 1e-9;

// x >= threshold, forgiving a relative error of kRelTol.
inline bool AtLeast(double x, double threshold) {
  return x >= threshold - kRelTol * std::abs(threshold);
}

class DynsubError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A structural invariant of the dynamic structure was found broken. This is
// always a bug (or a violated caller precondition), never a data condition.
class InvariantViolation : public DynsubError {
 public:
  using DynsubError::DynsubError;
};

using Rng = std::mt19937_64;

// Uniform integer in [0, n). Rejection sampling on the raw 64-bit stream so
// results do not depend on the standard library's distribution code.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformIndex: empty range");
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Uniform real in [0, 1) with 53 random bits.
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform subset of size m drawn without replacement from `pool`, returned
// in draw order. Partial Fisher-Yates over a copy of `pool`; pass a sorted
// pool to make the result a function of the seed alone.
inline ElementSet SampleWithoutReplacement(std::span<const ElementId> pool,
                                           std::size_t m, Rng& rng) {
  if (m > pool.size()) {
    throw std::invalid_argument("SampleWithoutReplacement: m exceeds pool");
  }
  ElementSet work(pool.begin(), pool.end());
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t pick = j + UniformIndex(rng, work.size() - j);
    std::swap(work[j], work[pick]);
  }
  work.resize(m);
  return work;
}

}  // namespace dynsub

template <>
struct std::hash<dynsub::ElementId> {
  std::size_t operator()(dynsub::ElementId id) const noexcept {
    return static_cast<std::size_t>(dynsub::SplitMix64(id.value));
  }
};
