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

// Reference algorithms: the classic offline greedy and exhaustive search.

#pragma once

#include <cstdint>
#include <span>

#include "dynsub/oracle.hpp"
#include "dynsub/types.hpp"

namespace dynsub {

struct BaselineResult {
  ElementSet chosen;  // canonical
  double value = 0.0;
  std::uint64_t queries = 0;
};

// Largest C(n, k) BruteForceOpt accepts.
inline constexpr double kBruteForceLimit = 1e6;

inline double Binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

// Adds the element of largest marginal gain (ties: smallest id) until k are
// chosen or no element adds value.
inline BaselineResult OfflineGreedy(std::span<const ElementId> ground, int k,
                                    CountingOracle& oracle) {
  if (k < 1) throw std::invalid_argument("OfflineGreedy: k must be >= 1");
  const std::uint64_t before = oracle.query_count();
  ElementSet remaining = Canonical(ground);
  BaselineResult out;
  while (out.chosen.size() < static_cast<std::size_t>(k) &&
         !remaining.empty()) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double gain = oracle.Marginal(remaining[i], out.chosen, out.value);
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    if (!(best_gain > 0.0)) break;
    out.chosen.push_back(remaining[best]);
    Canonicalize(out.chosen);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    out.value = oracle.EvalCanonical(out.chosen);
  }
  out.queries = oracle.query_count() - before;
  return out;
}

// Exact maximum over all subsets of size <= k; ties go to the
// lexicographically smallest id list. Throws if C(|V|, k) > 10^6.
inline BaselineResult BruteForceOpt(std::span<const ElementId> ground, int k,
                                    CountingOracle& oracle) {
  if (k < 1) throw std::invalid_argument("BruteForceOpt: k must be >= 1");
  const ElementSet v = Canonical(ground);
  const std::size_t n = v.size();
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  if (Binomial(n, kk) > kBruteForceLimit) {
    throw DynsubError("BruteForceOpt: C(" + std::to_string(n) + ", " +
                      std::to_string(kk) + ") exceeds the enumeration limit");
  }
  const std::uint64_t before = oracle.query_count();
  BaselineResult out;
  std::vector<std::size_t> idx;
  ElementSet subset;
  for (std::size_t size = 1; size <= kk; ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    while (true) {
      subset.clear();
      for (std::size_t i : idx) subset.push_back(v[i]);
      const double value = oracle.EvalCanonical(subset);
      if (value > out.value || (value == out.value && !out.chosen.empty() &&
                                subset < out.chosen)) {
        out.value = value;
        out.chosen = subset;
      }
      // Next combination in lexicographic order.
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  out.queries = oracle.query_count() - before;
  return out;
}

}  // namespace dynsub
