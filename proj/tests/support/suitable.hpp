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

// Exact test oracle for sample-count suitability. Enumerates every
// (S', s') pair with |S'| = m - 1 and s' outside S'; each pair is equally
// likely under uniform sampling. Evaluates the function directly and shares
// no code with the sampling path it checks.

#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynsub/oracle.hpp"

namespace dynsub::testing {

struct SuitabilityReport {
  double expected_filtered = 0.0;  // E |Filter(R', G' + S' + s', tau')|
  double clear_probability = 0.0;  // Pr[f(s' | G' + S') >= tau']
  bool filter_condition = false;
  bool quality_condition = false;
  bool suitable() const { return filter_condition && quality_condition; }
};

inline SuitabilityReport EvaluateSuitability(const SetFunction& f,
                                             std::span<const ElementId> pool,
                                             std::span<const ElementId> base,
                                             double threshold, std::size_t m,
                                             double eps_sam, int k) {
  if (pool.size() > 12) throw std::invalid_argument("pool too large to enumerate");
  SuitabilityReport report;
  if (m < 1 || m > pool.size()) return report;

  auto value = [&](std::vector<ElementId> s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s.empty() ? 0.0 : f.Evaluate(s);
  };
  auto clears = [](double gain, double t) { return gain >= t - 1e-9 * t; };

  const std::size_t n = pool.size();
  std::size_t outcomes = 0;
  double filtered_total = 0.0;
  std::size_t cleared = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != m - 1) continue;
    std::vector<ElementId> with_s(base.begin(), base.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) with_s.push_back(pool[i]);
    }
    const double f_prefix = value(with_s);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1u) continue;
      ++outcomes;
      std::vector<ElementId> full = with_s;
      full.push_back(pool[j]);
      const double f_full = value(full);
      if (clears(f_full - f_prefix, threshold)) ++cleared;
      // |Filter(R', full, tau')|, empty once |full| reaches k.
      if (full.size() < static_cast<std::size_t>(k)) {
        for (ElementId e : pool) {
          std::vector<ElementId> plus = full;
          plus.push_back(e);
          if (clears(value(plus) - f_full, threshold)) filtered_total += 1.0;
        }
      }
    }
  }
  report.expected_filtered = filtered_total / static_cast<double>(outcomes);
  report.clear_probability =
      static_cast<double>(cleared) / static_cast<double>(outcomes);
  report.filter_condition =
      report.expected_filtered <=
      (1.0 - eps_sam / 4.0) * static_cast<double>(n) + 1e-12;
  report.quality_condition = report.clear_probability >= 1.0 - 2.0 * eps_sam - 1e-12;
  return report;
}

inline bool CheckSuitable(const SetFunction& f, std::span<const ElementId> pool,
                          std::span<const ElementId> base, double threshold,
                          std::size_t m, double eps_sam, int k) {
  return EvaluateSuitability(f, pool, base, threshold, m, eps_sam, k)
      .suitable();
}

}  // namespace dynsub::testing
