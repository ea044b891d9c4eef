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

// Removes the known-OPT assumption by keeping one DynamicRun per geometric
// guess OPT_p = (1 + eps_opt)^p. Element e joins run p iff
// f({e}) lies in [eps * OPT_p / (2k), OPT_p]. Runs are created on their first
// member and dropped once every member has been deleted.

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynsub/dyncore.hpp"
#include "dynsub/oracle.hpp"
#include "dynsub/types.hpp"

namespace dynsub {

// Inclusive range of run indices; empty when lo > hi.
struct RunRange {
  int lo = 0;
  int hi = -1;

  bool empty() const { return lo > hi; }
  std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>(hi - lo + 1);
  }
  bool contains(int p) const { return lo <= p && p <= hi; }
  friend bool operator==(const RunRange&, const RunRange&) = default;
};

namespace internal {

// log_{base}(x) with values within the relative tolerance of an integer
// snapped onto it, so exact powers are not lost to rounding.
inline double SnappedLog(double x, double eps) {
  const double v = std::log(x) / std::log1p(eps);
  const double r = std::round(v);
  return std::abs(v - r) <= kRelTol * std::max(1.0, std::abs(r)) ? r : v;
}

}  // namespace internal

// Run indices p with f_e in [eps * OPT_p / (2k), OPT_p]:
// p_lo = ceil(log(f_e)), p_hi = floor(log(2k f_e / eps)), logs base 1+eps_opt.
inline RunRange RunIndexRange(double singleton_value, const Params& params) {
  if (!(singleton_value > 0.0)) return {};
  const double lo =
      std::ceil(internal::SnappedLog(singleton_value, params.eps_opt));
  const double hi = std::floor(internal::SnappedLog(
      2.0 * params.k * singleton_value / params.eps, params.eps_opt));
  return {static_cast<int>(lo), static_cast<int>(hi)};
}

// ceil(log_{1+eps_opt}(2k / eps)) + 1: most runs one update may touch.
inline std::size_t MaxFanOut(const Params& params) {
  return static_cast<std::size_t>(std::ceil(internal::SnappedLog(
             2.0 * params.k / params.eps, params.eps_opt))) +
         1;
}

class ParallelRuns {
 public:
  ParallelRuns(std::shared_ptr<const SetFunction> function, Params params)
      : routing_(std::move(function)), params_(params) {
    params_.Validate();
  }

  void Insert(ElementId e) {
    if (members_.contains(e) || deleted_.contains(e)) {
      throw DynsubError("element id " + std::to_string(e.value) +
                        " was already inserted");
    }
    const double value = routing_.Eval(std::span<const ElementId>(&e, 1));
    const RunRange range = RunIndexRange(value, params_);
    members_.emplace(e, Membership{value, range});
    for (int p = range.lo; p <= range.hi; ++p) {
      auto it = runs_.find(p);
      if (it == runs_.end()) {
        Params run_params = params_;
        run_params.rng_seed =
            SplitMix64(params_.rng_seed ^ (static_cast<std::uint64_t>(p) *
                                           0x9e3779b97f4a7c15ULL));
        it = runs_
                 .try_emplace(p, routing_.shared_function(), OptGuess(p),
                              run_params)
                 .first;
      }
      it->second.run.Insert(e);
      ++it->second.live_members;
    }
  }

  void Delete(ElementId e) {
    auto it = members_.find(e);
    if (it == members_.end()) {
      throw DynsubError("delete of unknown or already deleted element id " +
                        std::to_string(e.value));
    }
    const RunRange range = it->second.range;
    members_.erase(it);
    deleted_.insert(e);
    for (int p = range.lo; p <= range.hi; ++p) {
      auto run_it = runs_.find(p);
      if (run_it == runs_.end()) {
        throw InvariantViolation("member of missing run " + std::to_string(p));
      }
      RunSlot& slot = run_it->second;
      slot.run.Delete(e);
      if (--slot.live_members == 0) {
        retired_queries_ += slot.run.query_count();
        retired_instrumentation_ += slot.run.instrumentation_queries();
        runs_.erase(run_it);
      }
    }
  }

  // Solution of the run with the largest value; ties go to the smallest p.
  Solution BestSolution() const {
    Solution best;
    for (const auto& [p, slot] : runs_) {
      Solution s = slot.run.solution();
      if (s.value > best.value) best = std::move(s);
    }
    return best;
  }

  // Singleton routing evaluations plus every run's queries, including runs
  // that have since been dropped.
  std::uint64_t query_count() const {
    std::uint64_t total = routing_.query_count() + retired_queries_;
    for (const auto& [p, slot] : runs_) total += slot.run.query_count();
    return total;
  }

  std::uint64_t routing_queries() const { return routing_.query_count(); }

  std::uint64_t instrumentation_queries() const {
    std::uint64_t total = retired_instrumentation_;
    for (const auto& [p, slot] : runs_) {
      total += slot.run.instrumentation_queries();
    }
    return total;
  }

  double OptGuess(int p) const {
    return std::pow(1.0 + params_.eps_opt, static_cast<double>(p));
  }

  std::size_t num_runs() const { return runs_.size(); }
  std::size_t live_count() const { return members_.size(); }
  const Params& params() const { return params_; }

  const DynamicRun* run(int p) const {
    auto it = runs_.find(p);
    return it == runs_.end() ? nullptr : &it->second.run;
  }

  std::vector<int> run_indices() const {
    std::vector<int> out;
    for (const auto& [p, _] : runs_) out.push_back(p);
    return out;
  }

  // Recorded run range of a live element; empty range if not live.
  RunRange MembershipOf(ElementId e) const {
    auto it = members_.find(e);
    return it == members_.end() ? RunRange{} : it->second.range;
  }

  // Routing consistency, fan-out bound and every run's own invariants.
  std::vector<std::string> FindInvariantViolations() const {
    std::vector<std::string> out;
    const std::size_t fan_out = MaxFanOut(params_);
    std::map<int, std::size_t> expected_members;
    for (const auto& [e, m] : members_) {
      const ElementSet single{e};
      const double value = routing_.function().Evaluate(single);
      const RunRange fresh = RunIndexRange(value, params_);
      if (!(fresh == m.range) || value != m.singleton_value) {
        out.push_back("element " + std::to_string(e.value) +
                      " routed inconsistently");
      }
      if (m.range.size() > fan_out) {
        out.push_back("element " + std::to_string(e.value) + " joins " +
                      std::to_string(m.range.size()) + " runs");
      }
      for (int p = m.range.lo; p <= m.range.hi; ++p) {
        const double opt = OptGuess(p);
        if (!(AtLeast(value, params_.eps * opt / (2.0 * params_.k)) &&
              AtLeast(opt, value))) {
          out.push_back("element " + std::to_string(e.value) +
                        " outside the value window of run " +
                        std::to_string(p));
        }
        ++expected_members[p];
      }
    }
    for (const auto& [p, slot] : runs_) {
      if (expected_members[p] != slot.live_members ||
          slot.run.live_count() != slot.live_members) {
        out.push_back("run " + std::to_string(p) + " member count mismatch");
      }
      for (auto& v : slot.run.FindInvariantViolations()) {
        out.push_back("run " + std::to_string(p) + ": " + v);
      }
    }
    for (const auto& [p, count] : expected_members) {
      if (count > 0 && !runs_.contains(p)) {
        out.push_back("run " + std::to_string(p) + " missing");
      }
    }
    return out;
  }

  void CheckInvariants() const {
    const auto violations = FindInvariantViolations();
    if (!violations.empty()) {
      std::string msg = "invariant violation:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw InvariantViolation(msg);
    }
  }

 private:
  struct Membership {
    double singleton_value;
    RunRange range;
  };

  struct RunSlot {
    RunSlot(std::shared_ptr<const SetFunction> fn, double opt, Params params)
        : run(std::move(fn), opt, params) {}
    DynamicRun run;
    std::size_t live_members = 0;
  };

  CountingOracle routing_;
  Params params_;
  std::map<int, RunSlot> runs_;
  std::unordered_map<ElementId, Membership> members_;
  std::unordered_set<ElementId> deleted_;
  std::uint64_t retired_queries_ = 0;
  std::uint64_t retired_instrumentation_ = 0;
};

}  // namespace dynsub
