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

//
// Fully dynamic threshold-sampling structure for one guess of OPT.
//
// The structure keeps levels 1..T. Level i holds a residual set R_i of
// elements whose marginal gain against the prefix G_{i-1} = S_1 + ... +
// S_{i-1} is at least tau = OPT / (2k). The residual is split into
// geometric buckets by marginal gain; a uniformly random sample S_i of
// carefully chosen size m_i is drawn from the largest bucket. Insertions are
// buffered lazily in R̄_i (`buffer`) and a level is rebuilt once its buffer
// grows by half. Deletions are recorded in D and a level is rebuilt once
// an eps_del fraction of its chosen bucket has been deleted. The maintained
// output is G_T minus D.
//

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dynsub/oracle.hpp"
#include "dynsub/types.hpp"

namespace dynsub {

struct Params {
  double eps = 0.05;
  double eps_sam = 0.05;
  double eps_buck = 0.05;
  double eps_opt = 0.05;
  double eps_del = 0.05 / 20;
  int k = 1;
  // Scales the ReduceMean trial count; 1.0 is the faithful setting.
  double trial_factor = 1.0;
  std::uint64_t rng_seed = 0;

  // All epsilons derived from `eps` with the standard choice.
  static Params Make(double eps, int k, std::uint64_t seed = 0,
                     double trial_factor = 1.0) {
    Params p;
    p.eps = p.eps_sam = p.eps_buck = p.eps_opt = eps;
    p.eps_del = eps / 20;
    p.k = k;
    p.rng_seed = seed;
    p.trial_factor = trial_factor;
    return p;
  }

  void Validate() const {
    auto bad = [](const std::string& what) {
      throw std::invalid_argument("invalid parameters: " + what);
    };
    if (!(eps > 0.0 && eps < 0.1)) bad("eps must lie in (0, 1/10)");
    if (!(eps_sam > 0.0 && eps_buck > 0.0 && eps_opt > 0.0 && eps_del > 0.0)) {
      bad("all epsilons must be positive");
    }
    if (eps_del > eps_sam / 16 * (1 + kRelTol)) bad("eps_del > eps_sam / 16");
    if (k < 1) bad("k must be >= 1");
    if (!(trial_factor > 0.0) || !std::isfinite(trial_factor)) {
      bad("trial_factor must be positive");
    }
  }

  // floor(log_{1+eps_buck}(2k)): the largest bucket index.
  int MaxBucketIndex() const {
    return static_cast<int>(
        std::floor(std::log(2.0 * k) / std::log1p(eps_buck) + kRelTol));
  }

  // ceil(trial_factor * (4 / eps_sam^2) * ln(200 k^11 / eps_sam)), >= 1.
  std::size_t TrialCount() const {
    const double log_term =
        std::log(200.0) + 11.0 * std::log(static_cast<double>(k)) -
        std::log(eps_sam);
    const double raw = trial_factor * 4.0 / (eps_sam * eps_sam) * log_term;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
  }
};

// floor(log_{1+eps}(ratio)), where a ratio within the relative tolerance
// below a bucket boundary is snapped up onto that boundary.
inline int FloorLogIndex(double ratio, double eps) {
  if (!(ratio > 0.0)) return std::numeric_limits<int>::min() / 2;
  const double base = 1.0 + eps;
  int j = static_cast<int>(std::floor(std::log(ratio) / std::log1p(eps)));
  while (ratio >= std::pow(base, j + 1) * (1.0 - kRelTol)) ++j;
  while (ratio < std::pow(base, j) * (1.0 - kRelTol)) --j;
  return j;
}

// Bucket of an element whose marginal-to-tau ratio is `ratio`, clamped into
// [0, MaxBucketIndex()].
inline int BucketIndex(double ratio, const Params& params) {
  return std::clamp(FloorLogIndex(ratio, params.eps_buck), 0,
                    params.MaxBucketIndex());
}

struct BucketPartition {
  std::vector<ElementSet> buckets;
  // Largest bucket; ties go to the smallest index.
  int argmax_index = 0;
};

// Splits `residual` by marginal gain over tau. `marginals[i]` is the gain of
// residual[i] against the previous prefix; every gain must be >= tau.
inline BucketPartition Bucketize(std::span<const ElementId> residual,
                                 std::span<const double> marginals, double tau,
                                 const Params& params) {
  if (residual.size() != marginals.size()) {
    throw std::invalid_argument("Bucketize: size mismatch");
  }
  BucketPartition part;
  part.buckets.resize(params.MaxBucketIndex() + 1);
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (marginals[i] < tau * (1.0 - kRelTol)) {
      std::ostringstream msg;
      msg << "element " << residual[i] << " has marginal " << marginals[i]
          << " below tau " << tau;
      throw InvariantViolation(msg.str());
    }
    part.buckets[BucketIndex(marginals[i] / tau, params)].push_back(
        residual[i]);
  }
  for (int j = 1; j < static_cast<int>(part.buckets.size()); ++j) {
    if (part.buckets[j].size() > part.buckets[part.argmax_index].size()) {
      part.argmax_index = j;
    }
  }
  return part;
}

inline BucketPartition Bucketize(std::span<const ElementId> residual,
                                 std::span<const ElementId> prev_prefix,
                                 double tau, const Params& params,
                                 CountingOracle& oracle) {
  const double base_value = oracle.Eval(prev_prefix);
  std::vector<double> marginals;
  marginals.reserve(residual.size());
  for (ElementId e : residual) {
    marginals.push_back(oracle.Marginal(e, prev_prefix, base_value));
  }
  return Bucketize(residual, marginals, tau, params);
}

struct FilterResult {
  ElementSet kept;
  // Marginal gain of each kept element against the filtering base.
  std::vector<double> marginals;
};

// Elements of `candidates` whose marginal gain against `base` is at least
// `threshold`; empty once `base` already holds k elements.
inline FilterResult Filter(std::span<const ElementId> candidates,
                           std::span<const ElementId> base, double base_value,
                           double threshold, int k, CountingOracle& oracle) {
  FilterResult out;
  if (base.size() >= static_cast<std::size_t>(k)) return out;
  for (ElementId e : candidates) {
    const double gain = oracle.Marginal(e, base, base_value);
    if (AtLeast(gain, threshold)) {
      out.kept.push_back(e);
      out.marginals.push_back(gain);
    }
  }
  return out;
}

inline FilterResult Filter(std::span<const ElementId> candidates,
                           std::span<const ElementId> base, double threshold,
                           int k, CountingOracle& oracle) {
  if (base.size() >= static_cast<std::size_t>(k)) return {};
  return Filter(candidates, base, oracle.Eval(base), threshold, k, oracle);
}

// Fraction of `trials` repetitions in which a uniform S' of size m-1 from
// `pool` plus a uniform s from pool \ S' gives f(s | base + S') >= threshold.
inline double ReduceMean(std::span<const ElementId> pool,
                         std::span<const ElementId> base, double base_value,
                         double threshold, std::size_t m, std::size_t trials,
                         CountingOracle& oracle, Rng& rng) {
  if (m < 1 || m > pool.size()) {
    throw std::invalid_argument("ReduceMean: sample size out of range");
  }
  if (trials < 1) throw std::invalid_argument("ReduceMean: trials < 1");
  ElementSet work = Canonical(pool);
  ElementSet with_prefix;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    // Partial Fisher-Yates is uniform from any starting arrangement, so the
    // array is reused across trials without resetting.
    for (std::size_t j = 0; j < m; ++j) {
      std::swap(work[j], work[j + UniformIndex(rng, work.size() - j)]);
    }
    double gain;
    if (m == 1) {
      gain = oracle.Marginal(work[0], base, base_value);
    } else {
      with_prefix.assign(base.begin(), base.end());
      with_prefix.insert(with_prefix.end(), work.begin(),
                         work.begin() + static_cast<std::ptrdiff_t>(m - 1));
      Canonicalize(with_prefix);
      gain = oracle.Marginal(work[m - 1], with_prefix,
                             oracle.EvalCanonical(with_prefix));
    }
    if (AtLeast(gain, threshold)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

// Largest sample size whose last draw still clears `threshold` with
// probability about 1 - eps_sam, found by binary search over estimated
// means. `pool` must be non-empty and already filtered at `threshold`
// against `base`, and |base| < k.
inline std::size_t CalcSampleCount(std::span<const ElementId> pool,
                                   std::span<const ElementId> base,
                                   double base_value, double threshold,
                                   const Params& params, CountingOracle& oracle,
                                   Rng& rng) {
  if (pool.empty()) throw std::invalid_argument("CalcSampleCount: empty pool");
  if (base.size() >= static_cast<std::size_t>(params.k)) {
    throw std::invalid_argument("CalcSampleCount: prefix already holds k");
  }
  const std::size_t trials = params.TrialCount();
  const double target = 1.0 - params.eps_sam;
  auto passes = [&](std::size_t m) {
    return AtLeast(
        ReduceMean(pool, base, base_value, threshold, m, trials, oracle, rng),
        target);
  };
  std::size_t lo = 1;
  std::size_t hi =
      std::min(static_cast<std::size_t>(params.k) - base.size(), pool.size());
  if (passes(hi)) return hi;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (passes(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

struct LevelState {
  ElementSet residual;  // R_i at the last reconstruction, canonical
  ElementSet buffer;    // R̄_i: residual plus lazily inserted elements
  ElementSet bucket;    // R_i^{(b(i))}, canonical
  int bucket_index = 0;
  double level_threshold = 0.0;  // (1 + eps_buck)^b(i) * tau
  std::size_t sample_count = 0;
  ElementSet samples;  // S_i in draw order
  std::size_t prefix_end = 0;  // |G_i|
  double g_value = 0.0;        // f(G_i)
  std::size_t deleted_in_bucket = 0;
};

struct Solution {
  ElementSet elements;
  double value = 0.0;
};

class DynamicRun {
 public:
  DynamicRun(std::shared_ptr<const SetFunction> function, double opt_guess,
             Params params, std::span<const ElementId> initial = {})
      : oracle_(std::move(function)),
        params_(params),
        opt_guess_(opt_guess),
        rng_(params.rng_seed) {
    params_.Validate();
    if (!(opt_guess > 0.0) || !std::isfinite(opt_guess)) {
      throw std::invalid_argument("opt_guess must be positive");
    }
    tau_ = opt_guess_ / (2.0 * params_.k);
    levels_.resize(2);
    for (ElementId e : initial) {
      if (!oracle_.function().Contains(e)) {
        throw std::out_of_range("unknown element id " +
                                std::to_string(e.value));
      }
      if (!inserted_.insert(e).second) {
        throw DynsubError("duplicate element id " + std::to_string(e.value));
      }
    }
    levels_[0].residual = Canonical(initial);
    levels_[0].buffer = levels_[0].residual;
    levels_[1].buffer =
        Filter(levels_[0].residual, {}, 0.0, tau_, params_.k, oracle_).kept;
    Reconstruct(1);
  }

  void Insert(ElementId v) {
    if (!oracle_.function().Contains(v)) {
      throw std::out_of_range("unknown element id " + std::to_string(v.value));
    }
    if (!inserted_.insert(v).second) {
      throw DynsubError("element id " + std::to_string(v.value) +
                        " was already inserted");
    }
    levels_[0].buffer.push_back(v);
    const std::size_t top = num_levels() + 1;
    for (std::size_t i = 1; i <= top; ++i) {
      const LevelState& prev = levels_[i - 1];
      if (prev.prefix_end == static_cast<std::size_t>(params_.k)) break;
      if (!AtLeast(oracle_.Marginal(v, prefix(i - 1), prev.g_value), tau_)) {
        break;
      }
      LevelState& lvl = levels_[i];
      lvl.buffer.push_back(v);
      if (i == top || 2 * lvl.buffer.size() >= 3 * lvl.residual.size()) {
        Reconstruct(i);
        break;
      }
    }
  }

  void Delete(ElementId v) {
    if (!inserted_.contains(v)) {
      throw DynsubError("delete of unknown element id " +
                        std::to_string(v.value));
    }
    if (!deleted_.insert(v).second) {
      throw DynsubError("element id " + std::to_string(v.value) +
                        " was already deleted");
    }
    const std::size_t t = num_levels();
    for (std::size_t i = 1; i <= t; ++i) {
      LevelState& lvl = levels_[i];
      if (std::binary_search(lvl.bucket.begin(), lvl.bucket.end(), v)) {
        ++lvl.deleted_in_bucket;
      }
    }
    for (std::size_t i = 1; i <= t; ++i) {
      const LevelState& lvl = levels_[i];
      if (static_cast<double>(lvl.deleted_in_bucket) >=
          params_.eps_del * static_cast<double>(lvl.bucket.size())) {
        Reconstruct(i);
        break;
      }
    }
  }

  // Rebuilds levels i, i+1, ... from R̄_i minus D. Requires 1 <= i <= T+1.
  void Reconstruct(std::size_t i) {
    if (i < 1 || i > num_levels() + 1) {
      throw std::out_of_range("Reconstruct: level out of range");
    }
    ElementSet current;
    {
      ElementSet buf = Canonical(levels_[i].buffer);
      current.reserve(buf.size());
      for (ElementId e : buf) {
        if (!deleted_.contains(e)) current.push_back(e);
      }
    }
    levels_.resize(i + 1);
    levels_[i] = LevelState{};
    levels_[i].residual = current;
    levels_[i].buffer = current;
    levels_[i].prefix_end = levels_[i - 1].prefix_end;
    levels_[i].g_value = levels_[i - 1].g_value;
    prefix_.resize(levels_[i - 1].prefix_end);

    std::vector<double> marginals;
    marginals.reserve(current.size());
    for (ElementId e : current) {
      marginals.push_back(
          oracle_.Marginal(e, prefix_, levels_[i - 1].g_value));
    }

    while (!current.empty()) {
      BucketPartition part = Bucketize(current, marginals, tau_, params_);
      const double prev_value = levels_[i - 1].g_value;
      LevelState& lvl = levels_[i];
      lvl.bucket_index = part.argmax_index;
      lvl.bucket = std::move(part.buckets[part.argmax_index]);
      lvl.level_threshold =
          std::pow(1.0 + params_.eps_buck, lvl.bucket_index) * tau_;
      lvl.sample_count =
          CalcSampleCount(lvl.bucket, prefix_, prev_value, lvl.level_threshold,
                          params_, oracle_, rng_);
      lvl.samples = SampleWithoutReplacement(lvl.bucket, lvl.sample_count, rng_);
      prefix_.insert(prefix_.end(), lvl.samples.begin(), lvl.samples.end());
      lvl.prefix_end = prefix_.size();
      lvl.g_value = oracle_.Eval(prefix_);

      FilterResult next =
          Filter(current, prefix_, lvl.g_value, tau_, params_.k, oracle_);
      const double g_value = lvl.g_value;
      LevelState& nxt = levels_.emplace_back();
      nxt.residual = next.kept;
      nxt.buffer = std::move(next.kept);
      nxt.prefix_end = prefix_.size();
      nxt.g_value = g_value;
      current = nxt.residual;
      marginals = std::move(next.marginals);
      ++i;
    }
  }

  // (G_T minus D, f(G_T minus D)). The evaluation is instrumentation and is
  // tallied in instrumentation_queries(), not query_count().
  Solution solution() const {
    Solution out;
    for (ElementId e : prefix_) {
      if (!deleted_.contains(e)) out.elements.push_back(e);
    }
    Canonicalize(out.elements);
    if (!out.elements.empty()) {
      ++instrumentation_queries_;
      out.value = oracle_.function().Evaluate(out.elements);
    }
    return out;
  }

  // P_i: sum over e in R̂_i of the bucket rank P(e, i) >= 1. Diagnostic only;
  // evaluations bypass the query counter. Requires 1 <= i <= T+1.
  double ComputePotential(std::size_t i) const {
    if (i < 1 || i > num_levels() + 1) {
      throw std::out_of_range("ComputePotential: level out of range");
    }
    const ElementSet live = LiveBuffer(i);
    if (live.empty()) return 0.0;
    const ElementSet base = Canonical(prefix(i - 1));
    const double base_value = RawEval(base);
    double total = 0.0;
    for (ElementId e : live) {
      total += ElementPotential(RawMarginal(e, base, base_value));
    }
    return total;
  }

  // Checks the deterministic structural invariants. Returns one message per
  // violation; empty means all hold. Evaluations bypass the query counter.
  std::vector<std::string> FindInvariantViolations() const;

  void CheckInvariants() const {
    const auto violations = FindInvariantViolations();
    if (!violations.empty()) {
      std::string msg = "invariant violation:";
      for (const auto& v : violations) msg += "\n  " + v;
      throw InvariantViolation(msg);
    }
  }

  std::size_t num_levels() const { return levels_.size() - 2; }
  const LevelState& level(std::size_t i) const { return levels_.at(i); }
  // G_i.
  std::span<const ElementId> prefix(std::size_t i) const {
    return std::span<const ElementId>(prefix_).first(levels_.at(i).prefix_end);
  }
  double tau() const { return tau_; }
  double opt_guess() const { return opt_guess_; }
  const Params& params() const { return params_; }
  const std::unordered_set<ElementId>& deleted() const { return deleted_; }
  bool is_live(ElementId e) const {
    return inserted_.contains(e) && !deleted_.contains(e);
  }
  std::size_t live_count() const { return inserted_.size() - deleted_.size(); }
  std::uint64_t query_count() const { return oracle_.query_count(); }
  std::uint64_t instrumentation_queries() const {
    return instrumentation_queries_;
  }
  CountingOracle& oracle() { return oracle_; }

 private:
  // R̂_i = R̄_i minus D, canonical.
  ElementSet LiveBuffer(std::size_t i) const {
    ElementSet out;
    for (ElementId e : levels_.at(i).buffer) {
      if (!deleted_.contains(e)) out.push_back(e);
    }
    Canonicalize(out);
    return out;
  }

  double RawEval(ElementSet set) const {
    Canonicalize(set);
    return set.empty() ? 0.0 : oracle_.function().Evaluate(set);
  }

  double RawMarginal(ElementId e, const ElementSet& base,
                     double base_value) const {
    ElementSet with = base;
    with.push_back(e);
    return std::max(0.0, RawEval(std::move(with)) - base_value);
  }

  double ElementPotential(double gain) const {
    return static_cast<double>(FloorLogIndex(gain / tau_, params_.eps_buck)) +
           1.0;
  }

  CountingOracle oracle_;
  Params params_;
  double opt_guess_;
  double tau_ = 0.0;
  Rng rng_;
  // levels_[0] holds R̄_0; levels_[1..T] are live levels; levels_[T+1] is the
  // always-empty terminal level.
  std::vector<LevelState> levels_;
  ElementSet prefix_;  // G_T as S_1, S_2, ... in draw order
  std::unordered_set<ElementId> inserted_;
  std::unordered_set<ElementId> deleted_;
  mutable std::uint64_t instrumentation_queries_ = 0;
};

inline std::vector<std::string> DynamicRun::FindInvariantViolations() const {
  std::vector<std::string> out;
  auto report = [&](auto&&... parts) {
    std::ostringstream msg;
    (msg << ... << parts);
    out.push_back(msg.str());
  };
  const std::size_t t = num_levels();
  const auto k = static_cast<std::size_t>(params_.k);

  std::vector<ElementSet> live(t + 2);
  for (std::size_t i = 0; i <= t + 1; ++i) live[i] = LiveBuffer(i);

  // Filter chain: R̂_{i+1} = Filter(R̂_i, G_i, tau).
  for (std::size_t i = 0; i <= t; ++i) {
    const ElementSet base = Canonical(prefix(i));
    ElementSet expected;
    if (base.size() < k) {
      const double base_value = RawEval(base);
      for (ElementId e : live[i]) {
        if (AtLeast(RawMarginal(e, base, base_value), tau_)) {
          expected.push_back(e);
        }
      }
    }
    if (expected != live[i + 1]) {
      report("filter chain broken between levels ", i, " and ", i + 1,
             " (expected ", expected.size(), " elements, found ",
             live[i + 1].size(), ")");
    }
  }

  // Terminal emptiness.
  if (!levels_[t + 1].buffer.empty() || !live[t + 1].empty()) {
    report("terminal level ", t + 1, " is not empty");
  }
  for (std::size_t i = 1; i <= t; ++i) {
    if (live[i].empty()) report("level ", i, " has an empty live buffer");
  }

  // Buffer bound and nesting.
  for (std::size_t i = 1; i <= t; ++i) {
    const LevelState& lvl = levels_[i];
    if (2 * lvl.buffer.size() > 3 * lvl.residual.size()) {
      report("level ", i, " buffer ", lvl.buffer.size(), " exceeds 3/2 of ",
             lvl.residual.size());
    }
  }
  for (std::size_t i = 0; i <= t; ++i) {
    const ElementSet outer = Canonical(levels_[i].buffer);
    const ElementSet inner = Canonical(levels_[i + 1].buffer);
    if (!std::includes(outer.begin(), outer.end(), inner.begin(),
                       inner.end())) {
      report("buffer of level ", i + 1, " is not nested in level ", i);
    }
  }

  // Deletion bound, with the incremental counter cross-checked.
  for (std::size_t i = 1; i <= t; ++i) {
    const LevelState& lvl = levels_[i];
    const auto actual = static_cast<std::size_t>(
        std::count_if(lvl.bucket.begin(), lvl.bucket.end(),
                      [&](ElementId e) { return deleted_.contains(e); }));
    if (actual != lvl.deleted_in_bucket) {
      report("level ", i, " deleted-in-bucket counter ", lvl.deleted_in_bucket,
             " != actual ", actual);
    }
    if (static_cast<double>(actual) >
        params_.eps_del * static_cast<double>(lvl.bucket.size())) {
      report("level ", i, " has ", actual, " deletions in a bucket of ",
             lvl.bucket.size());
    }
  }

  // Budget and per-level bookkeeping.
  std::size_t total = 0;
  for (std::size_t i = 1; i <= t; ++i) {
    const LevelState& lvl = levels_[i];
    total += lvl.sample_count;
    if (lvl.sample_count < 1 || lvl.samples.size() != lvl.sample_count) {
      report("level ", i, " sample count ", lvl.sample_count, " with ",
             lvl.samples.size(), " samples");
    }
    for (ElementId s : lvl.samples) {
      if (!std::binary_search(lvl.bucket.begin(), lvl.bucket.end(), s)) {
        report("level ", i, " sample ", s, " is outside its bucket");
      }
    }
    if (!std::includes(lvl.residual.begin(), lvl.residual.end(),
                       lvl.bucket.begin(), lvl.bucket.end())) {
      report("level ", i, " bucket is not a subset of its residual");
    }
    if (lvl.prefix_end != levels_[i - 1].prefix_end + lvl.sample_count) {
      report("level ", i, " prefix length mismatch");
    }
    const double expected_threshold =
        std::pow(1.0 + params_.eps_buck, lvl.bucket_index) * tau_;
    if (std::abs(lvl.level_threshold - expected_threshold) >
        kRelTol * expected_threshold) {
      report("level ", i, " threshold mismatch");
    }
  }
  if (total > k) report("solution prefix holds ", total, " > k = ", k);

  // Potential: P_i >= P_{i+1}, and 1 <= P(e, i) <= log_{1+eps}(4k) for
  // elements whose singleton value does not exceed the OPT guess.
  const double rank_cap =
      std::log(4.0 * params_.k) / std::log1p(params_.eps_buck) * (1 + kRelTol);
  std::vector<double> potential(t + 2, 0.0);
  for (std::size_t i = 1; i <= t + 1; ++i) {
    const ElementSet base = Canonical(prefix(i - 1));
    const double base_value = RawEval(base);
    for (ElementId e : live[i]) {
      const double p = ElementPotential(RawMarginal(e, base, base_value));
      potential[i] += p;
      if (p < 1.0) report("element ", e, " has potential ", p, " at level ", i);
      if (p > rank_cap && AtLeast(opt_guess_, RawEval(ElementSet{e}))) {
        report("element ", e, " has potential ", p, " above cap at level ", i);
      }
    }
  }
  for (std::size_t i = 1; i <= t; ++i) {
    if (potential[i] < potential[i + 1]) {
      report("potential increases from level ", i, " (", potential[i],
             ") to ", i + 1, " (", potential[i + 1], ")");
    }
  }
  return out;
}

}  // namespace dynsub
