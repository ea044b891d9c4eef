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
// Set-function oracles.
//
// A SetFunction is an immutable, nonnegative, monotone submodular function
// with f(empty) = 0. It is safe to share between threads. CountingOracle
// wraps one and implements the cost model: every set evaluation that misses
// its value cache counts as one oracle query. Each dynamic run owns its own
// CountingOracle, so counters are sharded per run and summed by the caller.
//

#pragma once

#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynsub/types.hpp"

namespace dynsub {

class SetFunction {
 public:
  virtual ~SetFunction() = default;

  // f(set). `set` must be canonical. Throws std::out_of_range for an id
  // that was never registered with this instance.
  virtual double Evaluate(std::span<const ElementId> set) const = 0;

  virtual bool Contains(ElementId e) const = 0;

  // Every registered id, ascending.
  virtual ElementSet Elements() const = 0;
};

// f(A) = sum of item weights over the union of the items covered by A.
class CoverageFunction final : public SetFunction {
 public:
  using ItemId = std::uint64_t;

  CoverageFunction() = default;

  // Sets the weight of universe item `item`. Items referenced before a
  // weight is set default to 1.0.
  void SetItemWeight(ItemId item, double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw std::invalid_argument("item weight must be finite and >= 0");
    }
    weights_[IndexOf(item)] = weight;
  }

  // Registers element `e` as covering `items`.
  void AddElement(ElementId e, std::span<const ItemId> items) {
    if (covers_.contains(e)) {
      throw std::invalid_argument("duplicate element id " +
                                  std::to_string(e.value));
    }
    std::vector<std::uint32_t> idx;
    idx.reserve(items.size());
    for (ItemId item : items) idx.push_back(IndexOf(item));
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    covers_.emplace(e, std::move(idx));
  }

  double Evaluate(std::span<const ElementId> set) const override {
    std::vector<std::uint32_t> items;
    for (ElementId e : set) {
      const auto& c = CoversOf(e);
      items.insert(items.end(), c.begin(), c.end());
    }
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    double sum = 0.0;
    for (std::uint32_t i : items) sum += weights_[i];
    return sum;
  }

  bool Contains(ElementId e) const override { return covers_.contains(e); }

  ElementSet Elements() const override {
    ElementSet out;
    out.reserve(covers_.size());
    for (const auto& [e, _] : covers_) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t num_items() const { return weights_.size(); }

  // Items covered by `e` with their weights, ascending by item id.
  std::vector<std::pair<ItemId, double>> CoverList(ElementId e) const {
    std::vector<std::pair<ItemId, double>> out;
    for (std::uint32_t i : CoversOf(e)) {
      out.emplace_back(item_ids_[i], weights_[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::uint32_t IndexOf(ItemId item) {
    auto [it, inserted] = item_index_.try_emplace(
        item, static_cast<std::uint32_t>(weights_.size()));
    if (inserted) {
      weights_.push_back(1.0);
      item_ids_.push_back(item);
    }
    return it->second;
  }

  const std::vector<std::uint32_t>& CoversOf(ElementId e) const {
    auto it = covers_.find(e);
    if (it == covers_.end()) {
      throw std::out_of_range("unknown element id " + std::to_string(e.value));
    }
    return it->second;
  }

  std::unordered_map<ElementId, std::vector<std::uint32_t>> covers_;
  std::unordered_map<ItemId, std::uint32_t> item_index_;
  std::vector<double> weights_;
  std::vector<ItemId> item_ids_;
};

// f(A) = sum of per-element weights. Additive, hence monotone submodular.
class ModularFunction final : public SetFunction {
 public:
  ModularFunction() = default;

  void AddElement(ElementId e, double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
      throw std::invalid_argument("element weight must be finite and >= 0");
    }
    if (!weights_.emplace(e, weight).second) {
      throw std::invalid_argument("duplicate element id " +
                                  std::to_string(e.value));
    }
  }

  double Evaluate(std::span<const ElementId> set) const override {
    double sum = 0.0;
    for (ElementId e : set) {
      auto it = weights_.find(e);
      if (it == weights_.end()) {
        throw std::out_of_range("unknown element id " +
                                std::to_string(e.value));
      }
      sum += it->second;
    }
    return sum;
  }

  bool Contains(ElementId e) const override { return weights_.contains(e); }

  ElementSet Elements() const override {
    ElementSet out;
    for (const auto& [e, _] : weights_) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::unordered_map<ElementId, double> weights_;
};

// 128-bit fingerprint of a canonical id list. Collisions are treated as
// impossible.
struct SetFingerprint {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const SetFingerprint&,
                         const SetFingerprint&) = default;
};

inline SetFingerprint Fingerprint(std::span<const ElementId> canonical) {
  std::uint64_t hi = 0x6a09e667f3bcc908ULL ^ canonical.size();
  std::uint64_t lo = 0xbb67ae8584caa73bULL + canonical.size();
  for (ElementId e : canonical) {
    hi = SplitMix64(hi ^ e.value);
    lo = SplitMix64(lo + 0x3c6ef372fe94f82bULL * (e.value + 1)) ^ (lo >> 7);
  }
  return {hi, lo};
}

struct SetFingerprintHash {
  std::size_t operator()(const SetFingerprint& f) const noexcept {
    return static_cast<std::size_t>(f.hi ^ (f.lo * 0x9e3779b97f4a7c15ULL));
  }
};

// Query-counting, value-caching view of a SetFunction. Not thread-safe; give
// each concurrent consumer its own instance over the shared function.
class CountingOracle {
 public:
  static constexpr std::size_t kDefaultCacheCapacity = 1 << 15;

  explicit CountingOracle(std::shared_ptr<const SetFunction> function,
                          std::size_t cache_capacity = kDefaultCacheCapacity)
      : function_(std::move(function)), capacity_(cache_capacity) {
    if (!function_) throw std::invalid_argument("null set function");
  }

  // f(set); `set` need not be sorted.
  double Eval(std::span<const ElementId> set) {
    ElementSet canonical = Canonical(set);
    return EvalCanonical(canonical);
  }

  double EvalCanonical(std::span<const ElementId> canonical) {
    if (canonical.empty()) return 0.0;
    const SetFingerprint key = Fingerprint(canonical);
    if (capacity_ > 0) {
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    ++queries_;
    const double value = function_->Evaluate(canonical);
    Remember(key, value);
    return value;
  }

  // f(e | base) = f(base + e) - f(base).
  double Marginal(ElementId e, std::span<const ElementId> base) {
    if (std::find(base.begin(), base.end(), e) != base.end()) {
      if (!function_->Contains(e)) {
        throw std::out_of_range("unknown element id " +
                                std::to_string(e.value));
      }
      return 0.0;
    }
    return Marginal(e, base, Eval(base));
  }

  // As above with f(base) already known, so only f(base + e) is evaluated.
  double Marginal(ElementId e, std::span<const ElementId> base,
                  double base_value) {
    ElementSet with(base.begin(), base.end());
    with.push_back(e);
    Canonicalize(with);
    if (with.size() == base.size()) return 0.0;
    return std::max(0.0, EvalCanonical(with) - base_value);
  }

  std::uint64_t query_count() const { return queries_; }
  void ResetCount() { queries_ = 0; }
  void ClearCache() {
    cache_.clear();
    order_.clear();
  }

  const SetFunction& function() const { return *function_; }
  const std::shared_ptr<const SetFunction>& shared_function() const {
    return function_;
  }

 private:
  void Remember(const SetFingerprint& key, double value) {
    if (capacity_ == 0) return;
    if (cache_.size() >= capacity_) {
      cache_.erase(order_.front());
      order_.pop_front();
    }
    cache_.emplace(key, value);
    order_.push_back(key);
  }

  std::shared_ptr<const SetFunction> function_;
  std::size_t capacity_;
  std::uint64_t queries_ = 0;
  std::unordered_map<SetFingerprint, double, SetFingerprintHash> cache_;
  std::deque<SetFingerprint> order_;
};

// Parses the coverage text format: one line per element,
//   elem_id item_id[:weight] item_id[:weight] ...
// Weights default to 1.0. An item given two different weights is an error.
// Blank lines and lines starting with '#' are skipped.
inline std::shared_ptr<CoverageFunction> ParseCoverage(std::istream& in,
                                                       const std::string&
                                                           source = "<input>") {
  auto fn = std::make_shared<CoverageFunction>();
  std::unordered_map<CoverageFunction::ItemId, double> seen;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DynsubError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto parse_u64 = [&](const std::string& tok) -> std::uint64_t {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      fail("bad integer '" + tok + "'");
    }
    if (used != tok.size() || tok.front() == '-') fail("bad integer '" + tok + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok) || tok.front() == '#') continue;
    const ElementId e{parse_u64(tok)};
    std::vector<CoverageFunction::ItemId> items;
    while (tokens >> tok) {
      double weight = 1.0;
      const auto colon = tok.find(':');
      const auto item = parse_u64(tok.substr(0, colon));
      if (colon != std::string::npos) {
        const std::string w = tok.substr(colon + 1);
        std::size_t used = 0;
        try {
          weight = std::stod(w, &used);
        } catch (const std::exception&) {
          fail("bad weight '" + w + "'");
        }
        if (used != w.size() || !(weight >= 0.0) || !std::isfinite(weight)) {
          fail("bad weight '" + w + "'");
        }
      }
      if (auto [it, fresh] = seen.try_emplace(item, weight);
          !fresh && it->second != weight) {
        fail("conflicting weights for item " + std::to_string(item));
      }
      items.push_back(item);
    }
    if (fn->Contains(e)) fail("duplicate element id " + std::to_string(e.value));
    fn->AddElement(e, items);
  }
  for (const auto& [item, weight] : seen) fn->SetItemWeight(item, weight);
  return fn;
}

inline std::shared_ptr<CoverageFunction> LoadCoverage(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DynsubError("cannot open instance file '" + path + "'");
  return ParseCoverage(in, path);
}

// Inverse of ParseCoverage; weights printed with 17 significant digits.
inline void WriteCoverage(std::ostream& out, const CoverageFunction& fn) {
  char buf[64];
  for (ElementId e : fn.Elements()) {
    out << e.value;
    for (const auto& [item, weight] : fn.CoverList(e)) {
      std::snprintf(buf, sizeof buf, "%.17g", weight);
      out << ' ' << item << ':' << buf;
    }
    out << '\n';
  }
}

}  // namespace dynsub
