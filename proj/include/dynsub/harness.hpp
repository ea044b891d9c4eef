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
// Experiment driver: oblivious update streams, replay through a single
// known-OPT run or the parallel-guess wrapper, per-update query accounting,
// checkpoint quality measurements and CSV / JSON-lines output.
//

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "dynsub/baselines.hpp"
#include "dynsub/dyncore.hpp"
#include "dynsub/oracle.hpp"
#include "dynsub/runs.hpp"
#include "dynsub/types.hpp"

namespace dynsub {

enum class UpdateKind { kInsert, kDelete };

inline const char* ToString(UpdateKind kind) {
  return kind == UpdateKind::kInsert ? "insert" : "delete";
}

struct UpdateEvent {
  UpdateKind kind = UpdateKind::kInsert;
  ElementId element;
  std::size_t t = 0;

  friend bool operator==(const UpdateEvent&, const UpdateEvent&) = default;
};

enum class StreamMode { kInsertThenDelete, kSlidingWindow, kInterleaved };

struct StreamSpec {
  StreamMode mode = StreamMode::kInsertThenDelete;
  std::size_t n = 0;  // number of insertions
  // Deleted fraction, window width, or per-step deletion probability.
  double param = 0.0;
  std::uint64_t seed = 0;
};

// Inserts n elements of `pool` in a seeded random order and interleaves
// deletions according to `spec.mode`. Deletions never depend on any
// algorithm state.
inline std::vector<UpdateEvent> GenerateStream(const StreamSpec& spec,
                                               std::span<const ElementId> pool) {
  if (spec.n > pool.size()) {
    throw std::invalid_argument("stream needs " + std::to_string(spec.n) +
                                " elements but the instance has " +
                                std::to_string(pool.size()));
  }
  switch (spec.mode) {
    case StreamMode::kInsertThenDelete:
      if (!(spec.param >= 0.0 && spec.param <= 1.0)) {
        throw std::invalid_argument("delete fraction must lie in [0, 1]");
      }
      break;
    case StreamMode::kSlidingWindow:
      if (!(spec.param >= 1.0) || spec.param != std::floor(spec.param)) {
        throw std::invalid_argument("window width must be a positive integer");
      }
      break;
    case StreamMode::kInterleaved:
      if (!(spec.param >= 0.0 && spec.param < 1.0)) {
        throw std::invalid_argument("deletion probability must lie in [0, 1)");
      }
      break;
  }

  Rng rng(SplitMix64(spec.seed));
  ElementSet order = Canonical(pool);
  for (std::size_t i = 0; i < spec.n; ++i) {
    std::swap(order[i], order[i + UniformIndex(rng, order.size() - i)]);
  }
  order.resize(spec.n);

  std::vector<UpdateEvent> out;
  auto emit = [&](UpdateKind kind, ElementId e) {
    out.push_back({kind, e, out.size()});
  };
  switch (spec.mode) {
    case StreamMode::kInsertThenDelete: {
      for (ElementId e : order) emit(UpdateKind::kInsert, e);
      const auto count = static_cast<std::size_t>(
          std::llround(spec.param * static_cast<double>(spec.n)));
      for (ElementId e : SampleWithoutReplacement(order, count, rng)) {
        emit(UpdateKind::kDelete, e);
      }
      break;
    }
    case StreamMode::kSlidingWindow: {
      const auto width = static_cast<std::size_t>(spec.param);
      for (std::size_t i = 0; i < order.size(); ++i) {
        emit(UpdateKind::kInsert, order[i]);
        if (i + 1 > width) emit(UpdateKind::kDelete, order[i - width]);
      }
      break;
    }
    case StreamMode::kInterleaved: {
      ElementSet live;
      std::size_t next = 0;
      while (next < order.size()) {
        if (!live.empty() && UniformUnit(rng) < spec.param) {
          const std::size_t pick = UniformIndex(rng, live.size());
          emit(UpdateKind::kDelete, live[pick]);
          live[pick] = live.back();
          live.pop_back();
        } else {
          live.push_back(order[next]);
          emit(UpdateKind::kInsert, order[next++]);
        }
      }
      break;
    }
  }
  return out;
}

// Throws unless every delete targets a live element, no id is inserted
// twice and t runs 0, 1, 2, ...
inline void ValidateStream(std::span<const UpdateEvent> stream) {
  std::unordered_set<ElementId> seen, live;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const UpdateEvent& ev = stream[i];
    if (ev.t != i) throw DynsubError("stream index out of sequence");
    if (ev.kind == UpdateKind::kInsert) {
      if (!seen.insert(ev.element).second) {
        throw DynsubError("id " + std::to_string(ev.element.value) +
                          " inserted twice");
      }
      live.insert(ev.element);
    } else if (live.erase(ev.element) == 0) {
      throw DynsubError("delete of non-live id " +
                        std::to_string(ev.element.value));
    }
  }
}

struct KnownOpt {
  double value = 0.0;
};
struct ParallelGuesses {};
using ExperimentMode = std::variant<KnownOpt, ParallelGuesses>;

struct ExperimentOptions {
  // Record a checkpoint every this many updates; the final update is always
  // a checkpoint. 0 means final only.
  std::size_t checkpoint_every = 0;
  bool check_invariants = false;
  // Greedy runs at a checkpoint only while the live set is at most this big.
  std::size_t greedy_limit = 2000;
};

struct Checkpoint {
  std::size_t t = 0;
  double solution_value = 0.0;
  std::optional<double> greedy_value;
  std::optional<double> opt_value;
  std::size_t live_count = 0;
};

struct StreamMetrics {
  std::vector<UpdateKind> kinds;
  std::vector<std::uint64_t> per_update_queries;
  std::vector<std::size_t> live_counts;
  std::uint64_t cumulative_queries = 0;
  std::vector<Checkpoint> checkpoints;
  // Checkpoint evaluations (solution value, greedy, brute force).
  std::uint64_t instrumentation_queries = 0;

  double MeanQueries() const {
    return per_update_queries.empty()
               ? 0.0
               : static_cast<double>(cumulative_queries) /
                     static_cast<double>(per_update_queries.size());
  }
};

// Replays `stream` in order. Query deltas are taken around each update only,
// so checkpoint evaluations never leak into per_update_queries.
inline StreamMetrics RunExperiment(std::span<const UpdateEvent> stream,
                                   std::shared_ptr<const SetFunction> function,
                                   const Params& params,
                                   const ExperimentMode& mode,
                                   const ExperimentOptions& options = {}) {
  std::unique_ptr<DynamicRun> single;
  std::unique_ptr<ParallelRuns> parallel;
  if (const auto* known = std::get_if<KnownOpt>(&mode)) {
    single = std::make_unique<DynamicRun>(function, known->value, params);
  } else {
    parallel = std::make_unique<ParallelRuns>(function, params);
  }
  auto queries = [&] {
    return single ? single->query_count() : parallel->query_count();
  };
  auto solution = [&] {
    return single ? single->solution() : parallel->BestSolution();
  };
  auto invariants = [&] {
    return single ? single->FindInvariantViolations()
                  : parallel->FindInvariantViolations();
  };

  CountingOracle instrumentation(function, 0);
  StreamMetrics metrics;
  std::unordered_set<ElementId> live;
  for (const UpdateEvent& ev : stream) {
    const std::uint64_t before = queries();
    if (ev.kind == UpdateKind::kInsert) {
      single ? single->Insert(ev.element) : parallel->Insert(ev.element);
      live.insert(ev.element);
    } else {
      single ? single->Delete(ev.element) : parallel->Delete(ev.element);
      live.erase(ev.element);
    }
    const std::uint64_t delta = queries() - before;
    metrics.kinds.push_back(ev.kind);
    metrics.per_update_queries.push_back(delta);
    metrics.live_counts.push_back(live.size());
    metrics.cumulative_queries += delta;

    if (options.check_invariants) {
      const auto violations = invariants();
      if (!violations.empty()) {
        std::string msg = "invariant violation after update t=" +
                          std::to_string(ev.t) + " (" + ToString(ev.kind) +
                          " " + std::to_string(ev.element.value) + "):";
        for (const auto& v : violations) msg += "\n  " + v;
        throw InvariantViolation(msg);
      }
    }

    const bool last = &ev == &stream.back();
    const bool periodic = options.checkpoint_every > 0 &&
                          (ev.t + 1) % options.checkpoint_every == 0;
    if (last || periodic) {
      Checkpoint cp;
      cp.t = ev.t;
      cp.live_count = live.size();
      cp.solution_value = solution().value;
      ElementSet live_set(live.begin(), live.end());
      Canonicalize(live_set);
      if (!live_set.empty() && live_set.size() <= options.greedy_limit) {
        cp.greedy_value =
            OfflineGreedy(live_set, params.k, instrumentation).value;
      }
      if (Binomial(live_set.size(),
                   std::min<std::size_t>(params.k, live_set.size())) <=
          kBruteForceLimit) {
        cp.opt_value = BruteForceOpt(live_set, params.k, instrumentation).value;
      }
      metrics.checkpoints.push_back(cp);
    }
  }
  metrics.instrumentation_queries =
      instrumentation.query_count() +
      (single ? single->instrumentation_queries()
              : parallel->instrumentation_queries());
  return metrics;
}

enum class OutputFormat { kCsv, kJsonLines };

inline constexpr std::string_view kCsvHeader =
    "t,kind,queries,cum_queries,solution_value,greedy_value,opt_value,"
    "live_count";

namespace internal {

inline std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Visits one record per update; checkpoint fields are empty between
// checkpoints.
template <typename Fn>
void ForEachRecord(const StreamMetrics& m, Fn&& fn) {
  std::size_t cp = 0;
  std::uint64_t cum = 0;
  for (std::size_t t = 0; t < m.per_update_queries.size(); ++t) {
    cum += m.per_update_queries[t];
    const Checkpoint* checkpoint = nullptr;
    if (cp < m.checkpoints.size() && m.checkpoints[cp].t == t) {
      checkpoint = &m.checkpoints[cp++];
    }
    fn(t, cum, checkpoint);
  }
}

}  // namespace internal

inline void WriteCsv(std::ostream& out, const StreamMetrics& m) {
  out << kCsvHeader << '\n';
  internal::ForEachRecord(m, [&](std::size_t t, std::uint64_t cum,
                                 const Checkpoint* cp) {
    out << t << ',' << ToString(m.kinds[t]) << ',' << m.per_update_queries[t]
        << ',' << cum << ',';
    if (cp) {
      out << internal::FormatReal(cp->solution_value);
      out << ',';
      if (cp->greedy_value) out << internal::FormatReal(*cp->greedy_value);
      out << ',';
      if (cp->opt_value) out << internal::FormatReal(*cp->opt_value);
    } else {
      out << ",,";
    }
    out << ',' << m.live_counts[t] << '\n';
  });
}

inline void WriteJsonLines(std::ostream& out, const StreamMetrics& m) {
  auto value = [](const std::optional<double>& v) {
    return v ? internal::FormatReal(*v) : std::string("null");
  };
  internal::ForEachRecord(m, [&](std::size_t t, std::uint64_t cum,
                                 const Checkpoint* cp) {
    out << "{\"t\":" << t << ",\"kind\":\"" << ToString(m.kinds[t])
        << "\",\"queries\":" << m.per_update_queries[t]
        << ",\"cum_queries\":" << cum << ",\"solution_value\":"
        << value(cp ? std::optional<double>(cp->solution_value) : std::nullopt)
        << ",\"greedy_value\":" << value(cp ? cp->greedy_value : std::nullopt)
        << ",\"opt_value\":" << value(cp ? cp->opt_value : std::nullopt)
        << ",\"live_count\":" << m.live_counts[t] << "}\n";
  });
}

inline void EmitResults(const StreamMetrics& metrics, const std::string& path,
                        OutputFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DynsubError("cannot open output file '" + path + "'");
  if (format == OutputFormat::kCsv) {
    WriteCsv(out, metrics);
  } else {
    WriteJsonLines(out, metrics);
  }
  out.flush();
  if (!out) throw DynsubError("write failed for output file '" + path + "'");
}

// Parsers for the command-line forms `insert-then-delete:<frac>`,
// `window:<w>`, `interleaved:<p>` and `known-opt:<v>` / `parallel`.
inline StreamSpec ParseStreamArg(const std::string& arg, std::size_t n,
                                 std::uint64_t seed) {
  const auto colon = arg.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("stream must look like <mode>:<value>");
  }
  const std::string kind = arg.substr(0, colon);
  StreamSpec spec;
  spec.n = n;
  spec.seed = seed;
  try {
    std::size_t used = 0;
    spec.param = std::stod(arg.substr(colon + 1), &used);
    if (used != arg.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad stream parameter in '" + arg + "'");
  }
  if (kind == "insert-then-delete") {
    spec.mode = StreamMode::kInsertThenDelete;
  } else if (kind == "window") {
    spec.mode = StreamMode::kSlidingWindow;
  } else if (kind == "interleaved") {
    spec.mode = StreamMode::kInterleaved;
  } else {
    throw std::invalid_argument("unknown stream mode '" + kind + "'");
  }
  return spec;
}

inline ExperimentMode ParseModeArg(const std::string& arg) {
  if (arg == "parallel") return ParallelGuesses{};
  const std::string prefix = "known-opt:";
  if (arg.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const std::string rest = arg.substr(prefix.size());
      const double v = std::stod(rest, &used);
      if (used == rest.size() && v > 0.0 && std::isfinite(v)) {
        return KnownOpt{v};
      }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("bad OPT value in '" + arg + "'");
  }
  throw std::invalid_argument("mode must be known-opt:<v> or parallel");
}

inline OutputFormat ParseFormatArg(const std::string& arg) {
  if (arg == "csv") return OutputFormat::kCsv;
  if (arg == "jsonl") return OutputFormat::kJsonLines;
  throw std::invalid_argument("format must be csv or jsonl");
}

// Random coverage instance: elements 1..n, each covering between
// min_cover and max_cover distinct items of a universe of `universe` items,
// item weights uniform in [0.5, 1.5).
inline std::shared_ptr<CoverageFunction> RandomCoverageInstance(
    std::size_t n, std::size_t universe, std::uint64_t seed,
    std::size_t min_cover = 2, std::size_t max_cover = 8) {
  if (universe == 0 || min_cover < 1 || min_cover > max_cover ||
      max_cover > universe) {
    throw std::invalid_argument("inconsistent coverage instance shape");
  }
  Rng rng(SplitMix64(seed ^ 0xc0ffee));
  auto fn = std::make_shared<CoverageFunction>();
  for (std::size_t u = 0; u < universe; ++u) {
    fn->SetItemWeight(u, 0.5 + UniformUnit(rng));
  }
  std::vector<ElementId> items(universe);
  for (std::size_t u = 0; u < universe; ++u) items[u] = ElementId{u};
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t count =
        min_cover + UniformIndex(rng, max_cover - min_cover + 1);
    std::vector<CoverageFunction::ItemId> cover;
    for (ElementId item : SampleWithoutReplacement(items, count, rng)) {
      cover.push_back(item.value);
    }
    fn->AddElement(ElementId{i}, cover);
  }
  return fn;
}

// Half modular, half coverage: each element either owns a private item of
// random weight in [0.2, 2.2) or covers 1..4 unit-weight items drawn from a
// shared pool of `shared_items`.
inline std::shared_ptr<CoverageFunction> MixedInstance(
    std::size_t n, std::uint64_t seed, std::size_t shared_items = 500) {
  Rng rng(SplitMix64(seed ^ 0x5eed));
  auto fn = std::make_shared<CoverageFunction>();
  for (std::size_t u = 0; u < shared_items; ++u) fn->SetItemWeight(u, 1.0);
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<CoverageFunction::ItemId> cover;
    if (UniformIndex(rng, 2) == 0) {
      const CoverageFunction::ItemId own = shared_items + i;
      fn->SetItemWeight(own, 0.2 + 2.0 * UniformUnit(rng));
      cover.push_back(own);
    } else {
      const std::size_t count = 1 + UniformIndex(rng, 4);
      for (std::size_t j = 0; j < count; ++j) {
        cover.push_back(UniformIndex(rng, shared_items));
      }
    }
    fn->AddElement(ElementId{i}, cover);
  }
  return fn;
}

}  // namespace dynsub
