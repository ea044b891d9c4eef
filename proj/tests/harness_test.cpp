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


#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dynsub/harness.hpp"
#include "support/instances.hpp"

namespace dynsub {
namespace {

using testing::Id;
using testing::IdRange;
using testing::Ids;
using testing::MakeModular;

std::vector<std::string> SplitLines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

std::size_t CountKind(const std::vector<UpdateEvent>& s, UpdateKind kind) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [&](const UpdateEvent& e) { return e.kind == kind; }));
}

TEST(GenerateStreamTest, ZeroFractionOnlyInserts) {
  const auto s = GenerateStream({StreamMode::kInsertThenDelete, 20, 0.0, 1},
                                IdRange(1, 20));
  EXPECT_EQ(s.size(), 20u);
  EXPECT_EQ(CountKind(s, UpdateKind::kDelete), 0u);
}

TEST(GenerateStreamTest, HalfDeletedAfterAllInserts) {
  const auto s = GenerateStream({StreamMode::kInsertThenDelete, 30, 0.5, 2},
                                IdRange(1, 40));
  ASSERT_EQ(s.size(), 45u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(s[i].kind, UpdateKind::kInsert);
  EXPECT_NO_THROW(ValidateStream(s));
}

TEST(GenerateStreamTest, WindowAsWideAsStreamNeverDeletes) {
  const auto s =
      GenerateStream({StreamMode::kSlidingWindow, 50, 50, 3}, IdRange(1, 50));
  EXPECT_EQ(CountKind(s, UpdateKind::kDelete), 0u);
}

TEST(GenerateStreamTest, WindowDeletesOldest) {
  const auto s =
      GenerateStream({StreamMode::kSlidingWindow, 100, 10, 4}, IdRange(1, 100));
  EXPECT_EQ(CountKind(s, UpdateKind::kDelete), 90u);
  std::vector<ElementId> inserted;
  std::size_t deleted = 0;
  for (const UpdateEvent& ev : s) {
    if (ev.kind == UpdateKind::kInsert) {
      inserted.push_back(ev.element);
    } else {
      EXPECT_EQ(ev.element, inserted[deleted++]);
      EXPECT_EQ(inserted.size() - deleted, 10u);
    }
  }
}

TEST(GenerateStreamTest, ValidAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StreamSpec spec{StreamMode::kInterleaved, 200, 0.4, seed};
    const auto a = GenerateStream(spec, IdRange(1, 300));
    EXPECT_NO_THROW(ValidateStream(a));
    EXPECT_EQ(CountKind(a, UpdateKind::kInsert), 200u);
    EXPECT_EQ(a, GenerateStream(spec, IdRange(1, 300)));
  }
  EXPECT_NE(GenerateStream({StreamMode::kInterleaved, 50, 0.4, 1}, IdRange(1, 50)),
            GenerateStream({StreamMode::kInterleaved, 50, 0.4, 2}, IdRange(1, 50)));
}

TEST(GenerateStreamTest, RejectsBadSpecs) {
  const ElementSet pool = IdRange(1, 10);
  EXPECT_THROW(GenerateStream({StreamMode::kInsertThenDelete, 11, 0.5, 0}, pool),
               std::invalid_argument);
  EXPECT_THROW(GenerateStream({StreamMode::kInsertThenDelete, 5, 1.5, 0}, pool),
               std::invalid_argument);
  EXPECT_THROW(GenerateStream({StreamMode::kSlidingWindow, 5, 2.5, 0}, pool),
               std::invalid_argument);
  EXPECT_THROW(GenerateStream({StreamMode::kInterleaved, 5, 1.0, 0}, pool),
               std::invalid_argument);
}

TEST(ValidateStreamTest, RejectsBrokenStreams) {
  using K = UpdateKind;
  const std::vector<UpdateEvent> dead_delete = {{K::kDelete, Id(1), 0}};
  EXPECT_THROW(ValidateStream(dead_delete), DynsubError);
  const std::vector<UpdateEvent> reinsert = {
      {K::kInsert, Id(1), 0}, {K::kDelete, Id(1), 1}, {K::kInsert, Id(1), 2}};
  EXPECT_THROW(ValidateStream(reinsert), DynsubError);
  const std::vector<UpdateEvent> skipped = {{K::kInsert, Id(1), 1}};
  EXPECT_THROW(ValidateStream(skipped), DynsubError);
}

TEST(RunExperimentTest, EmptyStream) {
  auto fn = MakeModular({{1, 1.0}});
  const StreamMetrics m =
      RunExperiment({}, fn, Params::Make(0.05, 1), KnownOpt{1.0});
  EXPECT_TRUE(m.per_update_queries.empty());
  EXPECT_TRUE(m.checkpoints.empty());
  EXPECT_EQ(m.MeanQueries(), 0.0);
  std::ostringstream csv;
  WriteCsv(csv, m);
  EXPECT_EQ(csv.str(), std::string(kCsvHeader) + "\n");
}

TEST(RunExperimentTest, ModularKnownOptFindsTopK) {
  std::map<std::uint64_t, double> w;
  for (std::uint64_t e = 1; e <= 10; ++e) w[e] = static_cast<double>(e);
  auto fn = MakeModular(w);
  const auto stream =
      GenerateStream({StreamMode::kInsertThenDelete, 10, 0.0, 5}, IdRange(1, 10));
  const StreamMetrics m = RunExperiment(stream, fn, Params::Make(0.05, 3, 5, 0.05),
                                        KnownOpt{27.0});
  ASSERT_EQ(m.checkpoints.size(), 1u);
  const Checkpoint& cp = m.checkpoints.back();
  EXPECT_EQ(cp.t, 9u);
  EXPECT_EQ(cp.greedy_value, 27.0);
  EXPECT_EQ(cp.opt_value, 27.0);
  EXPECT_GE(cp.solution_value, (0.5 - 5 * 0.05) * 27.0);
  EXPECT_EQ(cp.live_count, 10u);
}

TEST(RunExperimentTest, CheckpointsAndInstrumentationDoNotLeak) {
  auto fn = RandomCoverageInstance(40, 60, 2);
  const auto stream =
      GenerateStream({StreamMode::kInterleaved, 40, 0.3, 2}, fn->Elements());
  const Params p = Params::Make(0.05, 3, 2, 0.02);
  ExperimentOptions every;
  every.checkpoint_every = 5;
  const StreamMetrics with = RunExperiment(stream, fn, p, KnownOpt{10.0}, every);
  const StreamMetrics without = RunExperiment(stream, fn, p, KnownOpt{10.0});
  EXPECT_EQ(with.per_update_queries, without.per_update_queries);
  EXPECT_EQ(with.checkpoints.size(), (stream.size() + 4) / 5);
  EXPECT_GT(with.instrumentation_queries, without.instrumentation_queries);
  std::uint64_t sum = 0;
  for (auto q : with.per_update_queries) sum += q;
  EXPECT_EQ(sum, with.cumulative_queries);
}

TEST(RunExperimentTest, ParallelModePassesInvariantChecks) {
  auto fn = RandomCoverageInstance(30, 40, 3);
  const auto stream =
      GenerateStream({StreamMode::kInterleaved, 30, 0.3, 3}, fn->Elements());
  ExperimentOptions opts;
  opts.check_invariants = true;
  const StreamMetrics m = RunExperiment(
      stream, fn, Params::Make(0.08, 3, 3, 0.01), ParallelGuesses{}, opts);
  EXPECT_EQ(m.per_update_queries.size(), stream.size());
  EXPECT_GE(m.checkpoints.back().solution_value, 0.0);
}

TEST(OutputTest, CsvRowsAndCumulativeQueries) {
  auto fn = RandomCoverageInstance(20, 30, 4);
  const auto stream =
      GenerateStream({StreamMode::kSlidingWindow, 20, 5, 4}, fn->Elements());
  ExperimentOptions opts;
  opts.checkpoint_every = 7;
  const StreamMetrics m = RunExperiment(stream, fn, Params::Make(0.05, 2, 4, 0.02),
                                        KnownOpt{5.0}, opts);
  std::ostringstream csv;
  WriteCsv(csv, m);
  const auto lines = SplitLines(csv.str());
  ASSERT_EQ(lines.size(), stream.size() + 1);
  EXPECT_EQ(lines[0], kCsvHeader);
  std::uint64_t cum = 0;
  std::size_t cp = 0;
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto f = SplitFields(lines[t + 1]);
    ASSERT_EQ(f.size(), 8u);
    EXPECT_EQ(std::stoull(f[0]), t);
    EXPECT_EQ(f[1], ToString(stream[t].kind));
    cum += std::stoull(f[2]);
    EXPECT_EQ(std::stoull(f[3]), cum);
    EXPECT_EQ(std::stoull(f[7]), m.live_counts[t]);
    if (cp < m.checkpoints.size() && m.checkpoints[cp].t == t) {
      EXPECT_EQ(std::stod(f[4]), m.checkpoints[cp].solution_value);
      EXPECT_EQ(std::stod(f[6]), *m.checkpoints[cp].opt_value);
      ++cp;
    } else {
      EXPECT_TRUE(f[4].empty() && f[5].empty() && f[6].empty());
    }
  }
  EXPECT_EQ(cp, m.checkpoints.size());
  EXPECT_EQ(cum, m.cumulative_queries);
}

TEST(OutputTest, JsonLinesMirrorsCsv) {
  auto fn = RandomCoverageInstance(15, 30, 6);
  const auto stream = GenerateStream({StreamMode::kInsertThenDelete, 15, 0.4, 6},
                                     fn->Elements());
  ExperimentOptions opts;
  opts.checkpoint_every = 4;
  const StreamMetrics m = RunExperiment(stream, fn, Params::Make(0.05, 2, 6, 0.02),
                                        KnownOpt{5.0}, opts);
  std::ostringstream csv, jsonl;
  WriteCsv(csv, m);
  WriteJsonLines(jsonl, m);
  const auto csv_lines = SplitLines(csv.str());
  const auto json_lines = SplitLines(jsonl.str());
  ASSERT_EQ(json_lines.size() + 1, csv_lines.size());
  const auto header = SplitFields(csv_lines[0]);
  for (std::size_t t = 0; t < json_lines.size(); ++t) {
    const auto row = SplitFields(csv_lines[t + 1]);
    const auto obj = nlohmann::json::parse(json_lines[t]);
    ASSERT_EQ(obj.size(), header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& v = obj.at(header[c]);
      if (row[c].empty()) {
        EXPECT_TRUE(v.is_null()) << header[c];
      } else if (v.is_string()) {
        EXPECT_EQ(v.get<std::string>(), row[c]);
      } else {
        EXPECT_EQ(v.get<double>(), std::stod(row[c])) << header[c];
      }
    }
  }
}

TEST(OutputTest, EmitResultsWritesAndReportsPath) {
  auto fn = MakeModular({{1, 1.0}});
  const std::vector<UpdateEvent> stream = {{UpdateKind::kInsert, Id(1), 0}};
  const StreamMetrics m =
      RunExperiment(stream, fn, Params::Make(0.05, 1, 0, 0.01), KnownOpt{1.0});
  const auto path =
      (std::filesystem::temp_directory_path() / "dynsub_emit.csv").string();
  EmitResults(m, path, OutputFormat::kCsv);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(SplitLines(buf.str()).size(), 2u);
  std::filesystem::remove(path);
  try {
    EmitResults(m, "/nonexistent/dir/out.csv", OutputFormat::kCsv);
    FAIL();
  } catch (const DynsubError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/out.csv"),
              std::string::npos);
  }
}

TEST(ArgParseTest, StreamModeAndFormat) {
  const StreamSpec s = ParseStreamArg("window:25", 100, 9);
  EXPECT_EQ(s.mode, StreamMode::kSlidingWindow);
  EXPECT_EQ(s.param, 25.0);
  EXPECT_EQ(s.n, 100u);
  EXPECT_EQ(ParseStreamArg("insert-then-delete:0.5", 1, 0).mode,
            StreamMode::kInsertThenDelete);
  EXPECT_EQ(ParseStreamArg("interleaved:0.2", 1, 0).mode,
            StreamMode::kInterleaved);
  EXPECT_THROW(ParseStreamArg("window", 1, 0), std::invalid_argument);
  EXPECT_THROW(ParseStreamArg("window:x", 1, 0), std::invalid_argument);
  EXPECT_THROW(ParseStreamArg("window:3x", 1, 0), std::invalid_argument);
  EXPECT_THROW(ParseStreamArg("burst:3", 1, 0), std::invalid_argument);

  EXPECT_TRUE(std::holds_alternative<ParallelGuesses>(ParseModeArg("parallel")));
  EXPECT_EQ(std::get<KnownOpt>(ParseModeArg("known-opt:12.5")).value, 12.5);
  EXPECT_THROW(ParseModeArg("known-opt:-1"), std::invalid_argument);
  EXPECT_THROW(ParseModeArg("known-opt:"), std::invalid_argument);
  EXPECT_THROW(ParseModeArg("guess"), std::invalid_argument);

  EXPECT_EQ(ParseFormatArg("csv"), OutputFormat::kCsv);
  EXPECT_EQ(ParseFormatArg("jsonl"), OutputFormat::kJsonLines);
  EXPECT_THROW(ParseFormatArg("xml"), std::invalid_argument);
}

TEST(InstanceTest, GeneratorsAreDeterministicAndShaped) {
  auto a = MixedInstance(200, 3);
  auto b = MixedInstance(200, 3);
  EXPECT_EQ(a->Elements(), IdRange(1, 200));
  for (ElementId e : a->Elements()) {
    EXPECT_EQ(a->Evaluate(ElementSet{e}), b->Evaluate(ElementSet{e}));
    EXPECT_GT(a->Evaluate(ElementSet{e}), 0.0);
  }
  auto c = RandomCoverageInstance(50, 20, 1, 2, 3);
  for (ElementId e : c->Elements()) {
    const double v = c->Evaluate(ElementSet{e});
    EXPECT_GE(v, 2 * 0.5);
    EXPECT_LT(v, 3 * 1.5);
  }
  EXPECT_THROW(RandomCoverageInstance(5, 3, 0, 2, 8), std::invalid_argument);
}

}  // namespace
}  // namespace dynsub
