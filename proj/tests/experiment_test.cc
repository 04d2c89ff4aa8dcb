// Copyright 2026 The FLaPS Simulator Authors
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

#include "flaps/experiment.h"

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace flaps {
namespace {

using ::testing::HasSubstr;

std::string Message(const absl::Status& s) { return std::string(s.message()); }

ExperimentConfig SmallSweep() {
  ExperimentConfig c = DefaultConfig();
  c.dataset = {.n = 1000, .dim = 4, .n_classes = 3, .seed = 1};
  c.n_clients = 40;
  c.train.max_epochs = 10;
  return c;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(ConfigTest, MinimalConfigTakesDefaults) {
  auto c = ParseConfig(R"({"dataset": {"kind": "synthetic"}})");
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->n_clients, 200);
  std::vector<int> ks;
  for (int k = 2; k <= 20; ++k) ks.push_back(k);
  EXPECT_EQ(c->k_list, ks);
  EXPECT_EQ(c->modes.size(), 3u);
  EXPECT_EQ(*c, DefaultConfig());
}

TEST(ConfigTest, NamedErrors) {
  EXPECT_THAT(Message(ParseConfig("{}").status()),
              HasSubstr("missing dataset"));
  EXPECT_THAT(
      Message(
          ParseConfig(R"({"dataset": {"kind": "synthetic"}, "k_list": [1]})")
              .status()),
      HasSubstr("k_list"));
  EXPECT_FALSE(
      ParseConfig(R"({"dataset": {"kind": "synthetic"}, "k_list": [200]})")
          .ok());
  EXPECT_THAT(
      Message(ParseConfig(R"({"dataset": {"kind": "synthetic"}, "colour": 1})")
                  .status()),
      HasSubstr("<root>.colour: unknown key"));
  EXPECT_THAT(
      Message(ParseConfig(
                  R"({"dataset": {"kind": "synthetic"}, "train": {"lr": 1}})")
                  .status()),
      HasSubstr("train.lr"));
  EXPECT_THAT(Message(ParseConfig(R"({"dataset": {"kind": "csv"}})").status()),
              HasSubstr("need 'path'"));
  EXPECT_THAT(
      Message(ParseConfig(R"({"dataset": {"kind": "parquet"}})").status()),
      HasSubstr("dataset.kind"));
  EXPECT_THAT(
      Message(
          ParseConfig(R"({"dataset": {"kind": "synthetic"}, "n_clients": "x"})")
              .status()),
      HasSubstr("n_clients"));
  EXPECT_THAT(
      Message(ParseConfig(R"({"dataset": {"kind": "synthetic"}, "modes": []})")
                  .status()),
      HasSubstr("modes"));
  EXPECT_THAT(
      Message(
          ParseConfig(
              R"({"dataset": {"kind": "synthetic"}, "drops": {"ready": 2}})")
              .status()),
      HasSubstr("drops"));
  EXPECT_THAT(Message(ParseConfig("{").status()), HasSubstr("not valid JSON"));
}

TEST(ConfigTest, EmitParseRoundTrip) {
  ExperimentConfig a = DefaultConfig();
  a.dataset = {.kind = DatasetSpec::Kind::kIdx,
               .images_path = "i.idx",
               .labels_path = "l.idx"};
  a.modes = {Mode::kCentral, Mode::kFlaps};
  a.k_list = {3, 9};
  a.seeds = {4, 18446744073709551615ull};
  a.hidden = {16};
  a.train.optimizer = Optimizer::kSgd;
  a.train.learning_rate = 0.1 / 3;
  a.drops.at(DropPhase::kPostDataReport) = 0.3;
  a.transport = TransportKind::kTcp;
  a.latency.jitter_s = 1.0 / 7;
  a.retry_delay_s = 0.25;
  a.out_dir = "somewhere";
  ExperimentConfig b = DefaultConfig();
  b.dataset = {.kind = DatasetSpec::Kind::kCsv, .csv_path = "d.csv"};
  for (const ExperimentConfig& c : {a, b, DefaultConfig()}) {
    auto back = ParseConfig(EmitConfig(c));
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_EQ(*back, c);
    EXPECT_EQ(EmitConfig(*back), EmitConfig(c));
  }
}

TEST(ConfigTest, OutDirFromEnvironment) {
  ::setenv(std::string(kOutDirEnv).c_str(), "/tmp/elsewhere", 1);
  EXPECT_EQ(DefaultConfig().out_dir, "/tmp/elsewhere");
  ::unsetenv(std::string(kOutDirEnv).c_str());
  EXPECT_EQ(DefaultConfig().out_dir, "flaps_out");
}

TEST(SweepTest, CentralOnlyIgnoresKList) {
  ExperimentConfig c = SmallSweep();
  c.modes = {Mode::kCentral};
  auto out = RunSweep(c);
  ASSERT_TRUE(out.ok());
  ASSERT_EQ(out->results.size(), 1u);
  EXPECT_FALSE(out->results[0].k.has_value());
}

TEST(SweepTest, TableShapedRowCount) {
  ExperimentConfig c = SmallSweep();
  auto one = RunSweep(c);
  ASSERT_TRUE(one.ok());
  EXPECT_TRUE(one->failures.empty());
  EXPECT_EQ(one->results.size(), 21u);

  c.seeds = {3, 1};
  auto two = RunSweep(c);
  ASSERT_EQ(two->results.size(), 42u);
  // Row counting oracle: one row per (mode, k, seed) in flaps, fl, central
  // order.
  std::size_t i = 0;
  for (int k = 2; k <= 20; ++k) {
    for (std::uint64_t seed : {1, 3}) {
      EXPECT_EQ(two->results[i].mode, Mode::kFlaps);
      EXPECT_EQ(two->results[i].k, k);
      EXPECT_EQ(two->results[i].seed, seed);
      ++i;
    }
  }
  for (Mode m : {Mode::kFl, Mode::kCentral}) {
    for (std::uint64_t seed : {1, 3}) {
      EXPECT_EQ(two->results[i].mode, m);
      EXPECT_EQ(two->results[i].seed, seed);
      ++i;
    }
  }
  const auto rows = ParseResultCsv(MetricsCsv(two->results), kMetricsCsvHeader);
  EXPECT_EQ(rows->size(), two->results.size());
}

TEST(SweepTest, FailuresCarryContext) {
  ExperimentConfig c = SmallSweep();
  c.modes = {Mode::kFlaps, Mode::kCentral};
  c.k_list = {4};
  c.drops.at(DropPhase::kReady) = 1.0;
  auto out = RunSweep(c);
  ASSERT_TRUE(out.ok());
  ASSERT_EQ(out->failures.size(), 1u);
  EXPECT_THAT(out->failures[0], HasSubstr("mode=flaps k=4 seed=0"));
  EXPECT_THAT(out->failures[0], HasSubstr("RESOURCE_EXHAUSTED"));
  EXPECT_EQ(out->results.size(), 1u);
}

TEST(SweepTest, MissingDatasetFileIsAnError) {
  ExperimentConfig c = SmallSweep();
  c.dataset = {.kind = DatasetSpec::Kind::kCsv,
               .csv_path = "/nonexistent/data.csv"};
  EXPECT_FALSE(RunSweep(c).ok());
}

TEST(CsvTest, OneCentralResultWritesTwoFiles) {
  ExperimentConfig c = SmallSweep();
  c.modes = {Mode::kCentral};
  auto out = RunSweep(c);
  const auto dir = std::filesystem::temp_directory_path() / "flaps_csv_test";
  std::filesystem::create_directories(dir);
  ASSERT_TRUE(WriteTimeCsv(out->results, dir / "time.csv").ok());
  ASSERT_TRUE(WriteMetricsCsv(out->results, dir / "metrics.csv").ok());
  const std::string time = ReadFile(dir / "time.csv");
  const std::string metrics = ReadFile(dir / "metrics.csv");
  EXPECT_EQ(time.substr(0, time.find('\n')), kTimeCsvHeader);
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), kMetricsCsvHeader);
  EXPECT_EQ(std::count(time.begin(), time.end(), '\n'), 2);
  EXPECT_EQ(metrics.back(), '\n');
  EXPECT_THAT(metrics, HasSubstr("\ncentral,,0,"));
  EXPECT_FALSE(WriteTimeCsv(out->results, "/nonexistent/dir/time.csv").ok());
  EXPECT_FALSE(WriteTimeCsv({}, dir / "empty.csv").ok());
}

TEST(CsvTest, ParseBackWithinFormatTolerance) {
  std::vector<RoundResult> results(3);
  results[0].k = 7;
  results[0].seed = 12;
  results[0].timing = {0.1234567, 1e-7, 2.5, 0.9999999, 3.6234568};
  results[0].metrics = {1.0 / 3, 0.987654321, 0.5, 2.0 / 3};
  results[1].mode = Mode::kFl;
  results[1].metrics = {2.25, 0.125, 1e-9, 1};
  results[2].mode = Mode::kCentral;
  results[2].seed = 99;
  auto time = ParseResultCsv(TimeCsv(results), kTimeCsvHeader);
  auto metrics = ParseResultCsv(MetricsCsv(results), kMetricsCsvHeader);
  ASSERT_TRUE(time.ok() && metrics.ok());
  ASSERT_EQ(time->size(), 3u);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RoundResult& r = results[i];
    EXPECT_EQ((*time)[i].mode, r.mode);
    EXPECT_EQ((*time)[i].k, r.k);
    EXPECT_EQ((*metrics)[i].seed, r.seed);
    const double t[] = {r.timing.t1, r.timing.t2, r.timing.t3, r.timing.t4,
                        r.timing.total};
    const double m[] = {r.metrics.loss, r.metrics.auc, r.metrics.fscore,
                        r.metrics.accuracy};
    for (int j = 0; j < 5; ++j) EXPECT_NEAR((*time)[i].values[j], t[j], 5e-7);
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR((*metrics)[i].values[j], m[j], 5e-7);
  }
}

TEST(CsvTest, RejectsMalformedFiles) {
  EXPECT_FALSE(ParseResultCsv("mode,k,seed\n", kTimeCsvHeader).ok());
  const std::string header = std::string(kMetricsCsvHeader) + "\n";
  EXPECT_FALSE(
      ParseResultCsv(header + "flaps,2,0,1,1,1,1", kMetricsCsvHeader).ok());
  EXPECT_FALSE(
      ParseResultCsv(header + "flaps,2,0,1,1,1\n", kMetricsCsvHeader).ok());
  EXPECT_FALSE(
      ParseResultCsv(header + "swarm,2,0,1,1,1,1\n", kMetricsCsvHeader).ok());
  EXPECT_THAT(
      Message(ParseResultCsv(header + "flaps,2,0,1,x,1,1\n", kMetricsCsvHeader)
                  .status()),
      HasSubstr("line 2 field 5"));
  EXPECT_TRUE(ParseResultCsv(header, kMetricsCsvHeader)->empty());
}

TEST(CsvTest, SweepMetricsAreByteIdentical) {
  ExperimentConfig c = SmallSweep();
  c.k_list = {2, 6};
  auto a = RunSweep(c);
  auto b = RunSweep(c);
  EXPECT_EQ(MetricsCsv(a->results), MetricsCsv(b->results));
}

TEST(CompareTest, DeltasPerK) {
  std::vector<RoundResult> results(3);
  results[0].k = 4;
  results[0].metrics.fscore = 0.9;
  results[1].mode = Mode::kFl;
  results[1].metrics.fscore = 0.8;
  results[2].mode = Mode::kCentral;
  results[2].metrics.fscore = 0.95;
  EXPECT_EQ(CompareReport(results),
            "seed,k,flaps_fscore,minus_fl,minus_central\n"
            "0,4,0.900000,+0.100000,-0.050000\n");
}

}  // namespace
}  // namespace flaps
