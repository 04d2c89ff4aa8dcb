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

#include "flaps/buds.h"

#include <fmt/format.h>
#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace flaps {
namespace {

using ::testing::ElementsAre;

std::vector<Cell> ColumnValues(
    const AttributeTable& t, std::size_t c, std::size_t first = 0,
    std::size_t last = static_cast<std::size_t>(-1)) {
  std::vector<Cell> v;
  for (std::size_t r = first; r < std::min(last, t.num_rows()); ++r) {
    v.push_back(t.rows[r][c]);
  }
  std::sort(v.begin(), v.end());
  return v;
}

Cell I(std::int64_t v) { return {Scalar{v}}; }

AttributeTable WorkedTable() {
  // User-ID, # images, and the index range of each client.
  const std::int64_t users[] = {1, 2, 3, 4, 5, 6};
  const std::int64_t counts[] = {200, 201, 202, 198, 199, 203};
  const std::int64_t mins[] = {300, 600, 900, 1, 487, 1200};
  const std::int64_t maxs[] = {501, 801, 1102, 198, 686, 1403};
  AttributeTable t = AttributeTable::WithColumns(
      {"user_id", "count", "max_index", "min_index"});
  for (int i = 0; i < 6; ++i) {
    t.rows.push_back({I(users[i]), I(counts[i]), I(maxs[i]), I(mins[i])});
  }
  return t;
}

TEST(ReduceAttributesTest, TiesIndexRange) {
  auto reduced = ReduceAttributes(WorkedTable(), {"max_index", "min_index"});
  ASSERT_TRUE(reduced.ok()) << reduced.status();
  EXPECT_THAT(reduced->column_names,
              ElementsAre("user_id", "count", "max_index:min_index"));
  EXPECT_EQ(reduced->rows[0][2], (Cell{std::int64_t{501}, std::int64_t{300}}));
  EXPECT_TRUE(reduced->Validate().ok());
}

TEST(ReduceAttributesTest, AllColumnsBecomeOne) {
  auto reduced = ReduceAttributes(
      WorkedTable(), {"user_id", "count", "max_index", "min_index"});
  ASSERT_TRUE(reduced.ok());
  EXPECT_THAT(reduced->column_names,
              ElementsAre("user_id:count:max_index:min_index"));
  EXPECT_EQ(reduced->rows[3][0].size(), 4u);
}

TEST(ReduceAttributesTest, SingleColumnIsIdentity) {
  const AttributeTable t = WorkedTable();
  auto reduced = ReduceAttributes(t, {"count"});
  ASSERT_TRUE(reduced.ok());
  EXPECT_EQ(*reduced, t);
}

TEST(ReduceAttributesTest, Errors) {
  EXPECT_FALSE(ReduceAttributes(WorkedTable(), {}).ok());
  EXPECT_FALSE(ReduceAttributes(WorkedTable(), {"colour"}).ok());
}

TEST(ChannelCountTest, Formula) {
  EXPECT_EQ(*ChannelCount(3, 1), 3);
  EXPECT_EQ(*ChannelCount(4, 2), 3);
  EXPECT_EQ(*ChannelCount(5, 2), 4);
  EXPECT_EQ(*ChannelCount(7, 7), 1);
  EXPECT_FALSE(ChannelCount(3, 0).ok());
  EXPECT_FALSE(ChannelCount(3, 4).ok());
}

TEST(IterativeShuffleTest, WorkedScenarioPreservesMarginals) {
  auto reduced = ReduceAttributes(WorkedTable(), {"max_index", "min_index"});
  const int g = *ChannelCount(4, 2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto report = IterativeShuffle(*reduced, g, 1, rng);
    ASSERT_TRUE(report.ok());
    for (std::size_t c = 0; c < 3; ++c) {
      EXPECT_EQ(ColumnValues(report->table, c), ColumnValues(*reduced, c));
    }
  }
}

TEST(IterativeShuffleTest, SingleRowIsIdentity) {
  AttributeTable t = AttributeTable::WithColumns({"a", "b"});
  t.rows.push_back({I(4), I(9)});
  Rng rng(3);
  auto report = IterativeShuffle(t, 2, 1, rng);
  ASSERT_TRUE(report.ok());
  EXPECT_EQ(report->table, t);
}

TEST(IterativeShuffleTest, EveryOutputIsAPermutationPair) {
  AttributeTable t = AttributeTable::WithColumns({"a", "b"});
  for (int i = 0; i < 5; ++i) t.rows.push_back({I(i), I(10 + i)});
  std::vector<std::size_t> base(5);
  std::iota(base.begin(), base.end(), 0);
  std::vector<std::vector<std::size_t>> perms;
  do perms.push_back(base);
  while (std::next_permutation(base.begin(), base.end()));
  ASSERT_EQ(perms.size(), 120u);

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    auto out = IterativeShuffle(t, 2, 1, rng);
    ASSERT_TRUE(out.ok());
    bool reachable = false;
    for (const auto& p : perms) {
      for (const auto& q : perms) {
        bool match = true;
        for (std::size_t r = 0; r < 5 && match; ++r) {
          match = out->table.rows[r][0] == t.rows[p[r]][0] &&
                  out->table.rows[r][1] == t.rows[q[r]][1];
        }
        if (match) {
          reachable = true;
          break;
        }
      }
      if (reachable) break;
    }
    EXPECT_TRUE(reachable) << "seed " << seed;
  }
}

TEST(IterativeShuffleTest, RejectsTooFewShufflers) {
  Rng rng(0);
  auto reduced = ReduceAttributes(WorkedTable(), {"max_index", "min_index"});
  EXPECT_FALSE(IterativeShuffle(*reduced, 2, 1, rng).ok());
  EXPECT_FALSE(IterativeShuffle(*reduced, 3, 0, rng).ok());
  EXPECT_FALSE(
      IterativeShuffle(AttributeTable::WithColumns({"a"}), 1, 1, rng).ok());
}

TEST(IterativeShuffleTest, DeterministicUnderSeed) {
  auto reduced = ReduceAttributes(WorkedTable(), {"max_index", "min_index"});
  Rng a(77), b(77);
  EXPECT_EQ(*IterativeShuffle(*reduced, 3, 2, a),
            *IterativeShuffle(*reduced, 3, 2, b));
}

// Random table with random ties, checked against every shuffle invariant.
TEST(IterativeShuffleTest, InvariantsOnRandomTables) {
  std::mt19937_64 gen(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + gen() % 6;
    const std::size_t rows = 1 + gen() % 90;
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) names.push_back("a" + std::to_string(c));
    AttributeTable t = AttributeTable::WithColumns(names);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<Cell> row;
      for (int c = 0; c < k; ++c) {
        switch (c % 3) {
          case 0:
            row.push_back(I(gen() % 7));
            break;
          case 1:
            row.push_back({Scalar{static_cast<double>(gen() % 5) / 4}});
            break;
          default:
            row.push_back({Scalar{
                BitString{static_cast<std::uint8_t>(gen() & 1), 1, 0}}});
        }
      }
      t.rows.push_back(std::move(row));
    }
    std::set<std::string> query;
    for (const auto& n : names) {
      if (gen() % 2) query.insert(n);
    }
    if (query.empty()) query.insert(names[0]);
    auto reduced = ReduceAttributes(t, query);
    ASSERT_TRUE(reduced.ok());
    const int m = static_cast<int>(reduced->num_columns());
    const int shufflers = m + static_cast<int>(gen() % 3);
    const int batches = 1 + gen() % 5;

    Rng rng(gen());
    Rng replay = rng;
    auto out = IterativeShuffle(*reduced, shufflers, batches, rng);
    ASSERT_TRUE(out.ok());
    auto plan = PlanShuffle(reduced->num_rows(), m, shufflers, batches, replay);
    ASSERT_TRUE(plan.ok());
    EXPECT_EQ(out->plan_digest, plan->Digest());

    std::size_t min_b = rows, max_b = 0;
    for (std::size_t b = 0; b < plan->batch_bounds.size(); ++b) {
      const auto [first, last] = plan->batch_bounds[b];
      min_b = std::min(min_b, last - first);
      max_b = std::max(max_b, last - first);
      std::set<int> ids(plan->assignment[b].begin(), plan->assignment[b].end());
      EXPECT_EQ(ids.size(), static_cast<std::size_t>(m));
      for (std::size_t c = 0; c < static_cast<std::size_t>(m); ++c) {
        EXPECT_EQ(ColumnValues(out->table, c, first, last),
                  ColumnValues(*reduced, c, first, last));
      }
    }
    EXPECT_LE(max_b - min_b, 1u);
    for (std::size_t c = 0; c < static_cast<std::size_t>(m); ++c) {
      EXPECT_EQ(ColumnValues(out->table, c), ColumnValues(*reduced, c));
      for (const auto& row : out->table.rows) {
        EXPECT_EQ(row[c].size(), reduced->tied_groups[c].size());
      }
    }
  }
}

std::map<std::int64_t, double> Extract(const ShuffledReport& report) {
  const std::size_t col = *report.table.FindColumn("position:value");
  std::map<std::int64_t, double> out;
  for (const auto& row : report.table.rows) {
    out[std::get<std::int64_t>(row[col][0])] = std::get<double>(row[col][1]);
  }
  return out;
}

TEST(WeightReportTest, PairsSurviveShuffling) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g;
  std::vector<double> params(300);
  for (double& p : params) p = g(gen);
  Rng rng(1);
  auto report =
      WeightReport(params, {.cluster_id = 3, .sample_count = 77}, rng);
  ASSERT_TRUE(report.ok());
  EXPECT_THAT(
      report->table.column_names,
      ElementsAre("position:value", "cluster_id", "sample_count", "nonce"));
  const auto extracted = Extract(*report);
  ASSERT_EQ(extracted.size(), params.size());
  for (std::size_t p = 0; p < params.size(); ++p)
    EXPECT_EQ(extracted.at(p), params[p]);
}

TEST(WeightReportTest, SingleParameter) {
  Rng rng(2);
  auto report = WeightReport(std::vector<double>{0.25},
                             {.cluster_id = 0, .sample_count = 1}, rng);
  ASSERT_TRUE(report.ok());
  ASSERT_EQ(report->table.num_rows(), 1u);
  EXPECT_EQ(report->table.rows[0][0], (Cell{std::int64_t{0}, 0.25}));
}

TEST(WeightReportTest, MetadataLinkageIsBroken) {
  std::vector<double> params(16);
  std::iota(params.begin(), params.end(), 1.0);
  Rng rng(9);
  Rng replay = rng;
  auto report =
      WeightReport(params, {.cluster_id = 2, .sample_count = 50}, rng);
  ASSERT_TRUE(report.ok());
  // Recreate the pre-shuffle nonces from the same stream.
  std::map<std::int64_t, std::int64_t> nonce_of_position;
  std::vector<std::int64_t> nonces;
  for (std::int64_t p = 0; p < 16; ++p) {
    nonce_of_position[p] = static_cast<std::int64_t>(replay() >> 1);
    nonces.push_back(nonce_of_position[p]);
  }
  std::vector<std::int64_t> shuffled_nonces;
  int relinked = 0;
  for (const auto& row : report->table.rows) {
    const auto pos = std::get<std::int64_t>(row[0][0]);
    const auto nonce = std::get<std::int64_t>(row[3][0]);
    shuffled_nonces.push_back(nonce);
    if (nonce != nonce_of_position[pos]) ++relinked;
    EXPECT_EQ(std::get<std::int64_t>(row[1][0]), 2);
    EXPECT_EQ(std::get<std::int64_t>(row[2][0]), 50);
  }
  std::sort(nonces.begin(), nonces.end());
  std::sort(shuffled_nonces.begin(), shuffled_nonces.end());
  EXPECT_EQ(nonces, shuffled_nonces);
  EXPECT_GT(relinked, 0);
}

TEST(WeightReportTest, RejectsNonFinite) {
  Rng rng(0);
  EXPECT_FALSE(
      WeightReport(std::vector<double>{1.0, std::nan("")}, {}, rng).ok());
}

ShuffledReport GoldenReport() {
  ShuffledReport r;
  r.plan_digest = 0x0123456789abcdefULL;
  r.table = AttributeTable::WithColumns({"user_id", "max_index", "min_index"});
  r.table.rows.push_back(
      {{Scalar{BitString{0, 1, 0, 0, 0, 0, 0, 0, 1}}}, I(-2), {Scalar{0.5}}});
  r.table = *ReduceAttributes(r.table, {"max_index", "min_index"});
  return r;
}

TEST(SerializationTest, GoldenBytes) {
  const std::string bytes = SerializeReport(GoldenReport());
  std::string hex;
  for (char c : bytes)
    hex += fmt::format("{:02x}", static_cast<std::uint8_t>(c));
  EXPECT_EQ(hex,
            "0123456789abcdef"  // plan digest
            "00000002"          // column count
            "00000007"
            "757365725f6964"  // "user_id"
            "00000013"
            "6d61785f696e6465783a6d696e5f696e646578"  // "max_index:min_index"
            "0000000000000001"                        // row count
            "62"
            "00000009"
            "34303830"  // 'b', 9 bits, "4080"
            "69"
            "fffffffffffffffe"  // 'i', -2
            "64"
            "3fe0000000000000");  // 'd', 0.5
}

TEST(SerializationTest, RoundTrip) {
  Rng rng(4);
  std::vector<double> params = {1.5, -2.25, 1e-300, 7};
  auto report = WeightReport(params, {.cluster_id = 1, .sample_count = 9}, rng);
  ASSERT_TRUE(report.ok());
  for (const ShuffledReport& r : {*report, GoldenReport()}) {
    auto back = DeserializeReport(SerializeReport(r));
    ASSERT_TRUE(back.ok()) << back.status();
    EXPECT_EQ(*back, r);
  }
}

TEST(SerializationTest, RejectsCorruptInput) {
  const std::string bytes = SerializeReport(GoldenReport());
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    EXPECT_FALSE(DeserializeReport(bytes.substr(0, cut)).ok()) << cut;
  }
  EXPECT_FALSE(DeserializeReport(bytes + "x").ok());
}

}  // namespace
}  // namespace flaps
